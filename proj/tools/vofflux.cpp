#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "vofflux/harness.hpp"

using namespace vofflux;

namespace {

struct Options {
  std::string kind = "vortex2d", flux = "fromm", model = "two", vel_time = "n";
  CaseConfig cfg;
};

void add_case_options(CLI::App* app, Options& o, bool single_n) {
  app->add_option("--case", o.kind, "vortex2d | translation | rotation | no-interface")->capture_default_str();
  if (single_n) app->add_option("--n", o.cfg.n, "cells per axis")->capture_default_str();
  app->add_option("--cfl", o.cfg.cfl, "CFL limit C_kappa in (0,1]")->capture_default_str();
  app->add_option("--beta", o.cfg.beta, "staggered fraction below which CTU is used")->capture_default_str();
  app->add_option("--flux", o.flux, "lw | fromm | mc | upwind | ctu")->capture_default_str();
  app->add_option("--model", o.model, "one | two")->capture_default_str();
  app->add_option("--T", o.cfg.T, "period")->capture_default_str();
  app->add_option("--rho-ratio", o.cfg.rho_ratio, "gas to liquid density ratio")->capture_default_str();
  app->add_option("--vel-time", o.vel_time, "velocity sampling time: n | midpoint")->capture_default_str();
  app->add_option("--out", o.cfg.out, "output directory");
  app->add_option("--steps", o.cfg.translation_steps, "steps of the translation case")->capture_default_str();
  app->add_option("--field-every", o.cfg.field_every, "write fields every k steps (0: start and end)");
  app->add_flag("--height-functions", o.cfg.height_functions, "use height-function normals where available");
  app->add_flag("--enforce-gas-regions", o.cfg.enforce_gas_regions,
                "enforce the volume of gas donating regions (two-velocity)");
  app->add_flag("--assert-ctu-bound", o.cfg.assert_lemma2, "abort if the CTU update bound fails");
  app->add_flag("--assert-modified-bound", o.cfg.assert_lemma3, "abort if the modified-interpolant bound fails");
}

CaseConfig finish(Options& o) {
  CaseConfig c = o.cfg;
  c.kind = parse_case(o.kind);
  c.flux = parse_flux(o.flux);
  c.model = parse_model(o.model);
  c.vel_time = parse_vel_time(o.vel_time);
  c.validate();
  return c;
}

void print_summary(const CaseConfig& c, const RunSummary& s) {
  std::printf("%s n=%d model=%s flux=%s steps=%d t=%.6g\n", to_string(c.kind), c.n, to_string(c.model),
              to_string(c.flux), s.steps, s.t_end);
  std::printf("  L1   liquid %.6e  gas %.6e\n", s.err[0].l1, s.err[1].l1);
  std::printf("  Linf liquid %.6e  gas %.6e\n", s.err[0].linf, s.err[1].linf);
  std::printf("  |dEk|/Ek liquid %.6e  gas %.6e\n", s.rel_dek[0], s.rel_dek[1]);
  std::printf("  alpha L1 error %.6e  position error %.3e\n", s.alpha_error, s.position_error);
  std::printf("  mass drift %.3e  momentum drift %.3e  max kappa %.4f\n", s.mass_drift, s.mom_drift, s.max_kappa);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-phase staggered momentum transport with geometric VOF"};
  app.require_subcommand(1);

  Options run_o;
  auto* run = app.add_subcommand("run", "run one case");
  add_case_options(run, run_o, true);
  run->add_flag("--audit", run_o.cfg.audit, "audit donating regions every step");

  Options sweep_o;
  std::vector<int> ns{32, 64, 128};
  auto* sweep = app.add_subcommand("sweep", "convergence sweep over resolutions");
  add_case_options(sweep, sweep_o, false);
  sweep->add_option("--n", ns, "resolutions, comma separated")->delimiter(',')->capture_default_str();

  Options audit_o;
  std::string dr = "memfpa";
  double at = 0.0;
  auto* audit = app.add_subcommand("audit", "fluxing-error report");
  add_case_options(audit, audit_o, true);
  audit->add_option("--dr", dr, "memfpa: audit every step of a run; emfpa | plain: one set of regions")
      ->capture_default_str();
  audit->add_option("--time", at, "time of the single region set")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      CaseConfig c = finish(run_o);
      print_summary(c, run_case(c));
    } else if (*sweep) {
      CaseConfig c = finish(sweep_o);
      SweepResult r = convergence_sweep(c, ns);
      for (size_t k = 0; k < ns.size(); ++k) {
        CaseConfig ck = c;
        ck.n = ns[k];
        print_summary(ck, r.runs[k]);
      }
      std::printf("orders (least squares): L1 liquid %.3f gas %.3f | Linf liquid %.3f gas %.3f | energy liquid %.3f "
                  "gas %.3f\n",
                  r.order_l1[0], r.order_l1[1], r.order_linf[0], r.order_linf[1], r.order_energy[0],
                  r.order_energy[1]);
      if (!c.out.empty()) write_sweep_csv(c.out + "/sweep.csv", c, r);
    } else if (*audit) {
      CaseConfig c = finish(audit_o);
      AuditReport rep;
      if (dr == "memfpa") {
        c.audit = true;
        rep = run_case(c).audit;
      } else {
        rep = audit_case_regions(c, at, dr == "emfpa" ? DrKind::Emfpa : DrKind::Plain);
        if (dr != "emfpa" && dr != "plain") throw std::invalid_argument("unknown region kind '" + dr + "'");
        if (!c.out.empty()) {
          std::filesystem::create_directories(c.out);
          rep.write_csv(c.out + "/audit.csv", 0, false);
        }
      }
      std::printf("overlap %d (max %.3e)  gap %d (max %.3e)  transit %d (max %.3e)  volume %d (max %.3e)  "
                  "adjacency %d\n",
                  rep.overlap, rep.max_overlap, rep.gap, rep.max_gap, rep.transit, rep.max_transit, rep.volume,
                  rep.max_volume, rep.adjacency);
    }
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
