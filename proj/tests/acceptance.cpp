// Acceptance checks: one PASS/FAIL line per criterion on stdout, in order,
// after all runs; progress goes to stderr. Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "identities.hpp"
#include "vofflux/harness.hpp"

using namespace vofflux;

namespace {

struct Line {
  int id;
  bool pass;
  std::string text;
};
std::vector<Line> lines;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  lines.push_back({id, pass, what + ": " + detail});
  std::fprintf(stderr, "%s %d\n", pass ? "PASS" : "FAIL", id);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

RunSummary timed_run(const CaseConfig& c) {
  auto t0 = std::chrono::steady_clock::now();
  RunSummary r = run_case(c, true);
  double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::fprintf(stderr, "  %s %s %s n=%d C=%g beta=%g: %d steps, %.1f s%s%s\n", to_string(c.kind),
               to_string(c.model), to_string(c.flux), c.n, c.cfl, c.beta, r.steps, s, r.ok ? "" : ", ",
               r.failure.c_str());
  return r;
}

SweepResult timed_sweep(const CaseConfig& c) {
  std::fprintf(stderr, "  sweep %s %s %s C=%g\n", to_string(c.kind), to_string(c.model), to_string(c.flux), c.cfl);
  return convergence_sweep(c, {32, 64, 128});
}

void operator_identities() {
  Mesh m(16, 16);
  std::mt19937_64 rng(12345);
  vofflux::testing::IdentityResiduals w;
  for (int k = 0; k < 100; ++k) {
    auto r = vofflux::testing::identity_residuals(m, rng);
    w.sbp = std::max(w.sbp, r.sbp);
    w.adjoint = std::max(w.adjoint, r.adjoint);
    w.connection = std::max(w.connection, r.connection);
    w.product = std::max(w.product, r.product);
  }
  bool ok = w.sbp <= 1e-12 && w.adjoint <= 1e-12 && w.connection <= 1e-12 && w.product <= 1e-12;
  report(1, ok, "operator identities (100 random fields, 16x16)",
         fmt("sbp %.2e adjoint %.2e connection %.2e product %.2e", w.sbp, w.adjoint, w.connection, w.product));
}

// Criteria 2, 3 and 8 share the vortex runs over all models, methods and
// resolutions at beta = 0.5.
void vortex_matrix() {
  double alpha_excess = 0.0, outflow = -1.0, lemma3 = -1.0;
  double mass = 0.0, mom_one = 0.0, mom_two = 0.0;
  bool all_ok = true;
  std::string first_failure;
  for (int n : {32, 64, 128}) {
    for (Model model : {Model::One, Model::Two}) {
      for (FluxMethod f : {FluxMethod::LW, FluxMethod::Fromm, FluxMethod::MC, FluxMethod::Upwind, FluxMethod::CTU}) {
        CaseConfig c;
        c.n = n;
        c.model = model;
        c.flux = f;
        c.beta = 0.5;
        RunSummary r = timed_run(c);
        if (!r.ok && all_ok) first_failure = r.failure;
        all_ok = all_ok && r.ok;
        alpha_excess = std::max(alpha_excess, r.max_alpha_excess);
        outflow = std::max(outflow, r.max_outflow_excess);
        lemma3 = std::max(lemma3, r.max_lemma3);
        mass = std::max(mass, r.mass_drift);
        (model == Model::One ? mom_one : mom_two) = std::max(model == Model::One ? mom_one : mom_two, r.mom_drift);
      }
    }
  }
  report(2, all_ok && alpha_excess <= 1e-12 && outflow <= 1e-12, "boundedness (vortex, n 32/64/128, all models/methods)",
         fmt("max alpha excess %.2e, max outflow excess %.2e%s%s", alpha_excess, outflow, all_ok ? "" : ", ",
             first_failure.c_str()));
  report(3, all_ok && mass <= 1e-11 && mom_one <= 1e-11 && mom_two <= 1e-11, "conservation",
         fmt("liquid mass %.2e, one-velocity merged momentum %.2e, two-velocity liquid momentum %.2e", mass, mom_one,
             mom_two));
  report(8, all_ok && lemma3 <= 1e-12, "modified-interpolant bound (beta 0.5, faces with sigma alpha >= beta)",
         fmt("max excess over bound %.2e", lemma3));
}

void audit() {
  CaseConfig c;
  c.n = 32;
  c.audit = true;
  RunSummary r = timed_run(c);
  const auto& a = r.audit;
  CaseConfig e;
  e.n = 32;
  AuditReport fixture = audit_case_regions(e, 0.1, DrKind::Emfpa);
  bool ok = r.ok && a.overlap == 0 && a.transit == 0 && a.volume == 0 && fixture.transit >= 1;
  report(4, ok, "fluxing-error audit",
         fmt("MEMFPA run (%d steps): overlap %d transit %d volume %d (max %.1e/%.1e/%.1e); EMFPA fixture transit %d",
             r.steps, a.overlap, a.transit, a.volume, a.max_overlap, a.max_transit, a.max_volume, fixture.transit));
}

void no_interface() {
  std::string detail;
  bool ok = true;
  double energy_order = std::numeric_limits<double>::quiet_NaN();
  for (FluxMethod f : {FluxMethod::LW, FluxMethod::Fromm, FluxMethod::MC, FluxMethod::Upwind}) {
    CaseConfig c;
    c.kind = CaseKind::NoInterface;
    c.flux = f;
    c.cfl = 0.5;
    c.vel_time = VelTime::Midpoint;
    SweepResult s = timed_sweep(c);
    double o = s.order_l1[kLiquid];
    bool pass = f == FluxMethod::Upwind ? (o >= 0.7 && o <= 1.3) : o >= 2.5;
    for (const auto& r : s.runs) pass = pass && r.ok;
    ok = ok && pass;
    detail += fmt("%s %.2f (pairs %.2f %.2f)%s ", to_string(f), o, s.pair_l1[kLiquid][0], s.pair_l1[kLiquid][1],
                  pass ? "" : " [fail]");
    if (f == FluxMethod::LW) energy_order = s.order_energy[kLiquid];
  }
  report(5, ok, "no-interface L1 orders (C 0.5)", detail);
  report(10, energy_order >= 2.5, "no-interface LW energy order", fmt("%.2f", energy_order));
}

void phase_accuracy() {
  CaseConfig base;
  base.flux = FluxMethod::Fromm;
  base.vel_time = VelTime::Midpoint;
  CaseConfig two = base, one = base, enforced = base;
  two.model = Model::Two;
  one.model = Model::One;
  enforced.model = Model::Two;
  enforced.enforce_gas_regions = true;
  SweepResult s2 = timed_sweep(two);
  SweepResult s1 = timed_sweep(one);
  SweepResult se = timed_sweep(enforced);
  double g2 = s2.order_l1[kGas], g1 = s1.order_l1[kGas];
  double l2 = s2.order_l1[kLiquid], l1 = s1.order_l1[kLiquid];
  bool ok = g2 >= 1.5 && g1 <= 1.0 && std::abs(l2 - l1) <= 0.3;
  report(6, ok, "phase-accuracy contrast (Fromm)",
         fmt("two-velocity gas %.2f, one-velocity gas %.2f, liquid two %.2f one %.2f; "
             "with enforced gas regions: gas %.2f liquid %.2f",
             g2, g1, l2, l1, se.order_l1[kGas], se.order_l1[kLiquid]));
}

void ctu_bound() {
  double excess = -1.0;
  bool ok = true;
  for (Model model : {Model::Two, Model::One}) {
    CaseConfig c;
    c.n = 64;
    c.model = model;
    c.flux = FluxMethod::CTU;
    c.beta = std::numeric_limits<double>::infinity();
    c.cfl = 1.0;
    RunSummary r = timed_run(c);
    ok = ok && r.ok;
    excess = std::max(excess, r.max_lemma2);
  }
  report(7, ok && excess <= 1e-12, "CTU update bound (beta inf, C 1, n 64)", fmt("max excess over bound %.2e", excess));
}

void energy_trend() {
  std::vector<double> rel;
  std::string detail;
  for (double bc : {1.0, 0.1, 0.01}) {
    CaseConfig c;
    c.n = 64;
    c.flux = FluxMethod::LW;
    c.model = Model::Two;
    c.beta = bc;
    c.cfl = bc;
    RunSummary r = timed_run(c);
    rel.push_back(r.ok ? r.rel_dek[kGas] : std::numeric_limits<double>::quiet_NaN());
    detail += fmt("C=%g: %.3e  ", bc, rel.back());
  }
  CaseConfig f;
  f.n = 64;
  f.flux = FluxMethod::Fromm;
  f.model = Model::Two;
  f.beta = 1.0;
  f.cfl = 1.0;
  RunSummary rf = timed_run(f);
  bool fromm_finite = rf.finite;
  bool ok = rel[0] > rel[1] && rel[1] > rel[2] && fromm_finite;
  detail += fmt("| Fromm C=1: %.3e (%s)", rf.rel_dek[kGas], fromm_finite ? "finite" : "not finite");
  report(9, ok, "gas kinetic energy trend (LW, two-velocity, n 64, beta = C)", detail);
}

void translation() {
  CaseConfig c;
  c.kind = CaseKind::Translation;
  c.n = 64;
  c.cfl = 0.3;
  c.translation_steps = 50;
  RunSummary r = timed_run(c);
  report(11, r.ok && r.steps == 50 && r.position_error <= 1e-12, "axis-aligned translation (50 steps)",
         fmt("position error %.2e", r.position_error));
}

}  // namespace

int main() {
  operator_identities();
  translation();
  audit();
  ctu_bound();
  vortex_matrix();
  no_interface();
  phase_accuracy();
  energy_trend();
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) { return a.id < b.id; });
  int failures = 0;
  for (const auto& l : lines) {
    std::printf("%s %2d %s\n", l.pass ? "PASS" : "FAIL", l.id, l.text.c_str());
    failures += !l.pass;
  }
  std::printf("%d of %zu criteria failed\n", failures, lines.size());
  return failures == 0 ? 0 : 1;
}
