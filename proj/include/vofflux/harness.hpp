#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vofflux/transport.hpp"

namespace vofflux {

enum class CaseKind { Vortex2d, Translation, Rotation, NoInterface };
enum class VelTime { N, Midpoint };

const char* to_string(CaseKind c);
CaseKind parse_case(const std::string& s);
VelTime parse_vel_time(const std::string& s);

struct CaseConfig {
  CaseKind kind = CaseKind::Vortex2d;
  int n = 64;
  double cfl = 0.75;
  double beta = 0.5;
  FluxMethod flux = FluxMethod::Fromm;
  Model model = Model::Two;
  double T = 1.0;
  double rho_ratio = 1e-3;
  VelTime vel_time = VelTime::N;
  std::string out;  // empty: no files

  double radius = 0.15;
  Vec2 center{0.5, 0.75};
  int translation_steps = 50;
  bool height_functions = false;
  bool assert_lemma2 = false;
  bool assert_lemma3 = false;
  bool audit = false;
  bool enforce_gas_regions = false;
  int field_every = 0;  // 0: fields only at start and end

  void validate() const;
};

// Stream function and its analytic velocity (u = dpsi/dy, v = -dpsi/dx).
double stream_function(const CaseConfig& c, double t, Vec2 x);
Vec2 analytic_velocity(const CaseConfig& c, double t, Vec2 x);

// Face-normal velocities from stream function differences; discretely
// divergence free, zero on the walls.
FaceField face_velocity(const Mesh& m, const CaseConfig& c, double t);

// Exact area of the intersection of a disk with an axis-aligned rectangle.
double disk_rect_area(Vec2 center, double r, double x0, double x1, double y0, double y1);

// Liquid fraction at time t for cases with a closed-form interface
// (initial condition for every case, translated slab for translation).
CenteredField exact_alpha(const Mesh& m, const CaseConfig& c, double t);
// Staggered scalar per phase at time t (self-error reference at t = T).
FaceField exact_phi(const Mesh& m, const CaseConfig& c, int phase, double t);

SimState init_case(const CaseConfig& c);
TransportParams transport_params(const CaseConfig& c);

// Mass-weighted L1 and L-infinity error of a phase over faces holding it.
struct PhaseError {
  double l1 = 0.0, linf = 0.0;
};
PhaseError phase_error(const SimState& s, int phase, const FaceField& exact);

struct RunSummary {
  bool ok = true;
  std::string failure;
  int steps = 0;
  double t_end = 0.0;
  PhaseError err[2];
  double alpha_error = 0.0;       // sum |c| |alpha - alpha_exact|
  double position_error = 0.0;    // h * max |alpha - alpha_exact|
  double ek0[2] = {0, 0}, ek[2] = {0, 0};
  double rel_dek[2] = {0, 0};     // |E(T) - E(0)| / E(0)
  double mass_drift = 0.0;        // relative liquid volume drift
  double mom_drift = 0.0;         // relative merged (one) or liquid (two) momentum drift
  double max_alpha_excess = 0.0;  // max distance of alpha* outside [0,1]
  double max_outflow_excess = -1.0;
  double max_inflow_excess = -1.0;
  double max_lemma2 = -1.0, max_lemma3 = -1.0;
  double max_sync = 0.0;
  double max_kappa = 0.0;
  double min_weight = 0.0;
  AuditReport audit;  // accumulated over steps when audited
  bool finite = true;
};

// Called after every completed step.
using StepObserver = std::function<void(const SimState&, const StepReport&)>;

// Runs a case to t = T (translation: a fixed number of steps). Invariant
// violations are rethrown unless catch_violations is set, in which case
// they are reported in the summary.
RunSummary run_case(const CaseConfig& c, bool catch_violations = false, const StepObserver& obs = {});

// Least-squares slope of log(err) against log(h).
double ls_order(const std::vector<double>& h, const std::vector<double>& err);

struct SweepResult {
  std::vector<int> n;
  std::vector<RunSummary> runs;
  // Orders per phase for L1 and L-infinity; pairwise and least-squares.
  std::vector<double> pair_l1[2], pair_linf[2];
  double order_l1[2] = {0, 0}, order_linf[2] = {0, 0};
  double order_energy[2] = {0, 0};
};

SweepResult convergence_sweep(const CaseConfig& base, const std::vector<int>& ns);
void write_sweep_csv(const std::string& path, const CaseConfig& base, const SweepResult& r);

// Audit of one set of regions built from the case velocity at time t.
AuditReport audit_case_regions(const CaseConfig& c, double t, DrKind kind);

}  // namespace vofflux
