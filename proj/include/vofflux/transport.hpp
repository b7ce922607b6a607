#pragma once

#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

#include "vofflux/donating.hpp"
#include "vofflux/mesh.hpp"
#include "vofflux/plic.hpp"

namespace vofflux {

enum class Model { One, Two };
enum class FluxMethod { LW, Fromm, MC, Upwind, CTU };

const char* to_string(Model m);
const char* to_string(FluxMethod f);
Model parse_model(const std::string& s);
FluxMethod parse_flux(const std::string& s);

constexpr int kLiquid = 0;
constexpr int kGas = 1;

struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TransportParams {
  Model model = Model::Two;
  FluxMethod method = FluxMethod::Fromm;
  double beta = 0.5;
  double cfl = 0.75;
  PlicOptions plic;
  // Assert the CTU max principle on every face (meaningful for beta = inf, cfl <= 1).
  bool assert_lemma2 = false;
  // Assert the modified-interpolant bound on faces with sigma alpha >= beta.
  bool assert_lemma3 = false;
  // Run the fluxing-error audit on the liquid regions every step.
  bool audit = false;
  // Gas regions of the two-velocity model; Memfpa is only meaningful for a
  // discretely divergence-free gas velocity.
  DrKind gas_regions = DrKind::Plain;
};

struct PhaseState {
  FaceField phi;   // advected staggered scalar (velocity role)
  FaceField mass;  // staggered mass sigma*alpha*rho
};

struct SimState {
  Mesh mesh;
  CenteredField alpha;  // liquid volume fraction
  PhaseState phase[2];
  double rho[2] = {1.0, 1e-3};
  double t = 0.0;
  int step = 0;
};

// Staggered masses consistent with alpha.
void sync_masses(SimState& s);

struct CflInfo {
  CenteredField kappa_c;
  StagFaceField kappa_g;
  double max_kappa = 0.0;
};

CflInfo compute_cfl(const Mesh& m, const FaceField& u, double dt);
// max_c of (inflow volume rate)/|c|; dt = C / rate gives max kappa_c = C.
double max_inflow_rate(const Mesh& m, const FaceField& u);

struct FluxBundle {
  std::shared_ptr<const PartialFluxTable> table;
  int phase = kLiquid;
  double rho = 1.0;
  FaceField volume_flux;  // total phase volume flux per face
  FaceField mass_flux;    // rho * volume_flux
  FaceField velocity;     // advecting velocity that built the regions
};

struct VofDiagnostics {
  double alpha_min = 0.0, alpha_max = 1.0;  // before clamping
  double outflow_excess = -1.0;             // max over phases, cells of V^- - alpha^n
  double inflow_excess = -1.0;              // max over cells of V^{+,l} - alpha^{l,n+1}
  double max_change = 0.0;                  // max |alpha^{n+1} - alpha^n|
  int degenerate = 0;
  AuditReport audit;
  bool audited = false;
};

struct VofResult {
  CenteredField alpha_star[2];  // unclamped phase fractions from the fluxes
  FluxBundle bundle[2];
  PlicState plic;
  VofDiagnostics diag;
};

FluxBundle make_bundle(const Mesh& m, std::shared_ptr<const PartialFluxTable> table, int phase, double rho,
                       const FaceField& u);

VofResult advect_vof_one_velocity(const SimState& s, const FaceField& u, double dt, const TransportParams& p);

struct ProjectionInfo {
  int iterations = 0;
  double residual = 0.0;
  double max_div = 0.0;  // max |div u_hat| over liquid cells
  int filled = 0;        // extrapolated faces
};

// Non-finite entries of u_l mark missing velocities and are extrapolated.
FaceField project_liquid_velocity(const Mesh& m, const FaceField& u_l, const CenteredField& alpha,
                                  const FaceField& sigma_alpha, ProjectionInfo* info = nullptr);

VofResult advect_vof_two_velocity(const SimState& s, const FaceField& u_l, const FaceField& u_g, double dt,
                                  const TransportParams& p, ProjectionInfo* proj = nullptr);

// Downwind and upwind-plane values for one staggered face g.
struct Theta {
  double t0 = 0, t1 = 0, t2 = 0;
  double d01 = 1, d12 = 1;
  bool ok0 = false, ok1 = false, ok2 = false;
};

// Location of a staggered face: family d, centre (kind 0, index p,b) or
// corner (kind 1, index a,q).
struct GRef {
  int d = 0;
  int kind = 0;
  int a = 0, b = 0;
};

// avail[gid] marks faces whose value may be used.
Theta theta_interpolants(const Mesh& m, const FaceField& phi, const std::vector<char>& avail, const GRef& g,
                         Vec2 u_g, double dt);

double flux_interpolant(FluxMethod method, double kappa, const Theta& th);

struct StagPartial {
  int k;  // same-family face gid
  double v;
};

// Interpolated partial staggered fluxes of g from the partial flux table.
void interpolated_partials(const Mesh& m, const PartialFluxTable& t, int phase, const GRef& g,
                           std::vector<StagPartial>& out);

double ctu_flux(const Mesh& m, const PartialFluxTable& t, int phase, const GRef& g, const FaceField& phi);

struct MomentumDiagnostics {
  double sync_residual = 0.0;      // max |rho*I(alpha*) - staggered flux-form mass|
  double lemma2_excess = -1.0;     // max |dphi| - bound over CTU-divided faces
  double lemma3_excess = -1.0;     // max |dphi| - bound over faces with sigma alpha >= beta
  double min_weight = 0.0;         // most negative inflow weight before clipping
  int ctu_faces = 0, high_order_faces = 0;
  int nonfinite = 0;
};

struct MomentumResult {
  FaceField phi;             // phi^{n+1}
  FaceField momentum;        // conservative flux-form momentum
  std::vector<char> defined; // phase present after the step
  MomentumDiagnostics diag;
};

// Momentum update of one phase. sigma_star is I(alpha*) for that phase.
MomentumResult advect_momentum_phase(const Mesh& m, const PhaseState& ph, const std::vector<char>& avail,
                                     const FluxBundle& bundle, const FaceField& sigma_star, double dt,
                                     const TransportParams& p);

struct StepReport {
  double dt = 0.0;
  double max_kappa = 0.0;
  VofDiagnostics vof;
  MomentumDiagnostics mom[2];
  ProjectionInfo projection;
};

// One full step: reconstruction, regions, VOF, momentum, divisions,
// merge (one-velocity) or gas mass reset (two-velocity). In the
// one-velocity model u_g is ignored.
StepReport advance(SimState& s, const FaceField& u_l, const FaceField& u_g, double dt, const TransportParams& p);

// Availability of phase values at step start.
std::vector<char> phase_available(const SimState& s, int phase, Model model);

double total_liquid_volume(const SimState& s);
double total_mass(const SimState& s, int phase);
Vec2 total_momentum(const SimState& s, int phase);
double kinetic_energy(const SimState& s, int phase);

}  // namespace vofflux
