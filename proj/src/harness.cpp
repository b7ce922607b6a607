#include "vofflux/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace vofflux {

namespace fs = std::filesystem;
using std::numbers::pi;

const char* to_string(CaseKind c) {
  switch (c) {
    case CaseKind::Vortex2d: return "vortex2d";
    case CaseKind::Translation: return "translation";
    case CaseKind::Rotation: return "rotation";
    case CaseKind::NoInterface: return "no-interface";
  }
  return "?";
}

CaseKind parse_case(const std::string& s) {
  if (s == "vortex2d") return CaseKind::Vortex2d;
  if (s == "translation") return CaseKind::Translation;
  if (s == "rotation") return CaseKind::Rotation;
  if (s == "no-interface") return CaseKind::NoInterface;
  throw std::invalid_argument("unknown case '" + s + "'");
}

VelTime parse_vel_time(const std::string& s) {
  if (s == "n") return VelTime::N;
  if (s == "midpoint") return VelTime::Midpoint;
  throw std::invalid_argument("unknown velocity time '" + s + "'");
}

namespace {

// Translation: slab of liquid moving in +x at unit speed.
constexpr double kSlabX0 = 0.1;
constexpr double kSlabWidth = 0.2;
constexpr double kSlabSpeed = 1.0;

// Rotation: solid body inside r1, cubic taper to rest at r2.
constexpr double kRotR1 = 0.42;
constexpr double kRotR2 = 0.49;
const Vec2 kRotCenter{0.5, 0.5};

// Taper weight of the rotation speed and the primitive of r*w(r).
double taper(double r) {
  if (r <= kRotR1) return 1.0;
  if (r >= kRotR2) return 0.0;
  double s = (r - kRotR1) / (kRotR2 - kRotR1);
  return 1.0 - 3.0 * s * s + 2.0 * s * s * s;
}

double taper_primitive(double r) {
  if (r <= kRotR1) return 0.5 * r * r;
  const double L = kRotR2 - kRotR1;
  double s = (std::min(r, kRotR2) - kRotR1) / L;
  double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
  return 0.5 * kRotR1 * kRotR1 + L * (kRotR1 * (s - s3 + 0.5 * s4) + L * (0.5 * s2 - 0.75 * s4 + 0.4 * s5));
}

void write_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp);
    if (!f) throw std::runtime_error("cannot write " + tmp);
    f << content;
  }
  fs::rename(tmp, path);
}

}  // namespace

void CaseConfig::validate() const {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("cfl must lie in (0,1]");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be non-negative");
  if (n < 4) throw std::invalid_argument("n must be at least 4");
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  if (!(rho_ratio > 0.0)) throw std::invalid_argument("rho-ratio must be positive");
  if (kind == CaseKind::Translation) {
    double h = 1.0 / n;
    if (kSlabX0 + kSlabWidth + translation_steps * cfl * h > 1.0 - h)
      throw std::invalid_argument("translation: slab would reach the wall; lower cfl or steps, or raise n");
  }
}

double stream_function(const CaseConfig& c, double t, Vec2 x) {
  switch (c.kind) {
    case CaseKind::Vortex2d:
    case CaseKind::NoInterface: {
      double sx = std::sin(pi * x.x), sy = std::sin(pi * x.y);
      return std::cos(pi * t / c.T) / pi * sx * sx * sy * sy;
    }
    case CaseKind::Translation: return kSlabSpeed * x.y;
    case CaseKind::Rotation: {
      double r = norm(x - kRotCenter);
      return -2.0 * pi / c.T * taper_primitive(r);
    }
  }
  return 0.0;
}

Vec2 analytic_velocity(const CaseConfig& c, double t, Vec2 x) {
  switch (c.kind) {
    case CaseKind::Vortex2d:
    case CaseKind::NoInterface: {
      double a = std::cos(pi * t / c.T);
      double sx = std::sin(pi * x.x), sy = std::sin(pi * x.y);
      return {a * sx * sx * std::sin(2.0 * pi * x.y), -a * std::sin(2.0 * pi * x.x) * sy * sy};
    }
    case CaseKind::Translation: return {kSlabSpeed, 0.0};
    case CaseKind::Rotation: {
      Vec2 d = x - kRotCenter;
      double w = 2.0 * pi / c.T * taper(norm(d));
      return {-w * d.y, w * d.x};
    }
  }
  return {};
}

FaceField face_velocity(const Mesh& m, const CaseConfig& c, double t) {
  std::vector<double> psi(static_cast<size_t>(m.n_vertices()));
  for (int j = 0; j <= m.ny; ++j)
    for (int i = 0; i <= m.nx; ++i) psi[m.vertex_id(i, j)] = stream_function(c, t, m.vertex(i, j));
  FaceField u(m);
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i <= m.nx; ++i)
      u.xf(i, j) = (psi[m.vertex_id(i, j + 1)] - psi[m.vertex_id(i, j)]) / m.hy;
  for (int j = 0; j <= m.ny; ++j)
    for (int i = 0; i < m.nx; ++i)
      u.yf(i, j) = -(psi[m.vertex_id(i + 1, j)] - psi[m.vertex_id(i, j)]) / m.hx;
  u.zero_boundary();
  return u;
}

double disk_rect_area(Vec2 c, double r, double x0, double x1, double y0, double y1) {
  double a = std::max(x0, c.x - r), b = std::min(x1, c.x + r);
  if (a >= b || y0 >= y1) return 0.0;
  // Breakpoints where the chord ends cross the rectangle's horizontal sides.
  std::vector<double> xs{a, b};
  for (double y : {y0, y1}) {
    double dy = y - c.y;
    if (std::abs(dy) < r) {
      double dx = std::sqrt(r * r - dy * dy);
      for (double x : {c.x - dx, c.x + dx})
        if (x > a && x < b) xs.push_back(x);
    }
  }
  std::sort(xs.begin(), xs.end());
  auto half = [&](double x) { double t = x - c.x; return std::sqrt(std::max(0.0, r * r - t * t)); };
  // Primitive of the half chord length.
  auto prim = [&](double x) {
    double t = std::clamp(x - c.x, -r, r);
    return 0.5 * (t * std::sqrt(std::max(0.0, r * r - t * t)) + r * r * std::asin(t / r));
  };
  double area = 0.0;
  for (size_t k = 0; k + 1 < xs.size(); ++k) {
    double p = xs[k], q = xs[k + 1];
    if (q <= p) continue;
    double mid = 0.5 * (p + q), s = half(mid);
    bool top_clipped = c.y + s > y1, bot_clipped = c.y - s < y0;
    if (c.y + s <= y0 || c.y - s >= y1) continue;
    double S = prim(q) - prim(p);
    double len = q - p;
    double top = top_clipped ? y1 * len : c.y * len + S;
    double bot = bot_clipped ? y0 * len : c.y * len - S;
    area += top - bot;
  }
  return area;
}

CenteredField exact_alpha(const Mesh& m, const CaseConfig& c, double t) {
  CenteredField a(m);
  for (int j = 0; j < m.ny; ++j) {
    for (int i = 0; i < m.nx; ++i) {
      double x0 = i * m.hx, x1 = x0 + m.hx, y0 = j * m.hy, y1 = y0 + m.hy;
      double v = 0.0;
      switch (c.kind) {
        case CaseKind::NoInterface: v = 1.0; break;
        case CaseKind::Translation: {
          double l = kSlabX0 + kSlabSpeed * t, r = l + kSlabWidth;
          v = std::max(0.0, std::min(x1, r) - std::max(x0, l)) / m.hx;
          break;
        }
        default: v = disk_rect_area(c.center, c.radius, x0, x1, y0, y1) / m.cell_volume();
      }
      a(i, j) = std::clamp(v, 0.0, 1.0);
    }
  }
  return a;
}

FaceField exact_phi(const Mesh& m, const CaseConfig& c, int phase, double t) {
  const double shift = c.kind == CaseKind::Translation ? kSlabSpeed * t : 0.0;
  FaceField f(m);
  for (int j = 0; j < m.ny; ++j) {
    for (int i = 0; i <= m.nx; ++i) {
      Vec2 x = m.xface_center(i, j);
      x.x -= shift;
      f.xf(i, j) = phase == kLiquid ? std::sin(4 * pi * x.x) * std::sin(4 * pi * x.y)
                                    : std::cos(2 * pi * x.x) * std::cos(2 * pi * x.y);
    }
  }
  return f;
}

SimState init_case(const CaseConfig& c) {
  c.validate();
  SimState s;
  s.mesh = Mesh(c.n, c.n);
  s.alpha = exact_alpha(s.mesh, c, 0.0);
  s.rho[kLiquid] = 1.0;
  s.rho[kGas] = c.rho_ratio;
  for (int ph = 0; ph < 2; ++ph) s.phase[ph].phi = exact_phi(s.mesh, c, ph, 0.0);
  sync_masses(s);
  return s;
}

TransportParams transport_params(const CaseConfig& c) {
  TransportParams p;
  p.model = c.model;
  p.method = c.flux;
  p.beta = c.beta;
  p.cfl = c.cfl;
  p.plic.height_functions = c.height_functions;
  p.assert_lemma2 = c.assert_lemma2;
  p.assert_lemma3 = c.assert_lemma3;
  p.audit = c.audit;
  p.gas_regions = c.enforce_gas_regions ? DrKind::Memfpa : DrKind::Plain;
  return p;
}

PhaseError phase_error(const SimState& s, int phase, const FaceField& exact) {
  const Mesh& m = s.mesh;
  const auto& ph = s.phase[phase];
  PhaseError e;
  double wsum = 0.0;
  auto visit = [&](double vol, double mass, double phi, double ex) {
    double sa = mass / s.rho[phase];
    if (sa <= 1e-9) return;
    double d = std::abs(phi - ex);
    e.l1 += vol * sa * d;
    wsum += vol * sa;
    e.linf = std::max(e.linf, d);
  };
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i <= m.nx; ++i) visit(m.xface_stag_volume(i), ph.mass.xf(i, j), ph.phi.xf(i, j), exact.xf(i, j));
  for (int j = 0; j <= m.ny; ++j)
    for (int i = 0; i < m.nx; ++i) visit(m.yface_stag_volume(j), ph.mass.yf(i, j), ph.phi.yf(i, j), exact.yf(i, j));
  if (wsum > 0.0) e.l1 /= wsum;
  return e;
}

namespace {

Vec2 conserved_momentum(const SimState& s, Model model) {
  Vec2 p = total_momentum(s, kLiquid);
  if (model == Model::One) p = p + total_momentum(s, kGas);
  return p;
}

double momentum_scale(const SimState& s, Model model) {
  const Mesh& m = s.mesh;
  double sc = 0.0;
  for (int ph = 0; ph < (model == Model::One ? 2 : 1); ++ph) {
    const auto& P = s.phase[ph];
    for (int j = 0; j < m.ny; ++j)
      for (int i = 0; i <= m.nx; ++i) sc += m.xface_stag_volume(i) * std::abs(P.mass.xf(i, j) * P.phi.xf(i, j));
    for (int j = 0; j <= m.ny; ++j)
      for (int i = 0; i < m.nx; ++i) sc += m.yface_stag_volume(j) * std::abs(P.mass.yf(i, j) * P.phi.yf(i, j));
  }
  return sc;
}

void write_fields(const std::string& dir, const SimState& s) {
  const Mesh& m = s.mesh;
  std::ostringstream os;
  os << std::setprecision(17);
  os << "loc,i,j,x,y,alpha,phi_l,phi_g\n";
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i < m.nx; ++i) {
      Vec2 x = m.cell_center(i, j);
      os << "cell," << i << ',' << j << ',' << x.x << ',' << x.y << ',' << s.alpha(i, j) << ",,\n";
    }
  auto face = [&](const char* loc, int i, int j, Vec2 x, double mass, double pl, double pg) {
    os << loc << ',' << i << ',' << j << ',' << x.x << ',' << x.y << ',' << mass / s.rho[kLiquid] << ',' << pl << ','
       << pg << '\n';
  };
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i <= m.nx; ++i)
      face("xface", i, j, m.xface_center(i, j), s.phase[kLiquid].mass.xf(i, j), s.phase[kLiquid].phi.xf(i, j),
           s.phase[kGas].phi.xf(i, j));
  for (int j = 0; j <= m.ny; ++j)
    for (int i = 0; i < m.nx; ++i)
      face("yface", i, j, m.yface_center(i, j), s.phase[kLiquid].mass.yf(i, j), s.phase[kLiquid].phi.yf(i, j),
           s.phase[kGas].phi.yf(i, j));
  write_atomic(dir + "/fields_" + std::to_string(s.step) + ".csv", os.str());
}

}  // namespace

RunSummary run_case(const CaseConfig& c, bool catch_violations, const StepObserver& obs) {
  SimState s = init_case(c);
  TransportParams p = transport_params(c);
  const Mesh& m = s.mesh;
  RunSummary sum;

  const bool files = !c.out.empty();
  if (files) fs::create_directories(c.out);
  std::ostringstream ts;
  ts << std::setprecision(17);
  ts << "step,t,dt,ek_l,ek_g,dek_l,dek_g,mass_l,mass_g,mom_x,mom_y,alpha_min,alpha_max,cfl_max\n";

  for (int ph = 0; ph < 2; ++ph) sum.ek0[ph] = kinetic_energy(s, ph);
  const double vol0 = total_liquid_volume(s);
  const Vec2 mom0 = conserved_momentum(s, c.model);
  const double mscale = std::max(momentum_scale(s, c.model), 1e-300);

  auto row = [&](double dt, double amin, double amax, double kmax) {
    Vec2 pm = conserved_momentum(s, c.model);
    double e0 = kinetic_energy(s, kLiquid), e1 = kinetic_energy(s, kGas);
    ts << s.step << ',' << s.t << ',' << dt << ',' << e0 << ',' << e1 << ',' << e0 - sum.ek0[0] << ','
       << e1 - sum.ek0[1] << ',' << total_mass(s, kLiquid) << ',' << total_mass(s, kGas) << ',' << pm.x << ','
       << pm.y << ',' << amin << ',' << amax << ',' << kmax << '\n';
  };
  auto alpha_range = [&](double& lo, double& hi) {
    auto [a, b] = std::minmax_element(s.alpha.v.begin(), s.alpha.v.end());
    lo = *a;
    hi = *b;
  };
  {
    double lo, hi;
    alpha_range(lo, hi);
    row(0.0, lo, hi, 0.0);
  }
  if (files) write_fields(c.out, s);
  const std::string audit_path = c.out + "/audit.csv";
  if (files && c.audit) AuditReport{}.write_csv(audit_path, 0, false);

  const bool translation = c.kind == CaseKind::Translation;
  const double rate_ref = max_inflow_rate(m, face_velocity(m, c, 0.0));
  const double t_end = translation ? std::numeric_limits<double>::infinity() : c.T;

  try {
    while (translation ? s.step < c.translation_steps : s.t < t_end * (1.0 - 1e-14)) {
      double rate = std::max(max_inflow_rate(m, face_velocity(m, c, s.t)), rate_ref);
      double dt = std::min(t_end - s.t, c.cfl / rate);
      double tv = c.vel_time == VelTime::Midpoint ? s.t + 0.5 * dt : s.t;
      FaceField u = face_velocity(m, c, tv);
      double rs = max_inflow_rate(m, u);
      if (rs * dt > c.cfl) dt = c.cfl / rs;
      if (c.vel_time == VelTime::Midpoint && tv != s.t + 0.5 * dt) u = face_velocity(m, c, s.t + 0.5 * dt);

      StepReport rep = advance(s, u, u, dt, p);

      const auto& vd = rep.vof;
      sum.max_alpha_excess = std::max({sum.max_alpha_excess, -vd.alpha_min, vd.alpha_max - 1.0});
      sum.max_outflow_excess = std::max(sum.max_outflow_excess, vd.outflow_excess);
      sum.max_inflow_excess = std::max(sum.max_inflow_excess, vd.inflow_excess);
      sum.max_kappa = std::max(sum.max_kappa, rep.max_kappa);
      for (int ph = 0; ph < 2; ++ph) {
        sum.max_lemma2 = std::max(sum.max_lemma2, rep.mom[ph].lemma2_excess);
        sum.max_lemma3 = std::max(sum.max_lemma3, rep.mom[ph].lemma3_excess);
        sum.max_sync = std::max(sum.max_sync, rep.mom[ph].sync_residual / s.rho[ph]);
        sum.min_weight = std::min(sum.min_weight, rep.mom[ph].min_weight);
      }
      if (vd.audited) {
        auto& a = sum.audit;
        a.overlap += vd.audit.overlap;
        a.gap += vd.audit.gap;
        a.transit += vd.audit.transit;
        a.volume += vd.audit.volume;
        a.adjacency += vd.audit.adjacency;
        a.max_overlap = std::max(a.max_overlap, vd.audit.max_overlap);
        a.max_gap = std::max(a.max_gap, vd.audit.max_gap);
        a.max_transit = std::max(a.max_transit, vd.audit.max_transit);
        a.max_volume = std::max(a.max_volume, vd.audit.max_volume);
        if (files) vd.audit.write_csv(audit_path, s.step, true);
      }
      double lo, hi;
      alpha_range(lo, hi);
      row(dt, lo, hi, rep.max_kappa);
      if (files && c.field_every > 0 && s.step % c.field_every == 0) write_fields(c.out, s);
      if (obs) obs(s, rep);
    }
  } catch (const InvariantViolation& e) {
    if (!catch_violations) {
      if (files) write_atomic(c.out + "/timeseries.csv", ts.str());
      throw;
    }
    sum.ok = false;
    sum.failure = e.what();
  }

  sum.steps = s.step;
  sum.t_end = s.t;
  for (int ph = 0; ph < 2; ++ph) {
    sum.err[ph] = phase_error(s, ph, exact_phi(m, c, ph, s.t));
    sum.ek[ph] = kinetic_energy(s, ph);
    sum.rel_dek[ph] = sum.ek0[ph] > 0.0 ? std::abs(sum.ek[ph] - sum.ek0[ph]) / sum.ek0[ph] : 0.0;
    sum.finite = sum.finite && std::isfinite(sum.ek[ph]) && std::isfinite(sum.err[ph].l1);
  }
  CenteredField ax = exact_alpha(m, c, translation ? s.t : 0.0);
  double amax = 0.0;
  for (size_t k = 0; k < ax.v.size(); ++k) {
    double d = std::abs(s.alpha.v[k] - ax.v[k]);
    sum.alpha_error += d * m.cell_volume();
    amax = std::max(amax, d);
  }
  sum.position_error = amax * std::min(m.hx, m.hy);
  sum.mass_drift = vol0 > 0.0 ? std::abs(total_liquid_volume(s) - vol0) / vol0 : 0.0;
  Vec2 mom1 = conserved_momentum(s, c.model);
  sum.mom_drift = norm(mom1 - mom0) / mscale;

  if (files) {
    write_atomic(c.out + "/timeseries.csv", ts.str());
    if (c.field_every == 0 || s.step % c.field_every != 0) write_fields(c.out, s);
    std::ostringstream es;
    es << std::setprecision(17);
    es << "case,model,flux,n,cfl,beta,steps,t_end,l1_l,linf_l,l1_g,linf_g,alpha_l1,position_error,rel_dek_l,"
          "rel_dek_g,mass_drift,mom_drift,status\n";
    es << to_string(c.kind) << ',' << to_string(c.model) << ',' << to_string(c.flux) << ',' << c.n << ',' << c.cfl
       << ',' << c.beta << ',' << sum.steps << ',' << sum.t_end << ',' << sum.err[0].l1 << ',' << sum.err[0].linf
       << ',' << sum.err[1].l1 << ',' << sum.err[1].linf << ',' << sum.alpha_error << ',' << sum.position_error
       << ',' << sum.rel_dek[0] << ',' << sum.rel_dek[1] << ',' << sum.mass_drift << ',' << sum.mom_drift << ','
       << (sum.ok ? "ok" : "violation") << '\n';
    write_atomic(c.out + "/errors.csv", es.str());
  }
  return sum;
}

double ls_order(const std::vector<double>& h, const std::vector<double>& err) {
  const size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t k = 0; k < n; ++k) {
    double x = std::log(h[k]), y = std::log(err[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SweepResult convergence_sweep(const CaseConfig& base, const std::vector<int>& ns) {
  if (ns.size() < 3) throw std::invalid_argument("a sweep needs at least three resolutions");
  SweepResult r;
  r.n = ns;
  std::vector<double> h;
  for (int n : ns) {
    CaseConfig c = base;
    c.n = n;
    if (!base.out.empty()) c.out = base.out + "/n" + std::to_string(n);
    r.runs.push_back(run_case(c));
    h.push_back(1.0 / n);
  }
  for (int ph = 0; ph < 2; ++ph) {
    std::vector<double> l1, li, ek;
    for (const auto& run : r.runs) {
      l1.push_back(run.err[ph].l1);
      li.push_back(run.err[ph].linf);
      ek.push_back(run.rel_dek[ph]);
    }
    for (size_t k = 0; k + 1 < ns.size(); ++k) {
      double lh = std::log(h[k] / h[k + 1]);
      r.pair_l1[ph].push_back(std::log(l1[k] / l1[k + 1]) / lh);
      r.pair_linf[ph].push_back(std::log(li[k] / li[k + 1]) / lh);
    }
    r.order_l1[ph] = ls_order(h, l1);
    r.order_linf[ph] = ls_order(h, li);
    r.order_energy[ph] = ls_order(h, ek);
  }
  return r;
}

void write_sweep_csv(const std::string& path, const CaseConfig& base, const SweepResult& r) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "case,model,flux,n,l1_l,linf_l,l1_g,linf_g,rel_dek_l,rel_dek_g,order_l1_l,order_linf_l,order_l1_g,"
        "order_linf_g\n";
  for (size_t k = 0; k < r.n.size(); ++k) {
    const auto& run = r.runs[k];
    os << to_string(base.kind) << ',' << to_string(base.model) << ',' << to_string(base.flux) << ',' << r.n[k] << ','
       << run.err[0].l1 << ',' << run.err[0].linf << ',' << run.err[1].l1 << ',' << run.err[1].linf << ','
       << run.rel_dek[0] << ',' << run.rel_dek[1];
    if (k == 0) {
      os << ",,,,\n";
    } else {
      os << ',' << r.pair_l1[0][k - 1] << ',' << r.pair_linf[0][k - 1] << ',' << r.pair_l1[1][k - 1] << ','
         << r.pair_linf[1][k - 1] << '\n';
    }
  }
  os << to_string(base.kind) << ',' << to_string(base.model) << ',' << to_string(base.flux) << ",ls,,,,,,,"
     << r.order_l1[0] << ',' << r.order_linf[0] << ',' << r.order_l1[1] << ',' << r.order_linf[1] << '\n';
  fs::path pp(path);
  if (pp.has_parent_path()) fs::create_directories(pp.parent_path());
  write_atomic(path, os.str());
}

AuditReport audit_case_regions(const CaseConfig& c, double t, DrKind kind) {
  Mesh m(c.n, c.n);
  FaceField u = face_velocity(m, c, t);
  double rate = std::max(max_inflow_rate(m, u), max_inflow_rate(m, face_velocity(m, c, 0.0)));
  double dt = c.cfl / rate;
  return audit_fluxing_errors(m, build_all_drs(m, u, dt, kind), u, dt);
}

}  // namespace vofflux
