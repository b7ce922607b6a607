#include "vofflux/transport.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace vofflux {

const char* to_string(Model m) { return m == Model::One ? "one" : "two"; }

const char* to_string(FluxMethod f) {
  switch (f) {
    case FluxMethod::LW: return "lw";
    case FluxMethod::Fromm: return "fromm";
    case FluxMethod::MC: return "mc";
    case FluxMethod::Upwind: return "upwind";
    case FluxMethod::CTU: return "ctu";
  }
  return "?";
}

Model parse_model(const std::string& s) {
  if (s == "one") return Model::One;
  if (s == "two") return Model::Two;
  throw std::invalid_argument("unknown model '" + s + "'");
}

FluxMethod parse_flux(const std::string& s) {
  if (s == "lw") return FluxMethod::LW;
  if (s == "fromm") return FluxMethod::Fromm;
  if (s == "mc") return FluxMethod::MC;
  if (s == "upwind") return FluxMethod::Upwind;
  if (s == "ctu") return FluxMethod::CTU;
  throw std::invalid_argument("unknown flux method '" + s + "'");
}

namespace {

int same_gid(const Mesh& m, int d, int a, int b) {
  return d == 0 ? m.xface_id(a, b) : m.n_xfaces() + m.yface_id(b, a);
}

int cross_gid(const Mesh& m, int d, int a, int b) {
  return d == 0 ? m.n_xfaces() + m.yface_id(a, b) : m.xface_id(b, a);
}

void cell_local(const Mesh& m, int d, int id, int& ca, int& cb) {
  int i = id % m.nx, j = id / m.nx;
  if (d == 0) { ca = i; cb = j; } else { ca = j; cb = i; }
}

FaceField from_gid_values(const Mesh& m, const std::vector<double>& v) {
  FaceField f(m);
  std::copy(v.begin(), v.begin() + m.n_xfaces(), f.x.begin());
  std::copy(v.begin() + m.n_xfaces(), v.end(), f.y.begin());
  return f;
}

double gid_value(const Mesh& m, const FaceField& f, int gid) {
  return gid < m.n_xfaces() ? f.x[gid] : f.y[gid - m.n_xfaces()];
}

[[noreturn]] void violation(const SimState& s, const std::string& what) {
  std::ostringstream os;
  os << "step " << s.step << " (t=" << s.t << "): " << what;
  throw InvariantViolation(os.str());
}

}  // namespace

void sync_masses(SimState& s) {
  CenteredField gas(s.mesh);
  for (size_t k = 0; k < gas.v.size(); ++k) gas.v[k] = 1.0 - s.alpha.v[k];
  FaceField sl = interp_c2f(s.mesh, s.alpha);
  FaceField sg = interp_c2f(s.mesh, gas);
  s.phase[kLiquid].mass = sl;
  s.phase[kGas].mass = sg;
  for (auto& v : s.phase[kLiquid].mass.x) v *= s.rho[kLiquid];
  for (auto& v : s.phase[kLiquid].mass.y) v *= s.rho[kLiquid];
  for (auto& v : s.phase[kGas].mass.x) v *= s.rho[kGas];
  for (auto& v : s.phase[kGas].mass.y) v *= s.rho[kGas];
}

CflInfo compute_cfl(const Mesh& m, const FaceField& u, double dt) {
  CflInfo info;
  info.kappa_c = CenteredField(m);
  const double vol = m.cell_volume();
  for (int j = 0; j < m.ny; ++j) {
    for (int i = 0; i < m.nx; ++i) {
      double in = std::max(0.0, m.hy * u.xf(i, j)) + std::max(0.0, -m.hy * u.xf(i + 1, j)) +
                  std::max(0.0, m.hx * u.yf(i, j)) + std::max(0.0, -m.hx * u.yf(i, j + 1));
      info.kappa_c(i, j) = dt * in / vol;
      info.max_kappa = std::max(info.max_kappa, info.kappa_c(i, j));
    }
  }
  info.kappa_g = interp_f2g(m, u);
  for (int d = 0; d < 2; ++d) {
    FamilyGeom fg(m, d);
    for (auto& v : info.kappa_g.fam[d].center) v *= dt / fg.center_g_h();
    for (auto& v : info.kappa_g.fam[d].corner) v *= dt / fg.corner_g_h();
  }
  return info;
}

double max_inflow_rate(const Mesh& m, const FaceField& u) { return compute_cfl(m, u, 1.0).max_kappa; }

FluxBundle make_bundle(const Mesh& m, std::shared_ptr<const PartialFluxTable> table, int phase, double rho,
                       const FaceField& u) {
  FluxBundle b;
  b.phase = phase;
  b.rho = rho;
  b.volume_flux = from_gid_values(m, phase == kLiquid ? table->total_liquid : table->total_gas);
  b.mass_flux = b.volume_flux;
  for (auto& v : b.mass_flux.x) v *= rho;
  for (auto& v : b.mass_flux.y) v *= rho;
  b.velocity = u;
  b.table = std::move(table);
  return b;
}

namespace {

// Outflow and inflow parts V^-, V^+ of the phase volume change of every cell.
void outflow_inflow(const Mesh& m, const PartialFluxTable& t, int phase, double dt, CenteredField& vminus,
                    CenteredField& vplus) {
  vminus = CenteredField(m);
  vplus = CenteredField(m);
  const double vol = m.cell_volume();
  std::vector<std::pair<int, double>> w;
  for (int j = 0; j < m.ny; ++j) {
    for (int i = 0; i < m.nx; ++i) {
      w.clear();
      FaceRef fs[4] = {{0, i, j}, {0, i + 1, j}, {1, i, j}, {1, i, j + 1}};
      const double o[4] = {-1, 1, -1, 1};
      for (int k = 0; k < 4; ++k) {
        int gid = face_gid(m, fs[k]);
        double area = face_area(m, fs[k]);
        for (int e = t.begin(gid); e < t.end(gid); ++e) {
          double v = phase == kLiquid ? t.liquid[e] : t.gas[e];
          double c = -o[k] * area * v * dt / vol;
          auto it = std::find_if(w.begin(), w.end(), [&](const auto& p) { return p.first == t.cell[e]; });
          if (it == w.end()) w.emplace_back(t.cell[e], c);
          else it->second += c;
        }
      }
      double vm = 0.0, vp = 0.0;
      for (const auto& [cell, c] : w) {
        if (c > 0) vp += c;
        else vm -= c;
      }
      vminus(i, j) = vm;
      vplus(i, j) = vp;
    }
  }
}

void vof_update(const Mesh& m, const CenteredField& alpha_n, const FluxBundle& b, double dt, CenteredField& out) {
  CenteredField d = div(m, b.volume_flux);
  out = alpha_n;
  for (size_t k = 0; k < out.v.size(); ++k) out.v[k] -= dt * d.v[k];
}

void vof_checks(const Mesh& m, const SimState& s, VofResult& r, double dt) {
  CenteredField gas_n(m);
  for (size_t k = 0; k < gas_n.v.size(); ++k) gas_n.v[k] = 1.0 - s.alpha.v[k];
  const CenteredField* alpha_n[2] = {&s.alpha, &gas_n};
  auto& dg = r.diag;
  dg.alpha_min = 1e300;
  dg.alpha_max = -1e300;
  for (size_t k = 0; k < s.alpha.v.size(); ++k) {
    dg.alpha_min = std::min(dg.alpha_min, r.alpha_star[kLiquid].v[k]);
    dg.alpha_max = std::max(dg.alpha_max, r.alpha_star[kLiquid].v[k]);
    dg.max_change = std::max(dg.max_change, std::abs(r.alpha_star[kLiquid].v[k] - s.alpha.v[k]));
  }
  for (int ph = 0; ph < 2; ++ph) {
    CenteredField vm, vp;
    outflow_inflow(m, *r.bundle[ph].table, ph, dt, vm, vp);
    for (size_t k = 0; k < vm.v.size(); ++k) {
      dg.outflow_excess = std::max(dg.outflow_excess, vm.v[k] - alpha_n[ph]->v[k]);
      if (ph == kLiquid) dg.inflow_excess = std::max(dg.inflow_excess, vp.v[k] - r.alpha_star[kLiquid].v[k]);
    }
  }
}

}  // namespace

VofResult advect_vof_one_velocity(const SimState& s, const FaceField& u, double dt, const TransportParams& p) {
  const Mesh& m = s.mesh;
  VofResult r;
  r.plic = reconstruct_normals(m, s.alpha, p.plic);
  std::vector<DonatingRegion> drs = build_all_drs(m, u, dt, DrKind::Memfpa);
  if (p.audit) {
    r.diag.audit = audit_fluxing_errors(m, drs, u, dt);
    r.diag.audited = true;
  }
  auto table = std::make_shared<const PartialFluxTable>(partial_fluxes(m, drs, r.plic, dt));
  r.diag.degenerate = table->degenerate;
  r.bundle[kLiquid] = make_bundle(m, table, kLiquid, s.rho[kLiquid], u);
  r.bundle[kGas] = make_bundle(m, table, kGas, s.rho[kGas], u);
  CenteredField gas_n(m);
  for (size_t k = 0; k < gas_n.v.size(); ++k) gas_n.v[k] = 1.0 - s.alpha.v[k];
  vof_update(m, s.alpha, r.bundle[kLiquid], dt, r.alpha_star[kLiquid]);
  vof_update(m, gas_n, r.bundle[kGas], dt, r.alpha_star[kGas]);
  vof_checks(m, s, r, dt);
  return r;
}

FaceField project_liquid_velocity(const Mesh& m, const FaceField& u_l, const CenteredField& alpha,
                                  const FaceField& sigma_alpha, ProjectionInfo* info) {
  FaceField u = u_l;
  ProjectionInfo pi;

  // Constant extrapolation into missing faces.
  for (int d = 0; d < 2; ++d) {
    FamilyGeom fg(m, d);
    for (int b = 0; b < fg.nb; ++b)
      for (int a = 0; a <= fg.na; ++a) {
        double& v = fg.same(u, a, b);
        if (fg.same_boundary(a)) v = 0.0;
        else if (!std::isfinite(v) && fg.same(sigma_alpha, a, b) > 0.0)
          throw std::invalid_argument("liquid velocity missing on a face containing liquid");
      }
    for (int sweep = 0; sweep < fg.na + fg.nb; ++sweep) {
      std::vector<std::pair<int, int>> todo;
      for (int b = 0; b < fg.nb; ++b)
        for (int a = 1; a < fg.na; ++a)
          if (!std::isfinite(fg.same(u, a, b))) todo.emplace_back(a, b);
      if (todo.empty()) break;
      std::vector<double> vals(todo.size(), std::nan(""));
      for (size_t k = 0; k < todo.size(); ++k) {
        auto [a, b] = todo[k];
        double s = 0.0;
        int n = 0;
        const int da[4] = {-1, 1, 0, 0}, db[4] = {0, 0, -1, 1};
        for (int q = 0; q < 4; ++q) {
          int aa = a + da[q], bb = b + db[q];
          if (aa <= 0 || aa >= fg.na || bb < 0 || bb >= fg.nb) continue;
          double v = fg.same(u, aa, bb);
          if (std::isfinite(v)) { s += v; ++n; }
        }
        if (n) vals[k] = s / n;
      }
      for (size_t k = 0; k < todo.size(); ++k) {
        if (std::isfinite(vals[k])) {
          fg.same(u, todo[k].first, todo[k].second) = vals[k];
          ++pi.filled;
        }
      }
    }
    for (int b = 0; b < fg.nb; ++b)
      for (int a = 0; a <= fg.na; ++a)
        if (!std::isfinite(fg.same(u, a, b))) fg.same(u, a, b) = 0.0;
  }

  // Poisson problem on liquid cells: -D G p = -D u, p = 0 on empty cells.
  std::vector<int> index(static_cast<size_t>(m.n_cells()), -1);
  std::vector<int> cells;
  for (int c = 0; c < m.n_cells(); ++c)
    if (alpha.v[c] > 0.0) {
      index[c] = static_cast<int>(cells.size());
      cells.push_back(c);
    }
  const int n = static_cast<int>(cells.size());
  CenteredField du = div(m, u);
  double umax = max_abs(u);
  const double hmin = std::min(m.hx, m.hy);
  const double abs_tol = 1e-13 * std::max(umax, 1.0) / hmin;
  std::vector<double> rhs(static_cast<size_t>(n));
  double bnorm = 0.0, bmax = 0.0;
  for (int k = 0; k < n; ++k) {
    rhs[k] = -du.v[cells[k]];
    bnorm += rhs[k] * rhs[k];
    bmax = std::max(bmax, std::abs(rhs[k]));
  }
  bnorm = std::sqrt(bnorm);
  const bool all_liquid = n == m.n_cells();
  if (all_liquid) {
    double mean = 0.0;
    for (double v : rhs) mean += v;
    mean /= std::max(n, 1);
    for (double& v : rhs) v -= mean;
  }

  auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
    const double cx = 1.0 / (m.hx * m.hx), cy = 1.0 / (m.hy * m.hy);
    for (int k = 0; k < n; ++k) {
      int c = cells[k];
      int i = c % m.nx, j = c / m.nx;
      double xc = x[k];
      double s = 0.0;
      auto nb = [&](int ii, int jj, double coef) {
        if (ii < 0 || ii >= m.nx || jj < 0 || jj >= m.ny) return;  // wall: no flux
        int q = index[m.cell_id(ii, jj)];
        double xn = q >= 0 ? x[q] : 0.0;
        s += coef * (xc - xn);
      };
      nb(i - 1, j, cx);
      nb(i + 1, j, cx);
      nb(i, j - 1, cy);
      nb(i, j + 1, cy);
      y[k] = s;
    }
  };

  std::vector<double> p(static_cast<size_t>(n), 0.0);
  if (n > 0 && bmax > abs_tol) {
    std::vector<double> r = rhs, z(static_cast<size_t>(n)), q(static_cast<size_t>(n));
    std::vector<double> dir = r;
    double rr = 0.0;
    for (double v : r) rr += v * v;
    const double target = 1e-12 * bnorm;
    const int max_iter = 10 * n;
    int it = 0;
    while (it < max_iter) {
      double rinf = 0.0;
      for (double v : r) rinf = std::max(rinf, std::abs(v));
      if (std::sqrt(rr) <= target || rinf <= abs_tol) break;
      apply(dir, q);
      double dq = 0.0;
      for (int k = 0; k < n; ++k) dq += dir[k] * q[k];
      if (!(dq > 0.0)) break;
      double a = rr / dq;
      for (int k = 0; k < n; ++k) {
        p[k] += a * dir[k];
        r[k] -= a * q[k];
      }
      double rr_new = 0.0;
      for (double v : r) rr_new += v * v;
      for (int k = 0; k < n; ++k) dir[k] = r[k] + (rr_new / rr) * dir[k];
      rr = rr_new;
      ++it;
    }
    pi.iterations = it;
    pi.residual = std::sqrt(rr) / std::max(bnorm, 1e-300);
    if (it >= max_iter) {
      std::ostringstream os;
      os << "projection CG did not converge: relative residual " << pi.residual;
      throw std::runtime_error(os.str());
    }
  }
  CenteredField pf(m);
  for (int k = 0; k < n; ++k) pf.v[cells[k]] = p[k];
  FaceField gp = grad(m, pf);
  for (size_t k = 0; k < u.x.size(); ++k) u.x[k] -= gp.x[k];
  for (size_t k = 0; k < u.y.size(); ++k) u.y[k] -= gp.y[k];

  CenteredField dd = div(m, u);
  for (int c : cells) pi.max_div = std::max(pi.max_div, std::abs(dd.v[c]));
  if (info) *info = pi;
  return u;
}

VofResult advect_vof_two_velocity(const SimState& s, const FaceField& u_l, const FaceField& u_g, double dt,
                                  const TransportParams& p, ProjectionInfo* proj) {
  const Mesh& m = s.mesh;
  VofResult r;
  r.plic = reconstruct_normals(m, s.alpha, p.plic);
  FaceField uhat = project_liquid_velocity(m, u_l, s.alpha, interp_c2f(m, s.alpha), proj);
  std::vector<DonatingRegion> drs_l = build_all_drs(m, uhat, dt, DrKind::Memfpa);
  if (p.audit) {
    r.diag.audit = audit_fluxing_errors(m, drs_l, uhat, dt);
    r.diag.audited = true;
  }
  auto tl = std::make_shared<const PartialFluxTable>(partial_fluxes(m, drs_l, r.plic, dt));
  drs_l.clear();
  std::vector<DonatingRegion> drs_g = build_all_drs(m, u_g, dt, p.gas_regions);
  auto tg = std::make_shared<const PartialFluxTable>(partial_fluxes(m, drs_g, r.plic, dt));
  r.diag.degenerate = tl->degenerate;
  r.bundle[kLiquid] = make_bundle(m, tl, kLiquid, s.rho[kLiquid], uhat);
  r.bundle[kGas] = make_bundle(m, tg, kGas, s.rho[kGas], u_g);
  CenteredField gas_n(m);
  for (size_t k = 0; k < gas_n.v.size(); ++k) gas_n.v[k] = 1.0 - s.alpha.v[k];
  vof_update(m, s.alpha, r.bundle[kLiquid], dt, r.alpha_star[kLiquid]);
  vof_update(m, gas_n, r.bundle[kGas], dt, r.alpha_star[kGas]);
  vof_checks(m, s, r, dt);
  return r;
}

Theta theta_interpolants(const Mesh& m, const FaceField& phi, const std::vector<char>& avail, const GRef& g,
                         Vec2 u_g, double dt) {
  FamilyGeom fg(m, g.d);
  const double ua = fg.along(u_g), ub = fg.across(u_g);
  Theta th;
  auto value = [&](int a, int b, double& v) {
    if (a < 0 || a > fg.na || b < 0 || b >= fg.nb) return false;
    if (!avail[same_gid(m, g.d, a, b)]) return false;
    v = fg.same(phi, a, b);
    return true;
  };
  // Linear interpolation along a plane of same-family faces at positions
  // lo + k*step, k in [0, count).
  auto along_plane = [&](auto get, double coord, double lo, double step, int count, double& v) {
    double r = (coord - lo) / step;
    int k0 = static_cast<int>(std::floor(r));
    double w = r - k0;
    if (k0 < 0) { k0 = 0; w = 0.0; }
    if (k0 >= count - 1) { k0 = count - 1; w = 0.0; }
    double v0 = 0, v1 = 0;
    bool ok0 = get(k0, v0);
    bool ok1 = w > 0.0 ? get(k0 + 1, v1) : false;
    if (ok0 && ok1) { v = (1.0 - w) * v0 + w * v1; return true; }
    if (ok0) { v = v0; return true; }
    if (ok1) { v = v1; return true; }
    return false;
  };

  if (g.kind == 0) {
    const int p = g.a, b = g.b;
    const int s = ua >= 0.0 ? 1 : -1;
    const int a0 = s > 0 ? p : p - 1;
    const double xa = (p - 0.5) * fg.ha, xb = (b + 0.5) * fg.hb;
    const double ca = xa - 0.5 * dt * ua, cb = xb - 0.5 * dt * ub;
    const double fa = a0 * fg.ha, fb = xb;
    th.ok0 = value(a0, b, th.t0);
    double pa[3] = {fa, 0, 0}, pb[3] = {fb, 0, 0};
    auto plane = [&](int level, int slot, double& v) {
      if (level < 0 || level > fg.na) return false;
      double t = (level * fg.ha - fa) / (ca - fa);
      pa[slot] = level * fg.ha;
      pb[slot] = fb + t * (cb - fb);
      auto get = [&](int k, double& out) { return value(level, k, out); };
      return along_plane(get, pb[slot], 0.5 * fg.hb, fg.hb, fg.nb, v);
    };
    th.ok1 = plane(s > 0 ? p - 1 : p, 1, th.t1);
    th.ok2 = plane(s > 0 ? p - 2 : p + 1, 2, th.t2);
    th.d01 = std::hypot(pa[1] - pa[0], pb[1] - pb[0]);
    th.d12 = std::hypot(pa[2] - pa[1], pb[2] - pb[1]);
  } else {
    const int a = g.a, q = g.b;
    const int s = ub >= 0.0 ? 1 : -1;
    const int b0 = s > 0 ? q : q - 1;
    const double xa = a * fg.ha, xb = q * fg.hb;
    const double ca = xa - 0.5 * dt * ua, cb = xb - 0.5 * dt * ub;
    const double fa = xa, fb = (b0 + 0.5) * fg.hb;
    th.ok0 = value(a, b0, th.t0);
    double pa[3] = {fa, 0, 0}, pb[3] = {fb, 0, 0};
    auto plane = [&](int level, int slot, double& v) {
      if (level < 0 || level >= fg.nb) return false;
      double t = ((level + 0.5) * fg.hb - fb) / (cb - fb);
      pb[slot] = (level + 0.5) * fg.hb;
      pa[slot] = fa + t * (ca - fa);
      auto get = [&](int k, double& out) { return value(k, level, out); };
      return along_plane(get, pa[slot], 0.0, fg.ha, fg.na + 1, v);
    };
    th.ok1 = plane(s > 0 ? q - 1 : q, 1, th.t1);
    th.ok2 = plane(s > 0 ? q - 2 : q + 1, 2, th.t2);
    th.d01 = std::hypot(pa[1] - pa[0], pb[1] - pb[0]);
    th.d12 = std::hypot(pa[2] - pa[1], pb[2] - pb[1]);
  }
  return th;
}

double flux_interpolant(FluxMethod method, double kappa, const Theta& th) {
  const double d0 = th.t0 - th.t1;
  const double w = 0.5 * (1.0 - kappa);
  switch (method) {
    case FluxMethod::Upwind: return th.t1;
    case FluxMethod::CTU:
    case FluxMethod::LW: return th.t1 + w * d0;
    case FluxMethod::Fromm:
    case FluxMethod::MC: {
      if (!th.ok2) return th.t1 + w * d0;
      const double d1 = (th.t1 - th.t2) * (th.d01 / th.d12);
      double slope;
      if (method == FluxMethod::Fromm) {
        slope = 0.5 * (d0 + d1);
      } else if (d0 * d1 <= 0.0) {
        slope = 0.0;
      } else {
        slope = std::copysign(std::min({0.5 * std::abs(d0 + d1), 2.0 * std::abs(d0), 2.0 * std::abs(d1)}), d0);
      }
      return th.t1 + w * slope;
    }
  }
  return th.t1;
}

void interpolated_partials(const Mesh& m, const PartialFluxTable& t, int phase, const GRef& g,
                           std::vector<StagPartial>& out) {
  out.clear();
  FamilyGeom fg(m, g.d);
  int hs[2], nh = 0;
  int k0a = g.a, k0b = g.b;
  double w = 0.0;
  bool cross_faces = g.kind == 1;
  if (g.kind == 0) {
    w = 0.5 * fg.same_area() / fg.center_g_area();
    for (int ha : {g.a - 1, g.a})
      if (ha > 0 && ha < fg.na) hs[nh++] = ha;
  } else {
    if (g.b <= 0 || g.b >= fg.nb) return;
    w = 0.5 * fg.cross_area() / fg.corner_g_area(g.a);
    for (int ha : {g.a - 1, g.a})
      if (ha >= 0 && ha < fg.na) hs[nh++] = ha;
  }
  const int hb = g.b;
  for (int k = 0; k < nh; ++k) {
    const int ha = hs[k];
    const int gid = cross_faces ? cross_gid(m, g.d, ha, hb) : same_gid(m, g.d, ha, hb);
    for (int e = t.begin(gid); e < t.end(gid); ++e) {
      double v = phase == kLiquid ? t.liquid[e] : t.gas[e];
      if (v == 0.0) continue;
      int ca, cb;
      cell_local(m, g.d, t.cell[e], ca, cb);
      int ka = ca - ha + k0a, kb = cb - hb + k0b;
      if (ka < 0 || ka > fg.na || kb < 0 || kb >= fg.nb) continue;
      int kg = same_gid(m, g.d, ka, kb);
      auto it = std::find_if(out.begin(), out.end(), [&](const StagPartial& sp) { return sp.k == kg; });
      if (it == out.end()) out.push_back({kg, w * v});
      else it->v += w * v;
    }
  }
}

double ctu_flux(const Mesh& m, const PartialFluxTable& t, int phase, const GRef& g, const FaceField& phi) {
  std::vector<StagPartial> parts;
  interpolated_partials(m, t, phase, g, parts);
  double s = 0.0;
  for (const auto& sp : parts) s += sp.v * gid_value(m, phi, sp.k);
  return s;
}

MomentumResult advect_momentum_phase(const Mesh& m, const PhaseState& ph, const std::vector<char>& avail,
                                     const FluxBundle& bundle, const FaceField& sigma_star, double dt,
                                     const TransportParams& p) {
  const double rho = bundle.rho;
  const PartialFluxTable& table = *bundle.table;
  const bool force_ctu = p.method == FluxMethod::CTU;
  MomentumResult res;
  res.phi = ph.phi;
  res.momentum = FaceField(m);
  res.defined.assign(static_cast<size_t>(n_faces(m)), 0);
  auto& dg = res.diag;

  StagFaceField vt = interp_f2g(m, bundle.volume_flux);
  StagFaceField fv(m, 0.0);
  VertexVelocities vv = vertex_velocities(m, bundle.velocity);
  std::vector<StagPartial> parts;

  auto ctu_value = [&](const GRef& g) {
    interpolated_partials(m, table, bundle.phase, g, parts);
    double s = 0.0;
    for (const auto& sp : parts) s += sp.v * gid_value(m, ph.phi, sp.k);
    return s;
  };

  for (int d = 0; d < 2; ++d) {
    FamilyGeom fg(m, d);
    auto sig = [&](int a, int b) { return fg.same(sigma_star, a, b); };
    const auto& u = bundle.velocity;
    auto& vtf = vt.fam[d];
    auto& fvf = fv.fam[d];
    // centre-located g; the two at the walls carry no flux
    for (int b = 0; b < fg.nb; ++b) {
      for (int pidx = 1; pidx <= fg.na; ++pidx) {
        GRef g{d, 0, pidx, b};
        bool ctu = force_ctu || std::min(sig(pidx - 1, b), sig(pidx, b)) < p.beta;
        double val = 0.0;
        if (!ctu) {
          double ua = 0.5 * (fg.same(u, pidx - 1, b) + fg.same(u, pidx, b));
          double ub = 0.5 * (fg.cross(u, pidx - 1, b) + fg.cross(u, pidx - 1, b + 1));
          Theta th = theta_interpolants(m, ph.phi, avail, g, fg.to_xy(ua, ub), dt);
          if (th.ok0 && th.ok1) {
            double kappa = std::abs(dt * vtf.c(pidx, b) / fg.center_g_h());
            double un = vtf.c(pidx, b);
            // the advecting velocity sets kappa; the phase volume flux carries the value
            kappa = std::abs(dt * ua / fg.center_g_h());
            val = un * flux_interpolant(p.method, kappa, th);
            ++dg.high_order_faces;
          } else {
            ctu = true;
          }
        }
        if (ctu) {
          val = ctu_value(g);
          ++dg.ctu_faces;
        }
        fvf.c(pidx, b) = val;
      }
    }
    // corner-located g; rows on the walls carry no flux
    for (int q = 1; q < fg.nb; ++q) {
      for (int a = 0; a <= fg.na; ++a) {
        GRef g{d, 1, a, q};
        bool ctu = force_ctu || std::min(sig(a, q - 1), sig(a, q)) < p.beta;
        double val = 0.0;
        if (!ctu) {
          Vec2 uv = d == 0 ? vv(a, q) : vv(q, a);
          Theta th = theta_interpolants(m, ph.phi, avail, g, uv, dt);
          if (th.ok0 && th.ok1) {
            double kappa = std::abs(dt * fg.across(uv) / fg.corner_g_h());
            val = vtf.k(a, q) * flux_interpolant(p.method, kappa, th);
            ++dg.high_order_faces;
          } else {
            ctu = true;
          }
        }
        if (ctu) {
          val = ctu_value(g);
          ++dg.ctu_faces;
        }
        fvf.k(a, q) = val;
      }
    }
  }

  std::vector<StagPartial> acc;
  for (int d = 0; d < 2; ++d) {
    FamilyGeom fg(m, d);
    const auto& vtf = vt.fam[d];
    const auto& fvf = fv.fam[d];
    for (int b = 0; b < fg.nb; ++b) {
      for (int a = 0; a <= fg.na; ++a) {
        const int gid = same_gid(m, d, a, b);
        const double omega = fg.stag_volume(a);
        const double gc = fg.center_g_area(), gk = fg.corner_g_area(a);
        const double phi_n = fg.same(ph.phi, a, b);
        const double mass_n = fg.same(ph.mass, a, b);
        const double smass = gc * (vtf.c(a + 1, b) - vtf.c(a, b)) + gk * (vtf.k(a, b + 1) - vtf.k(a, b));
        const double smom = gc * (fvf.c(a + 1, b) - fvf.c(a, b)) + gk * (fvf.k(a, b + 1) - fvf.k(a, b));
        const double mass_flux_form = mass_n - dt * rho * smass / omega;
        const double mom = mass_n * phi_n - dt * rho * smom / omega;
        const double sstar = fg.same(sigma_star, a, b);
        const double mstar = rho * sstar;
        fg.same(res.momentum, a, b) = mom;
        dg.sync_residual = std::max(dg.sync_residual, std::abs(mass_flux_form - mstar));

        double phi_new = phi_n;
        bool defined = false;
        if (force_ctu || sstar < p.beta) {
          // All faces of this control volume use CTU: write the update as a
          // weighted combination of the donor values.
          acc.clear();
          const GRef gs[4] = {{d, 0, a, b}, {d, 0, a + 1, b}, {d, 1, a, b}, {d, 1, a, b + 1}};
          const double og[4] = {-1, 1, -1, 1};
          const double ag[4] = {gc, gc, gk, gk};
          for (int k = 0; k < 4; ++k) {
            interpolated_partials(m, table, bundle.phase, gs[k], parts);
            for (const auto& sp : parts) {
              double wv = -dt / omega * og[k] * ag[k] * sp.v;
              auto it = std::find_if(acc.begin(), acc.end(), [&](const StagPartial& x) { return x.k == sp.k; });
              if (it == acc.end()) acc.push_back({sp.k, wv});
              else it->v += wv;
            }
          }
          double own = mass_n / rho;
          double num = 0.0, den = 0.0;
          for (const auto& x : acc) {
            if (x.k == gid) {
              own += x.v;
              continue;
            }
            dg.min_weight = std::min(dg.min_weight, x.v);
            if (x.v > 0.0) {
              num += x.v * gid_value(m, ph.phi, x.k);
              den += x.v;
            }
          }
          dg.min_weight = std::min(dg.min_weight, own);
          if (own > 0.0) {
            num += own * phi_n;
            den += own;
          }
          if (den > 0.0) {
            phi_new = num / den;
            defined = true;
          }
          if (defined && avail[gid] && mass_n > 0.0) {
            double bound = 0.0;
            for (int db = -1; db <= 1; ++db)
              for (int da = -1; da <= 1; ++da) {
                int aa = a + da, bb = b + db;
                if (aa < 0 || aa > fg.na || bb < 0 || bb >= fg.nb) continue;
                if (!avail[same_gid(m, d, aa, bb)]) continue;
                bound = std::max(bound, std::abs(fg.same(ph.phi, aa, bb) - phi_n));
              }
            dg.lemma2_excess = std::max(dg.lemma2_excess, std::abs(phi_new - phi_n) - bound);
          }
        } else if (mstar > 0.0) {
          phi_new = mom / mstar;
          defined = true;
          if (avail[gid]) {
            double vals[4] = {vtf.c(a, b), vtf.c(a + 1, b), vtf.k(a, b), vtf.k(a, b + 1)};
            double fl[4] = {fvf.c(a, b), fvf.c(a + 1, b), fvf.k(a, b), fvf.k(a, b + 1)};
            double worst = 0.0;
            for (int k = 0; k < 4; ++k)
              if (vals[k] != 0.0) worst = std::max(worst, std::abs(fl[k] / vals[k] - phi_n));
            double bound = 2.0 * p.cfl / p.beta * worst;
            dg.lemma3_excess = std::max(dg.lemma3_excess, std::abs(phi_new - phi_n) - bound);
          }
        }
        if (!std::isfinite(phi_new)) {
          ++dg.nonfinite;
          phi_new = phi_n;
          defined = false;
        }
        fg.same(res.phi, a, b) = phi_new;
        res.defined[gid] = defined ? 1 : 0;
      }
    }
  }
  return res;
}

std::vector<char> phase_available(const SimState& s, int phase, Model model) {
  std::vector<char> av(static_cast<size_t>(n_faces(s.mesh)), 1);
  if (model == Model::One) return av;
  const FaceField& mass = s.phase[phase].mass;
  for (int k = 0; k < s.mesh.n_xfaces(); ++k) av[k] = mass.x[k] > 0.0;
  for (int k = 0; k < s.mesh.n_yfaces(); ++k) av[s.mesh.n_xfaces() + k] = mass.y[k] > 0.0;
  return av;
}

StepReport advance(SimState& s, const FaceField& u_l, const FaceField& u_g, double dt, const TransportParams& p) {
  const Mesh& m = s.mesh;
  StepReport rep;
  rep.dt = dt;
  rep.max_kappa = compute_cfl(m, u_l, dt).max_kappa;
  if (p.model == Model::Two) rep.max_kappa = std::max(rep.max_kappa, compute_cfl(m, u_g, dt).max_kappa);
  if (rep.max_kappa > p.cfl * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "CFL " << rep.max_kappa << " exceeds " << p.cfl << "; required dt <= " << dt * p.cfl / rep.max_kappa;
    violation(s, os.str());
  }

  VofResult vof = p.model == Model::One ? advect_vof_one_velocity(s, u_l, dt, p)
                                        : advect_vof_two_velocity(s, u_l, u_g, dt, p, &rep.projection);
  rep.vof = vof.diag;
  const auto& vd = vof.diag;
  if (vd.alpha_min < -1e-12 || vd.alpha_max > 1.0 + 1e-12) {
    std::ostringstream os;
    os << std::setprecision(17) << "volume fraction out of bounds: [" << vd.alpha_min << ", " << vd.alpha_max << "]";
    violation(s, os.str());
  }
  if (vd.outflow_excess > 1e-12) violation(s, "outflow exceeds content by " + std::to_string(vd.outflow_excess));
  if (vd.inflow_excess > 1e-12) violation(s, "inflow exceeds new content by " + std::to_string(vd.inflow_excess));

  FaceField sigma_star[2];
  MomentumResult mom[2];
  for (int ph = 0; ph < 2; ++ph) {
    sigma_star[ph] = interp_c2f(m, vof.alpha_star[ph]);
    std::vector<char> avail = phase_available(s, ph, p.model);
    mom[ph] = advect_momentum_phase(m, s.phase[ph], avail, vof.bundle[ph], sigma_star[ph], dt, p);
    rep.mom[ph] = mom[ph].diag;
    const auto& md = mom[ph].diag;
    if (md.sync_residual > 1e-13 * s.rho[ph]) violation(s, "staggered mass out of sync with centred mass");
    if (md.nonfinite > 0) violation(s, "non-finite staggered velocity");
    if (p.assert_lemma2 && md.lemma2_excess > 1e-12)
      violation(s, "CTU update bound exceeded by " + std::to_string(md.lemma2_excess));
    if (p.assert_lemma3 && md.lemma3_excess > 1e-12)
      violation(s, "modified-interpolant bound exceeded by " + std::to_string(md.lemma3_excess));
  }

  for (auto& a : s.alpha.v) {
    a = vof.alpha_star[kLiquid].v[&a - s.alpha.v.data()];
    a = std::clamp(a, 0.0, 1.0);
    if (a < kAlphaEps) a = 0.0;
  }
  sync_masses(s);

  if (p.model == Model::One) {
    FaceField merged(m);
    auto merge = [&](std::vector<double>& out, int fam) {
      for (size_t k = 0; k < out.size(); ++k) {
        double num = 0.0, den = 0.0;
        for (int ph = 0; ph < 2; ++ph) {
          const auto& ss = fam == 0 ? sigma_star[ph].x : sigma_star[ph].y;
          const auto& phi = fam == 0 ? mom[ph].phi.x : mom[ph].phi.y;
          const auto& mass = fam == 0 ? s.phase[ph].mass.x : s.phase[ph].mass.y;
          num += s.rho[ph] * ss[k] * phi[k];
          den += mass[k];
        }
        out[k] = num / den;
      }
    };
    merge(merged.x, 0);
    merge(merged.y, 1);
    s.phase[kLiquid].phi = merged;
    s.phase[kGas].phi = merged;
  } else {
    for (int ph = 0; ph < 2; ++ph) s.phase[ph].phi = mom[ph].phi;
  }
  s.t += dt;
  ++s.step;
  return rep;
}

double total_liquid_volume(const SimState& s) {
  double v = 0.0;
  for (double a : s.alpha.v) v += a;
  return v * s.mesh.cell_volume();
}

double total_mass(const SimState& s, int phase) {
  FaceField one(s.mesh, 1.0);
  return inner_faces(s.mesh, s.phase[phase].mass, one);
}

Vec2 total_momentum(const SimState& s, int phase) {
  const Mesh& m = s.mesh;
  Vec2 r;
  const auto& ph = s.phase[phase];
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i <= m.nx; ++i) r.x += m.xface_stag_volume(i) * ph.mass.xf(i, j) * ph.phi.xf(i, j);
  for (int j = 0; j <= m.ny; ++j)
    for (int i = 0; i < m.nx; ++i) r.y += m.yface_stag_volume(j) * ph.mass.yf(i, j) * ph.phi.yf(i, j);
  return r;
}

double kinetic_energy(const SimState& s, int phase) {
  const auto& ph = s.phase[phase];
  return 0.5 * inner_faces(s.mesh, ph.mass, multiply(ph.phi, ph.phi));
}

}  // namespace vofflux
