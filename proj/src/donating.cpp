#include "vofflux/donating.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace vofflux {

int n_faces(const Mesh& m) { return m.n_xfaces() + m.n_yfaces(); }

int face_gid(const Mesh& m, const FaceRef& f) {
  return f.fam == 0 ? m.xface_id(f.i, f.j) : m.n_xfaces() + m.yface_id(f.i, f.j);
}

FaceRef face_from_gid(const Mesh& m, int gid) {
  if (gid < m.n_xfaces()) return {0, gid % (m.nx + 1), gid / (m.nx + 1)};
  int k = gid - m.n_xfaces();
  return {1, k % m.nx, k / m.nx};
}

bool on_boundary(const Mesh& m, const FaceRef& f) {
  return f.fam == 0 ? m.xface_on_boundary(f.i) : m.yface_on_boundary(f.j);
}

double face_value(const FaceField& u, const FaceRef& f) { return f.fam == 0 ? u.xf(f.i, f.j) : u.yf(f.i, f.j); }

double face_area(const Mesh& m, const FaceRef& f) { return f.fam == 0 ? m.hy : m.hx; }

Vec2 face_center(const Mesh& m, const FaceRef& f) {
  return f.fam == 0 ? m.xface_center(f.i, f.j) : m.yface_center(f.i, f.j);
}

Vec2 face_normal(const FaceRef& f) { return f.fam == 0 ? Vec2{1, 0} : Vec2{0, 1}; }

void face_vertices(const Mesh& m, const FaceRef& f, int& v1, int& v2) {
  if (f.fam == 0) {
    v1 = m.vertex_id(f.i, f.j);
    v2 = m.vertex_id(f.i, f.j + 1);
  } else {
    v1 = m.vertex_id(f.i + 1, f.j);
    v2 = m.vertex_id(f.i, f.j);
  }
}

namespace {

Vec2 vertex_pos(const Mesh& m, int vid) { return m.vertex(vid % (m.nx + 1), vid / (m.nx + 1)); }

double drop_tol(const Mesh& m) { return 1e-14 * m.hx * m.hy; }

}  // namespace

VertexVelocities vertex_velocities(const Mesh& m, const FaceField& u) {
  VertexVelocities vv;
  vv.nx = m.nx;
  vv.ny = m.ny;
  vv.v.resize(static_cast<size_t>(m.n_vertices()));
  for (int j = 0; j <= m.ny; ++j) {
    for (int i = 0; i <= m.nx; ++i) {
      Vec2 w;
      if (i > 0 && i < m.nx) {
        if (j == 0) w.x = u.xf(i, 0);
        else if (j == m.ny) w.x = u.xf(i, m.ny - 1);
        else w.x = 0.5 * (u.xf(i, j - 1) + u.xf(i, j));
      }
      if (j > 0 && j < m.ny) {
        if (i == 0) w.y = u.yf(0, j);
        else if (i == m.nx) w.y = u.yf(m.nx - 1, j);
        else w.y = 0.5 * (u.yf(i - 1, j) + u.yf(i, j));
      }
      vv.v[m.vertex_id(i, j)] = w;
    }
  }
  return vv;
}

std::vector<Vec2> remap_vertices(const Mesh& m, const VertexVelocities& vv, double dt) {
  std::vector<Vec2> out(vv.v.size());
  for (int j = 0; j <= m.ny; ++j)
    for (int i = 0; i <= m.nx; ++i) {
      int id = m.vertex_id(i, j);
      out[id] = m.vertex(i, j) - dt * vv.v[id];
    }
  return out;
}

DonatingRegion build_dr_plain(const Mesh& m, const FaceRef& f, const std::vector<Vec2>& remapped) {
  DonatingRegion dr;
  dr.face = f;
  face_vertices(m, f, dr.v1, dr.v2);
  dr.corner1 = remapped[dr.v1];
  dr.corner2 = remapped[dr.v2];
  dr.loop = {vertex_pos(m, dr.v1), vertex_pos(m, dr.v2), dr.corner2, dr.corner1};
  dr.tris = decompose_region(dr.loop, face_center(m, f), drop_tol(m));
  return dr;
}

DonatingRegion build_dr_memfpa(const Mesh& m, const FaceRef& f, const std::vector<Vec2>& remapped, double dt,
                               double u_face) {
  DonatingRegion dr;
  dr.face = f;
  face_vertices(m, f, dr.v1, dr.v2);
  dr.corner1 = remapped[dr.v1];
  dr.corner2 = remapped[dr.v2];
  Vec2 x1 = vertex_pos(m, dr.v1), x2 = vertex_pos(m, dr.v2);
  Vec2 d = dr.corner1 - dr.corner2;
  double len = norm(d);
  if (len <= 1e-14 * std::max(m.hx, m.hy)) {
    dr.loop = {x1, x2, dr.corner2, dr.corner1};
    dr.degenerate = true;
  } else {
    double quad = shoelace_area({x1, x2, dr.corner2, dr.corner1});
    double target = dt * face_area(m, f) * u_face;
    double t = 2.0 * (target - quad) / len;
    Vec2 nstar{d.y / len, -d.x / len};
    Vec2 fifth = 0.5 * (dr.corner1 + dr.corner2) + t * nstar;
    dr.loop = {x1, x2, dr.corner2, fifth, dr.corner1};
    dr.dt_star = t;
    dr.enforced = true;
  }
  dr.tris = decompose_region(dr.loop, face_center(m, f), drop_tol(m));
  return dr;
}

DonatingRegion build_dr_emfpa(const Mesh& m, const FaceRef& f, const VertexVelocities& vv,
                              const std::vector<Vec2>& remapped, double dt, double u_face) {
  DonatingRegion dr;
  dr.face = f;
  face_vertices(m, f, dr.v1, dr.v2);
  Vec2 x1 = vertex_pos(m, dr.v1), x2 = vertex_pos(m, dr.v2);
  Vec2 p1 = remapped[dr.v1], p2 = remapped[dr.v2];
  Vec2 u1 = vv.v[dr.v1], u2 = vv.v[dr.v2];
  Vec2 e = p2 - p1;
  // per-face extra times dt1 = lam*c2, dt2 = lam*c1 keep the remapped edge parallel
  double c1 = cross(e, u1), c2 = cross(e, u2);
  auto area = [&](double lam) {
    Vec2 q1 = p1 - (lam * c2) * u1;
    Vec2 q2 = p2 - (lam * c1) * u2;
    return shoelace_area({x1, x2, q2, q1});
  };
  double target = dt * face_area(m, f) * u_face;
  double a0 = area(0.0), ap = area(1.0), am = area(-1.0);
  double B = 0.5 * (ap - am);
  double C = 0.5 * (ap + am) - a0;
  double rhs = target - a0;
  double lam = 0.0;
  if (std::abs(C) > 1e-300) {
    double disc = B * B + 4.0 * C * rhs;
    if (disc >= 0.0) {
      double sq = std::sqrt(disc);
      double r1 = (-B + sq) / (2.0 * C), r2 = (-B - sq) / (2.0 * C);
      lam = std::abs(r1) < std::abs(r2) ? r1 : r2;
      dr.enforced = true;
    }
  } else if (std::abs(B) > 1e-300) {
    lam = rhs / B;
    dr.enforced = true;
  }
  dr.corner1 = p1 - (lam * c2) * u1;
  dr.corner2 = p2 - (lam * c1) * u2;
  dr.loop = {x1, x2, dr.corner2, dr.corner1};
  dr.tris = decompose_region(dr.loop, face_center(m, f), drop_tol(m));
  return dr;
}

DonatingRegion build_dr_plain(const Mesh& m, const FaceRef& f, const FaceField& u, double dt) {
  return build_dr_plain(m, f, remap_vertices(m, vertex_velocities(m, u), dt));
}

DonatingRegion build_dr_memfpa(const Mesh& m, const FaceRef& f, const FaceField& u, double dt) {
  return build_dr_memfpa(m, f, remap_vertices(m, vertex_velocities(m, u), dt), dt, face_value(u, f));
}

std::vector<DonatingRegion> build_all_drs(const Mesh& m, const FaceField& u, double dt, DrKind kind) {
  VertexVelocities vv = vertex_velocities(m, u);
  std::vector<Vec2> remapped = remap_vertices(m, vv, dt);
  std::vector<DonatingRegion> drs(static_cast<size_t>(n_faces(m)));
  for (int gid = 0; gid < n_faces(m); ++gid) {
    FaceRef f = face_from_gid(m, gid);
    if (on_boundary(m, f)) {
      drs[gid].face = f;
      continue;
    }
    switch (kind) {
      case DrKind::Plain: drs[gid] = build_dr_plain(m, f, remapped); break;
      case DrKind::Memfpa: drs[gid] = build_dr_memfpa(m, f, remapped, dt, face_value(u, f)); break;
      case DrKind::Emfpa: drs[gid] = build_dr_emfpa(m, f, vv, remapped, dt, face_value(u, f)); break;
    }
  }
  return drs;
}

PartialRow partial_fluxes_row(const Mesh& m, const DonatingRegion& dr, const PlicState& plic, double dt) {
  PartialRow row;
  if (dr.tris.empty()) return row;
  double x0 = dr.loop[0].x, x1 = x0, y0 = dr.loop[0].y, y1 = y0;
  for (const auto& p : dr.loop) {
    x0 = std::min(x0, p.x); x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y); y1 = std::max(y1, p.y);
  }
  int i0 = std::max(0, static_cast<int>(std::floor(x0 / m.hx)));
  int i1 = std::min(m.nx - 1, static_cast<int>(std::floor(x1 / m.hx)));
  int j0 = std::max(0, static_cast<int>(std::floor(y0 / m.hy)));
  int j1 = std::min(m.ny - 1, static_cast<int>(std::floor(y1 / m.hy)));
  const double scale = 1.0 / (dt * face_area(m, dr.face));
  const int ni = i1 - i0 + 1, nj = j1 - j0 + 1;
  struct Acc {
    double vc, vl;
    bool touched, hp_ready;
    HalfPlane hp;
  };
  static thread_local std::vector<Acc> acc;
  acc.assign(static_cast<size_t>(ni * nj), Acc{0.0, 0.0, false, false, {}});
  for (const auto& t : dr.tris.tris) {
    double tx0 = std::min({t.p[0].x, t.p[1].x, t.p[2].x}), tx1 = std::max({t.p[0].x, t.p[1].x, t.p[2].x});
    double ty0 = std::min({t.p[0].y, t.p[1].y, t.p[2].y}), ty1 = std::max({t.p[0].y, t.p[1].y, t.p[2].y});
    int a0 = std::max(i0, static_cast<int>(std::floor(tx0 / m.hx)));
    int a1 = std::min(i1, static_cast<int>(std::floor(tx1 / m.hx)));
    int b0 = std::max(j0, static_cast<int>(std::floor(ty0 / m.hy)));
    int b1 = std::min(j1, static_cast<int>(std::floor(ty1 / m.hy)));
    if (a0 > i0 && tx0 < a0 * m.hx) --a0;
    if (a1 < i1 && tx1 > (a1 + 1) * m.hx) ++a1;
    if (b0 > j0 && ty0 < b0 * m.hy) --b0;
    if (b1 < j1 && ty1 > (b1 + 1) * m.hy) ++b1;
    for (int j = b0; j <= b1; ++j) {
      for (int i = a0; i <= a1; ++i) {
        Acc& c = acc[static_cast<size_t>((j - j0) * ni + (i - i0))];
        const PlicCell& pc = plic(i, j);
        const HalfPlane* php = nullptr;
        if (pc.kind == CellKind::Interface) {
          if (!c.hp_ready) {
            c.hp = liquid_halfplane(pc, m.cell_center(i, j));
            c.hp_ready = true;
          }
          php = &c.hp;
        }
        Rect cell{i * m.hx, (i + 1) * m.hx, j * m.hy, (j + 1) * m.hy};
        ClipAreas a = clip_triangle_areas(t, cell, php);
        if (a.cell == 0.0) continue;
        c.touched = true;
        c.vc += t.sign * a.cell;
        if (pc.kind == CellKind::Interface) c.vl += t.sign * a.phase;
        else if (pc.kind == CellKind::Full) c.vl += t.sign * a.cell;
      }
    }
  }
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const Acc& c = acc[static_cast<size_t>((j - j0) * ni + (i - i0))];
      if (!c.touched) continue;
      row.cell.push_back(m.cell_id(i, j));
      row.liquid.push_back(c.vl * scale);
      row.gas.push_back((c.vc - c.vl) * scale);
    }
  }
  return row;
}

PartialFluxTable partial_fluxes(const Mesh& m, const std::vector<DonatingRegion>& drs, const PlicState& plic,
                                double dt) {
  PartialFluxTable t;
  const int nf = n_faces(m);
  t.offset.assign(static_cast<size_t>(nf + 1), 0);
  t.total_liquid.assign(static_cast<size_t>(nf), 0.0);
  t.total_gas.assign(static_cast<size_t>(nf), 0.0);
  t.outside.assign(static_cast<size_t>(nf), 0.0);
  for (int gid = 0; gid < nf; ++gid) {
    const DonatingRegion& dr = drs[gid];
    if (dr.degenerate) ++t.degenerate;
    PartialRow row = partial_fluxes_row(m, dr, plic, dt);
    double sl = 0.0, sg = 0.0;
    for (size_t k = 0; k < row.cell.size(); ++k) {
      t.cell.push_back(row.cell[k]);
      t.liquid.push_back(row.liquid[k]);
      t.gas.push_back(row.gas[k]);
      sl += row.liquid[k];
      sg += row.gas[k];
    }
    t.offset[gid + 1] = static_cast<int>(t.cell.size());
    t.total_liquid[gid] = sl;
    t.total_gas[gid] = sg;
    if (!dr.tris.empty()) t.outside[gid] = dr.signed_area() / (dt * face_area(m, dr.face)) - sl - sg;
  }
  return t;
}

const char* to_string(FluxError e) {
  switch (e) {
    case FluxError::Overlap: return "overlap";
    case FluxError::Gap: return "gap";
    case FluxError::Transit: return "transit";
    case FluxError::Volume: return "volume";
  }
  return "unknown";
}

void AuditReport::write_csv(const std::string& path, int step, bool append) const {
  std::ofstream os(path, append ? std::ios::app : std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path);
  if (!append) os << "step,id,type,magnitude\n";
  os.precision(17);
  for (const auto& e : entries) os << step << ',' << e.id << ',' << to_string(e.type) << ',' << e.magnitude << '\n';
}

namespace {

struct OrientedParts {
  std::vector<Polygon> pos, neg;
  double x0 = 0, x1 = -1, y0 = 0, y1 = -1;
};

OrientedParts split_parts(const DonatingRegion& dr, double area_tol) {
  OrientedParts p;
  if (dr.tris.empty()) return p;
  for (Polygon& loop : split_loop(dr.loop, 1e-12)) {
    double a = shoelace_area(loop);
    if (std::abs(a) <= area_tol) continue;
    (a > 0 ? p.pos : p.neg).push_back(std::move(loop));
  }
  p.x0 = p.x1 = dr.loop[0].x;
  p.y0 = p.y1 = dr.loop[0].y;
  for (const auto& v : dr.loop) {
    p.x0 = std::min(p.x0, v.x); p.x1 = std::max(p.x1, v.x);
    p.y0 = std::min(p.y0, v.y); p.y1 = std::max(p.y1, v.y);
  }
  return p;
}

double parts_overlap(const std::vector<Polygon>& a, const std::vector<Polygon>& b) {
  double s = 0.0;
  for (const auto& p : a)
    for (const auto& q : b) s += simple_intersection_area(p, q);
  return s;
}

}  // namespace

AuditReport audit_fluxing_errors(const Mesh& m, const std::vector<DonatingRegion>& drs, const FaceField& u,
                                 double dt) {
  AuditReport rep;
  const double tol = 1e-12 * m.cell_volume();
  const int nf = n_faces(m);

  std::vector<OrientedParts> parts(static_cast<size_t>(nf));
  for (int gid = 0; gid < nf; ++gid) parts[gid] = split_parts(drs[gid], 1e-3 * tol);

  for (int j = 0; j < m.ny; ++j) {
    for (int i = 0; i < m.nx; ++i) {
      FaceRef fs[4] = {{0, i, j}, {0, i + 1, j}, {1, i, j}, {1, i, j + 1}};
      int orient[4] = {-1, 1, -1, 1};
      double worst = 0.0;
      for (int a = 0; a < 4; ++a) {
        for (int b = a + 1; b < 4; ++b) {
          const OrientedParts& pa = parts[face_gid(m, fs[a])];
          const OrientedParts& pb = parts[face_gid(m, fs[b])];
          if (pa.x1 < pa.x0 || pb.x1 < pb.x0) continue;
          if (pa.x1 < pb.x0 || pb.x1 < pa.x0 || pa.y1 < pb.y0 || pb.y1 < pa.y0) continue;
          const auto& pa_rel_pos = orient[a] > 0 ? pa.pos : pa.neg;
          const auto& pa_rel_neg = orient[a] > 0 ? pa.neg : pa.pos;
          const auto& pb_rel_pos = orient[b] > 0 ? pb.pos : pb.neg;
          const auto& pb_rel_neg = orient[b] > 0 ? pb.neg : pb.pos;
          double ov = parts_overlap(pa_rel_pos, pb_rel_pos) + parts_overlap(pa_rel_neg, pb_rel_neg);
          worst = std::max(worst, ov);
        }
      }
      if (worst > tol) {
        ++rep.overlap;
        rep.entries.push_back({FluxError::Overlap, m.cell_id(i, j), worst});
      }
      rep.max_overlap = std::max(rep.max_overlap, worst);
    }
  }

  // Corner uniqueness per vertex.
  const int nv = m.n_vertices();
  std::vector<std::vector<Vec2>> corners(static_cast<size_t>(nv));
  for (int gid = 0; gid < nf; ++gid) {
    const DonatingRegion& dr = drs[gid];
    if (dr.loop.empty()) continue;
    corners[dr.v1].push_back(dr.corner1);
    corners[dr.v2].push_back(dr.corner2);
    const size_t n = dr.loop.size();
    bool adjacent = dr.loop[0].x == vertex_pos(m, dr.v1).x && dr.loop[0].y == vertex_pos(m, dr.v1).y &&
                    dr.loop[1].x == vertex_pos(m, dr.v2).x && dr.loop[1].y == vertex_pos(m, dr.v2).y &&
                    dr.loop[2].x == dr.corner2.x && dr.loop[2].y == dr.corner2.y &&
                    dr.loop[n - 1].x == dr.corner1.x && dr.loop[n - 1].y == dr.corner1.y;
    if (!adjacent) ++rep.adjacency;
  }
  const double hmax = std::max(m.hx, m.hy);
  for (int vid = 0; vid < nv; ++vid) {
    const auto& cs = corners[vid];
    if (cs.size() < 2) continue;
    Vec2 xv = vertex_pos(m, vid);
    double gap = 0.0, transit = 0.0;
    for (size_t a = 0; a < cs.size(); ++a) {
      for (size_t b = a + 1; b < cs.size(); ++b) {
        double tri = 0.5 * std::abs(cross(cs[a] - xv, cs[b] - xv));
        double dist = norm(cs[a] - cs[b]) * hmax;
        gap = std::max(gap, tri);
        transit = std::max(transit, dist);
      }
    }
    if (gap > tol) {
      ++rep.gap;
      rep.entries.push_back({FluxError::Gap, vid, gap});
    } else if (transit > tol) {
      ++rep.transit;
      rep.entries.push_back({FluxError::Transit, vid, transit});
    }
    rep.max_gap = std::max(rep.max_gap, gap);
    rep.max_transit = std::max(rep.max_transit, transit);
  }

  for (int gid = 0; gid < nf; ++gid) {
    const DonatingRegion& dr = drs[gid];
    if (!dr.enforced) continue;
    double err = std::abs(dr.signed_area() - dt * face_area(m, dr.face) * face_value(u, dr.face));
    if (err > tol) {
      ++rep.volume;
      rep.entries.push_back({FluxError::Volume, gid, err});
    }
    rep.max_volume = std::max(rep.max_volume, err);
  }
  return rep;
}

}  // namespace vofflux
