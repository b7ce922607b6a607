#include "vofflux/geom2d.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace vofflux {

namespace {

// Fixed-capacity convex polygon for the hot clipping path.
struct SmallPoly {
  std::array<Vec2, 16> v;
  int n = 0;
};

template <class Dist>
void clip_small(const SmallPoly& in, SmallPoly& out, Dist dist) {
  out.n = 0;
  if (in.n == 0) return;
  for (int k = 0; k < in.n; ++k) {
    const Vec2& p = in.v[k];
    const Vec2& q = in.v[(k + 1) % in.n];
    double dp = dist(p);
    double dq = dist(q);
    bool pin = dp <= 0.0;
    bool qin = dq <= 0.0;
    if (pin) out.v[out.n++] = p;
    if (pin != qin) {
      double t = dp / (dp - dq);
      out.v[out.n++] = p + t * (q - p);
    }
  }
  if (out.n < 3) out.n = 0;
}

double small_area(const SmallPoly& p) {
  double s = 0.0;
  for (int k = 1; k + 1 < p.n; ++k) s += cross(p.v[k] - p.v[0], p.v[k + 1] - p.v[0]);
  return 0.5 * s;
}

void clip_small_rect(SmallPoly& a, SmallPoly& b, const Rect& r) {
  clip_small(a, b, [&](Vec2 p) { return r.x0 - p.x; });
  clip_small(b, a, [&](Vec2 p) { return p.x - r.x1; });
  clip_small(a, b, [&](Vec2 p) { return r.y0 - p.y; });
  clip_small(b, a, [&](Vec2 p) { return p.y - r.y1; });
}

SmallPoly to_small(const Polygon& p) {
  SmallPoly s;
  for (const auto& v : p) s.v[s.n++] = v;
  return s;
}

}  // namespace

double SignedTriangleSet::signed_area() const {
  double s = 0.0;
  for (const auto& t : tris) s += t.sign * t.area;
  return s;
}

double shoelace_area(const Polygon& p) {
  double s = 0.0;
  for (size_t k = 1; k + 1 < p.size(); ++k) s += cross(p[k] - p[0], p[k + 1] - p[0]);
  return 0.5 * s;
}

Polygon clip_halfplane(const Polygon& p, Vec2 n, double d) {
  Polygon out;
  const size_t m = p.size();
  for (size_t k = 0; k < m; ++k) {
    const Vec2& a = p[k];
    const Vec2& b = p[(k + 1) % m];
    double da = dot(n, a) + d;
    double db = dot(n, b) + d;
    bool ain = da <= 0.0;
    bool bin = db <= 0.0;
    if (ain) out.push_back(a);
    if (ain != bin) out.push_back(a + (da / (da - db)) * (b - a));
  }
  if (out.size() < 3) out.clear();
  return out;
}

Polygon clip_rect(const Polygon& p, const Rect& r) {
  Polygon out = clip_halfplane(p, {-1, 0}, r.x0);
  out = clip_halfplane(out, {1, 0}, -r.x1);
  out = clip_halfplane(out, {0, -1}, r.y0);
  return clip_halfplane(out, {0, 1}, -r.y1);
}

SignedTriangleSet decompose_region(const Polygon& loop, Vec2 anchor, double drop_tol) {
  SignedTriangleSet out;
  const size_t n = loop.size();
  for (size_t k = 0; k < n; ++k) {
    Vec2 a = loop[k];
    Vec2 b = loop[(k + 1) % n];
    double s = 0.5 * cross(a - anchor, b - anchor);
    if (std::abs(s) < drop_tol) continue;
    SignedTriangle t;
    t.p[0] = anchor;
    if (s > 0) {
      t.p[1] = a;
      t.p[2] = b;
      t.sign = 1;
    } else {
      t.p[1] = b;
      t.p[2] = a;
      t.sign = -1;
    }
    t.area = std::abs(s);
    out.tris.push_back(t);
  }
  return out;
}

ClipAreas clip_triangle_areas(const SignedTriangle& t, const Rect& cell, const HalfPlane* phase) {
  ClipAreas r;
  double tx0 = std::min({t.p[0].x, t.p[1].x, t.p[2].x});
  double tx1 = std::max({t.p[0].x, t.p[1].x, t.p[2].x});
  double ty0 = std::min({t.p[0].y, t.p[1].y, t.p[2].y});
  double ty1 = std::max({t.p[0].y, t.p[1].y, t.p[2].y});
  if (tx1 <= cell.x0 || tx0 >= cell.x1 || ty1 <= cell.y0 || ty0 >= cell.y1) return r;

  SmallPoly a, b;
  a.n = 3;
  a.v[0] = t.p[0];
  a.v[1] = t.p[1];
  a.v[2] = t.p[2];
  if (tx0 >= cell.x0 && tx1 <= cell.x1 && ty0 >= cell.y0 && ty1 <= cell.y1) {
    r.cell = t.area;
  } else {
    clip_small_rect(a, b, cell);
    if (a.n == 0) return r;
    r.cell = small_area(a);
  }
  if (phase == nullptr) {
    r.phase = r.cell;
    return r;
  }
  clip_small(a, b, [&](Vec2 p) { return phase->eval(p); });
  r.phase = b.n ? small_area(b) : 0.0;
  return r;
}

double signed_intersection_volume(const SignedTriangleSet& r, const Rect& cell,
                                  const std::optional<HalfPlane>& phase) {
  double s = 0.0;
  for (const auto& t : r.tris) {
    ClipAreas a = clip_triangle_areas(t, cell, phase ? &*phase : nullptr);
    s += t.sign * a.phase;
  }
  return s;
}

namespace {

bool proper_intersection(Vec2 a, Vec2 b, Vec2 c, Vec2 d, double tol, Vec2& out) {
  Vec2 r = b - a;
  Vec2 s = d - c;
  double den = cross(r, s);
  if (std::abs(den) <= 1e-300) return false;
  double t = cross(c - a, s) / den;
  double u = cross(c - a, r) / den;
  if (t <= tol || t >= 1.0 - tol || u <= tol || u >= 1.0 - tol) return false;
  out = a + t * r;
  return true;
}

void split_rec(const Polygon& loop, double tol, int depth, std::vector<Polygon>& out) {
  const int n = static_cast<int>(loop.size());
  if (n < 3) return;
  if (depth < 16) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;
        Vec2 p;
        if (!proper_intersection(loop[i], loop[(i + 1) % n], loop[j], loop[(j + 1) % n], tol, p)) continue;
        Polygon a{p};
        for (int k = i + 1; k <= j; ++k) a.push_back(loop[k]);
        Polygon b{p};
        for (int k = j + 1; k < n; ++k) b.push_back(loop[k]);
        for (int k = 0; k <= i; ++k) b.push_back(loop[k]);
        split_rec(a, tol, depth + 1, out);
        split_rec(b, tol, depth + 1, out);
        return;
      }
    }
  }
  out.push_back(loop);
}

// Closed test: a vertex on the boundary of a candidate ear blocks it.
bool point_in_triangle(Vec2 p, Vec2 a, Vec2 b, Vec2 c) {
  auto same = [](Vec2 u, Vec2 v) { return u.x == v.x && u.y == v.y; };
  if (same(p, a) || same(p, b) || same(p, c)) return false;
  double d1 = cross(b - a, p - a);
  double d2 = cross(c - b, p - b);
  double d3 = cross(a - c, p - c);
  return d1 >= 0 && d2 >= 0 && d3 >= 0;
}

}  // namespace

std::vector<Polygon> split_loop(const Polygon& loop, double tol) {
  std::vector<Polygon> out;
  split_rec(loop, tol, 0, out);
  return out;
}

std::vector<SignedTriangle> triangulate_simple(const Polygon& poly) {
  std::vector<SignedTriangle> out;
  Polygon p = poly;
  if (p.size() < 3) return out;
  if (shoelace_area(p) < 0) std::reverse(p.begin(), p.end());
  std::vector<int> idx(p.size());
  for (size_t k = 0; k < p.size(); ++k) idx[k] = static_cast<int>(k);
  int guard = 0;
  while (idx.size() > 3 && guard++ < 1000) {
    const int m = static_cast<int>(idx.size());
    bool clipped = false;
    for (int k = 0; k < m; ++k) {
      Vec2 a = p[idx[(k + m - 1) % m]];
      Vec2 b = p[idx[k]];
      Vec2 c = p[idx[(k + 1) % m]];
      double cr = cross(b - a, c - b);
      if (cr < 0) continue;
      bool ear = true;
      for (int q = 0; q < m && ear; ++q) {
        if (q == k || q == (k + m - 1) % m || q == (k + 1) % m) continue;
        if (point_in_triangle(p[idx[q]], a, b, c)) ear = false;
      }
      if (!ear) continue;
      if (cr > 0) out.push_back({{a, b, c}, 1, 0.5 * cr});
      idx.erase(idx.begin() + k);
      clipped = true;
      break;
    }
    if (!clipped) break;
  }
  if (idx.size() == 3) {
    Vec2 a = p[idx[0]], b = p[idx[1]], c = p[idx[2]];
    double cr = cross(b - a, c - a);
    if (cr > 0) out.push_back({{a, b, c}, 1, 0.5 * cr});
  }
  return out;
}

double convex_intersection_area(const Polygon& a, const Polygon& b) {
  Polygon pa = a;
  Polygon pb = b;
  if (shoelace_area(pa) < 0) std::reverse(pa.begin(), pa.end());
  if (shoelace_area(pb) < 0) std::reverse(pb.begin(), pb.end());
  SmallPoly cur = to_small(pa), tmp;
  const size_t n = pb.size();
  for (size_t k = 0; k < n && cur.n; ++k) {
    Vec2 p = pb[k];
    Vec2 q = pb[(k + 1) % n];
    Vec2 e = q - p;
    // inside of a CCW edge is to its left
    clip_small(cur, tmp, [&](Vec2 x) { return -cross(e, x - p); });
    cur = tmp;
  }
  return cur.n ? std::abs(small_area(cur)) : 0.0;
}

double simple_intersection_area(const Polygon& a, const Polygon& b) {
  auto ta = triangulate_simple(a);
  auto tb = triangulate_simple(b);
  double s = 0.0;
  for (const auto& x : ta) {
    Polygon px{x.p[0], x.p[1], x.p[2]};
    for (const auto& y : tb) s += convex_intersection_area(px, {y.p[0], y.p[1], y.p[2]});
  }
  return s;
}

}  // namespace vofflux
