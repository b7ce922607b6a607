#include "vofflux/plic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vofflux {

namespace {

// Unit-square line m1*t + m2*r <= al with 0 <= m1 <= m2, m1 + m2 = 1.
double unit_volume(double m1, double m2, double al) {
  if (al <= 0.0) return 0.0;
  if (al >= 1.0) return 1.0;
  if (al > 0.5) return 1.0 - unit_volume(m1, m2, 1.0 - al);
  if (al < m1) return al * al / (2.0 * m1 * m2);
  return (al - 0.5 * m1) / m2;
}

double unit_level(double m1, double m2, double v) {
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return 1.0;
  if (v > 0.5) return 1.0 - unit_level(m1, m2, 1.0 - v);
  double v1 = m1 / (2.0 * m2);
  if (v < v1) return std::sqrt(2.0 * m1 * m2 * v);
  return m2 * v + 0.5 * m1;
}

struct Scaled {
  double a, b, m1, m2;
};

Scaled scale(Vec2 eta, double hx, double hy) {
  double a = std::abs(eta.x) * hx;
  double b = std::abs(eta.y) * hy;
  double sum = a + b;
  double m1 = a / sum;
  double m2 = b / sum;
  if (m1 > m2) std::swap(m1, m2);
  return {a, b, m1, m2};
}

Vec2 unit(double x, double y) {
  double n = std::hypot(x, y);
  return {x / n, y / n};
}

// Normal of a graph whose liquid lies on the far side of the graph axis:
// the height is measured from the opposite wall, so the slope flips too.
Vec2 flip_graph(Vec2 n, bool columns) { return columns ? Vec2{n.x, -n.y} : Vec2{-n.x, n.y}; }

}  // namespace

HalfPlane liquid_halfplane(const PlicCell& c, Vec2 center) {
  return {c.eta, c.s - dot(c.eta, center)};
}

double volume_from_shift(Vec2 eta, double s, double hx, double hy) {
  Scaled k = scale(eta, hx, hy);
  double al = 0.5 - s / (k.a + k.b);
  return unit_volume(k.m1, k.m2, al);
}

double shift_from_volume(Vec2 eta, double alpha, double hx, double hy) {
  alpha = std::clamp(alpha, 0.0, 1.0);
  Scaled k = scale(eta, hx, hy);
  double al = unit_level(k.m1, k.m2, alpha);
  return (k.a + k.b) * (0.5 - al);
}

namespace {

struct Block {
  const Mesh& m;
  const CenteredField& alpha;
  int i, j;
  bool has(int a, int b) const {
    int ii = i + a, jj = j + b;
    return ii >= 0 && ii < m.nx && jj >= 0 && jj < m.ny;
  }
  double at(int a, int b) const { return alpha(i + a, j + b); }
};

double stencil_error(const Block& blk, Vec2 eta) {
  const Mesh& m = blk.m;
  double s0 = shift_from_volume(eta, blk.at(0, 0), m.hx, m.hy);
  double err = 0.0;
  for (int b = -1; b <= 1; ++b) {
    for (int a = -1; a <= 1; ++a) {
      if (!blk.has(a, b)) continue;
      double sb = s0 + eta.x * a * m.hx + eta.y * b * m.hy;
      double pred = volume_from_shift(eta, sb, m.hx, m.hy);
      double diff = pred - blk.at(a, b);
      err += diff * diff;
    }
  }
  return err;
}

// Candidate normals from column (graph y(x)) or row (graph x(y)) sums.
void add_candidates(const Block& blk, bool columns, double gsign, std::vector<Vec2>& out) {
  const Mesh& m = blk.m;
  double sums[3];
  bool ok[3];
  for (int a = -1; a <= 1; ++a) {
    double s = 0.0;
    bool any = false;
    for (int b = -1; b <= 1; ++b) {
      int ca = columns ? a : b;
      int cb = columns ? b : a;
      if (!blk.has(ca, cb)) continue;
      any = true;
      s += blk.at(ca, cb);
    }
    ok[a + 1] = any && blk.has(columns ? a : 0, columns ? 0 : a);
    sums[a + 1] = s * (columns ? m.hy : m.hx);
  }
  const double h = columns ? m.hx : m.hy;
  std::vector<double> slopes;
  if (ok[0] && ok[1]) slopes.push_back((sums[1] - sums[0]) / h);
  if (ok[0] && ok[2]) slopes.push_back((sums[2] - sums[0]) / (2.0 * h));
  if (ok[1] && ok[2]) slopes.push_back((sums[2] - sums[1]) / h);
  for (double sl : slopes) {
    // liquid below the graph when gsign < 0 (alpha decreases along the graph axis)
    Vec2 n = columns ? unit(-sl, 1.0) : unit(1.0, -sl);
    if (gsign > 0) {
      out.push_back(flip_graph(n, columns));
    } else if (gsign < 0) {
      out.push_back(n);
    } else {
      out.push_back(n);
      out.push_back(flip_graph(n, columns));
    }
  }
}

// Difference of the outer row (or column) sums of the block: sign of the
// alpha gradient along y (or x).
double block_gradient(const Block& blk, bool along_y) {
  double hi = 0.0, lo = 0.0;
  int top = blk.has(along_y ? 0 : 1, along_y ? 1 : 0) ? 1 : 0;
  int bot = blk.has(along_y ? 0 : -1, along_y ? -1 : 0) ? -1 : 0;
  if (top == bot) return 0.0;
  for (int t = -1; t <= 1; ++t) {
    int a1 = along_y ? t : top, b1 = along_y ? top : t;
    int a0 = along_y ? t : bot, b0 = along_y ? bot : t;
    if (blk.has(a1, b1)) hi += blk.at(a1, b1);
    if (blk.has(a0, b0)) lo += blk.at(a0, b0);
  }
  return hi - lo;
}

// Height-function normal from a 3x7 stencil; false if the heights are not
// well defined.
bool height_normal(const Block& blk, bool columns, double gsign, Vec2& eta) {
  const Mesh& m = blk.m;
  double heights[3];
  for (int a = -1; a <= 1; ++a) {
    double prev = 0.0;
    double sum = 0.0;
    for (int b = -3; b <= 3; ++b) {
      int ca = columns ? a : b;
      int cb = columns ? b : a;
      if (!blk.has(ca, cb)) return false;
      double v = blk.at(ca, cb);
      if (b > -3) {
        if (gsign < 0 && v > prev + kAlphaEps) return false;
        if (gsign > 0 && v < prev - kAlphaEps) return false;
      }
      prev = v;
      sum += v;
    }
    int ea = columns ? a : -3, eb = columns ? -3 : a;
    int fa = columns ? a : 3, fb = columns ? 3 : a;
    double lo = blk.at(ea, eb), hi = blk.at(fa, fb);
    bool complete = gsign < 0 ? (lo >= 1.0 - kAlphaEps && hi <= kAlphaEps)
                              : (lo <= kAlphaEps && hi >= 1.0 - kAlphaEps);
    if (!complete) return false;
    heights[a + 1] = sum * (columns ? m.hy : m.hx);
  }
  const double h = columns ? m.hx : m.hy;
  double sl = (heights[2] - heights[0]) / (2.0 * h);
  Vec2 n = columns ? unit(-sl, 1.0) : unit(1.0, -sl);
  if (gsign > 0) n = flip_graph(n, columns);
  eta = n;
  return true;
}

}  // namespace

PlicState reconstruct_normals(const Mesh& m, const CenteredField& alpha, const PlicOptions& opt) {
  PlicState st;
  st.nx = m.nx;
  st.ny = m.ny;
  st.cells.resize(static_cast<size_t>(m.n_cells()));
  std::vector<Vec2> cands;
  for (int j = 0; j < m.ny; ++j) {
    for (int i = 0; i < m.nx; ++i) {
      PlicCell& pc = st(i, j);
      double a = alpha(i, j);
      if (a <= kAlphaEps) {
        pc.kind = CellKind::Empty;
        continue;
      }
      if (a >= 1.0 - kAlphaEps) {
        pc.kind = CellKind::Full;
        continue;
      }
      pc.kind = CellKind::Interface;
      Block blk{m, alpha, i, j};
      double gy = block_gradient(blk, true);
      double gx = block_gradient(blk, false);

      bool have = false;
      if (opt.height_functions) {
        bool columns = std::abs(gy) >= std::abs(gx);
        have = height_normal(blk, columns, columns ? gy : gx, pc.eta);
      }
      if (!have) {
        cands.clear();
        add_candidates(blk, true, gy, cands);
        add_candidates(blk, false, gx, cands);
        if (cands.empty()) {
          double gn = std::hypot(gx, gy);
          cands.push_back(gn > 0 ? Vec2{-gx / gn, -gy / gn} : Vec2{1.0, 0.0});
        }
        double best = std::numeric_limits<double>::infinity();
        for (const Vec2& c : cands) {
          double e = stencil_error(blk, c);
          if (e < best) {
            best = e;
            pc.eta = c;
          }
        }
      }
      pc.s = shift_from_volume(pc.eta, a, m.hx, m.hy);
    }
  }
  return st;
}

namespace {

double segment_liquid_fraction(const PlicCell& c, Vec2 center, Vec2 p0, Vec2 p1) {
  if (c.kind == CellKind::Full) return 1.0;
  if (c.kind == CellKind::Empty) return 0.0;
  HalfPlane hp = liquid_halfplane(c, center);
  double g0 = hp.eval(p0);
  double g1 = hp.eval(p1);
  if (g0 <= 0.0 && g1 <= 0.0) return 1.0;
  if (g0 > 0.0 && g1 > 0.0) return 0.0;
  double t = g0 / (g0 - g1);
  return g0 <= 0.0 ? t : 1.0 - t;
}

}  // namespace

ApertureField face_apertures(const Mesh& m, const PlicState& plic) {
  ApertureField ap{FaceField(m), FaceField(m)};
  for (int j = 0; j < m.ny; ++j) {
    for (int i = 0; i <= m.nx; ++i) {
      Vec2 p0 = m.vertex(i, j), p1 = m.vertex(i, j + 1);
      double s = 0.0;
      int n = 0;
      if (i > 0) { s += segment_liquid_fraction(plic(i - 1, j), m.cell_center(i - 1, j), p0, p1); ++n; }
      if (i < m.nx) { s += segment_liquid_fraction(plic(i, j), m.cell_center(i, j), p0, p1); ++n; }
      ap.liquid.xf(i, j) = s / n;
      ap.gas.xf(i, j) = 1.0 - s / n;
    }
  }
  for (int j = 0; j <= m.ny; ++j) {
    for (int i = 0; i < m.nx; ++i) {
      Vec2 p0 = m.vertex(i, j), p1 = m.vertex(i + 1, j);
      double s = 0.0;
      int n = 0;
      if (j > 0) { s += segment_liquid_fraction(plic(i, j - 1), m.cell_center(i, j - 1), p0, p1); ++n; }
      if (j < m.ny) { s += segment_liquid_fraction(plic(i, j), m.cell_center(i, j), p0, p1); ++n; }
      ap.liquid.yf(i, j) = s / n;
      ap.gas.yf(i, j) = 1.0 - s / n;
    }
  }
  return ap;
}

}  // namespace vofflux
