#include "vofflux/mesh.hpp"

#include <algorithm>
#include <stdexcept>

namespace vofflux {

Mesh::Mesh(int nx_, int ny_, double lx_, double ly_) : nx(nx_), ny(ny_), lx(lx_), ly(ly_) {
  if (nx < 4 || ny < 4) throw std::invalid_argument("mesh needs at least 4 cells per axis");
  if (!(lx > 0.0) || !(ly > 0.0)) throw std::invalid_argument("mesh lengths must be positive");
  hx = lx / nx;
  hy = ly / ny;
}

void FaceField::zero_boundary() {
  for (int j = 0; j < ny; ++j) {
    xf(0, j) = 0.0;
    xf(nx, j) = 0.0;
  }
  for (int i = 0; i < nx; ++i) {
    yf(i, 0) = 0.0;
    yf(i, ny) = 0.0;
  }
}

StagFaceField::StagFaceField(const Mesh& m, double value) {
  for (int d = 0; d < 2; ++d) {
    FamilyGeom fg(m, d);
    fam[d].na = fg.na;
    fam[d].nb = fg.nb;
    fam[d].center.assign(static_cast<size_t>((fg.na + 2) * fg.nb), value);
    fam[d].corner.assign(static_cast<size_t>((fg.na + 1) * (fg.nb + 1)), value);
  }
}

FamilyGeom::FamilyGeom(const Mesh& m, int d_) : d(d_) {
  if (d == 0) {
    na = m.nx; nb = m.ny; ha = m.hx; hb = m.hy;
  } else {
    na = m.ny; nb = m.nx; ha = m.hy; hb = m.hx;
  }
}

Vec2 FamilyGeom::center_g_pos(int p, int b) const {
  double ca = p == 0 ? 0.0 : (p == na + 1 ? na * ha : (p - 0.5) * ha);
  return to_xy(ca, (b + 0.5) * hb);
}

CenteredField div(const Mesh& m, const FaceField& flux) {
  CenteredField out(m);
  const double vol = m.cell_volume();
  for (int j = 0; j < m.ny; ++j) {
    for (int i = 0; i < m.nx; ++i) {
      double right = i + 1 < m.nx ? flux.xf(i + 1, j) : 0.0;
      double left = i > 0 ? flux.xf(i, j) : 0.0;
      double top = j + 1 < m.ny ? flux.yf(i, j + 1) : 0.0;
      double bottom = j > 0 ? flux.yf(i, j) : 0.0;
      out(i, j) = (m.hy * (right - left) + m.hx * (top - bottom)) / vol;
    }
  }
  return out;
}

FaceField grad(const Mesh& m, const CenteredField& p) {
  FaceField out(m);
  for (int j = 0; j < m.ny; ++j)
    for (int i = 1; i < m.nx; ++i) out.xf(i, j) = (p(i, j) - p(i - 1, j)) / m.hx;
  for (int j = 1; j < m.ny; ++j)
    for (int i = 0; i < m.nx; ++i) out.yf(i, j) = (p(i, j) - p(i, j - 1)) / m.hy;
  return out;
}

FaceField interp_c2f(const Mesh& m, const CenteredField& alpha) {
  FaceField out(m);
  const double vol = m.cell_volume();
  for (int d = 0; d < 2; ++d) {
    FamilyGeom fg(m, d);
    for (int b = 0; b < fg.nb; ++b) {
      for (int a = 0; a <= fg.na; ++a) {
        double sum = 0.0;
        if (a > 0) sum += vol * fg.cell(alpha, a - 1, b);
        if (a < fg.na) sum += vol * fg.cell(alpha, a, b);
        fg.same(out, a, b) = 0.5 * sum / fg.stag_volume(a);
      }
    }
  }
  return out;
}

FaceField stag_div(const Mesh& m, const StagFaceField& t) {
  FaceField out(m);
  for (int d = 0; d < 2; ++d) {
    FamilyGeom fg(m, d);
    const auto& tf = t.fam[d];
    for (int b = 0; b < fg.nb; ++b) {
      for (int a = 0; a <= fg.na; ++a) {
        double s = fg.center_g_area() * (tf.c(a + 1, b) - tf.c(a, b)) +
                   fg.corner_g_area(a) * (tf.k(a, b + 1) - tf.k(a, b));
        fg.same(out, a, b) = s / fg.stag_volume(a);
      }
    }
  }
  return out;
}

StagFaceField stag_grad(const Mesh& m, const FaceField& u) {
  StagFaceField out(m);
  for (int d = 0; d < 2; ++d) {
    FamilyGeom fg(m, d);
    auto& tf = out.fam[d];
    auto val = [&](int a, int b) {
      if (a < 0 || a > fg.na || b < 0 || b >= fg.nb) return 0.0;
      return fg.same(u, a, b);
    };
    for (int b = 0; b < fg.nb; ++b)
      for (int p = 0; p <= fg.na + 1; ++p) tf.c(p, b) = (val(p, b) - val(p - 1, b)) / fg.center_g_h();
    for (int q = 0; q <= fg.nb; ++q)
      for (int a = 0; a <= fg.na; ++a) tf.k(a, q) = (val(a, q) - val(a, q - 1)) / fg.corner_g_h();
  }
  return out;
}

StagFaceField interp_f2g(const Mesh& m, const FaceField& flux) {
  StagFaceField out(m);
  for (int d = 0; d < 2; ++d) {
    FamilyGeom fg(m, d);
    auto& tf = out.fam[d];
    auto same = [&](int a, int b) {
      if (a <= 0 || a >= fg.na) return 0.0;
      return fg.same(flux, a, b);
    };
    auto crossv = [&](int a, int b) {
      if (a < 0 || a >= fg.na || b <= 0 || b >= fg.nb) return 0.0;
      return fg.cross(flux, a, b);
    };
    for (int b = 0; b < fg.nb; ++b)
      for (int p = 0; p <= fg.na + 1; ++p)
        tf.c(p, b) = 0.5 * fg.same_area() * (same(p - 1, b) + same(p, b)) / fg.center_g_area();
    for (int q = 0; q <= fg.nb; ++q)
      for (int a = 0; a <= fg.na; ++a)
        tf.k(a, q) = 0.5 * fg.cross_area() * (crossv(a - 1, q) + crossv(a, q)) / fg.corner_g_area(a);
  }
  return out;
}

StagFaceField interp_equal_weight(const Mesh& m, const FaceField& phi) {
  StagFaceField out(m);
  for (int d = 0; d < 2; ++d) {
    FamilyGeom fg(m, d);
    auto& tf = out.fam[d];
    auto val = [&](int a, int b) {
      if (a < 0 || a > fg.na || b < 0 || b >= fg.nb) return 0.0;
      return fg.same(phi, a, b);
    };
    for (int b = 0; b < fg.nb; ++b)
      for (int p = 0; p <= fg.na + 1; ++p) tf.c(p, b) = 0.5 * (val(p - 1, b) + val(p, b));
    for (int q = 0; q <= fg.nb; ++q)
      for (int a = 0; a <= fg.na; ++a) tf.k(a, q) = 0.5 * (val(a, q - 1) + val(a, q));
  }
  return out;
}

double check_connection(const Mesh& m, const FaceField& flux) {
  FaceField lhs = stag_div(m, interp_f2g(m, flux));
  FaceField rhs = interp_c2f(m, div(m, flux));
  double r = 0.0;
  for (size_t i = 0; i < lhs.x.size(); ++i) r = std::max(r, std::abs(lhs.x[i] - rhs.x[i]));
  for (size_t i = 0; i < lhs.y.size(); ++i) r = std::max(r, std::abs(lhs.y[i] - rhs.y[i]));
  return r;
}

double inner_cells(const Mesh& m, const CenteredField& a, const CenteredField& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.v.size(); ++i) s += a.v[i] * b.v[i];
  return s * m.cell_volume();
}

double inner_faces(const Mesh& m, const FaceField& a, const FaceField& b) {
  double s = 0.0;
  for (int d = 0; d < 2; ++d) {
    FamilyGeom fg(m, d);
    for (int bb = 0; bb < fg.nb; ++bb)
      for (int aa = 0; aa <= fg.na; ++aa)
        s += fg.stag_volume(aa) * fg.same(a, aa, bb) * fg.same(b, aa, bb);
  }
  return s;
}

double inner_stag(const Mesh& m, const StagFaceField& a, const StagFaceField& b) {
  double s = 0.0;
  for (int d = 0; d < 2; ++d) {
    FamilyGeom fg(m, d);
    const auto& fa = a.fam[d];
    const auto& fb = b.fam[d];
    const double wc = fg.center_g_area() * fg.center_g_h();
    for (int bb = 0; bb < fg.nb; ++bb)
      for (int p = 0; p <= fg.na + 1; ++p) s += wc * fa.c(p, bb) * fb.c(p, bb);
    for (int q = 0; q <= fg.nb; ++q)
      for (int aa = 0; aa <= fg.na; ++aa)
        s += fg.corner_g_area(aa) * fg.corner_g_h() * fa.k(aa, q) * fb.k(aa, q);
  }
  return s;
}

StagFaceField multiply(const StagFaceField& a, const StagFaceField& b) {
  StagFaceField out = a;
  for (int d = 0; d < 2; ++d) {
    for (size_t i = 0; i < out.fam[d].center.size(); ++i) out.fam[d].center[i] *= b.fam[d].center[i];
    for (size_t i = 0; i < out.fam[d].corner.size(); ++i) out.fam[d].corner[i] *= b.fam[d].corner[i];
  }
  return out;
}

FaceField multiply(const FaceField& a, const FaceField& b) {
  FaceField out = a;
  for (size_t i = 0; i < out.x.size(); ++i) out.x[i] *= b.x[i];
  for (size_t i = 0; i < out.y.size(); ++i) out.y[i] *= b.y[i];
  return out;
}

double max_abs(const FaceField& f) {
  double r = 0.0;
  for (double v : f.x) r = std::max(r, std::abs(v));
  for (double v : f.y) r = std::max(r, std::abs(v));
  return r;
}

double max_abs(const CenteredField& c) {
  double r = 0.0;
  for (double v : c.v) r = std::max(r, std::abs(v));
  return r;
}

double max_abs(const StagFaceField& t) {
  double r = 0.0;
  for (const auto& f : t.fam) {
    for (double v : f.center) r = std::max(r, std::abs(v));
    for (double v : f.corner) r = std::max(r, std::abs(v));
  }
  return r;
}

}  // namespace vofflux
