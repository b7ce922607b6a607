#include <gtest/gtest.h>

#include <random>

#include "identities.hpp"
#include "vofflux/mesh.hpp"

using namespace vofflux;
using vofflux::testing::random_cells;
using vofflux::testing::random_faces;
using vofflux::testing::random_stag;

namespace {

// Outward face list of a cell, walls excluded: (value, area, sign).
double cell_boundary_sum(const Mesh& m, const FaceField& f, int i, int j) {
  struct Side {
    bool wall;
    double v, area, sign;
  };
  Side sides[4] = {
      {i == 0, f.xf(i, j), m.hy, -1.0},
      {i + 1 == m.nx, f.xf(i + 1, j), m.hy, 1.0},
      {j == 0, f.yf(i, j), m.hx, -1.0},
      {j + 1 == m.ny, f.yf(i, j + 1), m.hx, 1.0},
  };
  double s = 0.0;
  for (const auto& sd : sides)
    if (!sd.wall) s += sd.sign * sd.area * sd.v;
  return s / (m.hx * m.hy);
}

}  // namespace

TEST(Mesh, RejectsTinyMeshes) {
  EXPECT_THROW(Mesh(3, 8), std::invalid_argument);
  EXPECT_THROW(Mesh(8, 8, 0.0, 1.0), std::invalid_argument);
  Mesh m(8, 4, 2.0, 1.0);
  EXPECT_DOUBLE_EQ(m.hx, 0.25);
  EXPECT_DOUBLE_EQ(m.hy, 0.25);
  EXPECT_DOUBLE_EQ(m.xface_stag_volume(0), 0.5 * m.cell_volume());
  EXPECT_DOUBLE_EQ(m.xface_stag_volume(3), m.cell_volume());
}

TEST(Mesh, DivZeroFieldAndWallCells) {
  Mesh m(6, 5);
  EXPECT_EQ(max_abs(div(m, FaceField(m))), 0.0);
  FaceField one(m, 1.0);
  CenteredField d = div(m, one);
  // Interior cells cancel; wall faces count as zero, so the cells along the
  // upper and right walls see a net outflow deficit.
  EXPECT_NEAR(d(2, 2), 0.0, 1e-14);
  EXPECT_NEAR(d(5, 2), -1.0 / m.hx, 1e-12);
  FaceField ux(m);
  for (double& v : ux.x) v = 1.0;
  ux.zero_boundary();
  CenteredField dx = div(m, ux);
  EXPECT_NEAR(dx(2, 3), 0.0, 1e-14);
}

TEST(Mesh, DivMatchesBoundarySumOracle) {
  Mesh m(8, 8);
  std::mt19937_64 rng(11);
  FaceField f = random_faces(m, rng);
  CenteredField d = div(m, f);
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i < m.nx; ++i) EXPECT_NEAR(d(i, j), cell_boundary_sum(m, f, i, j), 1e-14 * 8 * 4);
}

TEST(Mesh, GradConstantsAndLinears) {
  Mesh m(7, 6);
  EXPECT_EQ(max_abs(grad(m, CenteredField(m, 3.5))), 0.0);
  CenteredField p(m);
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i < m.nx; ++i) p(i, j) = 2.5 * m.cell_center(i, j).x;
  FaceField g = grad(m, p);
  for (int j = 0; j < m.ny; ++j)
    for (int i = 1; i < m.nx; ++i) EXPECT_NEAR(g.xf(i, j), 2.5, 1e-13);
  for (double v : g.y) EXPECT_NEAR(v, 0.0, 1e-13);
}

TEST(Mesh, CellToFaceInterpolant) {
  Mesh m(6, 6);
  FaceField one = interp_c2f(m, CenteredField(m, 1.0));
  for (double v : one.x) EXPECT_NEAR(v, 1.0, 1e-15);
  for (double v : one.y) EXPECT_NEAR(v, 1.0, 1e-15);
  CenteredField a(m);
  a(3, 2) = 1.0;
  EXPECT_DOUBLE_EQ(interp_c2f(m, a).xf(3, 2), 0.5);
  EXPECT_DOUBLE_EQ(interp_c2f(m, a).xf(4, 2), 0.5);

  // Volume-weighted average oracle, including the half volumes at walls.
  std::mt19937_64 rng(5);
  CenteredField r = random_cells(m, rng);
  FaceField f = interp_c2f(m, r);
  for (int j = 0; j < m.ny; ++j) {
    for (int i = 0; i <= m.nx; ++i) {
      double num = 0.0, vol = 0.0;
      if (i > 0) num += 0.5 * m.cell_volume() * r(i - 1, j), vol += 0.5 * m.cell_volume();
      if (i < m.nx) num += 0.5 * m.cell_volume() * r(i, j), vol += 0.5 * m.cell_volume();
      EXPECT_NEAR(f.xf(i, j), num / vol, 1e-15);
    }
  }
}

TEST(Mesh, StagDivConstantTelescopes) {
  Mesh m(6, 5);
  EXPECT_EQ(max_abs(stag_div(m, StagFaceField(m))), 0.0);
  FaceField d = stag_div(m, StagFaceField(m, 1.0));
  EXPECT_LT(max_abs(d), 1e-13);
}

TEST(Mesh, StagDivMatchesFaceSumOracle) {
  Mesh m(5, 7);
  std::mt19937_64 rng(3);
  StagFaceField t = random_stag(m, rng);
  FaceField d = stag_div(m, t);
  // x-face (i,j): centre g at x-offsets +-h/2 (clamped to the wall), corner g
  // at the vertices below and above.
  for (int j = 0; j < m.ny; ++j) {
    for (int i = 0; i <= m.nx; ++i) {
      const auto& f = t.fam[0];
      double wy = (i == 0 || i == m.nx) ? 0.5 * m.hx : m.hx;
      double s = m.hy * (f.c(i + 1, j) - f.c(i, j)) + wy * (f.k(i, j + 1) - f.k(i, j));
      EXPECT_NEAR(d.xf(i, j), s / (wy * m.hy), 1e-12);
    }
  }
  for (int j = 0; j <= m.ny; ++j) {
    for (int i = 0; i < m.nx; ++i) {
      const auto& f = t.fam[1];
      double wx = (j == 0 || j == m.ny) ? 0.5 * m.hy : m.hy;
      double s = m.hx * (f.c(j + 1, i) - f.c(j, i)) + wx * (f.k(j, i + 1) - f.k(j, i));
      EXPECT_NEAR(d.yf(i, j), s / (wx * m.hx), 1e-12);
    }
  }
}

TEST(Mesh, StagGradConstantsAndLinears) {
  Mesh m(6, 6);
  FaceField u(m);
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i <= m.nx; ++i) u.xf(i, j) = 1.0 + 3.0 * m.xface_center(i, j).x;
  StagFaceField g = stag_grad(m, u);
  for (int j = 0; j < m.ny; ++j)
    for (int p = 1; p <= m.nx; ++p) EXPECT_NEAR(g.fam[0].c(p, j), 3.0, 1e-12);
  FaceField c(m, 2.0);
  StagFaceField gc = stag_grad(m, c);
  for (int q = 1; q < m.ny; ++q)
    for (int a = 0; a <= m.nx; ++a) EXPECT_NEAR(gc.fam[0].k(a, q), 0.0, 1e-14);
}

TEST(Mesh, FaceToGInterpolant) {
  Mesh m(6, 6);
  FaceField one(m, 1.0);
  one.zero_boundary();
  StagFaceField j = interp_f2g(m, one);
  EXPECT_NEAR(j.fam[0].c(3, 2), 1.0, 1e-15);
  EXPECT_NEAR(j.fam[1].k(3, 2), 1.0, 1e-15);
  FaceField single(m);
  single.xf(3, 2) = 4.0;
  StagFaceField js = interp_f2g(m, single);
  EXPECT_NEAR(js.fam[0].c(3, 2), 2.0, 1e-15);
  EXPECT_NEAR(js.fam[0].c(4, 2), 2.0, 1e-15);
  EXPECT_NEAR(js.fam[0].c(5, 2), 0.0, 1e-15);
}

TEST(Mesh, EqualWeightInterpolant) {
  Mesh m(5, 5);
  StagFaceField c = interp_equal_weight(m, FaceField(m, 2.0));
  EXPECT_NEAR(c.fam[1].c(3, 2), 2.0, 1e-15);
  FaceField u(m);
  u.xf(1, 2) = 0.0;
  u.xf(2, 2) = 2.0;
  EXPECT_NEAR(interp_equal_weight(m, u).fam[0].c(2, 2), 1.0, 1e-15);
}

TEST(Mesh, ConnectionTrivialFields) {
  Mesh m(8, 8);
  EXPECT_EQ(check_connection(m, FaceField(m)), 0.0);
  EXPECT_LE(check_connection(m, FaceField(m, 1.0)), 1e-14 * 8);
}

TEST(MeshProperty, IdentitiesOnRandomFields) {
  std::mt19937_64 rng(20240601);
  for (int nx : {4, 7, 16}) {
    for (int ny : {4, 9, 16}) {
      Mesh m(nx, ny, 1.0, 1.3);
      for (int k = 0; k < 20; ++k) {
        auto r = vofflux::testing::identity_residuals(m, rng);
        EXPECT_LE(r.sbp, 1e-13);
        EXPECT_LE(r.adjoint, 1e-13);
        EXPECT_LE(r.connection, 1e-13);
        EXPECT_LE(r.product, 1e-13);
      }
    }
  }
}
