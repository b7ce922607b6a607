#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vofflux/geom2d.hpp"
#include "vofflux/harness.hpp"
#include "vofflux/plic.hpp"

using namespace vofflux;

namespace {

// Liquid area of a cell below the line eta.(x - p0) <= 0, by polygon clipping.
double clipped_fraction(const Mesh& m, int i, int j, Vec2 eta, Vec2 p0) {
  Rect r{i * m.hx, (i + 1) * m.hx, j * m.hy, (j + 1) * m.hy};
  return shoelace_area(clip_halfplane(r.polygon(), eta, -dot(eta, p0))) / r.area();
}

CenteredField line_field(const Mesh& m, Vec2 eta, Vec2 p0) {
  CenteredField a(m);
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i < m.nx; ++i) a(i, j) = clipped_fraction(m, i, j, eta, p0);
  return a;
}

bool interior(const Mesh& m, int i, int j, int w) { return i >= w && j >= w && i < m.nx - w && j < m.ny - w; }

}  // namespace

TEST(Plic, VolumeFromShiftMatchesClipping) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ang(0.0, 2 * M_PI), sh(-0.8, 0.8);
  const double hx = 0.5, hy = 0.25;
  Rect cell{-0.5 * hx, 0.5 * hx, -0.5 * hy, 0.5 * hy};
  for (int k = 0; k < 200; ++k) {
    double th = ang(rng);
    Vec2 eta{std::cos(th), std::sin(th)};
    double s = sh(rng) * 0.5 * (hx + hy);
    double oracle = shoelace_area(clip_halfplane(cell.polygon(), eta, s)) / cell.area();
    EXPECT_NEAR(volume_from_shift(eta, s, hx, hy), oracle, 1e-14);
  }
  EXPECT_EQ(volume_from_shift({1, 0}, 10.0, hx, hy), 0.0);
  EXPECT_EQ(volume_from_shift({1, 0}, -10.0, hx, hy), 1.0);
  EXPECT_NEAR(volume_from_shift({0, 1}, 0.0, hx, hy), 0.5, 1e-15);
}

TEST(Plic, ShiftRoundTrip) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ang(0.0, 2 * M_PI), vol(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    double th = ang(rng);
    Vec2 eta{std::cos(th), std::sin(th)};
    double a = vol(rng);
    double s = shift_from_volume(eta, a, 0.1, 0.1);
    EXPECT_NEAR(volume_from_shift(eta, s, 0.1, 0.1), a, 1e-13);
  }
  // Axis-aligned normals.
  EXPECT_NEAR(volume_from_shift({1, 0}, shift_from_volume({1, 0}, 0.3, 1, 1), 1, 1), 0.3, 1e-15);
}

TEST(Plic, ElviraExactOnLines) {
  Mesh m(16, 16);
  for (double th : {0.3, 1.1, 2.0, 2.9, 3.7, 4.4, 5.5, 6.1}) {
    Vec2 eta{std::cos(th), std::sin(th)};
    CenteredField a = line_field(m, eta, {0.52, 0.47});
    PlicState st = reconstruct_normals(m, a);
    int checked = 0;
    for (int j = 0; j < m.ny; ++j) {
      for (int i = 0; i < m.nx; ++i) {
        if (st(i, j).kind != CellKind::Interface || !interior(m, i, j, 1)) continue;
        ++checked;
        EXPECT_NEAR(st(i, j).eta.x, eta.x, 1e-9) << th << ' ' << i << ' ' << j;
        EXPECT_NEAR(st(i, j).eta.y, eta.y, 1e-9) << th << ' ' << i << ' ' << j;
        // The reconstructed line carries the cell volume.
        EXPECT_NEAR(volume_from_shift(st(i, j).eta, st(i, j).s, m.hx, m.hy), a(i, j), 1e-13);
      }
    }
    EXPECT_GT(checked, 8);
  }
}

TEST(Plic, HeightFunctionsExactOnShallowLines) {
  Mesh m(32, 32);
  PlicOptions opt;
  opt.height_functions = true;
  for (double th : {1.3, 1.8, 4.5}) {
    Vec2 eta{std::cos(th), std::sin(th)};
    CenteredField a = line_field(m, eta, {0.5, 0.5});
    PlicState st = reconstruct_normals(m, a, opt);
    for (int j = 0; j < m.ny; ++j) {
      for (int i = 0; i < m.nx; ++i) {
        if (st(i, j).kind != CellKind::Interface || !interior(m, i, j, 4)) continue;
        EXPECT_NEAR(dot(st(i, j).eta, eta), 1.0, 1e-12);
      }
    }
  }
}

TEST(Plic, CircleNormalsConverge) {
  Vec2 c{0.5, 0.5};
  const double r = 0.25;
  double prev = 1.0;
  for (int n : {16, 32, 64}) {
    Mesh m(n, n);
    CenteredField a(m);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        a(i, j) = disk_rect_area(c, r, i * m.hx, (i + 1) * m.hx, j * m.hy, (j + 1) * m.hy) / m.cell_volume();
    PlicState st = reconstruct_normals(m, a);
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        if (st(i, j).kind != CellKind::Interface) continue;
        Vec2 x = m.cell_center(i, j) - c;
        Vec2 exact = (1.0 / norm(x)) * x;
        worst = std::max(worst, std::acos(std::clamp(dot(exact, st(i, j).eta), -1.0, 1.0)));
      }
    }
    EXPECT_LT(worst, 0.1) << n;
    EXPECT_LT(worst, prev * 1.2) << n;
    prev = worst;
  }
}

TEST(Plic, EmptyFullAndApertures) {
  Mesh m(8, 8);
  CenteredField a(m);
  for (int j = 0; j < m.ny; ++j)
    for (int i = 0; i < m.nx; ++i) a(i, j) = i < 3 ? 1.0 : (i == 3 ? 0.4 : 0.0);
  PlicState st = reconstruct_normals(m, a);
  EXPECT_EQ(st(0, 0).kind, CellKind::Full);
  EXPECT_EQ(st(5, 0).kind, CellKind::Empty);
  EXPECT_EQ(st(3, 4).kind, CellKind::Interface);
  EXPECT_NEAR(st(3, 4).eta.x, 1.0, 1e-12);
  ApertureField ap = face_apertures(m, st);
  // Interface at x = (3 + 0.4) h: a y-face of column 3 is 40% wetted.
  EXPECT_NEAR(ap.liquid.yf(3, 4), 0.4, 1e-12);
  EXPECT_NEAR(ap.gas.yf(3, 4), 0.6, 1e-12);
  EXPECT_NEAR(ap.liquid.xf(2, 4), 1.0, 1e-15);
  EXPECT_NEAR(ap.liquid.xf(5, 4), 0.0, 1e-15);
}
