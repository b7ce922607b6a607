#pragma once

#include <vector>

#include "vofflux/geom2d.hpp"
#include "vofflux/mesh.hpp"

namespace vofflux {

constexpr double kAlphaEps = 1e-12;

enum class CellKind { Empty, Full, Interface };

// Liquid subcell: {x in c : eta.(x - x_c) + s <= 0}; eta points into the gas.
struct PlicCell {
  CellKind kind = CellKind::Empty;
  Vec2 eta{1.0, 0.0};
  double s = 0.0;
};

struct PlicState {
  int nx = 0, ny = 0;
  std::vector<PlicCell> cells;
  const PlicCell& operator()(int i, int j) const { return cells[i + nx * j]; }
  PlicCell& operator()(int i, int j) { return cells[i + nx * j]; }
};

// Liquid half-plane of an interface cell in absolute coordinates.
HalfPlane liquid_halfplane(const PlicCell& c, Vec2 center);

// Fraction of an hx-by-hy cell on the liquid side of the line.
double volume_from_shift(Vec2 eta, double s, double hx, double hy);
double shift_from_volume(Vec2 eta, double alpha, double hx, double hy);

struct PlicOptions {
  bool height_functions = false;
};

PlicState reconstruct_normals(const Mesh& m, const CenteredField& alpha, const PlicOptions& opt = {});

struct ApertureField {
  FaceField liquid;
  FaceField gas;
};

ApertureField face_apertures(const Mesh& m, const PlicState& plic);

}  // namespace vofflux
