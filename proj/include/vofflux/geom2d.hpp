#pragma once

#include <optional>
#include <vector>

#include "vofflux/mesh.hpp"

namespace vofflux {

using Polygon = std::vector<Vec2>;

// Closed half-plane {x : n.x + d <= 0}.
struct HalfPlane {
  Vec2 n;
  double d = 0.0;
  double eval(Vec2 p) const { return dot(n, p) + d; }
};

struct Rect {
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  double area() const { return (x1 - x0) * (y1 - y0); }
  Polygon polygon() const { return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}; }
};

// Counterclockwise triangle plus the sign of the oriented region it belongs to.
struct SignedTriangle {
  Vec2 p[3];
  int sign = 1;
  double area = 0.0;  // unsigned
};

struct SignedTriangleSet {
  std::vector<SignedTriangle> tris;
  double signed_area() const;
  bool empty() const { return tris.empty(); }
};

double shoelace_area(const Polygon& p);

// p must be convex. Returns p intersected with the half-plane (possibly empty).
Polygon clip_halfplane(const Polygon& p, Vec2 n, double d);
Polygon clip_rect(const Polygon& p, const Rect& r);

// Signed fan triangulation of a boundary loop from an anchor point.
// Triangles with unsigned area below drop_tol are discarded.
SignedTriangleSet decompose_region(const Polygon& loop, Vec2 anchor, double drop_tol);

// Sum over triangles of sign * |triangle n cell n half-plane|.
double signed_intersection_volume(const SignedTriangleSet& r, const Rect& cell,
                                  const std::optional<HalfPlane>& phase = std::nullopt);

// Unsigned area of triangle n rect, and of triangle n rect n half-plane.
struct ClipAreas {
  double cell = 0.0;
  double phase = 0.0;
};
ClipAreas clip_triangle_areas(const SignedTriangle& t, const Rect& cell, const HalfPlane* phase);

// Splits a closed loop at its self-intersections into simple loops.
std::vector<Polygon> split_loop(const Polygon& loop, double tol);

// Triangulation of a simple polygon by ear clipping (any orientation);
// output triangles are counterclockwise.
std::vector<SignedTriangle> triangulate_simple(const Polygon& p);

// Area of the intersection of two convex polygons.
double convex_intersection_area(const Polygon& a, const Polygon& b);

// Area of the intersection of two simple polygons.
double simple_intersection_area(const Polygon& a, const Polygon& b);

}  // namespace vofflux
