#pragma once

#include <cmath>
#include <vector>

namespace vofflux {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// Uniform closed-wall MAC mesh on [0,lx]x[0,ly].
//
// Indexing: cell (i,j), i<nx, j<ny. x-face (i,j) sits at x = i*hx, i<=nx,
// j<ny; its left cell is (i-1,j). y-face (i,j) sits at y = j*hy, i<nx,
// j<=ny; its lower cell is (i,j-1). Vertex (i,j) at (i*hx, j*hy).
//
// Staggered control volumes exist for every face, including boundary
// faces, whose volume is half a cell.
struct Mesh {
  int nx = 0, ny = 0;
  double lx = 1.0, ly = 1.0;
  double hx = 0.0, hy = 0.0;

  Mesh() = default;
  Mesh(int nx, int ny, double lx = 1.0, double ly = 1.0);

  int n_cells() const { return nx * ny; }
  int n_xfaces() const { return (nx + 1) * ny; }
  int n_yfaces() const { return nx * (ny + 1); }
  int n_vertices() const { return (nx + 1) * (ny + 1); }

  int cell_id(int i, int j) const { return i + nx * j; }
  int xface_id(int i, int j) const { return i + (nx + 1) * j; }
  int yface_id(int i, int j) const { return i + nx * j; }
  int vertex_id(int i, int j) const { return i + (nx + 1) * j; }

  double cell_volume() const { return hx * hy; }
  Vec2 cell_center(int i, int j) const { return {(i + 0.5) * hx, (j + 0.5) * hy}; }
  Vec2 xface_center(int i, int j) const { return {i * hx, (j + 0.5) * hy}; }
  Vec2 yface_center(int i, int j) const { return {(i + 0.5) * hx, j * hy}; }
  Vec2 vertex(int i, int j) const { return {i * hx, j * hy}; }

  bool xface_on_boundary(int i) const { return i == 0 || i == nx; }
  bool yface_on_boundary(int j) const { return j == 0 || j == ny; }

  double xface_stag_volume(int i) const { return (xface_on_boundary(i) ? 0.5 : 1.0) * hx * hy; }
  double yface_stag_volume(int j) const { return (yface_on_boundary(j) ? 0.5 : 1.0) * hx * hy; }
};

struct CenteredField {
  int nx = 0, ny = 0;
  std::vector<double> v;

  CenteredField() = default;
  explicit CenteredField(const Mesh& m, double value = 0.0)
      : nx(m.nx), ny(m.ny), v(static_cast<size_t>(m.n_cells()), value) {}

  double& operator()(int i, int j) { return v[i + nx * j]; }
  double operator()(int i, int j) const { return v[i + nx * j]; }
};

// Normal components on every face. Boundary entries exist but are ignored
// by flux-role operators (div, interp_f2g) and zero for velocities.
struct FaceField {
  int nx = 0, ny = 0;
  std::vector<double> x;  // (nx+1)*ny
  std::vector<double> y;  // nx*(ny+1)

  FaceField() = default;
  explicit FaceField(const Mesh& m, double value = 0.0)
      : nx(m.nx), ny(m.ny),
        x(static_cast<size_t>(m.n_xfaces()), value),
        y(static_cast<size_t>(m.n_yfaces()), value) {}

  double& xf(int i, int j) { return x[i + (nx + 1) * j]; }
  double xf(int i, int j) const { return x[i + (nx + 1) * j]; }
  double& yf(int i, int j) { return y[i + nx * j]; }
  double yf(int i, int j) const { return y[i + nx * j]; }

  void zero_boundary();
};

// Values on the faces g of the staggered control volumes, one pair of planar
// arrays per face family. In family-local coordinates (a along the family
// normal, b along the tangent) the centre-located g between same-family
// faces (p-1,b) and (p,b) is stored at centre(p,b), p in [0,Na+1]; the
// corner-located g at vertex (a,q) is stored at corner(a,q).
struct StagFaceField {
  struct Family {
    int na = 0, nb = 0;
    std::vector<double> center;  // (na+2)*nb
    std::vector<double> corner;  // (na+1)*(nb+1)
    double& c(int p, int b) { return center[p + (na + 2) * b]; }
    double c(int p, int b) const { return center[p + (na + 2) * b]; }
    double& k(int a, int q) { return corner[a + (na + 1) * q]; }
    double k(int a, int q) const { return corner[a + (na + 1) * q]; }
  };
  Family fam[2];

  StagFaceField() = default;
  explicit StagFaceField(const Mesh& m, double value = 0.0);
};

// Family-local view of a mesh: d is the normal axis of the family, e the
// other one. Same-family faces (a,b): a in [0,Na], b in [0,Nb). Cross faces
// (normal e) (a,b): a in [0,Na), b in [0,Nb]. Cells (a,b): a<Na, b<Nb.
struct FamilyGeom {
  int d = 0;
  int na = 0, nb = 0;
  double ha = 0.0, hb = 0.0;

  FamilyGeom(const Mesh& m, int d);

  Vec2 to_xy(double ca, double cb) const { return d == 0 ? Vec2{ca, cb} : Vec2{cb, ca}; }
  double along(Vec2 p) const { return d == 0 ? p.x : p.y; }
  double across(Vec2 p) const { return d == 0 ? p.y : p.x; }

  Vec2 same_pos(int a, int b) const { return to_xy(a * ha, (b + 0.5) * hb); }
  Vec2 cross_pos(int a, int b) const { return to_xy((a + 0.5) * ha, b * hb); }
  Vec2 center_g_pos(int p, int b) const;
  Vec2 corner_g_pos(int a, int q) const { return to_xy(a * ha, q * hb); }

  bool same_boundary(int a) const { return a == 0 || a == na; }
  bool cross_boundary(int b) const { return b == 0 || b == nb; }

  double same_area() const { return hb; }
  double cross_area() const { return ha; }
  double stag_volume(int a) const { return (same_boundary(a) ? 0.5 : 1.0) * ha * hb; }
  double center_g_area() const { return hb; }
  double corner_g_area(int a) const { return (same_boundary(a) ? 0.5 : 1.0) * ha; }
  double center_g_h() const { return ha; }
  double corner_g_h() const { return hb; }

  int cell_index(const Mesh& m, int a, int b) const { return d == 0 ? m.cell_id(a, b) : m.cell_id(b, a); }

  double& same(FaceField& f, int a, int b) const { return d == 0 ? f.xf(a, b) : f.yf(b, a); }
  double same(const FaceField& f, int a, int b) const { return d == 0 ? f.xf(a, b) : f.yf(b, a); }
  double& cross(FaceField& f, int a, int b) const { return d == 0 ? f.yf(a, b) : f.xf(b, a); }
  double cross(const FaceField& f, int a, int b) const { return d == 0 ? f.yf(a, b) : f.xf(b, a); }
  double cell(const CenteredField& c, int a, int b) const { return d == 0 ? c(a, b) : c(b, a); }
};

// Discrete operators.
CenteredField div(const Mesh& m, const FaceField& flux);
FaceField grad(const Mesh& m, const CenteredField& p);
FaceField interp_c2f(const Mesh& m, const CenteredField& alpha);
FaceField stag_div(const Mesh& m, const StagFaceField& t);
StagFaceField stag_grad(const Mesh& m, const FaceField& u);
StagFaceField interp_f2g(const Mesh& m, const FaceField& flux);
StagFaceField interp_equal_weight(const Mesh& m, const FaceField& phi);
double check_connection(const Mesh& m, const FaceField& flux);

// Inner products carrying the control-volume weights.
double inner_cells(const Mesh& m, const CenteredField& a, const CenteredField& b);
double inner_faces(const Mesh& m, const FaceField& a, const FaceField& b);
double inner_stag(const Mesh& m, const StagFaceField& a, const StagFaceField& b);

StagFaceField multiply(const StagFaceField& a, const StagFaceField& b);
FaceField multiply(const FaceField& a, const FaceField& b);

double max_abs(const FaceField& f);
double max_abs(const CenteredField& c);
double max_abs(const StagFaceField& t);

}  // namespace vofflux
