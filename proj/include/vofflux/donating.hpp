#pragma once

#include <string>
#include <vector>

#include "vofflux/geom2d.hpp"
#include "vofflux/mesh.hpp"
#include "vofflux/plic.hpp"

namespace vofflux {

// A face addressed by family (0: x-normal, 1: y-normal) and mesh indices.
struct FaceRef {
  int fam = 0;
  int i = 0, j = 0;
};

int face_gid(const Mesh& m, const FaceRef& f);
FaceRef face_from_gid(const Mesh& m, int gid);
int n_faces(const Mesh& m);
bool on_boundary(const Mesh& m, const FaceRef& f);
double face_value(const FaceField& u, const FaceRef& f);
double face_area(const Mesh& m, const FaceRef& f);
Vec2 face_center(const Mesh& m, const FaceRef& f);
Vec2 face_normal(const FaceRef& f);

// End vertices ordered so that v1 -> v2 is the face normal rotated
// counterclockwise; this makes downstream flux positive.
void face_vertices(const Mesh& m, const FaceRef& f, int& v1, int& v2);

struct VertexVelocities {
  int nx = 0, ny = 0;
  std::vector<Vec2> v;  // (nx+1)*(ny+1)
  Vec2 operator()(int i, int j) const { return v[i + (nx + 1) * j]; }
};

VertexVelocities vertex_velocities(const Mesh& m, const FaceField& u);

// x*_v = x_v - dt * u_v for every vertex.
std::vector<Vec2> remap_vertices(const Mesh& m, const VertexVelocities& vv, double dt);

enum class DrKind { Plain, Memfpa, Emfpa };

struct DonatingRegion {
  FaceRef face;
  int v1 = -1, v2 = -1;
  Vec2 corner1, corner2;  // remapped positions of v1, v2 used by this region
  Polygon loop;
  SignedTriangleSet tris;
  bool enforced = false;
  bool degenerate = false;
  double dt_star = 0.0;
  double signed_area() const { return tris.signed_area(); }
};

DonatingRegion build_dr_plain(const Mesh& m, const FaceRef& f, const std::vector<Vec2>& remapped);
DonatingRegion build_dr_memfpa(const Mesh& m, const FaceRef& f, const std::vector<Vec2>& remapped,
                               double dt, double u_face);
DonatingRegion build_dr_emfpa(const Mesh& m, const FaceRef& f, const VertexVelocities& vv,
                              const std::vector<Vec2>& remapped, double dt, double u_face);

// Convenience overloads building from the face velocity field directly.
DonatingRegion build_dr_plain(const Mesh& m, const FaceRef& f, const FaceField& u, double dt);
DonatingRegion build_dr_memfpa(const Mesh& m, const FaceRef& f, const FaceField& u, double dt);

// Regions for all faces, indexed by face_gid; boundary faces stay empty.
std::vector<DonatingRegion> build_all_drs(const Mesh& m, const FaceField& u, double dt, DrKind kind);

struct PartialFluxTable {
  // CSR rows per face gid; values are volume fluxes (volume / (dt |f|)).
  std::vector<int> offset;
  std::vector<int> cell;
  std::vector<double> liquid;
  std::vector<double> gas;
  std::vector<double> total_liquid;
  std::vector<double> total_gas;
  std::vector<double> outside;  // DR volume flux not covered by any cell
  int degenerate = 0;

  int begin(int gid) const { return offset[gid]; }
  int end(int gid) const { return offset[gid + 1]; }
};

PartialFluxTable partial_fluxes(const Mesh& m, const std::vector<DonatingRegion>& drs,
                                const PlicState& plic, double dt);

// Partial fluxes of one region against every cell it touches.
struct PartialRow {
  std::vector<int> cell;
  std::vector<double> liquid, gas;
};
PartialRow partial_fluxes_row(const Mesh& m, const DonatingRegion& dr, const PlicState& plic, double dt);

enum class FluxError { Overlap, Gap, Transit, Volume };
const char* to_string(FluxError e);

struct AuditEntry {
  FluxError type;
  int id;  // cell id for overlap, vertex id for gap/transit, face gid for volume
  double magnitude;
};

struct AuditReport {
  int overlap = 0, gap = 0, transit = 0, volume = 0, adjacency = 0;
  double max_overlap = 0, max_gap = 0, max_transit = 0, max_volume = 0;
  std::vector<AuditEntry> entries;
  bool clean() const { return overlap + gap + transit + volume + adjacency == 0; }
  void write_csv(const std::string& path, int step, bool append) const;
};

// Checks the fluxing-error conditions for the regions of one step.
// Volume errors are only evaluated for enforced regions.
AuditReport audit_fluxing_errors(const Mesh& m, const std::vector<DonatingRegion>& drs, const FaceField& u,
                                 double dt);

}  // namespace vofflux
