// Oriented triangle mesh with per-vertex constraint classes, plus Wavefront
// OBJ and sidecar (JSON) input/output.
#pragma once

#include "vskip/geometry_core.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace vskip {

using Tri = std::array<int, 3>;

/// Constraint class of a mesh vertex.
///
/// A FreeBoundary vertex is confined to the plane of cone facet `facet`. When
/// `edge_facet >= 0` it is additionally pinned to the cone edge shared with
/// that facet (it then belongs to both facets).
struct VertexClass {
  enum class Kind { Interior, FreeBoundary, Clamped };
  Kind kind = Kind::Interior;
  int facet = -1;
  int edge_facet = -1;

  static VertexClass interior() { return {}; }
  static VertexClass on_facet(int f) { return {Kind::FreeBoundary, f, -1}; }
  static VertexClass on_edge(int f, int g) { return {Kind::FreeBoundary, f, g}; }
  static VertexClass clamped() { return {Kind::Clamped, -1, -1}; }

  [[nodiscard]] bool is_free() const { return kind == Kind::FreeBoundary; }
  [[nodiscard]] bool is_pinned() const { return kind == Kind::FreeBoundary && edge_facet >= 0; }
  [[nodiscard]] bool touches(int f) const { return is_free() && (facet == f || edge_facet == f); }

  bool operator==(const VertexClass&) const = default;
};

class TriMesh {
 public:
  std::vector<Vec3> vertices;
  std::vector<Tri> triangles;
  std::vector<VertexClass> classes;
  double clamp_radius = 0.0;

  int add_vertex(const Vec3& p, VertexClass c = VertexClass::interior());
  int add_triangle(int a, int b, int c);

  [[nodiscard]] std::size_t num_vertices() const { return vertices.size(); }
  [[nodiscard]] std::size_t num_triangles() const { return triangles.size(); }

  /// Merges vertices closer than `tol` (the first occurrence keeps its class)
  /// and drops unreferenced ones.
  void weld(double tol);
};

/// Directed boundary edges (each appears in exactly one triangle), in
/// triangle order.
std::vector<std::pair<int, int>> boundary_edges(const TriMesh& mesh);

/// For each vertex, its neighbours along boundary edges.
std::vector<std::vector<int>> boundary_neighbours(const TriMesh& mesh);

int euler_characteristic(const TriMesh& mesh);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
double surface_area(const TriMesh& mesh);

/// Checks the structural invariants (indices, nondegenerate triangles,
/// consistent orientation) and, when a cone is given, the constraint classes.
/// Throws GeometryError with the first violation found.
void validate(const TriMesh& mesh, const PolyhedralCone* cone = nullptr);

void write_obj(const TriMesh& mesh, std::ostream& os);
TriMesh read_obj(std::istream& is);

/// Sidecar with the clamp radius and every non-interior vertex class, keyed by
/// vertex index.
std::string classes_to_json(const TriMesh& mesh);
void classes_from_json(TriMesh& mesh, const std::string& text);

void save_mesh(const TriMesh& mesh, const std::string& obj_path, const std::string& classes_path = {});
TriMesh load_mesh(const std::string& obj_path, const std::string& classes_path = {});

}  // namespace vskip
