// Discrete free-boundary area minimization inside a polyhedral cone, and the
// observables used to read off the behaviour of the minimizer near the apex.
#pragma once

#include "vskip/geometry_core.hpp"
#include "vskip/mesh.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vskip {

struct MinimizeConfig {
  int max_iters = 20000;
  double grad_tol = 1e-9;
  double initial_step = 1.0;
  double armijo_c = 1e-4;
  double clamp_radius = 1.0;
  std::uint64_t seed = 0;
  /// Amplitude of the seeded random displacement of interior vertices
  /// (along x1) applied before the first iteration; 0 disables it.
  double jitter = 0.0;
  /// Metric in which the descent direction is taken. Euclidean is the plain
  /// vertex-space gradient; Sobolev solves (K + M) d = -g with the (clamped
  /// nonnegative) cotangent stiffness K and lumped mass M on the constrained
  /// degrees of freedom, which removes the mesh-size dependence of the step.
  enum class Metric { Euclidean, Sobolev };
  Metric metric = Metric::Sobolev;
  /// Fraction of the tangential umbrella displacement applied after each
  /// accepted step to keep the triangulation regular (0 disables). It is only
  /// kept when the iteration still satisfies the Armijo condition.
  double relaxation = 0.5;
  /// Radii for the monotonicity table; empty means R/10, 2R/10, ..., R.
  std::vector<double> radii;
};

struct AngleStats {
  double min_deg = 0.0;
  double mean_deg = 0.0;
  double max_deg = 0.0;
  int count = 0;
};

struct BoundaryAngleReport {
  AngleStats all;
  /// Per cone facet (index into the cone's half-spaces); count 0 when unused.
  std::vector<AngleStats> per_facet;
};

struct RatioSample {
  double r;
  double p;
};

struct DeviationSample {
  double rho;
  double r;
  double value;
};

enum class MinimizeStatus { Converged, MaxIters, Stalled };

struct Diagnostics {
  MinimizeStatus status = MinimizeStatus::MaxIters;
  int iterations = 0;
  std::vector<double> area_history;
  std::vector<double> vertex_distance_history;
  std::vector<double> step_history;
  std::vector<double> grad_norm_history;  // max-norm of the projected gradient
  /// For each accepted step: area decrease minus the Armijo threshold (>= 0).
  std::vector<double> armijo_margin;
  std::vector<RatioSample> p_ratios;
  std::vector<DeviationSample> conical_deviation;
  AngleStats boundary_angle_stats;
  double density_min = 0.0;
  double density_max = 0.0;
  /// Vertices that had to be pinned to a cone edge by the projection.
  std::vector<int> pinned_vertices;
  std::string message;
};

std::string to_string(MinimizeStatus s);

/// Triangulates {x1 = 0} ∩ cone ∩ B_R with `resolution` rings.
///
/// Boundary vertices on the cone facets are FreeBoundary, vertices on the
/// sphere are Clamped. Near the origin: if the two facets bounding the section
/// meet in a line contained in the cone (a wedge spine), the innermost vertex
/// is the origin, pinned to that line; otherwise the mesh is closed off at
/// distance R / (4 resolution) by vertices on the cone edges lying on the
/// `side` of the plane, so that no vertex sits on the apex.
TriMesh make_initial_plane(const PolyhedralCone& cone, double R, int resolution, int side = 1);

/// The exact planar section {x1 = 0} ∩ cone ∩ B_R as a fan around the origin
/// (`resolution` rings, 4 * resolution sectors); every vertex is Clamped.
TriMesh make_section_fan(const PolyhedralCone& cone, double R, int resolution);

/// d(area)/d(vertex) for every vertex, accumulated in triangle order.
std::vector<Vec3> area_gradient(const TriMesh& mesh);

/// Lumped vertex areas (one third of the incident triangle areas).
std::vector<double> vertex_areas(const TriMesh& mesh);

/// Gradient restricted to each vertex's constraint (tangent plane of its
/// facet, direction of its edge, zero for clamped vertices).
std::vector<Vec3> projected_gradient(const TriMesh& mesh, const PolyhedralCone& cone,
                                     const std::vector<Vec3>& gradient);

struct ProjectionResult {
  TriMesh mesh;
  std::vector<int> pinned;  // vertices that ended on a cone edge this call
};

/// Restores every constraint: free-boundary vertices onto their facet plane
/// (switching facet or pinning to a cone edge when they leave the cone),
/// clamped vertices radially onto the clamp sphere. Interior vertices are left
/// untouched.
ProjectionResult project_to_constraints(const TriMesh& mesh, const PolyhedralCone& cone);

/// Projected gradient descent with Armijo backtracking.
std::pair<TriMesh, Diagnostics> minimize(const TriMesh& mesh, const PolyhedralCone& cone,
                                         const MinimizeConfig& config);

// Observables.

/// (r, area(mesh ∩ B_r) / r^2) for each radius; triangles are clipped exactly.
std::vector<RatioSample> monotonicity_ratio(const TriMesh& mesh, const std::vector<double>& radii);

/// Integral of |x . nu| / |x|^3 over mesh ∩ (B_r \ B_rho).
double conical_deviation(const TriMesh& mesh, double rho, double r);

/// Angles (degrees) between the mesh triangle at each free-boundary edge and
/// the facet carrying the edge, for edges whose midpoint is farther than
/// `min_radius` from the origin.
BoundaryAngleReport boundary_angle_audit(const TriMesh& mesh, const PolyhedralCone& cone, double min_radius = 0.0);

/// Exact distance from the origin to the closest triangle.
double vertex_distance(const TriMesh& mesh);

/// Closest point of triangle abc to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

std::pair<double, double> density_ratio_bounds(const TriMesh& mesh, const std::vector<double>& radii);

/// Worker threads for per-triangle work; results do not depend on it.
void set_worker_threads(int n);
int worker_threads();

}  // namespace vskip
