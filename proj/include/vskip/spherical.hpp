// Spherical geometry on the unit sphere: minor geodesic arcs, interior angles,
// polygon excess, discrete geodesic curvature, poles and meridians, and the
// two-arc quadrilateral audit used to rule out a pair of disjoint arcs.
#pragma once

#include "vskip/geometry_core.hpp"

#include <vector>

namespace vskip {

/// A point on the unit sphere.
class SpherePoint {
 public:
  /// Normalizes `v`; throws if it is zero or not finite.
  explicit SpherePoint(const Vec3& v);

  [[nodiscard]] const Vec3& dir() const { return dir_; }
  SpherePoint operator-() const { return SpherePoint(-dir_); }

 private:
  Vec3 dir_;
};

/// Minor great-circle arc between two non-antipodal points.
struct GeodesicArc {
  SpherePoint p;
  SpherePoint q;

  GeodesicArc(const SpherePoint& p, const SpherePoint& q);

  [[nodiscard]] double length() const;
  /// Point at parameter s in [0, 1] (constant speed).
  [[nodiscard]] Vec3 at(double s) const;
};

/// Closed geodesic polygon contained in an open hemisphere.
class GeodesicPolygon {
 public:
  explicit GeodesicPolygon(std::vector<SpherePoint> vertices);

  [[nodiscard]] const std::vector<SpherePoint>& vertices() const { return vertices_; }
  [[nodiscard]] std::size_t size() const { return vertices_.size(); }

 private:
  std::vector<SpherePoint> vertices_;
};

/// Half great circle from `pole` to `-pole`, stored as two chained minor arcs
/// meeting at `through`.
struct Meridian {
  GeodesicArc upper;  // pole -> through
  GeodesicArc lower;  // through -> -pole

  [[nodiscard]] double length() const { return upper.length() + lower.length(); }
};

struct Step3Report {
  double alpha1 = 0.0;   // at p1
  double beta1 = 0.0;    // at q1
  double alpha2t = 0.0;  // at the lifted p2
  double beta2t = 0.0;   // at the lifted q2
  double angle_sum = 0.0;
  double excess = 0.0;
  bool infeasibility_witness = false;

  // Construction, kept for inspection and the diagonal-split check.
  Vec3 pole;
  Vec3 p2_lifted;
  Vec3 q2_lifted;
};

double arc_length(const SpherePoint& p, const SpherePoint& q);

/// Angle at v between the arcs v->u and v->w, in [0, pi].
double interior_angle(const SpherePoint& v, const SpherePoint& u, const SpherePoint& w);

/// Sum of interior angles minus (k - 2) pi, i.e. the enclosed area.
double spherical_excess(const GeodesicPolygon& poly);

/// Interior angles of the polygon in vertex order.
std::vector<double> interior_angles(const GeodesicPolygon& poly);

/// max |g . (g' x g'')| over interior samples with central differences; the
/// samples must be (nearly) uniformly spaced in arc length.
double geodesic_residual(const std::vector<SpherePoint>& samples);

bool meets_orthogonally(const Vec3& arc_plane_normal, const Vec3& facet_outer_normal, double tol);

SpherePoint equator_pole(const GeodesicArc& arc);

Meridian meridian(const SpherePoint& pole, const SpherePoint& through);

/// Builds the quadrilateral (p1, lifted p2, lifted q2, q1) from an arc that
/// meets its two supporting planes orthogonally and a second plane through the
/// origin that misses the closed arc, and reports its angles.
Step3Report step3_audit(const SpherePoint& p1, const SpherePoint& q1, const Vec3& nu0_p1,
                        const Vec3& nu0_q1, const Vec3& plane2_normal);

}  // namespace vskip
