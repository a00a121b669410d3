// Polyhedral convex cones with apex at the origin: construction, membership,
// vertex detection, tangent cones, wedges, pyramids and the one-sided
// pyramid enclosure of a cone that already sits inside a wedge.
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vskip {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Closed half-space {x : x . normal <= offset}; the normal is stored unit length.
struct HalfSpace {
  Vec3 normal;
  double offset = 0.0;

  /// Normalizes `normal` (and scales `offset` accordingly). Throws on a zero or
  /// non-finite normal.
  static HalfSpace make(const Vec3& normal, double offset = 0.0);

  [[nodiscard]] double eval(const Vec3& x) const { return x.dot(normal) - offset; }
};

/// Intersection of finitely many half-spaces through the origin.
///
/// Normals are normalized and near-duplicates (dot > 1 - 1e-10) are dropped on
/// construction. An empty list represents the whole space. Construction throws
/// when the intersection has empty interior.
class PolyhedralCone {
 public:
  PolyhedralCone() = default;
  explicit PolyhedralCone(std::span<const HalfSpace> halfspaces);
  explicit PolyhedralCone(const std::vector<Vec3>& normals);

  [[nodiscard]] const std::vector<HalfSpace>& halfspaces() const { return halfspaces_; }
  [[nodiscard]] std::size_t size() const { return halfspaces_.size(); }
  [[nodiscard]] bool is_whole_space() const { return halfspaces_.empty(); }
  [[nodiscard]] const Vec3& normal(std::size_t i) const { return halfspaces_[i].normal; }

  /// Largest constraint value max_i x.n_i (negative inside, zero on the boundary).
  [[nodiscard]] double max_violation(const Vec3& x) const;

 private:
  std::vector<HalfSpace> halfspaces_;
};

/// Intersection of two half-spaces {(x - basepoint) . w_i <= 0}.
struct Wedge {
  Vec3 basepoint = Vec3::Zero();
  Vec3 w1;
  Vec3 w2;

  Wedge(const Vec3& basepoint, const Vec3& w1, const Vec3& w2);
};

/// The canonical pyramid C_{a,b} = {x3 >= max(a|x1|, b|x2|)}.
struct Pyramid {
  double a = 1.0;
  double b = 1.0;

  Pyramid(double a, double b);
};

struct Line {
  Vec3 point;
  Vec3 direction;  // unit
};

/// Outcome of a one-sided pyramid enclosure: either a finite slope `a`, or
/// "unbounded" when the cone has no points strictly on the requested side.
struct Enclosure {
  enum class Kind { Finite, Unbounded };
  Kind kind = Kind::Finite;
  double a = 0.0;

  [[nodiscard]] bool finite() const { return kind == Kind::Finite; }
};

bool contains(const PolyhedralCone& cone, const Vec3& p, double tol = 0.0);

PolyhedralCone pyramid_to_cone(const Pyramid& pyr);

/// A wedge with spine through the origin as a two-facet cone.
PolyhedralCone wedge_to_cone(const Wedge& w);

/// True iff the cone contains no line, i.e. its normals have rank 3
/// (singular values below 1e-9 * sigma_max count as zero).
bool is_vertex(const PolyhedralCone& cone);

/// Numerical rank of the normal set.
int normal_rank(const PolyhedralCone& cone);

/// Tangent cone of {x : x.n_i <= c_i} at x0, built from the constraints active
/// within `tol`. An interior point yields the whole-space cone.
PolyhedralCone tangent_cone(std::span<const HalfSpace> constraints, const Vec3& x0,
                            double tol = 1e-9);

Line spine(const Wedge& w);

/// Convex polygon {x3 = height} intersected with the cone, counter-clockwise
/// seen from +x3. Throws when the section is unbounded or empty.
std::vector<Vec3> cross_section(const PolyhedralCone& cone, double height);

/// Directions of the extreme rays of a pointed cone (unit vectors).
std::vector<Vec3> extreme_rays(const PolyhedralCone& cone, double tol = 1e-10);

/// Largest a with cone ∩ {side x1 >= 0} ⊂ C_{a,b} ∩ {side x1 >= 0}.
Enclosure pyramid_enclosure(const PolyhedralCone& cone, double b, int side);

}  // namespace vskip
