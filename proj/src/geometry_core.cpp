#include "vskip/geometry_core.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace vskip {

namespace {

constexpr double kDedupTol = 1e-10;
constexpr double kRankTol = 1e-9;

bool finite(const Vec3& v) { return v.allFinite(); }

// Strict feasibility of {x : x.n_i < 0} by enumerating the candidate maximizers
// of min_i(-x.n_i) on the unit sphere: those are equiangular to at most three
// of the normals.
bool has_interior(const std::vector<HalfSpace>& hs) {
  if (hs.empty()) return true;
  const std::size_t m = hs.size();
  auto strictly_inside = [&](const Vec3& x) {
    const double nx = x.norm();
    if (!(nx > 1e-14)) return false;
    for (const auto& h : hs)
      if (h.normal.dot(x) / nx >= -1e-12) return false;
    return true;
  };
  Vec3 total = Vec3::Zero();
  for (const auto& h : hs) total += h.normal;
  if (strictly_inside(-total)) return true;
  for (std::size_t i = 0; i < m; ++i) {
    if (strictly_inside(-hs[i].normal)) return true;
    for (std::size_t j = i + 1; j < m; ++j) {
      const Vec3 bis = -(hs[i].normal + hs[j].normal);
      if (strictly_inside(bis)) return true;
      const Vec3 c = hs[i].normal.cross(hs[j].normal);
      if (strictly_inside(c) || strictly_inside(-c)) return true;
      for (std::size_t k = j + 1; k < m; ++k) {
        Eigen::Matrix3d n;
        n.row(0) = hs[i].normal;
        n.row(1) = hs[j].normal;
        n.row(2) = hs[k].normal;
        Eigen::FullPivLU<Eigen::Matrix3d> lu(n);
        if (!lu.isInvertible()) continue;
        const Vec3 x = lu.solve(-Vec3::Ones());
        if (strictly_inside(x)) return true;
      }
    }
  }
  return false;
}

}  // namespace

HalfSpace HalfSpace::make(const Vec3& normal, double offset) {
  const double n = normal.norm();
  if (!finite(normal) || !std::isfinite(offset) || !(n > 0.0))
    throw GeometryError("half-space normal must be finite and nonzero");
  return HalfSpace{normal / n, offset / n};
}

PolyhedralCone::PolyhedralCone(std::span<const HalfSpace> halfspaces) {
  for (const auto& h : halfspaces) {
    if (std::abs(h.offset) > 0.0)
      throw GeometryError("cone half-spaces must pass through the origin (offset 0)");
    const HalfSpace u = HalfSpace::make(h.normal, 0.0);
    const bool dup = std::any_of(halfspaces_.begin(), halfspaces_.end(), [&](const HalfSpace& g) {
      return g.normal.dot(u.normal) > 1.0 - kDedupTol;
    });
    if (!dup) halfspaces_.push_back(u);
  }
  if (!has_interior(halfspaces_)) throw GeometryError("cone has empty interior");
}

PolyhedralCone::PolyhedralCone(const std::vector<Vec3>& normals) {
  std::vector<HalfSpace> hs;
  hs.reserve(normals.size());
  for (const auto& n : normals) hs.push_back(HalfSpace::make(n, 0.0));
  *this = PolyhedralCone(std::span<const HalfSpace>(hs));
}

double PolyhedralCone::max_violation(const Vec3& x) const {
  double v = -std::numeric_limits<double>::infinity();
  for (const auto& h : halfspaces_) v = std::max(v, x.dot(h.normal));
  return v;
}

Wedge::Wedge(const Vec3& basepoint_, const Vec3& w1_, const Vec3& w2_)
    : basepoint(basepoint_), w1(w1_.normalized()), w2(w2_.normalized()) {
  if (!finite(basepoint_) || !finite(w1_) || !finite(w2_) || w1_.norm() == 0.0 || w2_.norm() == 0.0)
    throw GeometryError("wedge vectors must be finite and nonzero");
  if (w1.cross(w2).norm() <= 1e-9) throw GeometryError("wedge normals are parallel");
}

Pyramid::Pyramid(double a_, double b_) : a(a_), b(b_) {
  if (!(a > 0.0) || !std::isfinite(a)) throw GeometryError("a must be > 0");
  if (!(b > 0.0) || !std::isfinite(b)) throw GeometryError("b must be > 0");
}

bool contains(const PolyhedralCone& cone, const Vec3& p, double tol) {
  for (const auto& h : cone.halfspaces())
    if (p.dot(h.normal) > tol) return false;
  return true;
}

PolyhedralCone pyramid_to_cone(const Pyramid& pyr) {
  const std::vector<Vec3> normals{
      Vec3(pyr.a, 0, -1), Vec3(-pyr.a, 0, -1), Vec3(0, pyr.b, -1), Vec3(0, -pyr.b, -1)};
  return PolyhedralCone(normals);
}

PolyhedralCone wedge_to_cone(const Wedge& w) {
  if (w.basepoint.norm() > 0.0 &&
      (std::abs(w.basepoint.dot(w.w1)) > 1e-12 || std::abs(w.basepoint.dot(w.w2)) > 1e-12))
    throw GeometryError("wedge spine does not pass through the origin");
  return PolyhedralCone(std::vector<Vec3>{w.w1, w.w2});
}

int normal_rank(const PolyhedralCone& cone) {
  const auto& hs = cone.halfspaces();
  Eigen::MatrixXd n(static_cast<Eigen::Index>(hs.size()), 3);
  for (std::size_t i = 0; i < hs.size(); ++i) n.row(static_cast<Eigen::Index>(i)) = hs[i].normal;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(n);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > kRankTol * s(0)) ++rank;
  return rank;
}

bool is_vertex(const PolyhedralCone& cone) {
  if (cone.is_whole_space()) throw GeometryError("cone has no half-spaces (whole space)");
  return normal_rank(cone) == 3;
}

PolyhedralCone tangent_cone(std::span<const HalfSpace> constraints, const Vec3& x0, double tol) {
  if (tol < 0.0) throw GeometryError("tolerance must be >= 0");
  std::vector<HalfSpace> active;
  for (const auto& c : constraints) {
    const HalfSpace h = HalfSpace::make(c.normal, c.offset);
    const double r = h.eval(x0);
    if (r > tol) throw GeometryError("base point violates a constraint");
    if (std::abs(r) <= tol) active.push_back(HalfSpace{h.normal, 0.0});
  }
  return PolyhedralCone(std::span<const HalfSpace>(active));
}

Line spine(const Wedge& w) {
  const Vec3 c = w.w1.cross(w.w2);
  if (c.norm() <= 1e-9) throw GeometryError("wedge normals are parallel");
  return Line{w.basepoint, c.normalized()};
}

std::vector<Vec3> cross_section(const PolyhedralCone& cone, double height) {
  if (!(height > 0.0)) throw GeometryError("section height must be > 0");
  if (cone.is_whole_space() || !is_vertex(cone))
    throw GeometryError("cross-section of a cone that is not a vertex is unbounded");

  // The section of a pointed cone is the convex hull of its extreme rays
  // scaled to the given height; bounded exactly when every ray points up.
  const auto rays = extreme_rays(cone);
  std::vector<Vec3> result;
  bool any_up = false, any_flat = false;
  for (const auto& r : rays) {
    if (r.z() > 1e-12) {
      any_up = true;
      result.push_back(r * (height / r.z()));
    } else {
      any_flat = true;
    }
  }
  if (!any_up) throw GeometryError("cross-section is empty");
  if (any_flat) throw GeometryError("cross-section is unbounded");
  if (result.size() < 3) throw GeometryError("cross-section is degenerate");

  Vec2 centre = Vec2::Zero();
  for (const auto& p : result) centre += Vec2(p.x(), p.y());
  centre /= static_cast<double>(result.size());
  std::sort(result.begin(), result.end(), [&](const Vec3& p, const Vec3& q) {
    return std::atan2(p.y() - centre.y(), p.x() - centre.x()) < std::atan2(q.y() - centre.y(), q.x() - centre.x());
  });
  for (auto& p : result) p.z() = height;
  return result;
}

std::vector<Vec3> extreme_rays(const PolyhedralCone& cone, double tol) {
  const auto& hs = cone.halfspaces();
  std::vector<Vec3> rays;
  for (std::size_t i = 0; i < hs.size(); ++i)
    for (std::size_t j = i + 1; j < hs.size(); ++j) {
      const Vec3 c = hs[i].normal.cross(hs[j].normal);
      if (c.norm() <= 1e-12) continue;
      for (const Vec3& r : {Vec3(c.normalized()), Vec3(-c.normalized())}) {
        if (cone.max_violation(r) > tol) continue;
        const bool dup = std::any_of(rays.begin(), rays.end(),
                                     [&](const Vec3& q) { return q.dot(r) > 1.0 - 1e-12; });
        if (!dup) rays.push_back(r);
      }
    }
  return rays;
}

Enclosure pyramid_enclosure(const PolyhedralCone& cone, double b, int side) {
  if (!(b > 0.0)) throw GeometryError("b must be > 0");
  if (side != 1 && side != -1) throw GeometryError("side must be +1 or -1");
  if (cone.is_whole_space() || !is_vertex(cone))
    throw GeometryError("cone is not a vertex: no one-sided pyramid enclosure exists");

  const auto rays = extreme_rays(cone);
  const double tol = 1e-10;
  double best = 0.0;
  bool any = false;
  for (const auto& r : rays) {
    if (r.z() < b * std::abs(r.y()) - tol) throw GeometryError("cone is not contained in the wedge x3 >= b|x2|");
    const double s = side * r.x();
    if (s <= tol) continue;
    if (r.z() <= tol) throw GeometryError("cone is unbounded in x1 at finite height on this side");
    best = std::max(best, s / r.z());
    any = true;
  }
  if (!any) return Enclosure{Enclosure::Kind::Unbounded, std::numeric_limits<double>::infinity()};
  return Enclosure{Enclosure::Kind::Finite, 1.0 / best};
}

}  // namespace vskip
