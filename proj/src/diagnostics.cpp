// Observables of a surface mesh: exact ball clipping, conical deviation,
// contact angles along the free boundary and the distance to the apex.
#include "vskip/minimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>

namespace vskip {

namespace {

// Integrals of a radial weight over (flat triangle) ∩ B_S. In the triangle's
// plane the weight only depends on the distance s to the foot c of the origin,
// so the clipped region is swept as a signed fan around c: along a chord of the
// triangle the fan ends on the edge line, outside the disk it ends on the arc.
struct RadialWeight {
  virtual ~RadialWeight() = default;
  // Integral over the fan sector of angle dtheta reaching the arc of the disk.
  [[nodiscard]] virtual double arc(double dtheta) const = 0;
  // Integral over the fan triangle (c, P, Q) with P, Q on a line at distance p
  // from c and signed positions tp, tq along it.
  [[nodiscard]] virtual double line(double p, double tp, double tq) const = 0;
};

struct AreaWeight final : RadialWeight {
  double rho2;
  explicit AreaWeight(double rho2_) : rho2(rho2_) {}
  double arc(double dtheta) const override { return 0.5 * rho2 * dtheta; }
  double line(double p, double tp, double tq) const override { return 0.5 * p * (tq - tp); }
};

// |x . nu| / |x|^3 = D / (D^2 + s^2)^(3/2) for a plane at distance D.
struct ConicalWeight final : RadialWeight {
  double D, rho2;
  ConicalWeight(double D_, double rho2_) : D(D_), rho2(rho2_) {}
  double arc(double dtheta) const override { return (1.0 - D / std::sqrt(D * D + rho2)) * dtheta; }
  double line(double p, double tp, double tq) const override {
    const double k = D / std::sqrt(D * D + p * p);
    const double sp = tp / std::hypot(p, tp), sq = tq / std::hypot(p, tq);
    return (std::atan2(tq, p) - std::atan2(tp, p)) - (std::asin(k * sq) - std::asin(k * sp));
  }
};

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Signed fan integral over the part of segment PQ (2D, relative to c) inside
// the disk of squared radius rho2, plus the arc part outside it.
double edge_fan(const Vec2& P, const Vec2& Q, double rho2, const RadialWeight& w) {
  const Vec2 d = Q - P;
  const double dd = d.squaredNorm();
  if (dd == 0.0) return 0.0;
  // Split points where |P + t d|^2 = rho2.
  double cuts[4] = {0.0, 0.0, 0.0, 1.0};
  int nc = 1;
  const double b = P.dot(d), c0 = P.squaredNorm() - rho2;
  const double disc = b * b - dd * c0;
  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    for (double t : {(-b - sq) / dd, (-b + sq) / dd})
      if (t > 0.0 && t < 1.0) cuts[nc++] = t;
  }
  cuts[nc++] = 1.0;
  const double len = std::sqrt(dd);
  const Vec2 u = d / len;
  const double sigma_p = cross2(P, u);  // signed distance from c to the line
  const double p = std::abs(sigma_p);
  double total = 0.0;
  for (int k = 0; k + 1 < nc; ++k) {
    const Vec2 A = P + cuts[k] * d, B = P + cuts[k + 1] * d;
    const Vec2 M = 0.5 * (A + B);
    if (M.squaredNorm() <= rho2) {
      if (p <= 1e-300) continue;
      const double sign = sigma_p > 0.0 ? 1.0 : -1.0;
      total += sign * w.line(p, A.dot(u), B.dot(u));
    } else {
      total += w.arc(std::atan2(cross2(A, B), A.dot(B)));
    }
  }
  return total;
}

struct PlaneFrame {
  Vec3 n;      // unit normal
  double D;    // n . a (signed distance of the plane from the origin)
  Vec3 e1, e2;
  Vec2 pts[3];
  double area;
};

std::optional<PlaneFrame> frame_of(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 nn = (b - a).cross(c - a);
  const double len = nn.norm();
  if (!(len > 0.0)) return std::nullopt;
  PlaneFrame f;
  f.n = nn / len;
  f.area = 0.5 * len;
  f.D = f.n.dot(a);
  f.e1 = (b - a).normalized();
  f.e2 = f.n.cross(f.e1);
  const Vec3 foot = f.D * f.n;
  const Vec3* v[3] = {&a, &b, &c};
  for (int k = 0; k < 3; ++k) f.pts[k] = Vec2((*v[k] - foot).dot(f.e1), (*v[k] - foot).dot(f.e2));
  return f;
}

// Orientation of the 2D frame matches the triangle, so the fan sum is >= 0.
double clipped_integral(const PlaneFrame& f, double rho2, const RadialWeight& w) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += edge_fan(f.pts[k], f.pts[(k + 1) % 3], rho2, w);
  return std::max(s, 0.0);
}

double area_in_ball(const TriMesh& mesh, double r) {
  double total = 0.0;
  for (const auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[static_cast<std::size_t>(t[0])];
    const Vec3& b = mesh.vertices[static_cast<std::size_t>(t[1])];
    const Vec3& c = mesh.vertices[static_cast<std::size_t>(t[2])];
    if (std::max({a.norm(), b.norm(), c.norm()}) <= r) {
      total += triangle_area(a, b, c);
      continue;
    }
    const auto f = frame_of(a, b, c);
    if (!f) continue;
    const double rho2 = r * r - f->D * f->D;
    if (rho2 <= 0.0) continue;
    total += clipped_integral(*f, rho2, AreaWeight(rho2));
  }
  return total;
}

void check_radii(const std::vector<double>& radii) {
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || !std::isfinite(radii[i])) throw GeometryError("radii must be positive");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw GeometryError("radii must be increasing");
  }
}

}  // namespace

std::vector<RatioSample> monotonicity_ratio(const TriMesh& mesh, const std::vector<double>& radii) {
  check_radii(radii);
  std::vector<RatioSample> out;
  out.reserve(radii.size());
  for (double r : radii) out.push_back({r, area_in_ball(mesh, r) / (r * r)});
  return out;
}

double conical_deviation(const TriMesh& mesh, double rho, double r) {
  if (!(rho > 0.0) || !(rho < r)) throw GeometryError("conical deviation needs 0 < rho < r");
  double total = 0.0;
  for (const auto& t : mesh.triangles) {
    const auto f = frame_of(mesh.vertices[static_cast<std::size_t>(t[0])], mesh.vertices[static_cast<std::size_t>(t[1])],
                            mesh.vertices[static_cast<std::size_t>(t[2])]);
    if (!f) continue;
    const double D = std::abs(f->D);
    // Bound on the triangle's contribution outside B_rho.
    if (D * f->area / (rho * rho * rho) < 1e-18) continue;
    auto integral = [&](double S) {
      const double rho2 = S * S - D * D;
      return rho2 <= 0.0 ? 0.0 : clipped_integral(*f, rho2, ConicalWeight(D, rho2));
    };
    total += std::max(integral(r) - integral(rho), 0.0);
  }
  return total;
}

BoundaryAngleReport boundary_angle_audit(const TriMesh& mesh, const PolyhedralCone& cone, double min_radius) {
  BoundaryAngleReport rep;
  rep.per_facet.assign(cone.size(), AngleStats{});
  std::vector<double> sums(cone.size(), 0.0);
  double sum = 0.0;
  rep.all.min_deg = std::numeric_limits<double>::infinity();
  rep.all.max_deg = -std::numeric_limits<double>::infinity();
  for (auto& s : rep.per_facet) {
    s.min_deg = std::numeric_limits<double>::infinity();
    s.max_deg = -std::numeric_limits<double>::infinity();
  }
  // Boundary edges come out in triangle order; pair each with its triangle.
  std::map<std::pair<int, int>, int> owner;
  for (std::size_t i = 0; i < mesh.num_triangles(); ++i)
    for (int k = 0; k < 3; ++k)
      owner[{mesh.triangles[i][static_cast<std::size_t>(k)], mesh.triangles[i][static_cast<std::size_t>((k + 1) % 3)]}] =
          static_cast<int>(i);
  int free_edges = 0;
  for (const auto& [a, b] : boundary_edges(mesh)) {
    const auto& ca = mesh.classes[static_cast<std::size_t>(a)];
    const auto& cb = mesh.classes[static_cast<std::size_t>(b)];
    int facet = -1;
    for (int f : {ca.facet, ca.edge_facet})
      if (f >= 0 && cb.touches(f)) {
        facet = f;
        break;
      }
    if (facet < 0) continue;
    ++free_edges;
    const Vec3 mid = 0.5 * (mesh.vertices[static_cast<std::size_t>(a)] + mesh.vertices[static_cast<std::size_t>(b)]);
    if (mid.norm() <= min_radius) continue;
    const auto& t = mesh.triangles[static_cast<std::size_t>(owner.at({a, b}))];
    const Vec3 n = (mesh.vertices[static_cast<std::size_t>(t[1])] - mesh.vertices[static_cast<std::size_t>(t[0])])
                       .cross(mesh.vertices[static_cast<std::size_t>(t[2])] - mesh.vertices[static_cast<std::size_t>(t[0])])
                       .normalized();
    const double cosang = std::clamp(n.dot(cone.normal(static_cast<std::size_t>(facet))), -1.0, 1.0);
    const double deg = std::acos(cosang) * 180.0 / std::numbers::pi;
    for (AngleStats* s : {&rep.all, &rep.per_facet[static_cast<std::size_t>(facet)]}) {
      s->min_deg = std::min(s->min_deg, deg);
      s->max_deg = std::max(s->max_deg, deg);
      ++s->count;
    }
    sum += deg;
    sums[static_cast<std::size_t>(facet)] += deg;
  }
  if (free_edges == 0) throw GeometryError("mesh has no free-boundary edges");
  auto finish = [](AngleStats& s, double total) {
    if (s.count == 0) {
      s = AngleStats{};
      return;
    }
    s.mean_deg = total / s.count;
  };
  finish(rep.all, sum);
  for (std::size_t f = 0; f < cone.size(); ++f) finish(rep.per_facet[f], sums[f]);
  return rep;
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Voronoi-region walk (Ericson, Real-Time Collision Detection, 5.1.5).
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

double vertex_distance(const TriMesh& mesh) {
  double best = std::numeric_limits<double>::infinity();
  const Vec3 o = Vec3::Zero();
  for (const auto& t : mesh.triangles)
    best = std::min(best, closest_point_on_triangle(o, mesh.vertices[static_cast<std::size_t>(t[0])],
                                                    mesh.vertices[static_cast<std::size_t>(t[1])],
                                                    mesh.vertices[static_cast<std::size_t>(t[2])])
                              .norm());
  return best;
}

std::pair<double, double> density_ratio_bounds(const TriMesh& mesh, const std::vector<double>& radii) {
  if (radii.empty()) throw GeometryError("radii list is empty");
  const auto table = monotonicity_ratio(mesh, radii);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : table) {
    lo = std::min(lo, s.p);
    hi = std::max(hi, s.p);
  }
  return {lo, hi};
}

}  // namespace vskip
