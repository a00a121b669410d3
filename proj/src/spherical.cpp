#include "vskip/spherical.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vskip {

namespace {

constexpr double kAntipodalTol = 1e-10;
constexpr double kCoincidentTol = 1e-10;

bool antipodal(const Vec3& p, const Vec3& q) { return p.dot(q) <= -1.0 + kAntipodalTol; }

// Unnormalized tangent at v towards u.
Vec3 tangent_towards(const Vec3& v, const Vec3& u) { return u - u.dot(v) * v; }

// Strictly interior point of the minor arc a-b?
bool strictly_on_arc(const Vec3& x, const Vec3& a, const Vec3& b) {
  const Vec3 n = a.cross(b);
  return a.cross(x).dot(n) > 1e-14 && x.cross(b).dot(n) > 1e-14;
}

bool arcs_cross(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const Vec3 x = a.cross(b).cross(c.cross(d));
  if (x.norm() <= 1e-14) return false;  // same great circle; endpoints are checked separately
  const Vec3 u = x.normalized();
  for (const Vec3& y : {u, Vec3(-u)})
    if (strictly_on_arc(y, a, b) && strictly_on_arc(y, c, d)) return true;
  return false;
}

// Point of the great circle orthogonal to `plane_normal` that lies on the half
// meridian from `pole` through `through`.
Vec3 lift_to_meridian(const Vec3& pole, const Vec3& through, const Vec3& plane_normal) {
  const Vec3 meridian_normal = pole.cross(through);
  const Vec3 d = plane_normal.cross(meridian_normal);
  if (d.norm() <= 1e-12) throw GeometryError("plane contains the meridian (degenerate configuration)");
  Vec3 x = d.normalized();
  // Half meridian = {cos s pole + sin s t : s in [0, pi]} with t the unit tangent towards `through`.
  const Vec3 t = tangent_towards(pole, through).normalized();
  if (x.dot(t) < 0.0) x = -x;
  if (std::abs(x.dot(t)) <= 1e-12) throw GeometryError("plane meets the meridian at a pole (degenerate configuration)");
  return x;
}

}  // namespace

SpherePoint::SpherePoint(const Vec3& v) {
  const double n = v.norm();
  if (!v.allFinite() || !(n > 0.0)) throw GeometryError("sphere point must be finite and nonzero");
  dir_ = v / n;
}

GeodesicArc::GeodesicArc(const SpherePoint& p_, const SpherePoint& q_) : p(p_), q(q_) {
  if (antipodal(p.dir(), q.dir())) throw GeometryError("arc endpoints are antipodal");
}

double GeodesicArc::length() const { return arc_length(p, q); }

Vec3 GeodesicArc::at(double s) const {
  const double theta = length();
  if (theta <= 1e-15) return p.dir();
  const double w0 = std::sin((1.0 - s) * theta) / std::sin(theta);
  const double w1 = std::sin(s * theta) / std::sin(theta);
  return (w0 * p.dir() + w1 * q.dir()).normalized();
}

GeodesicPolygon::GeodesicPolygon(std::vector<SpherePoint> vertices) : vertices_(std::move(vertices)) {
  const std::size_t k = vertices_.size();
  if (k < 3) throw GeometryError("geodesic polygon needs at least 3 vertices");
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      if ((vertices_[i].dir() - vertices_[j].dir()).norm() <= kCoincidentTol)
        throw GeometryError("degenerate polygon: coincident vertices");
  for (std::size_t i = 0; i < k; ++i)
    if (antipodal(vertices_[i].dir(), vertices_[(i + 1) % k].dir()))
      throw GeometryError("consecutive polygon vertices are antipodal");

  std::vector<Vec3> inward;
  inward.reserve(k);
  for (const auto& v : vertices_) inward.push_back(-v.dir());
  try {
    PolyhedralCone probe(inward);
  } catch (const GeometryError&) {
    throw GeometryError("polygon is not contained in an open hemisphere");
  }

  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 2; j < k; ++j) {
      if (i == 0 && j == k - 1) continue;
      if (arcs_cross(vertices_[i].dir(), vertices_[i + 1].dir(), vertices_[j].dir(),
                     vertices_[(j + 1) % k].dir()))
        throw GeometryError("polygon edges cross");
    }
}

double arc_length(const SpherePoint& p, const SpherePoint& q) {
  if (antipodal(p.dir(), q.dir())) throw GeometryError("arc endpoints are antipodal");
  // atan2 form is accurate near 0 and pi; equals arccos(clamp(p.q)).
  return std::atan2(p.dir().cross(q.dir()).norm(), p.dir().dot(q.dir()));
}

double interior_angle(const SpherePoint& v, const SpherePoint& u, const SpherePoint& w) {
  const Vec3& c = v.dir();
  const Vec3 tu = tangent_towards(c, u.dir());
  const Vec3 tw = tangent_towards(c, w.dir());
  if (tu.norm() <= 1e-14 || tw.norm() <= 1e-14) throw GeometryError("angle undefined: point coincides with +-v");
  return std::atan2(tu.cross(tw).norm(), tu.dot(tw));
}

std::vector<double> interior_angles(const GeodesicPolygon& poly) {
  const auto& vs = poly.vertices();
  const std::size_t k = vs.size();
  std::vector<double> ccw(k);
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const Vec3& v = vs[i].dir();
    const Vec3 t_prev = tangent_towards(v, vs[(i + k - 1) % k].dir());
    const Vec3 t_next = tangent_towards(v, vs[(i + 1) % k].dir());
    double theta = std::atan2(v.dot(t_next.cross(t_prev)), t_next.dot(t_prev));
    if (theta < 0.0) theta += 2.0 * std::numbers::pi;
    ccw[i] = theta;
    sum += theta;
  }
  const double kd = static_cast<double>(k);
  const double excess_ccw = sum - (kd - 2.0) * std::numbers::pi;
  const double excess_cw = (kd + 2.0) * std::numbers::pi - sum;
  if (excess_ccw > excess_cw)
    for (auto& t : ccw) t = 2.0 * std::numbers::pi - t;
  return ccw;
}

double spherical_excess(const GeodesicPolygon& poly) {
  const auto angles = interior_angles(poly);
  double sum = 0.0;
  for (double a : angles) sum += a;
  return sum - (static_cast<double>(poly.size()) - 2.0) * std::numbers::pi;
}

double geodesic_residual(const std::vector<SpherePoint>& samples) {
  if (samples.size() < 5) throw GeometryError("geodesic residual needs at least 5 samples");
  std::vector<double> gaps;
  gaps.reserve(samples.size() - 1);
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) gaps.push_back(arc_length(samples[i], samples[i + 1]));
  double mean = 0.0;
  for (double g : gaps) mean += g;
  mean /= static_cast<double>(gaps.size());
  if (!(mean > 0.0)) throw GeometryError("samples are not distinct");
  for (double g : gaps)
    if (std::abs(g - mean) > 0.01 * mean) throw GeometryError("sample spacing is not uniform within 1%");

  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
    const Vec3& a = samples[i - 1].dir();
    const Vec3& g = samples[i].dir();
    const Vec3& b = samples[i + 1].dir();
    const Vec3 d1 = (b - a) / (2.0 * mean);
    const Vec3 d2 = (b - 2.0 * g + a) / (mean * mean);
    worst = std::max(worst, std::abs(g.cross(d1).dot(d2)));
  }
  return worst;
}

bool meets_orthogonally(const Vec3& arc_plane_normal, const Vec3& facet_outer_normal, double tol) {
  return std::abs(arc_plane_normal.dot(facet_outer_normal)) <= tol;
}

SpherePoint equator_pole(const GeodesicArc& arc) {
  const Vec3 n = arc.p.dir().cross(arc.q.dir());
  if (n.norm() <= 1e-14) throw GeometryError("arc endpoints do not span a plane");
  return SpherePoint(n);
}

Meridian meridian(const SpherePoint& pole, const SpherePoint& through) {
  if (std::abs(pole.dir().dot(through.dir())) >= 1.0 - kAntipodalTol)
    throw GeometryError("meridian undefined: point coincides with a pole");
  return Meridian{GeodesicArc(pole, through), GeodesicArc(through, -pole)};
}

Step3Report step3_audit(const SpherePoint& p1, const SpherePoint& q1, const Vec3& nu0_p1,
                        const Vec3& nu0_q1, const Vec3& plane2_normal) {
  const GeodesicArc gamma1(p1, q1);
  Vec3 pole = equator_pole(gamma1).dir();
  const Vec3 n_p = nu0_p1.normalized();
  const Vec3 n_q = nu0_q1.normalized();
  if (!meets_orthogonally(pole, n_p, 1e-6) || !meets_orthogonally(pole, n_q, 1e-6))
    throw GeometryError("first arc does not meet its supporting planes orthogonally");

  if (!(plane2_normal.norm() > 0.0)) throw GeometryError("second plane normal is zero");
  const Vec3 m = plane2_normal.normalized();
  const double sp = m.dot(p1.dir());
  const double sq = m.dot(q1.dir());
  if (std::abs(sp) <= 1e-12 || std::abs(sq) <= 1e-12 || (sp > 0.0) != (sq > 0.0))
    throw GeometryError("second plane intersects the closed first arc (arcs must be disjoint)");

  Vec3 p2 = lift_to_meridian(pole, p1.dir(), m);
  Vec3 q2 = lift_to_meridian(pole, q1.dir(), m);
  // Work on the hemisphere that holds the lifted points.
  if (p2.dot(pole) < 0.0) pole = -pole;
  if (p2.dot(pole) <= 1e-12 || q2.dot(pole) <= 1e-12)
    throw GeometryError("lifted points are not on one side of the first arc's equator");
  if ((p2 - pole).norm() <= 1e-10 || (q2 - pole).norm() <= 1e-10)
    throw GeometryError("second plane passes through the pole (degenerate configuration)");

  const SpherePoint sp2(p2), sq2(q2);
  Step3Report r;
  r.alpha1 = interior_angle(p1, q1, sp2);
  r.alpha2t = interior_angle(sp2, p1, sq2);
  r.beta2t = interior_angle(sq2, sp2, q1);
  r.beta1 = interior_angle(q1, sq2, p1);
  r.angle_sum = r.alpha1 + r.alpha2t + r.beta2t + r.beta1;
  r.excess = r.angle_sum - 2.0 * std::numbers::pi;
  r.infeasibility_witness = r.angle_sum > 2.0 * std::numbers::pi + 1e-9;
  r.pole = pole;
  r.p2_lifted = p2;
  r.q2_lifted = q2;
  return r;
}

}  // namespace vskip
