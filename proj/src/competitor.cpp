#include "vskip/competitor.hpp"

#include "vskip/mesh.hpp"
#include "vskip/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vskip {

namespace {

constexpr double kQuadTol = 1e-10;

void check_epsilon(double a, double epsilon) {
  if (!std::isfinite(epsilon) || epsilon < 0.0) throw GeometryError("epsilon must be >= 0");
  if (epsilon * a >= 1.0) throw GeometryError("epsilon must be < 1/a (slid section degenerates)");
}

}  // namespace

ConnectionProfile::ConnectionProfile(double h, double alpha) : h_(h), alpha_(alpha) {
  if (!(h > 0.0) || !std::isfinite(h)) throw GeometryError("profile height h must be > 0");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw GeometryError("profile exponent alpha must be > 0");
  top_pow_ = std::pow(1.0 + h, alpha);
}

void ConnectionProfile::check_domain(double t) const {
  if (!(t >= 1.0 && t <= 1.0 + h_)) throw GeometryError("profile evaluated outside [1, 1 + h]");
}

double ConnectionProfile::phi(double t) const {
  check_domain(t);
  return (top_pow_ * std::pow(t, -alpha_) - 1.0) / (top_pow_ - 1.0);
}

double ConnectionProfile::phi_prime(double t) const {
  check_domain(t);
  return -alpha_ * top_pow_ * std::pow(t, -alpha_ - 1.0) / (top_pow_ - 1.0);
}

CompetitorSpec::CompetitorSpec(double a_, double b_, ConnectionProfile profile_, double epsilon_)
    : a(a_), b(b_), profile(profile_), epsilon(epsilon_) {
  Pyramid check(a, b);
  (void)check;
  check_epsilon(a, epsilon);
}

double phi(const ConnectionProfile& p, double t) { return p.phi(t); }
double phi_prime(const ConnectionProfile& p, double t) { return p.phi_prime(t); }

double weighted_energy(const ConnectionProfile& p) {
  // expm1 keeps (1+h)^alpha - 1 accurate when alpha log(1+h) is small.
  const double m_minus_1 = std::expm1(p.alpha() * std::log1p(p.h()));
  return 0.5 * p.alpha() * (m_minus_1 + 2.0) / m_minus_1;
}

ConnectionProfile feasible_params(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw GeometryError("a must be > 0");
  const double alpha = a * a;
  for (double h = 1.0; std::isfinite(h); h *= 2.0) {
    ConnectionProfile p(h, alpha);
    if (weighted_energy(p) < a * a) return p;
  }
  throw GeometryError("no feasible connection height found");  // unreachable: limit is a^2/2
}

SectionAreas section_areas(double a, double b, double epsilon) {
  Pyramid check(a, b);
  (void)check;
  check_epsilon(a, epsilon);
  const double a0 = 1.0 / b;
  return SectionAreas{a0, a0 - a * a * epsilon * epsilon / b};
}

double trapezium_area(double b, double h) {
  if (!(b > 0.0) || !(h > 0.0)) throw GeometryError("b and h must be > 0");
  return h * (2.0 + h) / b;
}

double ruled_excess(const CompetitorSpec& spec) {
  const auto& p = spec.profile;
  const double e2 = spec.epsilon * spec.epsilon;
  // Integrated in u = log t: phi' decays like a power of t, which is smooth in
  // u, while a long t-interval would let the rule step over the peak at t = 1.
  // sqrt(1 + s) - 1 = s / (sqrt(1 + s) + 1)
  const double top = 1.0 + p.h();
  auto integrand = [&](double u) {
    const double t = std::clamp(std::exp(u), 1.0, top);
    const double d = p.phi_prime(t);
    const double s = e2 * d * d;
    return (2.0 * t * t / spec.b) * s / (std::sqrt(1.0 + s) + 1.0);
  };
  return integrate(integrand, 0.0, std::log1p(p.h()), 1e-3 * kQuadTol, 1e-13);
}

double ruled_area(const CompetitorSpec& spec) {
  return trapezium_area(spec.b, spec.profile.h()) + ruled_excess(spec);
}

DeficitReport area_deficit(const CompetitorSpec& spec) {
  DeficitReport r;
  const auto areas = section_areas(spec.a, spec.b, spec.epsilon);
  r.A0 = areas.A0;
  r.A_eps = areas.A_eps;
  r.T_h_area = trapezium_area(spec.b, spec.profile.h());
  const double excess = ruled_excess(spec);
  r.ruled_area = r.T_h_area + excess;
  r.deficit = excess - spec.a * spec.a * spec.epsilon * spec.epsilon / spec.b;
  r.weighted_energy = weighted_energy(spec.profile);
  r.second_derivative = (2.0 / spec.b) * (r.weighted_energy - spec.a * spec.a);
  const double top = 1.0 + spec.profile.h();
  r.support_radius = std::sqrt(top * top + top * top / (spec.b * spec.b) + spec.epsilon * spec.epsilon);
  return r;
}

double find_epsilon_star(double a, double b, const ConnectionProfile& profile, int resolution) {
  if (resolution < 1) throw GeometryError("grid resolution must be >= 1");
  const double cap = 0.5 / a;
  double best = 0.0;
  for (int k = 1; k <= resolution; ++k) {
    const double eps = cap * static_cast<double>(k) / static_cast<double>(resolution);
    const double d = area_deficit(CompetitorSpec(a, b, profile, eps)).deficit;
    if (!(d < 0.0)) break;
    best = eps;
  }
  if (best == 0.0) throw GeometryError("profile infeasible at resolution " + std::to_string(resolution));
  return best;
}

TriMesh export_competitor_mesh(const CompetitorSpec& spec, int resolution) {
  if (resolution < 1) throw GeometryError("mesh resolution must be >= 1");
  const int n = resolution;
  const double eps = spec.epsilon;
  const double h = spec.profile.h();
  TriMesh mesh;

  // Each piece is a ruled strip x(t, v) = (x1(t), (2v - 1) t / b, t) with t in
  // [t0, t1]; a row of zero width collapses to a single vertex.
  auto add_strip = [&](double t0, double t1, auto&& x1_of) {
    std::vector<std::vector<int>> rows(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
      const double t = (i == n) ? t1 : t0 + (t1 - t0) * static_cast<double>(i) / n;
      const double x1 = x1_of(t);
      auto& row = rows[static_cast<std::size_t>(i)];
      if (t / spec.b <= 1e-13) {
        row.push_back(mesh.add_vertex(Vec3(x1, 0.0, t)));
        continue;
      }
      for (int j = 0; j <= n; ++j) {
        const double v = static_cast<double>(j) / n;
        row.push_back(mesh.add_vertex(Vec3(x1, (2.0 * v - 1.0) * t / spec.b, t)));
      }
    }
    for (int i = 0; i < n; ++i) {
      const auto& lo = rows[static_cast<std::size_t>(i)];
      const auto& hi = rows[static_cast<std::size_t>(i) + 1];
      for (int j = 0; j < n; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        // Normal points towards +x1 for increasing x2 and x3.
        if (lo.size() == 1) {
          mesh.add_triangle(lo[0], hi[ju + 1], hi[ju]);
        } else {
          mesh.add_triangle(lo[ju], lo[ju + 1], hi[ju + 1]);
          mesh.add_triangle(lo[ju], hi[ju + 1], hi[ju]);
        }
      }
    }
    return rows;
  };

  const double bottom = spec.a * eps;
  add_strip(bottom, 1.0, [&](double) { return eps; });
  add_strip(1.0, 1.0 + h, [&](double t) { return eps * spec.profile.phi(std::min(std::max(t, 1.0), 1.0 + h)); });
  mesh.weld(1e-12);
  return mesh;
}

}  // namespace vskip
