#include "vskip/competitor.hpp"
#include "vskip/mesh.hpp"
#include "vskip/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>

using namespace vskip;

namespace {

// Composite Simpson with n (even) panels; deliberately unrelated to the
// adaptive Gauss-Kronrod rule used by the library.
double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

double shoelace(const std::vector<std::array<double, 2>>& p) {
  double twice = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& u = p[i];
    const auto& v = p[(i + 1) % p.size()];
    twice += u[0] * v[1] - v[0] * u[1];
  }
  return 0.5 * std::abs(twice);
}

}  // namespace

TEST_CASE("profile end values and closed form") {
  for (double h : {0.5, 1.0, 3.0, 40.0})
    for (double alpha : {0.1, 1.0, 2.5}) {
      const ConnectionProfile p(h, alpha);
      CHECK(phi(p, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(std::abs(phi(p, 1.0 + h)) <= 1e-14);
    }
  const ConnectionProfile p(1.0, 1.0);
  CHECK(phi(p, 1.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(phi(p, 0.99), GeometryError);
  CHECK_THROWS_AS(phi_prime(p, 2.01), GeometryError);
  CHECK_THROWS_AS(ConnectionProfile(0.0, 1.0), GeometryError);
  CHECK_THROWS_AS(ConnectionProfile(1.0, -1.0), GeometryError);
}

TEST_CASE("phi' against central differences, phi decreasing in [0, 1]") {
  const ConnectionProfile p(3.0, 1.7);
  const double d = 1e-5;
  for (int i = 1; i < 100; ++i) {
    const double t = 1.0 + 3.0 * i / 100.0;
    const double fd = (phi(p, t + d) - phi(p, t - d)) / (2 * d);
    CHECK(std::abs(fd - phi_prime(p, t)) <= 1e-8);
    CHECK(phi_prime(p, t) < 0.0);
    CHECK(phi(p, t) > 0.0);
    CHECK(phi(p, t) < 1.0);
  }
}

TEST_CASE("weighted energy: anchors and closed form against quadrature") {
  CHECK(weighted_energy(ConnectionProfile(3.0, 1.0)) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  CHECK(weighted_energy(ConnectionProfile(1.0, 2.0)) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      const double alpha = 0.1 + 3.9 * i / 19.0, h = 0.5 + 49.5 * j / 19.0;
      const ConnectionProfile p(h, alpha);
      auto f = [&](double t) { return t * phi_prime(p, t) * phi_prime(p, t); };
      REQUIRE(std::abs(weighted_energy(p) - integrate(f, 1.0, 1.0 + h, 1e-12)) <= 1e-10);
    }
}

TEST_CASE("weighted energy decreases towards alpha/2") {
  double last = weighted_energy(ConnectionProfile(0.25, 1.0));
  for (double h = 0.5; h <= 1e4; h *= 2) {
    const double e = weighted_energy(ConnectionProfile(h, 1.0));
    CHECK(e < last);
    last = e;
  }
  CHECK(std::abs(weighted_energy(ConnectionProfile(1e4, 1.0)) - 0.5) <= 1e-3);
}

TEST_CASE("feasible parameters") {
  const auto p1 = feasible_params(1.0);
  CHECK(p1.alpha() == 1.0);
  CHECK(weighted_energy(p1) < 1.0);
  // First doubling value with energy below 1: h = 1 gives 1.5, h = 2 gives 1, h = 4 gives 0.75.
  CHECK(p1.h() == 4.0);
  CHECK(weighted_energy(ConnectionProfile(p1.h() / 2, 1.0)) >= 1.0);

  const auto small = feasible_params(0.1);
  CHECK(small.alpha() == doctest::Approx(0.01));
  CHECK(weighted_energy(small) < 0.01);
  for (double a : {0.3, 0.5, 2.0, 7.0}) CHECK(weighted_energy(feasible_params(a)) < a * a);
  CHECK_THROWS_AS(feasible_params(0.0), GeometryError);
}

TEST_CASE("section and trapezium areas") {
  CHECK(section_areas(1, 1, 0).A0 == 1.0);
  CHECK(section_areas(1, 1, 0).A_eps == 1.0);
  CHECK(section_areas(1, 1, 0.5).A_eps == doctest::Approx(0.75).epsilon(1e-15));
  for (double a : {0.5, 1.0, 2.0})
    for (double b : {0.5, 1.0, 2.0})
      for (double eps : {0.0, 0.1, 0.3}) {
        if (eps * a >= 1) continue;
        // Trapezium {a eps <= x3 <= 1, b |x2| <= x3} in the (x2, x3) plane.
        const double lo = a * eps;
        const double oracle = shoelace({{{-lo / b, lo}}, {{lo / b, lo}}, {{1 / b, 1}}, {{-1 / b, 1}}});
        CHECK(std::abs(section_areas(a, b, eps).A_eps - oracle) <= 1e-12);
      }
  CHECK_THROWS_AS(section_areas(2, 1, 0.5), GeometryError);

  CHECK(trapezium_area(1, 1) == 3.0);
  CHECK(trapezium_area(2, 3) == 7.5);
  CHECK(std::abs(trapezium_area(1.7, 2.2) - simpson([](double t) { return 2 * t / 1.7; }, 1, 3.2, 2)) <= 1e-12);
}

TEST_CASE("ruled area") {
  const ConnectionProfile p(3.0, 1.0);
  CHECK(std::abs(ruled_area(CompetitorSpec(1, 1, p, 0.0)) - trapezium_area(1, 3)) <= 1e-10);

  double last = 0.0;
  for (double eps : {0.0, 0.05, 0.1, 0.2, 0.4}) {
    const double r = ruled_area(CompetitorSpec(1, 1, p, eps));
    CHECK(r >= last);
    last = r;
  }

  const double eps = 0.1;
  auto f = [&](double t) {
    const double d = phi_prime(p, t);
    return 2 * t * std::sqrt(1 + eps * eps * d * d);
  };
  CHECK(std::abs(ruled_area(CompetitorSpec(1, 1, p, eps)) - simpson(f, 1.0, 4.0, 1000000)) <= 1e-8);
}

TEST_CASE("area deficit") {
  const ConnectionProfile p(3.0, 1.0);
  CHECK(std::abs(area_deficit(CompetitorSpec(1, 1, p, 0.0)).deficit) <= 1e-10);
  CHECK(area_deficit(CompetitorSpec(1, 1, p, 0.0)).second_derivative == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));

  const auto rep = area_deficit(CompetitorSpec(1, 1, p, 0.05));
  CHECK(rep.deficit < 0.0);
  CHECK(-rep.deficit == doctest::Approx(0.5 / 3.0 * 0.05 * 0.05).epsilon(0.2));
  CHECK(rep.A_eps == doctest::Approx(1.0 - 0.0025).epsilon(1e-15));

  // Second derivative at 0 from central differences; the deficit is even in
  // eps, so d(eps) + d(-eps) = 2 d(eps). One Richardson step removes the
  // eps^2 term of the difference quotient.
  const double d = 1e-3;
  for (double a : {0.5, 1.0, 2.0})
    for (double b : {0.5, 1.0, 2.0}) {
      const auto prof = feasible_params(a);
      auto quotient = [&](double e) { return 2.0 * area_deficit(CompetitorSpec(a, b, prof, e)).deficit / (e * e); };
      const double fd = (4.0 * quotient(d) - quotient(2 * d)) / 3.0;
      const double closed = (2.0 / b) * (weighted_energy(prof) - a * a);
      CHECK(std::abs(fd - closed) <= 1e-5);
    }
}

TEST_CASE("the second derivative sign tracks the energy condition") {
  // h = 2 sits exactly on the threshold (energy 1) and is left out.
  for (double h : {0.5, 1.0, 4.0, 8.0, 1e6}) {
    const ConnectionProfile p(h, 1.0);
    const bool feasible = weighted_energy(p) < 1.0;
    CHECK((area_deficit(CompetitorSpec(1, 1, p, 1e-3)).deficit < 0.0) == feasible);
  }
}

TEST_CASE("epsilon star") {
  const ConnectionProfile p(3.0, 1.0);
  const double star = find_epsilon_star(1, 1, p, 200);
  CHECK(star > 0.0);
  CHECK(star <= 0.5);
  CHECK_THROWS_AS(find_epsilon_star(1, 1, ConnectionProfile(1e6, 3.0), 50), GeometryError);

  for (double a : {0.5, 1.0, 2.0})
    for (double b : {0.5, 1.0, 2.0}) {
      const auto prof = feasible_params(a);
      const double s = find_epsilon_star(a, b, prof, 200);
      CHECK(s <= 0.5 / a);
      CHECK(area_deficit(CompetitorSpec(a, b, prof, s)).deficit < -1e-9);
    }
}

TEST_CASE("competitor mesh") {
  const ConnectionProfile p(3.0, 1.0);
  const CompetitorSpec flat(1, 1, p, 0.0);
  const TriMesh m0 = export_competitor_mesh(flat, 8);
  for (const auto& v : m0.vertices) CHECK(v.x() == 0.0);
  validate(m0);

  const CompetitorSpec spec(1, 1, p, 0.2);
  const auto rep = area_deficit(spec);
  const double exact = rep.A_eps + rep.ruled_area;
  CHECK(std::abs(surface_area(export_competitor_mesh(spec, 200)) - exact) <= 1e-3 * exact);

  const double e1 = std::abs(surface_area(export_competitor_mesh(spec, 20)) - exact);
  const double e2 = std::abs(surface_area(export_competitor_mesh(spec, 40)) - exact);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.3));
}

TEST_CASE("adaptive quadrature") {
  const auto r = integrate_gk15([](double x) { return std::exp(-x * x); }, -3, 3, 1e-13);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(std::sqrt(M_PI) * std::erf(3.0)).epsilon(1e-13));
  CHECK(integrate([](double x) { return 1.0 / std::sqrt(x); }, 1e-8, 1, 1e-9) ==
        doctest::Approx(2.0 - 2e-4).epsilon(1e-9));
  CHECK_THROWS_AS(integrate([](double x) { return std::sin(1.0 / x); }, 1e-9, 1, 1e-15, 0.0), QuadratureError);
}
