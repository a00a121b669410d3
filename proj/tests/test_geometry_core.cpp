#include "vskip/geometry_core.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace vskip;

namespace {

// Direct formula for C_{a,b}, independent of the half-space representation.
bool in_pyramid(double a, double b, const Vec3& x) {
  return x.z() >= std::max(a * std::abs(x.x()), b * std::abs(x.y()));
}

std::vector<HalfSpace> cube_faces() {
  std::vector<HalfSpace> hs;
  for (int k = 0; k < 3; ++k)
    for (double s : {1.0, -1.0}) {
      Vec3 n = Vec3::Zero();
      n[k] = s;
      hs.push_back(HalfSpace::make(n, 1.0));
    }
  return hs;
}

double polygon_area(const std::vector<Vec3>& p) {
  double twice = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& u = p[i];
    const auto& v = p[(i + 1) % p.size()];
    twice += u.x() * v.y() - v.x() * u.y();
  }
  return 0.5 * twice;
}

}  // namespace

TEST_CASE("half-spaces are stored with unit normals") {
  const auto h = HalfSpace::make(Vec3(0, 3, -4), 10.0);
  CHECK(h.normal.norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(h.offset == doctest::Approx(2.0));
  CHECK_THROWS_AS(HalfSpace::make(Vec3::Zero()), GeometryError);
  CHECK_THROWS_AS(HalfSpace::make(Vec3(NAN, 0, 1)), GeometryError);
}

TEST_CASE("membership examples") {
  const auto c11 = pyramid_to_cone(Pyramid(1, 1));
  CHECK(contains(c11, Vec3(0, 0, 1)));
  CHECK_FALSE(contains(c11, Vec3(2, 0, 1)));
  CHECK(contains(pyramid_to_cone(Pyramid(2, 1)), Vec3(0.5, 0, 1)));
}

TEST_CASE("pyramid normals") {
  const auto c = pyramid_to_cone(Pyramid(2, 1));
  REQUIRE(c.size() == 4);
  const Vec3 expected[] = {Vec3(2, 0, -1) / std::sqrt(5.0), Vec3(-2, 0, -1) / std::sqrt(5.0),
                           Vec3(0, 1, -1) / std::sqrt(2.0), Vec3(0, -1, -1) / std::sqrt(2.0)};
  for (const auto& e : expected) {
    double best = 1.0;
    for (const auto& h : c.halfspaces()) best = std::min(best, (h.normal - e).norm());
    CHECK(best <= 1e-15);
  }
  CHECK_THROWS_AS(Pyramid(0.0, 1.0), GeometryError);
  CHECK_THROWS_AS(Pyramid(1.0, -1.0), GeometryError);
}

TEST_CASE("pyramid membership agrees with the direct formula and is scale invariant") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ab(0.2, 5.0), scale(1e-3, 1e3);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = ab(rng), b = ab(rng);
    const auto cone = pyramid_to_cone(Pyramid(a, b));
    for (int i = 0; i < 1000; ++i) {
      const Vec3 x(u(rng), u(rng), std::abs(u(rng)) * 3.0);
      // Skip points within rounding distance of the boundary.
      if (std::abs(x.z() - std::max(a * std::abs(x.x()), b * std::abs(x.y()))) < 1e-12) continue;
      const bool inside = contains(cone, x);
      REQUIRE(inside == in_pyramid(a, b, x));
      REQUIRE(contains(cone, scale(rng) * x) == inside);
    }
  }
}

TEST_CASE("near-duplicate half-spaces are merged and empty cones rejected") {
  const PolyhedralCone c(std::vector<Vec3>{Vec3(0, 0, -1), Vec3(1e-12, 0, -1), Vec3(1, 0, -1)});
  CHECK(c.size() == 2);
  CHECK_THROWS_AS(PolyhedralCone(std::vector<Vec3>{Vec3(0, 0, 1), Vec3(0, 0, -1)}), GeometryError);
}

TEST_CASE("vertex detection") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ab(0.1, 10.0);
  for (int i = 0; i < 100; ++i) CHECK(is_vertex(pyramid_to_cone(Pyramid(ab(rng), ab(rng)))));
  const Wedge w(Vec3::Zero(), Vec3(0, 2, -1), Vec3(0, -2, -1));
  CHECK_FALSE(is_vertex(wedge_to_cone(w)));
  CHECK_FALSE(is_vertex(PolyhedralCone(std::vector<Vec3>{Vec3(0, 0, -1)})));
  CHECK_THROWS_AS(is_vertex(PolyhedralCone()), GeometryError);
}

TEST_CASE("tangent cones of a cube") {
  const auto cube = cube_faces();
  const auto corner = tangent_cone(cube, Vec3(1, 1, 1));
  CHECK(corner.size() == 3);
  CHECK(is_vertex(corner));
  const auto edge = tangent_cone(cube, Vec3(1, 1, 0));
  CHECK(edge.size() == 2);
  CHECK_FALSE(is_vertex(edge));
  const auto face = tangent_cone(cube, Vec3(1, 0, 0));
  CHECK(face.size() == 1);
  CHECK_FALSE(is_vertex(face));
  CHECK(tangent_cone(cube, Vec3(0.2, 0.1, 0)).is_whole_space());
}

TEST_CASE("wedge spines") {
  const Wedge w(Vec3::Zero(), Vec3(0, 1, -1) / std::sqrt(2.0), Vec3(0, -1, -1) / std::sqrt(2.0));
  const Line l = spine(w);
  CHECK(std::abs(std::abs(l.direction.x()) - 1.0) <= 1e-15);
  CHECK(l.point.norm() <= 1e-15);

  const Vec3 x0(0.3, -2.0, 5.0);
  const Wedge shifted(x0, w.w1, w.w2);
  const Line ls = spine(shifted);
  // The spine passes through the base point: the offset from it is along the direction.
  const Vec3 off = ls.point - x0;
  CHECK((off - off.dot(ls.direction) * ls.direction).norm() <= 1e-12);

  // The two wedges of a pyramid have orthogonal spines through the origin.
  const Wedge w1(Vec3::Zero(), Vec3(1, 0, -1), Vec3(-1, 0, -1));
  const Wedge w2(Vec3::Zero(), Vec3(0, 1, -1), Vec3(0, -1, -1));
  CHECK(std::abs(spine(w1).direction.dot(spine(w2).direction)) <= 1e-15);
  CHECK_THROWS_AS(Wedge(Vec3::Zero(), Vec3(0, 1, 0), Vec3(0, 2, 0)), GeometryError);
}

TEST_CASE("cross sections") {
  const auto sq = cross_section(pyramid_to_cone(Pyramid(1, 1)), 1.0);
  REQUIRE(sq.size() == 4);
  for (const auto& v : sq) {
    CHECK(std::abs(std::abs(v.x()) - 1.0) <= 1e-12);
    CHECK(std::abs(std::abs(v.y()) - 1.0) <= 1e-12);
    CHECK(v.z() == 1.0);
  }
  CHECK(polygon_area(sq) == doctest::Approx(4.0).epsilon(1e-12));  // counter-clockwise

  const auto rect = cross_section(pyramid_to_cone(Pyramid(2, 1)), 3.0);
  CHECK(polygon_area(rect) == doctest::Approx(4.0 * 9.0 / 2.0).epsilon(1e-12));

  const PolyhedralCone octant(std::vector<Vec3>{Vec3(-1, 0, 0), Vec3(0, -1, 0), Vec3(0, 0, -1)});
  const PolyhedralCone tilted(std::vector<Vec3>{Vec3(-1, 0, -0.2), Vec3(0, -1, -0.2), Vec3(1, 1, -1)});
  CHECK(cross_section(tilted, 1.0).size() == 3);
  CHECK_THROWS_AS(cross_section(octant, 1.0), GeometryError);  // x3 = 1 meets the octant in an unbounded set
  CHECK_THROWS_AS(cross_section(wedge_to_cone(Wedge(Vec3::Zero(), Vec3(0, 1, -1), Vec3(0, -1, -1))), 1.0),
                  GeometryError);
}

TEST_CASE("extreme rays of a pyramid") {
  const auto rays = extreme_rays(pyramid_to_cone(Pyramid(2, 1)));
  REQUIRE(rays.size() == 4);
  for (const auto& r : rays) {
    CHECK(r.norm() == doctest::Approx(1.0));
    const Vec3 s = r / r.z();
    CHECK(std::abs(std::abs(s.x()) - 0.5) <= 1e-12);
    CHECK(std::abs(std::abs(s.y()) - 1.0) <= 1e-12);
  }
}

TEST_CASE("one-sided pyramid enclosure") {
  const auto e = pyramid_enclosure(pyramid_to_cone(Pyramid(2, 1)), 1.0, 1);
  REQUIRE(e.finite());
  CHECK(e.a == doctest::Approx(2.0).epsilon(1e-12));
  for (int side : {1, -1}) {
    const auto e11 = pyramid_enclosure(pyramid_to_cone(Pyramid(1, 1)), 1.0, side);
    REQUIRE(e11.finite());
    CHECK(e11.a == doctest::Approx(1.0).epsilon(1e-12));
  }

  // Cone inside {x1 <= 0} and inside the wedge {x3 >= |x2|}.
  const PolyhedralCone left(std::vector<Vec3>{Vec3(1, 0, 0), Vec3(-1, 0, -1), Vec3(0, 1, -1), Vec3(0, -1, -1)});
  CHECK(pyramid_enclosure(left, 1.0, 1).kind == Enclosure::Kind::Unbounded);

  // Maximality on an irregular cone.
  const PolyhedralCone irregular(
      std::vector<Vec3>{Vec3(3, 0.5, -1), Vec3(-1, 0.2, -1), Vec3(0, 1.5, -1), Vec3(0.3, -2, -1)});
  const auto ei = pyramid_enclosure(irregular, 1.0, 1);
  REQUIRE(ei.finite());
  bool tight = false;
  for (const auto& v : cross_section(irregular, 1.0)) {
    if (v.x() <= 0) continue;
    CHECK(ei.a * v.x() <= v.z() * (1 + 1e-12));
    tight = tight || ei.a * (1 + 1e-6) * v.x() > v.z();
  }
  CHECK(tight);
  CHECK_THROWS_AS(pyramid_enclosure(pyramid_to_cone(Pyramid(1, 0.5)), 1.0, 1), GeometryError);
}
