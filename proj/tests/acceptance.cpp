// Acceptance run: one PASS/FAIL line per criterion, each with the measured
// value, the tolerance it is judged against and the wall-clock budget.
//
//   acceptance [--out DIR] [--report-only]
//
// Exit code 0 when every criterion passes, 2 otherwise. With --report-only the
// lines are printed the same way but the exit code is 0 unless the run itself
// breaks (1).
#include "vskip/competitor.hpp"
#include "vskip/mesh.hpp"
#include "vskip/minimizer.hpp"
#include "vskip/quadrature.hpp"
#include "vskip/scenario.hpp"
#include "vskip/spherical.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace vskip;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string sci(double v) { return fmt("%.3g", v); }

int failures = 0;

void report(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body,
            double extra_seconds = 0.0) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o = body();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() + extra_seconds;
  const bool in_time = secs < budget_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s %2d %s: %s; %.2f s (budget %g s%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(),
              secs, budget_s, in_time ? "" : ", exceeded");
  std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

double arc(const Vec3& u, const Vec3& v) { return std::atan2(u.cross(v).norm(), u.dot(v)); }

// L'Huilier's formula for the area of a spherical triangle.
double lhuilier(const Vec3& p, const Vec3& q, const Vec3& r) {
  const double a = arc(q, r), b = arc(p, r), c = arc(p, q);
  const double s = 0.5 * (a + b + c);
  const double t = std::tan(s / 2) * std::tan((s - a) / 2) * std::tan((s - b) / 2) * std::tan((s - c) / 2);
  return 4.0 * std::atan(std::sqrt(std::max(t, 0.0)));
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec3 v;
  do v = Vec3(g(rng), g(rng), g(rng));
  while (v.norm() < 1e-3);
  return v.normalized();
}

const Verdict* find(const RunOutcome& run, const std::string& name) {
  for (const auto& v : run.verdicts)
    if (v.name == name) return &v;
  return nullptr;
}

ordered_json pyramid_minimize_config(int resolution, int iters) {
  return normalize_config({{"kind", "minimize"},
                           {"pyramid", {{"a", 1.0}, {"b", 1.0}}},
                           {"R", 1.0},
                           {"resolution", resolution},
                           {"max_iters", iters}});
}

}  // namespace

int main(int argc, char** argv) {
  fs::path out = fs::temp_directory_path() / "vskip_acceptance";
  bool report_only = false;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--report-only") {
      report_only = true;
    } else if (arg == "--out" && i + 1 < argc) {
      out = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--out DIR] [--report-only]\n";
      return 1;
    }
  }

  try {
    report(1, "closed-form weighted energy", 1.0, [] {
      double worst = 0.0;
      for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
          const double alpha = 0.1 + 3.9 * i / 19.0, h = 0.5 + 49.5 * j / 19.0;
          const ConnectionProfile p(h, alpha);
          const double q = integrate([&](double t) { return t * std::pow(phi_prime(p, t), 2); }, 1.0, 1.0 + h, 1e-12);
          worst = std::max(worst, std::abs(weighted_energy(p) - q));
        }
      const double anchor = std::abs(weighted_energy(ConnectionProfile(3.0, 1.0)) - 5.0 / 6.0);
      return Outcome{worst <= 1e-10 && anchor <= 2e-16,
                     "max |closed - quadrature| = " + sci(worst) + " (tol 1e-10), |E(1,3) - 5/6| = " + sci(anchor)};
    });

    report(2, "energy limit alpha/2", 1.0, [] {
      bool decreasing = true;
      double last = std::numeric_limits<double>::infinity();
      for (double h = 0.125; h < 1e4; h *= 2) {
        const double e = weighted_energy(ConnectionProfile(h, 1.0));
        decreasing = decreasing && e < last;
        last = e;
      }
      const double e4 = weighted_energy(ConnectionProfile(1e4, 1.0));
      decreasing = decreasing && e4 < last;
      const double gap = std::abs(e4 - 0.5);
      return Outcome{decreasing && gap <= 1e-3, std::string("decreasing in h: ") + (decreasing ? "yes" : "no") +
                                                    ", |E(1e4) - 1/2| = " + sci(gap) + " (tol 1e-3)"};
    });

    report(3, "deficit curvature", 1.0, [] {
      const ConnectionProfile p(3.0, 1.0);
      auto d = [&](double e) { return area_deficit(CompetitorSpec(1, 1, p, std::abs(e))).deficit; };
      // Five-point central stencil for the second derivative at 0.
      const double s = 1e-3;
      const double fd = (-d(2 * s) + 16 * d(s) - 30 * d(0) + 16 * d(-s) - d(-2 * s)) / (12 * s * s);
      const double err = std::abs(fd + 1.0 / 3.0);
      return Outcome{err <= 1e-5, "finite difference = " + fmt("%.10f", fd) + ", |fd + 1/3| = " + sci(err) +
                                      " (tol 1e-5)"};
    });

    report(4, "non-minimality witness", 10.0, [] {
      int ok = 0;
      double worst = -std::numeric_limits<double>::infinity();
      for (double a : {0.5, 1.0, 2.0})
        for (double b : {0.5, 1.0, 2.0}) {
          try {
            const auto prof = feasible_params(a);
            const double star = find_epsilon_star(a, b, prof, 200);
            const double def = area_deficit(CompetitorSpec(a, b, prof, star)).deficit;
            worst = std::max(worst, def);
            ok += def < -1e-9 ? 1 : 0;
          } catch (const GeometryError&) {
          }
        }
      return Outcome{ok == 9, std::to_string(ok) + "/9 pyramids with a grid point of deficit < -1e-9, largest = " +
                                  sci(worst)};
    });

    report(5, "competitor mesh order", 30.0, [] {
      const CompetitorSpec spec(1, 1, feasible_params(1.0), 0.2);
      const auto rep = area_deficit(spec);
      const double exact = rep.A_eps + rep.ruled_area;
      std::vector<double> err;
      for (int n : {10, 20, 40, 80}) err.push_back(std::abs(surface_area(export_competitor_mesh(spec, n)) - exact));
      bool ok = true;
      std::string ratios;
      for (std::size_t i = 0; i + 1 < err.size(); ++i) {
        const double r = err[i] / err[i + 1];
        ok = ok && std::abs(r - 4.0) <= 1.2;
        ratios += (i ? ", " : "") + fmt("%.3f", r);
      }
      return Outcome{ok, "error ratios per halving = " + ratios + " (4 +- 30%), error at n=80 = " + sci(err.back())};
    });

    report(6, "Gauss-Bonnet", 5.0, [] {
      std::mt19937_64 rng(2024);
      std::uniform_real_distribution<double> rad(0.05, 1.4);
      double worst = 0.0;
      for (int i = 0; i < 1000; ++i) {
        const Vec3 c = random_unit(rng);
        std::vector<Vec3> p;
        while (p.size() < 3) {
          const Vec3 t = random_unit(rng);
          const Vec3 perp = (t - t.dot(c) * c);
          if (perp.norm() < 1e-6) continue;
          const double r = rad(rng);
          p.push_back(std::cos(r) * c + std::sin(r) * perp.normalized());
        }
        // Orient counter-clockwise as seen from outside.
        if ((p[1] - p[0]).cross(p[2] - p[0]).dot(c) < 0) std::swap(p[1], p[2]);
        if ((p[1] - p[0]).cross(p[2] - p[0]).norm() < 1e-6) continue;
        const GeodesicPolygon tri({SpherePoint(p[0]), SpherePoint(p[1]), SpherePoint(p[2])});
        worst = std::max(worst, std::abs(spherical_excess(tri) - lhuilier(p[0], p[1], p[2])));
      }
      const GeodesicPolygon oct({SpherePoint(Vec3::UnitX()), SpherePoint(Vec3::UnitY()), SpherePoint(Vec3::UnitZ())});
      const double oct_err = std::abs(spherical_excess(oct) - kPi / 2);
      return Outcome{worst <= 1e-10 && oct_err <= 4e-16, "max |excess - L'Huilier| = " + sci(worst) +
                                                             " (tol 1e-10), |octant - pi/2| = " + sci(oct_err)};
    });

    report(7, "step-3 infeasibility", 5.0, [] {
      std::mt19937_64 rng(7);
      int witnesses = 0;
      double min_sum_excess = std::numeric_limits<double>::infinity(), right = 0.0;
      for (int i = 0; i < 500; ++i) {
        const auto c = random_step3_config(rng);
        const auto r = step3_audit(SpherePoint(c.p1), SpherePoint(c.q1), c.nu0_p1, c.nu0_q1, c.plane2_normal);
        right = std::max({right, std::abs(r.alpha1 - kPi / 2), std::abs(r.beta1 - kPi / 2)});
        min_sum_excess = std::min(min_sum_excess, r.angle_sum - 2 * kPi);
        if (r.angle_sum > 2 * kPi && std::max(r.alpha2t, r.beta2t) > kPi / 2) ++witnesses;
      }
      return Outcome{witnesses == 500 && right <= 1e-9,
                     std::to_string(witnesses) + "/500 with angle sum > 2 pi and max(alpha2, beta2) > pi/2, " +
                         "min(angle sum - 2 pi) = " + sci(min_sum_excess) + ", max |alpha1, beta1 - pi/2| = " +
                         sci(right)};
    });

    report(8, "gradient oracle", 10.0, [] {
      std::mt19937_64 rng(8);
      std::normal_distribution<double> g;
      const auto cone = pyramid_to_cone(Pyramid(1, 1));
      double worst = 0.0;
      for (int trial = 0; trial < 20; ++trial) {
        TriMesh m = make_initial_plane(cone, 1.0, 4);
        for (auto& v : m.vertices) v += 0.02 * Vec3(g(rng), g(rng), g(rng));
        const auto grad = area_gradient(m);
        const double h = 1e-6;
        for (std::size_t i = 0; i < m.num_vertices(); ++i)
          for (int k = 0; k < 3; ++k) {
            TriMesh p = m, q = m;
            p.vertices[i][k] += h;
            q.vertices[i][k] -= h;
            worst = std::max(worst, std::abs((surface_area(p) - surface_area(q)) / (2 * h) - grad[i][k]));
          }
      }
      return Outcome{worst <= 1e-6, "max |fd - gradient| = " + sci(worst) + " over 20 meshes (tol 1e-6)"};
    });

    report(9, "wedge stationarity", 30.0, [] {
      const auto cone = wedge_to_cone(Wedge(Vec3::Zero(), Vec3(0, 1, -1), Vec3(0, -1, -1)));
      const TriMesh m = make_initial_plane(cone, 1.0, 32);
      double pg = 0.0;
      for (const auto& v : projected_gradient(m, cone, area_gradient(m))) pg = std::max(pg, v.norm());
      MinimizeConfig cfg;
      cfg.max_iters = 500;
      cfg.grad_tol = 0.0;  // keep iterating as long as any descent is found
      const auto [final_mesh, diag] = minimize(m, cone, cfg);
      const double drift = std::abs(surface_area(final_mesh) - surface_area(m));
      return Outcome{pg <= 1e-8 && drift <= 1e-8, "projected gradient = " + sci(pg) + " (tol 1e-8), area drift = " +
                                                      sci(drift) + " (tol 1e-8), " + std::to_string(diag.iterations) +
                                                      " iterations, " + to_string(diag.status)};
    });

    // Criteria 10, 11 (second half) and 13 share one minimizer run.
    const auto t_run = std::chrono::steady_clock::now();
    const auto run = run_scenario(pyramid_minimize_config(64, 3000), (out / "pyramid").string());
    const double run_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_run).count();
    const auto& res = run.report["results"];

    report(
        10, "vertex skipping", 300.0,
        [&] {
          const Verdict* drop = find(run, "area_drop");
          const Verdict* vd = find(run, "final_vertex_distance");
          const Verdict* mono = find(run, "vertex_distance_drop_after_burn_in");
          const bool ok = drop && vd && mono && drop->pass && vd->pass && mono->pass;
          return Outcome{ok, "area " + fmt("%.7f", res["initial_area"].get<double>()) + " -> " +
                                 fmt("%.7f", res["final_area"].get<double>()) + " (drop " + sci(drop->value) +
                                 " > 1e-4), vertex distance " + fmt("%.4f", vd->value) +
                                 " > 0.05, largest fall below running max after 10% = " + sci(mono->value) +
                                 " (tol " + sci(mono->tolerance) + "), " + res["status"].get<std::string>() + " after " +
                                 std::to_string(res["iterations"].get<int>()) + " iterations"};
        },
        run_seconds);

    report(11, "monotonicity ratio", 60.0, [&] {
      double worst = 0.0;
      std::vector<double> radii;
      for (int k = 1; k <= 10; ++k) radii.push_back(k / 10.0);
      for (double b : {1.0, 2.0}) {
        const TriMesh fan = make_section_fan(pyramid_to_cone(Pyramid(1.0, b)), 1.0, 64);
        for (const auto& s : monotonicity_ratio(fan, radii)) worst = std::max(worst, std::abs(s.p - std::atan(1 / b)));
      }
      const Verdict* mono = find(run, "p_ratio_largest_decrease");
      const bool ok = worst <= 1e-3 && mono && mono->pass;
      return Outcome{ok, "planar sections: max |p - atan(1/b)| = " + sci(worst) +
                             " (tol 1e-3); minimizer: largest decrease of p = " + sci(mono->value) + " (tol 1e-3)"};
    });

    report(12, "conical deviation", 10.0, [] {
      double on_cones = 0.0;
      for (double b : {0.5, 1.0, 2.0}) {
        TriMesh fan = make_section_fan(pyramid_to_cone(Pyramid(1.0, b)), 1.0, 32);
        on_cones = std::max(on_cones, conical_deviation(fan, 0.1, 1.0));
        for (auto& v : fan.vertices) v *= 7.0;
        on_cones = std::max(on_cones, conical_deviation(fan, 0.7, 7.0));
      }
      // Offset plane x3 = 1 as a grid over [-2.5, 2.5]^2.
      TriMesh plane;
      const int n = 50;
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) plane.add_vertex(Vec3(-2.5 + 5.0 * i / n, -2.5 + 5.0 * j / n, 1.0));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const int v = i * (n + 1) + j;
          plane.add_triangle(v, v + n + 1, v + n + 2);
          plane.add_triangle(v, v + n + 2, v + 1);
        }
      // Polar coordinates around the foot: |x|^2 = 1 + t^2, x . nu = 1.
      const double rho = 1.1, r = 2.0;
      const double oracle =
          simpson([](double t) { return 2 * kPi * t / std::pow(1 + t * t, 1.5); }, std::sqrt(rho * rho - 1),
                  std::sqrt(r * r - 1), 20000);
      const double err = std::abs(conical_deviation(plane, rho, r) - oracle);
      return Outcome{on_cones <= 1e-10 && err <= 1e-6, "exact cones: max = " + sci(on_cones) +
                                                           " (tol 1e-10); offset plane: |value - polar quadrature| = " +
                                                           sci(err) + " (tol 1e-6)"};
    });

    report(
        13, "boundary orthogonality", 300.0,
        [&] {
          const Verdict* ang = find(run, "boundary_angle_max_deviation_deg");
          const auto& b = res["boundary_angles"];
          if (!ang || !b.contains("min_deg")) return Outcome{false, "no boundary angles measured"};
          return Outcome{ang->pass, "angles over |x| > 0.2 in [" + fmt("%.3f", b["min_deg"].get<double>()) + ", " +
                                        fmt("%.3f", b["max_deg"].get<double>()) + "] deg, max deviation " +
                                        fmt("%.3f", ang->value) + " deg (tol 2)"};
        },
        run_seconds);

    report(14, "determinism", 2.0 * run_seconds, [&] {
      // Above 4096 triangles the per-triangle work is split across threads.
      const auto cfg = pyramid_minimize_config(48, 300);
      const int saved = worker_threads();
      set_worker_threads(1);
      run_scenario(cfg, (out / "det_t1_a").string());
      run_scenario(cfg, (out / "det_t1_b").string());
      set_worker_threads(4);
      run_scenario(cfg, (out / "det_t4").string());
      set_worker_threads(saved);
      int same = 0, total = 0;
      for (const char* f : {"history.csv", "p_ratios.csv", "conical_deviation.csv", "final.obj"}) {
        const std::string a = slurp(out / "det_t1_a" / f);
        total += 2;
        same += (!a.empty() && a == slurp(out / "det_t1_b" / f)) ? 1 : 0;
        same += (!a.empty() && a == slurp(out / "det_t4" / f)) ? 1 : 0;
      }
      return Outcome{same == total, std::to_string(same) + "/" + std::to_string(total) +
                                        " byte-identical file pairs (repeat run, 1 vs 4 threads)"};
    });
  } catch (const std::exception& e) {
    std::cerr << "acceptance run aborted: " << e.what() << '\n';
    return 1;
  }

  std::printf("%d of 14 criteria failed\n", failures);
  return (failures == 0 || report_only) ? 0 : 2;
}
