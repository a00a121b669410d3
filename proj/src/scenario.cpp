#include "vskip/scenario.hpp"

#include "vskip/competitor.hpp"
#include "vskip/mesh.hpp"
#include "vskip/minimizer.hpp"
#include "vskip/spherical.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

namespace vskip {
namespace {

namespace fs = std::filesystem;

const std::set<std::string> kKinds = {"competitor", "minimize", "audit-geodesics", "monotonicity"};

// Defaults of every kind-specific field; `nullptr` marks optional fields
// without a default.
ordered_json kind_defaults(const std::string& kind) {
  if (kind == "competitor")
    return {{"profile", {{"alpha", nullptr}, {"h", nullptr}}},
            {"epsilon_grid", 200},
            {"epsilon", nullptr},
            {"mesh_resolution", 32}};
  if (kind == "minimize")
    return {{"R", 1.0},          {"resolution", 64},    {"side", 1},          {"max_iters", 3000},
            {"grad_tol", 1e-9},  {"initial_step", 1.0}, {"armijo_c", 1e-4},  {"metric", "sobolev"},
            {"relaxation", 0.5}, {"jitter", 0.0},       {"radii", ordered_json::array()},
            {"burn_in_fraction", 0.1}, {"angle_min_radius", 0.2}};
  if (kind == "audit-geodesics") return {{"samples", 500}};
  return {{"R", 1.0}, {"resolution", 64}, {"mesh", nullptr}, {"radii", ordered_json::array()}, {"expected_p", nullptr}};
}

ordered_json tolerance_defaults(const std::string& kind) {
  if (kind == "competitor") return {{"deficit", 1e-9}};
  if (kind == "minimize")
    return {{"area_drop", 1e-4},
            {"vertex_distance", 0.05},
            {"vertex_distance_monotone", 1e-5},
            {"p_monotone", 1e-3},
            {"boundary_angle_deg", 2.0},
            {"stationarity_gradient", 1e-8},
            {"area_drift", 1e-8}};
  if (kind == "audit-geodesics") return {{"right_angle", 1e-9}, {"excess", 0.0}};
  return {{"p_monotone", 1e-3}, {"p_expected", 1e-3}};
}

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError(field + ": " + what);
}

double get_number(const nlohmann::json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(field, "must be finite");
  return x;
}

long long get_integer(const nlohmann::json& v, const std::string& field) {
  if (!v.is_number_integer()) fail(field, "must be an integer");
  return v.get<long long>();
}

// Merges `raw` into `defaults` field by field, checking types against the
// default values. Unknown fields are errors.
ordered_json merge_fields(const ordered_json& defaults, const nlohmann::json& raw, const std::string& where) {
  if (!raw.is_object()) fail(where, "must be an object");
  ordered_json out = defaults;
  for (auto it = raw.begin(); it != raw.end(); ++it) {
    const std::string field = where.empty() ? it.key() : where + "." + it.key();
    if (!defaults.contains(it.key())) fail(field, "unknown field");
    const auto& def = defaults[it.key()];
    const auto& v = it.value();
    if (def.is_object()) {
      out[it.key()] = merge_fields(def, v, field);
    } else if (def.is_number_integer()) {
      out[it.key()] = get_integer(v, field);
    } else if (def.is_number()) {
      out[it.key()] = get_number(v, field);
    } else if (def.is_string()) {
      if (!v.is_string()) fail(field, "must be a string");
      out[it.key()] = v.get<std::string>();
    } else if (def.is_array()) {
      if (!v.is_array()) fail(field, "must be an array of numbers");
      ordered_json arr = ordered_json::array();
      for (std::size_t i = 0; i < v.size(); ++i) arr.push_back(get_number(v[i], field + "[" + std::to_string(i) + "]"));
      out[it.key()] = arr;
    } else if (!v.is_null()) {
      out[it.key()] = v.is_string() ? ordered_json(v.get<std::string>()) : ordered_json(get_number(v, field));
    }
  }
  return out;
}

void require_positive(const ordered_json& cfg, const char* key) {
  if (!(cfg[key].get<double>() > 0.0)) fail(key, "must be > 0");
}

void check_radii(const ordered_json& cfg) {
  double last = 0.0;
  for (const auto& r : cfg["radii"]) {
    if (!(r.get<double>() > last)) fail("radii", "must be positive and increasing");
    last = r.get<double>();
  }
}

void check_kind_fields(const std::string& kind, const ordered_json& cfg) {
  if (kind == "competitor") {
    if (!cfg.contains("pyramid")) fail("pyramid", "competitor studies need a pyramid cone spec");
    const auto& prof = cfg["profile"];
    auto optional_positive = [](const ordered_json& v, const std::string& field) {
      if (!v.is_null() && !(v.is_number() && v.get<double>() > 0.0)) fail(field, "must be a number > 0");
    };
    optional_positive(prof["alpha"], "profile.alpha");
    optional_positive(prof["h"], "profile.h");
    optional_positive(cfg["epsilon"], "epsilon");
    if (cfg["epsilon_grid"].get<long long>() < 1) fail("epsilon_grid", "must be >= 1");
    if (cfg["mesh_resolution"].get<long long>() < 1) fail("mesh_resolution", "must be >= 1");
  } else if (kind == "minimize") {
    require_positive(cfg, "R");
    if (cfg["resolution"].get<long long>() < 2) fail("resolution", "must be >= 2");
    if (const auto s = cfg["side"].get<long long>(); s != 1 && s != -1) fail("side", "must be 1 or -1");
    if (cfg["max_iters"].get<long long>() < 1) fail("max_iters", "must be >= 1");
    if (cfg["grad_tol"].get<double>() < 0.0) fail("grad_tol", "must be >= 0");
    require_positive(cfg, "initial_step");
    if (const double c = cfg["armijo_c"].get<double>(); !(c > 0.0 && c < 1.0)) fail("armijo_c", "must be in (0, 1)");
    if (const auto m = cfg["metric"].get<std::string>(); m != "sobolev" && m != "euclidean")
      fail("metric", "must be \"sobolev\" or \"euclidean\"");
    if (cfg["relaxation"].get<double>() < 0.0) fail("relaxation", "must be >= 0");
    if (cfg["jitter"].get<double>() < 0.0) fail("jitter", "must be >= 0");
    if (const double f = cfg["burn_in_fraction"].get<double>(); !(f >= 0.0 && f < 1.0))
      fail("burn_in_fraction", "must be in [0, 1)");
    if (cfg["angle_min_radius"].get<double>() < 0.0) fail("angle_min_radius", "must be >= 0");
    check_radii(cfg);
  } else if (kind == "audit-geodesics") {
    if (cfg["samples"].get<long long>() < 1) fail("samples", "must be >= 1");
  } else {
    require_positive(cfg, "R");
    if (cfg["resolution"].get<long long>() < 1) fail("resolution", "must be >= 1");
    if (!cfg["mesh"].is_null() && !cfg["mesh"].is_string()) fail("mesh", "must be a path");
    if (!cfg["expected_p"].is_null() && !cfg["expected_p"].is_number()) fail("expected_p", "must be a number");
    check_radii(cfg);
  }
}

ordered_json normalize_cone(const nlohmann::json& raw, bool required) {
  const bool has_pyr = raw.contains("pyramid"), has_hs = raw.contains("halfspaces");
  if (has_pyr && has_hs) throw ConfigError("exactly one cone spec (pyramid or halfspaces) may be given");
  ordered_json out = ordered_json::object();
  if (!has_pyr && !has_hs) {
    if (required) throw ConfigError("exactly one cone spec (pyramid or halfspaces) is required");
    return out;
  }
  if (has_pyr) {
    const auto& p = raw["pyramid"];
    if (!p.is_object()) fail("pyramid", "must be an object {a, b}");
    for (auto it = p.begin(); it != p.end(); ++it)
      if (it.key() != "a" && it.key() != "b") fail("pyramid." + it.key(), "unknown field");
    for (const char* k : {"a", "b"}) {
      if (!p.contains(k)) fail(std::string("pyramid.") + k, "missing");
      const double v = get_number(p[k], std::string("pyramid.") + k);
      if (!(v > 0.0)) throw ConfigError(std::string(k) + " must be > 0");
      out["pyramid"][k] = v;
    }
    return out;
  }
  const auto& hs = raw["halfspaces"];
  if (!hs.is_array() || hs.empty()) fail("halfspaces", "must be a non-empty array");
  out["halfspaces"] = ordered_json::array();
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const std::string where = "halfspaces[" + std::to_string(i) + "]";
    const auto& h = hs[i];
    if (!h.is_object() || !h.contains("normal")) fail(where, "must be an object {normal, offset}");
    for (auto it = h.begin(); it != h.end(); ++it)
      if (it.key() != "normal" && it.key() != "offset") fail(where + "." + it.key(), "unknown field");
    const auto& n = h["normal"];
    if (!n.is_array() || n.size() != 3) fail(where + ".normal", "must be 3 numbers");
    ordered_json nn = ordered_json::array();
    for (std::size_t k = 0; k < 3; ++k) nn.push_back(get_number(n[k], where + ".normal"));
    const double offset = h.contains("offset") ? get_number(h["offset"], where + ".offset") : 0.0;
    if (offset != 0.0) fail(where + ".offset", "must be 0 (cones have their apex at the origin)");
    out["halfspaces"].push_back({{"normal", nn}, {"offset", offset}});
  }
  return out;
}

// Writing helpers.

class Csv {
 public:
  Csv(const fs::path& path, std::initializer_list<const char*> header) : os_(path, std::ios::binary) {
    if (!os_) throw std::runtime_error("cannot write " + path.string());
    bool first = true;
    for (const char* h : header) {
      os_ << (first ? "" : ",") << h;
      first = false;
    }
    os_ << '\n';
  }

  void row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      os_ << (first ? "" : ",") << format_g17(v);
      first = false;
    }
    os_ << '\n';
  }

 private:
  std::ofstream os_;
};

std::vector<double> radii_from(const ordered_json& cfg, double R) {
  std::vector<double> radii;
  for (const auto& r : cfg["radii"]) radii.push_back(r.get<double>());
  if (radii.empty())
    for (int k = 1; k <= 10; ++k) radii.push_back(R * k / 10.0);
  return radii;
}

void write_p_table(const fs::path& path, const std::vector<RatioSample>& table) {
  Csv csv(path, {"r", "p_r"});
  for (const auto& s : table) csv.row({s.r, s.p});
}

ordered_json p_table_json(const std::vector<RatioSample>& table) {
  ordered_json out = ordered_json::array();
  for (const auto& s : table) out.push_back({{"r", s.r}, {"p", s.p}});
  return out;
}

// Largest decrease between consecutive entries (<= 0 for a nondecreasing list).
double largest_drop(const std::vector<RatioSample>& table) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < table.size(); ++i) worst = std::max(worst, table[i - 1].p - table[i].p);
  return table.size() < 2 ? 0.0 : worst;
}

Verdict at_most(std::string name, double value, double tol) {
  return {std::move(name), value, tol, "value <= tolerance", value <= tol};
}

Verdict above(std::string name, double value, double tol) {
  return {std::move(name), value, tol, "value > tolerance", value > tol};
}

Verdict below(std::string name, double value, double tol) {
  return {std::move(name), value, tol, "value < -tolerance", value < -tol};
}

void write_mesh(const TriMesh& mesh, const fs::path& dir, const std::string& stem) {
  save_mesh(mesh, (dir / (stem + ".obj")).string(), (dir / (stem + ".classes.json")).string());
}

// Scenario kinds.

ordered_json run_competitor(const ordered_json& cfg, const fs::path& dir, std::vector<Verdict>& verdicts) {
  const double a = cfg["pyramid"]["a"].get<double>(), b = cfg["pyramid"]["b"].get<double>();
  const auto& tol = cfg["tolerances"];
  const ConnectionProfile found = feasible_params(a);
  const auto& prof = cfg["profile"];
  const double alpha = prof["alpha"].is_null() ? found.alpha() : prof["alpha"].get<double>();
  const double h = prof["h"].is_null() ? found.h() : prof["h"].get<double>();
  const ConnectionProfile profile(h, alpha);

  const int grid = static_cast<int>(cfg["epsilon_grid"].get<long long>());
  const double cap = 0.5 / a;
  double worst_before_star = -std::numeric_limits<double>::infinity();
  std::optional<double> eps_star;
  {
    Csv csv(dir / "epsilon_sweep.csv", {"epsilon", "deficit", "ruled_area"});
    bool negative_so_far = true;
    for (int k = 1; k <= grid; ++k) {
      const double eps = cap * k / grid;
      const auto rep = area_deficit(CompetitorSpec(a, b, profile, eps));
      csv.row({eps, rep.deficit, rep.ruled_area});
      negative_so_far = negative_so_far && rep.deficit < 0.0;
      if (negative_so_far) {
        eps_star = eps;
        worst_before_star = std::max(worst_before_star, rep.deficit);
      }
    }
  }

  ordered_json res;
  res["alpha"] = alpha;
  res["h"] = h;
  res["weighted_energy"] = weighted_energy(profile);
  res["a_squared"] = a * a;
  res["epsilon_star"] = eps_star ? ordered_json(*eps_star) : ordered_json(nullptr);
  verdicts.push_back(below("weighted_energy_minus_a2", weighted_energy(profile) - a * a, 0.0));
  if (!eps_star) {
    verdicts.push_back(below("deficit_at_epsilon_star", std::numeric_limits<double>::quiet_NaN(), tol["deficit"]));
    return res;
  }
  verdicts.push_back(below("max_deficit_up_to_epsilon_star", worst_before_star, tol["deficit"]));

  const double eps = cfg["epsilon"].is_null() ? *eps_star : cfg["epsilon"].get<double>();
  const CompetitorSpec spec(a, b, profile, eps);
  const auto rep = area_deficit(spec);
  res["deficit_report"] = {{"epsilon", eps},
                           {"A0", rep.A0},
                           {"A_eps", rep.A_eps},
                           {"T_h_area", rep.T_h_area},
                           {"ruled_area", rep.ruled_area},
                           {"deficit", rep.deficit},
                           {"second_derivative", rep.second_derivative},
                           {"weighted_energy", rep.weighted_energy},
                           {"support_radius", rep.support_radius}};
  const TriMesh mesh = export_competitor_mesh(spec, static_cast<int>(cfg["mesh_resolution"].get<long long>()));
  std::ofstream obj(dir / "competitor.obj", std::ios::binary);
  write_obj(mesh, obj);
  res["mesh_area"] = surface_area(mesh);
  res["analytic_area"] = rep.A_eps + rep.ruled_area;
  return res;
}

ordered_json run_minimize(const ordered_json& cfg, const PolyhedralCone& cone, const fs::path& dir,
                          std::vector<Verdict>& verdicts) {
  const auto& tol = cfg["tolerances"];
  const double R = cfg["R"].get<double>();
  MinimizeConfig mc;
  mc.max_iters = static_cast<int>(cfg["max_iters"].get<long long>());
  mc.grad_tol = cfg["grad_tol"].get<double>();
  mc.initial_step = cfg["initial_step"].get<double>();
  mc.armijo_c = cfg["armijo_c"].get<double>();
  mc.clamp_radius = R;
  mc.seed = cfg["seed"].get<std::uint64_t>();
  mc.jitter = cfg["jitter"].get<double>();
  mc.metric = cfg["metric"].get<std::string>() == "sobolev" ? MinimizeConfig::Metric::Sobolev
                                                            : MinimizeConfig::Metric::Euclidean;
  mc.relaxation = cfg["relaxation"].get<double>();
  mc.radii = radii_from(cfg, R);

  const TriMesh initial =
      make_initial_plane(cone, R, static_cast<int>(cfg["resolution"].get<long long>()),
                         static_cast<int>(cfg["side"].get<long long>()));
  write_mesh(initial, dir, "initial");
  const double initial_area = surface_area(initial);
  double initial_pg = 0.0;
  for (const auto& g : projected_gradient(initial, cone, area_gradient(initial))) initial_pg = std::max(initial_pg, g.norm());

  const auto [mesh, diag] = minimize(initial, cone, mc);
  write_mesh(mesh, dir, "final");
  const double final_area = surface_area(mesh);
  const double final_vd = vertex_distance(mesh);

  {
    Csv csv(dir / "history.csv", {"iteration", "area", "vertex_distance", "step", "grad_norm"});
    for (std::size_t i = 0; i < diag.area_history.size(); ++i)
      csv.row({static_cast<double>(i + 1), diag.area_history[i], diag.vertex_distance_history[i], diag.step_history[i],
               diag.grad_norm_history[i]});
  }
  write_p_table(dir / "p_ratios.csv", diag.p_ratios);
  {
    Csv csv(dir / "conical_deviation.csv", {"rho", "r", "value"});
    for (const auto& s : diag.conical_deviation) csv.row({s.rho, s.r, s.value});
  }

  // After burn-in, how far vertex_distance ever falls below its running maximum.
  const auto& vd = diag.vertex_distance_history;
  const auto burn = static_cast<std::size_t>(cfg["burn_in_fraction"].get<double>() * static_cast<double>(vd.size()));
  double vd_drop = 0.0;
  for (std::size_t i = burn, top = burn; i < vd.size(); ++i) {
    if (vd[i] > vd[top]) top = i;
    vd_drop = std::max(vd_drop, vd[top] - vd[i]);
  }

  ordered_json res;
  res["status"] = to_string(diag.status);
  res["message"] = diag.message;
  res["iterations"] = diag.iterations;
  res["vertices"] = mesh.num_vertices();
  res["triangles"] = mesh.num_triangles();
  res["initial_area"] = initial_area;
  res["final_area"] = final_area;
  res["initial_vertex_distance"] = vertex_distance(initial);
  res["final_vertex_distance"] = final_vd;
  res["initial_projected_gradient"] = initial_pg;
  res["final_projected_gradient"] = diag.grad_norm_history.empty() ? initial_pg : diag.grad_norm_history.back();
  res["p_ratios"] = p_table_json(diag.p_ratios);
  res["density_bounds"] = {diag.density_min, diag.density_max};
  res["pinned_vertices"] = diag.pinned_vertices.size();

  if (is_vertex(cone)) {
    verdicts.push_back(above("area_drop", initial_area - final_area, tol["area_drop"]));
    verdicts.push_back(above("final_vertex_distance", final_vd, tol["vertex_distance"]));
    verdicts.push_back(at_most("vertex_distance_drop_after_burn_in", vd_drop, tol["vertex_distance_monotone"]));
    verdicts.push_back(at_most("p_ratio_largest_decrease", largest_drop(diag.p_ratios), tol["p_monotone"]));
    const double min_r = cfg["angle_min_radius"].get<double>();
    try {
      const auto audit = boundary_angle_audit(mesh, cone, min_r);
      const double dev = std::max(90.0 - audit.all.min_deg, audit.all.max_deg - 90.0);
      res["boundary_angles"] = {{"min_radius", min_r},
                                {"count", audit.all.count},
                                {"min_deg", audit.all.min_deg},
                                {"mean_deg", audit.all.mean_deg},
                                {"max_deg", audit.all.max_deg}};
      verdicts.push_back(at_most("boundary_angle_max_deviation_deg", dev, tol["boundary_angle_deg"]));
    } catch (const GeometryError& e) {
      res["boundary_angles"] = {{"error", e.what()}};
      verdicts.push_back(at_most("boundary_angle_max_deviation_deg", std::numeric_limits<double>::quiet_NaN(),
                                 tol["boundary_angle_deg"]));
    }
  } else {
    verdicts.push_back(at_most("initial_projected_gradient", initial_pg, tol["stationarity_gradient"]));
    verdicts.push_back(at_most("area_drift", std::abs(final_area - initial_area), tol["area_drift"]));
  }
  return res;
}

ordered_json run_audit(const ordered_json& cfg, const fs::path& dir, std::vector<Verdict>& verdicts) {
  const auto& tol = cfg["tolerances"];
  std::mt19937_64 rng(cfg["seed"].get<std::uint64_t>());
  const auto n = cfg["samples"].get<long long>();
  double min_excess = std::numeric_limits<double>::infinity();
  double right_angle_err = 0.0;
  long long witnesses = 0;
  Csv csv(dir / "step3.csv", {"alpha1", "beta1", "alpha2t", "beta2t", "angle_sum", "excess", "infeasibility_witness"});
  for (long long i = 0; i < n; ++i) {
    const auto c = random_step3_config(rng);
    const auto r = step3_audit(SpherePoint(c.p1), SpherePoint(c.q1), c.nu0_p1, c.nu0_q1, c.plane2_normal);
    csv.row({r.alpha1, r.beta1, r.alpha2t, r.beta2t, r.angle_sum, r.excess, r.infeasibility_witness ? 1.0 : 0.0});
    min_excess = std::min(min_excess, r.excess);
    right_angle_err = std::max({right_angle_err, std::abs(r.alpha1 - std::numbers::pi / 2),
                                std::abs(r.beta1 - std::numbers::pi / 2)});
    witnesses += r.infeasibility_witness ? 1 : 0;
  }
  ordered_json res;
  res["samples"] = n;
  res["witnesses"] = witnesses;
  res["min_excess"] = min_excess;
  res["max_right_angle_error"] = right_angle_err;
  verdicts.push_back(above("min_excess", min_excess, tol["excess"]));
  verdicts.push_back(at_most("max_right_angle_error", right_angle_err, tol["right_angle"]));
  return res;
}

ordered_json run_monotonicity(const ordered_json& cfg, const PolyhedralCone& cone, const fs::path& dir,
                              std::vector<Verdict>& verdicts) {
  const auto& tol = cfg["tolerances"];
  const double R = cfg["R"].get<double>();
  const TriMesh mesh = cfg["mesh"].is_null()
                           ? make_section_fan(cone, R, static_cast<int>(cfg["resolution"].get<long long>()))
                           : load_mesh(cfg["mesh"].get<std::string>());
  const auto table = monotonicity_ratio(mesh, radii_from(cfg, R));
  write_p_table(dir / "p_ratios.csv", table);
  ordered_json res;
  res["source"] = cfg["mesh"].is_null() ? "planar section" : cfg["mesh"].get<std::string>();
  res["p_ratios"] = p_table_json(table);
  verdicts.push_back(at_most("p_ratio_largest_decrease", largest_drop(table), tol["p_monotone"]));
  if (!cfg["expected_p"].is_null()) {
    const double expected = cfg["expected_p"].get<double>();
    double err = 0.0;
    for (const auto& s : table) err = std::max(err, std::abs(s.p - expected));
    verdicts.push_back(at_most("p_ratio_max_error", err, tol["p_expected"]));
  }
  return res;
}

}  // namespace

std::string format_g17(double v) {
  if (v == 0.0) return "0";  // folds -0 so that equal tables are equal bytes
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ordered_json normalize_config(const nlohmann::json& raw) {
  if (!raw.is_object()) throw ConfigError("config must be an object");
  if (!raw.contains("kind")) fail("kind", "missing");
  if (!raw["kind"].is_string()) fail("kind", "must be a string");
  const std::string kind = raw["kind"].get<std::string>();
  if (!kKinds.contains(kind)) fail("kind", "unknown kind \"" + kind + "\"");

  ordered_json defaults = {{"kind", kind}, {"seed", 0}, {"output_dir", "out/" + kind}};
  const ordered_json specific = kind_defaults(kind);
  for (const auto& [k, v] : specific.items()) defaults[k] = v;
  defaults["tolerances"] = tolerance_defaults(kind);

  nlohmann::json rest = raw;
  rest.erase("pyramid");
  rest.erase("halfspaces");
  ordered_json cfg = merge_fields(defaults, rest, "");
  if (cfg["seed"].get<long long>() < 0) fail("seed", "must be >= 0");
  for (const auto& [k, v] : cfg["tolerances"].items())
    if (!(v.get<double>() >= 0.0)) fail("tolerances." + k, "must be >= 0");

  const ordered_json cone = normalize_cone(raw, kind != "audit-geodesics");
  for (const auto& [k, v] : cone.items()) cfg[k] = v;
  check_kind_fields(kind, cfg);
  if (!cone.empty()) (void)cone_from_config(cfg);
  return cfg;
}

PolyhedralCone cone_from_config(const ordered_json& cfg) {
  try {
    if (cfg.contains("pyramid"))
      return pyramid_to_cone(Pyramid(cfg["pyramid"]["a"].get<double>(), cfg["pyramid"]["b"].get<double>()));
    if (!cfg.contains("halfspaces")) throw ConfigError("exactly one cone spec (pyramid or halfspaces) is required");
    std::vector<HalfSpace> hs;
    for (const auto& h : cfg["halfspaces"]) {
      const auto& n = h["normal"];
      hs.push_back(HalfSpace::make(Vec3(n[0].get<double>(), n[1].get<double>(), n[2].get<double>()), 0.0));
    }
    return PolyhedralCone(std::span<const HalfSpace>(hs));
  } catch (const GeometryError& e) {
    throw ConfigError(std::string("cone: ") + e.what());
  }
}

bool RunOutcome::pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

RunOutcome run_scenario(const ordered_json& cfg, const std::string& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  const std::string kind = cfg["kind"].get<std::string>();

  RunOutcome out;
  ordered_json results;
  if (kind == "competitor") {
    results = run_competitor(cfg, dir, out.verdicts);
  } else if (kind == "minimize") {
    results = run_minimize(cfg, cone_from_config(cfg), dir, out.verdicts);
  } else if (kind == "audit-geodesics") {
    results = run_audit(cfg, dir, out.verdicts);
  } else if (kind == "monotonicity") {
    results = run_monotonicity(cfg, cone_from_config(cfg), dir, out.verdicts);
  } else {
    throw ConfigError("kind: unknown kind \"" + kind + "\"");
  }

  ordered_json verdicts = ordered_json::array();
  for (const auto& v : out.verdicts)
    verdicts.push_back({{"name", v.name},
                        {"value", std::isfinite(v.value) ? ordered_json(v.value) : ordered_json(nullptr)},
                        {"tolerance", v.tolerance},
                        {"rule", v.rule},
                        {"pass", v.pass}});
  out.report["tool"] = kToolName;
  out.report["version"] = kToolVersion;
  out.report["config"] = cfg;
  out.report["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.report["results"] = results;
  out.report["verdicts"] = verdicts;
  out.report["pass"] = out.pass();
  std::ofstream os(dir / "report.json", std::ios::binary);
  os << out.report.dump(2) << '\n';
  if (!os) throw std::runtime_error("cannot write " + (dir / "report.json").string());
  return out;
}

Step3Config random_step3_config(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  auto unit = [&] {
    Vec3 v(g(rng), g(rng), g(rng));
    while (v.norm() < 1e-6) v = Vec3(g(rng), g(rng), g(rng));
    return Vec3(v.normalized());
  };
  for (;;) {
    // Canonical frame: the arc lies on the equator of +e3, from angle 0 to
    // `len`; the facet normals are the outward arc tangents at the ends.
    const double len = 0.1 + (std::numbers::pi - 0.2) * u(rng);
    const Vec3 p(1.0, 0.0, 0.0), q(std::cos(len), std::sin(len), 0.0);
    const Vec3 nu_p(0.0, -1.0, 0.0), nu_q(-std::sin(len), std::cos(len), 0.0);
    const Vec3 m = unit();
    // The plane must miss the closed arc and stay clear of the pole.
    if (std::min(std::abs(m.dot(p)), std::abs(m.dot(q))) < 0.05 || (m.dot(p) > 0.0) != (m.dot(q) > 0.0)) continue;
    if (std::abs(m.z()) < 0.05) continue;
    Eigen::Quaterniond qr(g(rng), g(rng), g(rng), g(rng));
    qr.normalize();
    const Eigen::Matrix3d Q = qr.toRotationMatrix();
    return {Q * p, Q * q, Q * nu_p, Q * nu_q, Q * m};
  }
}

}  // namespace vskip
