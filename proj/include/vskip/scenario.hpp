// Scenario runner: a JSON config selects one study (competitor, minimize,
// audit-geodesics, monotonicity); results go to a report plus CSV and OBJ
// files, and every numeric verdict carries the tolerance it was judged with.
#pragma once

#include "vskip/geometry_core.hpp"

#include <json.hpp>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace vskip {

using ordered_json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kToolName = "vskip";
inline constexpr const char* kToolVersion = "1.0.0";

/// Checks a raw config against the schema and fills in every default.
/// Throws ConfigError naming the offending field.
ordered_json normalize_config(const nlohmann::json& raw);

/// Cone described by a normalized config.
PolyhedralCone cone_from_config(const ordered_json& cfg);

struct Verdict {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  std::string rule;  // how value and tolerance are compared, e.g. "value <= tolerance"
  bool pass = false;
};

struct RunOutcome {
  ordered_json report;
  std::vector<Verdict> verdicts;
  [[nodiscard]] bool pass() const;
};

/// Executes a normalized config and writes its outputs into `out_dir`
/// (created if needed). The report is also written as report.json.
RunOutcome run_scenario(const ordered_json& cfg, const std::string& out_dir);

/// printf "%.17g" (enough digits to round-trip), with -0 printed as 0.
std::string format_g17(double v);

/// A first arc p1q1 meeting its two facet planes orthogonally, and a second
/// plane through the origin that misses the arc.
struct Step3Config {
  Vec3 p1, q1;
  Vec3 nu0_p1, nu0_q1;
  Vec3 plane2_normal;
};

/// Draws a configuration accepted by step3_audit.
Step3Config random_step3_config(std::mt19937_64& rng);

}  // namespace vskip
