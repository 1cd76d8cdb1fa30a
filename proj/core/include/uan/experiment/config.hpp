#pragma once

#include "uan/minconvex.hpp"
#include "uan/sets.hpp"
#include "uan/solvers.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace uan::experiment {

using json = nlohmann::json;

/// Malformed or inconsistent configuration. Messages name the offending field
/// as a JSON pointer ("field /algorithm/gamma: ...") or, for syntax errors,
/// the line and column.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScheduleSpec {
  std::string kind = "constant";  // constant | cyclic
  std::vector<double> values{1.0};
  double eps = 1e-3;
};

struct AlgorithmSpec {
  std::string name;
  double gamma = 1.0;
  ScheduleSpec schedule;
  std::string policy = "lowest-index";  // lowest-index | seeded-random | round-robin
  std::string control = "cyclic";       // km-admissible: cyclic | random-admissible
  bool anchor_first = true;             // cadr
  std::string op = "project";           // iterate-union: project | reflect | dr | prox
};

/// Either an explicit point or a uniform sample from a ball (seeded).
struct StartSpec {
  std::vector<double> point;
  std::vector<double> center;
  double radius = 0.0;

  bool sampled() const { return point.empty(); }
};

struct StopSpec {
  double step_tol = 1e-10;
  std::size_t max_iters = 10000;
  std::string residual = "none";  // none | set-distance | norm
  double residual_tol = 1e-10;
  double classify_tol = 1e-8;
  double guard_factor = 1e8;
};

struct OutputSpec {
  std::string trace;   // default <name>.trace.jsonl
  std::string report;  // default <name>.verify.json
};

struct VerifySpec {
  std::size_t pairs = 1000;
  std::vector<double> center;  // default: origin
  double half_width = 1.0;
  std::vector<std::vector<double>> points;
  std::vector<double> radius_center;  // empty: skip the radius estimate
  double delta_max = 1.0;
  std::size_t radius_samples = 1000;
  std::vector<std::vector<double>> prox_points;
  double grid_lo = -4.0;
  double grid_hi = 4.0;
  std::size_t grid_k = 201;
};

struct SweepSpec {
  std::vector<std::vector<double>> starts;
  std::vector<double> lo;
  std::vector<double> hi;
  std::size_t k = 0;
  double cluster_tol = 1e-6;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  json sets = json::array();
  json f;
  json g;
  json smooth;
  AlgorithmSpec algorithm;
  StartSpec x0;
  StopSpec stop;
  OutputSpec output;
  std::optional<VerifySpec> verify;
  std::optional<SweepSpec> sweep;
};

/// Objects assembled from the catalog entries of a config.
struct Problem {
  Index dim = 0;
  std::vector<UnionConvexSet> sets;
  std::optional<MinConvexFn> f;
  std::optional<MinConvexFn> g;
  std::optional<SmoothFn> smooth;
};

json to_json(const ExperimentConfig& config);
/// Validates every field (including building the problem) and rejects unknown keys.
ExperimentConfig config_from_json(const json& j);
/// Parses config text. A top-level "preset" key is expanded first and the
/// remaining keys are merged over it (JSON merge patch).
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

std::vector<std::string> preset_names();
/// Full config of a built-in preset; throws ConfigError for unknown names.
json preset(std::string_view name);

Problem build_problem(const ExperimentConfig& config);

/// The union map whose fixed points the configured algorithm targets; final
/// iterates are classified against it.
UnionMap driving_operator(const ExperimentConfig& config, const Problem& problem);

UnionConvexSet build_set(const json& j, const std::string& path);
MinConvexFn build_function(const json& j, const std::string& path);
SmoothFn build_smooth(const json& j, const std::string& path);

}  // namespace uan::experiment
