#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svogs/algorithms.hpp"
#include "svogs/hard_instances.hpp"
#include "svogs/metrics.hpp"
#include "svogs/problem.hpp"

namespace svogs {

inline constexpr const char* kVersion = "svogs 0.1.0";

// ---------------------------------------------------------------------------
// Experiment configuration (loaded from a single JSON file)
// ---------------------------------------------------------------------------

enum class ProblemKind { kRobustRegression, kSyntheticRegression, kHardInstance };
enum class AlgorithmKind { kSvogs, kEg, kOgs };
enum class ParamMode { kAutoCc, kAutoScsc, kExplicit };

std::string to_string(ProblemKind kind);
std::string to_string(AlgorithmKind kind);
std::string to_string(ParamMode mode);

struct ExperimentConfig {
  // Problem section.
  ProblemKind problem = ProblemKind::kHardInstance;
  std::string data_path;               // robust-regression input file
  SyntheticRegressionConfig synthetic; // synthetic-regression generator
  RegressionVariant variant = RegressionVariant::Constrained(2.0, 0.05);
  int n = 0;                           // node count for regression problems
  std::uint64_t partition_seed = 0;    // row-partition stream
  HardInstanceSpec instance;           // hard-instance parameters

  // Algorithm section.
  AlgorithmKind algorithm = AlgorithmKind::kSvogs;
  ParamMode mode = ParamMode::kAutoCc;
  double epsilon = 0.0;       // target accuracy (required for auto-cc)
  double eta = 0.0;           // step override (eg / ogs / explicit svogs)
  double gamma = 0.0, p = 0.0, alpha = 0.0;  // explicit svogs
  int b = 0;                  // explicit svogs batch size
  InnerSolverConfig inner;

  // Run section.
  std::vector<std::uint64_t> seeds{0};
  int K = 0;                  // round budget (0 = preset K in auto-cc mode)
  std::string stop_metric;    // optional early-stop metric name
  double stop_threshold = 0.0;
  int max_K = 0;              // round cap when a stop metric is given
  std::vector<std::string> metrics;  // empty = problem-dependent default
  int cadence = 1;            // emit metrics every `cadence` rounds
  double tau = 0.0;           // gradient-mapping step (0 = 1/L)
  std::string output;         // path prefix for CSV / metadata files
};

// Parses and strictly validates a JSON config; unknown fields are rejected
// with their full path, and all defaults are resolved in the returned value.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

// ---------------------------------------------------------------------------
// Problem assembly shared by the subcommands
// ---------------------------------------------------------------------------

struct BuiltProblem {
  SaddleProblem problem;
  std::optional<HardInstance> instance;  // present for hard-instance configs
  double L = 0.0, delta = 0.0, mu = 0.0;
  std::optional<double> diameter;  // constraint diameter when bounded
};
BuiltProblem build_problem(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Trace output
// ---------------------------------------------------------------------------

// Writes `round,comm_units,grad_calls,inner_grad_calls,metric,value` rows to
// `path` (header always present, LF endings, 17 significant digits), going
// through a temporary file plus rename so partial writes never stay behind.
void emit_trace(const MetricTrace& trace, const std::string& path);

struct ExperimentResult {
  std::vector<std::string> files;  // all files written, per-seed then aggregate
  std::vector<MetricTrace> traces;
};

// Runs the configured experiment over all seeds, writing one CSV and one JSON
// metadata sidecar per seed plus a quartile aggregate CSV. Deterministic for
// a fixed config; on error every partially written file is removed and the
// failure is rethrown.
ExperimentResult run_experiment(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Property-suite runner (see verify.hpp for the individual checks)
// ---------------------------------------------------------------------------

struct VerifyEntry {
  std::string name;
  bool pass = false;
  std::string details;
};
struct VerifyReport {
  std::vector<VerifyEntry> entries;
  bool all_pass = true;
};

// selector: one of "similarity", "lyapunov", "zero-chain",
// "estimator-unbiasedness", "accounting", or "all".
VerifyReport verify_suite(const std::string& selector);

}  // namespace svogs
