#include "svogs/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "svogs/libsvm.hpp"
#include "svogs/rng.hpp"
#include "svogs/verify.hpp"

namespace svogs {

using nlohmann::json;

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kRobustRegression: return "robust-regression";
    case ProblemKind::kSyntheticRegression: return "synthetic-regression";
    case ProblemKind::kHardInstance: return "hard-instance";
  }
  return "?";
}
std::string to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::kSvogs: return "svogs";
    case AlgorithmKind::kEg: return "eg";
    case AlgorithmKind::kOgs: return "ogs";
  }
  return "?";
}
std::string to_string(ParamMode mode) {
  switch (mode) {
    case ParamMode::kAutoCc: return "auto-cc";
    case ParamMode::kAutoScsc: return "auto-scsc";
    case ParamMode::kExplicit: return "explicit";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void config_error(const std::string& what) {
  throw InvalidArgument("config: " + what);
}

void check_fields(const json& obj, const std::string& prefix,
                  std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* a : allowed)
      if (it.key() == a) { known = true; break; }
    if (!known) config_error("unknown field \"" + prefix + it.key() + "\"");
  }
}

const json& get_object(const json& obj, const std::string& prefix,
                       const char* key) {
  if (!obj.contains(key))
    config_error("missing required section \"" + prefix + key + "\"");
  const json& v = obj.at(key);
  if (!v.is_object())
    config_error("field \"" + prefix + key + "\" must be an object");
  return v;
}

std::string get_string(const json& obj, const std::string& prefix,
                       const char* key, const char* def = nullptr) {
  if (!obj.contains(key)) {
    if (def) return def;
    config_error("missing required field \"" + prefix + key + "\"");
  }
  const json& v = obj.at(key);
  if (!v.is_string())
    config_error("field \"" + prefix + key + "\" must be a string");
  return v.get<std::string>();
}

double get_number(const json& obj, const std::string& prefix, const char* key,
                  std::optional<double> def = std::nullopt) {
  if (!obj.contains(key)) {
    if (def) return *def;
    config_error("missing required field \"" + prefix + key + "\"");
  }
  const json& v = obj.at(key);
  if (!v.is_number())
    config_error("field \"" + prefix + key + "\" must be a number");
  return v.get<double>();
}

int get_int(const json& obj, const std::string& prefix, const char* key,
            std::optional<int> def = std::nullopt) {
  if (!obj.contains(key)) {
    if (def) return *def;
    config_error("missing required field \"" + prefix + key + "\"");
  }
  const json& v = obj.at(key);
  if (!v.is_number_integer())
    config_error("field \"" + prefix + key + "\" must be an integer");
  return v.get<int>();
}

RegressionVariant parse_variant(const json& obj, const std::string& prefix) {
  const std::string type = get_string(obj, prefix, "type");
  if (type == "constrained") {
    check_fields(obj, prefix, {"type", "R_x", "R_y"});
    return RegressionVariant::Constrained(get_number(obj, prefix, "R_x", 2.0),
                                          get_number(obj, prefix, "R_y", 0.05));
  }
  if (type == "regularized") {
    check_fields(obj, prefix, {"type", "lambda", "beta"});
    return RegressionVariant::Regularized(get_number(obj, prefix, "lambda"),
                                          get_number(obj, prefix, "beta"));
  }
  config_error("field \"" + prefix +
               "type\" must be \"constrained\" or \"regularized\"");
}

InstanceKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "cc-rounds") return InstanceKind::kCcRounds;
  if (s == "cc-comm") return InstanceKind::kCcComm;
  if (s == "cc-grad") return InstanceKind::kCcGrad;
  if (s == "scsc-comm") return InstanceKind::kScscComm;
  if (s == "scsc-grad") return InstanceKind::kScscGrad;
  config_error("field \"" + where +
               "\" must be one of cc-rounds, cc-comm, cc-grad, scsc-comm, "
               "scsc-grad");
}

const std::vector<std::string>& known_metrics() {
  static const std::vector<std::string> names = {
      "grad_mapping_norm", "exact_gap", "duality_gap", "distance_sq",
      "lyapunov"};
  return names;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("not valid JSON: ") + e.what());
  }
  if (!root.is_object()) config_error("top level must be an object");
  check_fields(root, "", {"problem", "algorithm", "run"});

  ExperimentConfig cfg;

  // --- problem ---
  const json& prob = get_object(root, "", "problem");
  const std::string ptype = get_string(prob, "problem.", "type");
  if (ptype == "robust-regression") {
    cfg.problem = ProblemKind::kRobustRegression;
    check_fields(prob, "problem.",
                 {"type", "path", "n", "partition_seed", "variant"});
    cfg.data_path = get_string(prob, "problem.", "path");
    cfg.n = get_int(prob, "problem.", "n");
    cfg.partition_seed = static_cast<std::uint64_t>(
        get_int(prob, "problem.", "partition_seed", 0));
    if (prob.contains("variant"))
      cfg.variant = parse_variant(get_object(prob, "problem.", "variant"),
                                  "problem.variant.");
  } else if (ptype == "synthetic-regression") {
    cfg.problem = ProblemKind::kSyntheticRegression;
    check_fields(prob, "problem.",
                 {"type", "n", "partition_seed", "variant", "N", "d",
                  "mean_scale", "spread", "noise", "data_seed"});
    cfg.n = get_int(prob, "problem.", "n");
    cfg.partition_seed = static_cast<std::uint64_t>(
        get_int(prob, "problem.", "partition_seed", 0));
    if (prob.contains("variant"))
      cfg.variant = parse_variant(get_object(prob, "problem.", "variant"),
                                  "problem.variant.");
    cfg.synthetic.N = get_int(prob, "problem.", "N", 1000);
    cfg.synthetic.d = get_int(prob, "problem.", "d", 20);
    cfg.synthetic.mean_scale = get_number(prob, "problem.", "mean_scale", 1.0);
    cfg.synthetic.spread = get_number(prob, "problem.", "spread", 1.0);
    cfg.synthetic.noise = get_number(prob, "problem.", "noise", 0.1);
    cfg.synthetic.seed =
        static_cast<std::uint64_t>(get_int(prob, "problem.", "data_seed", 0));
    if (cfg.synthetic.N < 1 || cfg.synthetic.d < 1)
      config_error("problem.N and problem.d must be positive");
  } else if (ptype == "hard-instance") {
    cfg.problem = ProblemKind::kHardInstance;
    check_fields(prob, "problem.",
                 {"type", "kind", "n", "d", "delta", "mu", "L", "R_x", "R_y"});
    cfg.instance.kind =
        parse_kind(get_string(prob, "problem.", "kind"), "problem.kind");
    cfg.instance.n = get_int(prob, "problem.", "n");
    cfg.instance.d = get_int(prob, "problem.", "d");
    cfg.instance.delta = get_number(prob, "problem.", "delta", 1.0);
    cfg.instance.mu = get_number(prob, "problem.", "mu", 0.0);
    cfg.instance.L = get_number(prob, "problem.", "L", 1.0);
    cfg.instance.R_x = get_number(prob, "problem.", "R_x", 1.0);
    cfg.instance.R_y = get_number(prob, "problem.", "R_y", 1.0);
    cfg.n = cfg.instance.n;
  } else {
    config_error(
        "field \"problem.type\" must be one of robust-regression, "
        "synthetic-regression, hard-instance");
  }
  if (cfg.n < 1) config_error("problem.n must be at least 1");

  // --- algorithm ---
  const json& alg = get_object(root, "", "algorithm");
  const std::string aname = get_string(alg, "algorithm.", "name");
  auto parse_inner = [&](const json& parent) {
    if (!parent.contains("inner")) return;
    const json& inner = get_object(parent, "algorithm.", "inner");
    check_fields(inner, "algorithm.inner.",
                 {"step", "max_iters", "eps_floor"});
    cfg.inner.step = get_number(inner, "algorithm.inner.", "step", 0.0);
    cfg.inner.max_iters = get_int(inner, "algorithm.inner.", "max_iters",
                                  cfg.inner.max_iters);
    cfg.inner.eps_floor = get_number(inner, "algorithm.inner.", "eps_floor",
                                     cfg.inner.eps_floor);
  };
  if (aname == "svogs") {
    cfg.algorithm = AlgorithmKind::kSvogs;
    check_fields(alg, "algorithm.",
                 {"name", "mode", "epsilon", "eta", "gamma", "p", "b", "alpha",
                  "inner"});
    const std::string mode = get_string(alg, "algorithm.", "mode", "auto-cc");
    if (mode == "auto-cc") {
      cfg.mode = ParamMode::kAutoCc;
      cfg.epsilon = get_number(alg, "algorithm.", "epsilon");
      if (cfg.epsilon <= 0.0) config_error("algorithm.epsilon must be positive");
    } else if (mode == "auto-scsc") {
      cfg.mode = ParamMode::kAutoScsc;
      cfg.epsilon = get_number(alg, "algorithm.", "epsilon", 0.0);
    } else if (mode == "explicit") {
      cfg.mode = ParamMode::kExplicit;
      cfg.eta = get_number(alg, "algorithm.", "eta");
      cfg.gamma = get_number(alg, "algorithm.", "gamma");
      cfg.p = get_number(alg, "algorithm.", "p");
      cfg.b = get_int(alg, "algorithm.", "b");
      cfg.alpha = get_number(alg, "algorithm.", "alpha");
      cfg.epsilon = get_number(alg, "algorithm.", "epsilon", 0.0);
    } else {
      config_error(
          "field \"algorithm.mode\" must be auto-cc, auto-scsc, or explicit");
    }
    if (cfg.mode != ParamMode::kExplicit && alg.contains("eta"))
      config_error(
          "algorithm.eta is only accepted in explicit mode (auto modes derive "
          "the step size)");
    if (cfg.mode != ParamMode::kExplicit &&
        (alg.contains("gamma") || alg.contains("p") || alg.contains("b") ||
         alg.contains("alpha")))
      config_error("explicit parameters require algorithm.mode = \"explicit\"");
    parse_inner(alg);
  } else if (aname == "eg") {
    cfg.algorithm = AlgorithmKind::kEg;
    check_fields(alg, "algorithm.", {"name", "eta"});
    cfg.eta = get_number(alg, "algorithm.", "eta", 0.0);
  } else if (aname == "ogs") {
    cfg.algorithm = AlgorithmKind::kOgs;
    check_fields(alg, "algorithm.", {"name", "eta", "epsilon", "inner"});
    cfg.eta = get_number(alg, "algorithm.", "eta", 0.0);
    cfg.epsilon = get_number(alg, "algorithm.", "epsilon", 0.0);
    parse_inner(alg);
  } else {
    config_error("field \"algorithm.name\" must be svogs, eg, or ogs");
  }

  // --- run ---
  if (root.contains("run")) {
    const json& run = get_object(root, "", "run");
    check_fields(run, "run.",
                 {"seeds", "K", "stop", "metrics", "cadence", "tau", "output"});
    if (run.contains("seeds")) {
      const json& seeds = run.at("seeds");
      if (!seeds.is_array() || seeds.empty())
        config_error("field \"run.seeds\" must be a nonempty array");
      cfg.seeds.clear();
      for (const json& s : seeds) {
        if (!s.is_number_integer() || s.get<long long>() < 0)
          config_error("field \"run.seeds\" must hold nonnegative integers");
        cfg.seeds.push_back(s.get<std::uint64_t>());
      }
    }
    cfg.K = get_int(run, "run.", "K", 0);
    if (run.contains("stop")) {
      const json& stop = get_object(run, "run.", "stop");
      check_fields(stop, "run.stop.", {"metric", "threshold", "max_K"});
      cfg.stop_metric = get_string(stop, "run.stop.", "metric");
      cfg.stop_threshold = get_number(stop, "run.stop.", "threshold");
      cfg.max_K = get_int(stop, "run.stop.", "max_K");
      if (cfg.max_K < 1) config_error("run.stop.max_K must be at least 1");
    }
    if (run.contains("metrics")) {
      const json& metrics = run.at("metrics");
      if (!metrics.is_array())
        config_error("field \"run.metrics\" must be an array of names");
      cfg.metrics.clear();
      for (const json& m : metrics) {
        if (!m.is_string())
          config_error("field \"run.metrics\" must be an array of names");
        cfg.metrics.push_back(m.get<std::string>());
      }
    }
    cfg.cadence = get_int(run, "run.", "cadence", 1);
    if (cfg.cadence < 1) config_error("run.cadence must be at least 1");
    cfg.tau = get_number(run, "run.", "tau", 0.0);
    cfg.output = get_string(run, "run.", "output", "");
  }

  // Defaults and cross-field validation.
  if (cfg.metrics.empty()) {
    const bool cc_instance =
        cfg.problem == ProblemKind::kHardInstance &&
        (cfg.instance.kind == InstanceKind::kCcRounds ||
         cfg.instance.kind == InstanceKind::kCcComm ||
         cfg.instance.kind == InstanceKind::kCcGrad);
    cfg.metrics = cc_instance ? std::vector<std::string>{"exact_gap"}
                              : std::vector<std::string>{"grad_mapping_norm"};
  }
  auto validate_metric = [&](const std::string& name, const char* where) {
    const auto& known = known_metrics();
    if (std::find(known.begin(), known.end(), name) == known.end())
      config_error(std::string("unknown metric \"") + name + "\" in " + where);
    if (name == "exact_gap" &&
        (cfg.problem != ProblemKind::kHardInstance ||
         (cfg.instance.kind != InstanceKind::kCcRounds &&
          cfg.instance.kind != InstanceKind::kCcComm &&
          cfg.instance.kind != InstanceKind::kCcGrad)))
      config_error(
          "metric \"exact_gap\" needs a ball-constrained bilinear "
          "hard-instance problem");
    if (name == "lyapunov" && cfg.algorithm != AlgorithmKind::kSvogs)
      config_error("metric \"lyapunov\" is defined for the svogs loop only");
  };
  for (const std::string& m : cfg.metrics) validate_metric(m, "run.metrics");
  if (!cfg.stop_metric.empty()) validate_metric(cfg.stop_metric, "run.stop");

  const bool has_budget =
      cfg.K > 0 || cfg.max_K > 0 ||
      (cfg.algorithm == AlgorithmKind::kSvogs && cfg.mode == ParamMode::kAutoCc);
  if (!has_budget)
    config_error(
        "a round budget is required: set run.K, run.stop.max_K, or use svogs "
        "auto-cc (whose preset includes a round count)");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

// ---------------------------------------------------------------------------
// Problem assembly
// ---------------------------------------------------------------------------

BuiltProblem build_problem(const ExperimentConfig& config) {
  BuiltProblem built;
  switch (config.problem) {
    case ProblemKind::kRobustRegression: {
      RegressionData data = parse_libsvm_file(config.data_path);
      built.problem = build_robust_regression(data, config.n, config.variant,
                                              config.partition_seed);
      break;
    }
    case ProblemKind::kSyntheticRegression: {
      RegressionData data = make_synthetic_regression(config.synthetic);
      built.problem = build_robust_regression(data, config.n, config.variant,
                                              config.partition_seed);
      break;
    }
    case ProblemKind::kHardInstance: {
      HardInstance inst = build_hard_instance(config.instance);
      built.problem = inst.problem;
      built.instance = std::move(inst);
      break;
    }
  }
  const ProblemConstants& declared = built.problem.constants;
  if (declared.L && declared.delta && declared.mu) {
    built.L = *declared.L;
    built.delta = *declared.delta;
    built.mu = *declared.mu;
  } else {
    const EstimatedConstants est = estimate_constants(built.problem);
    built.L = declared.L.value_or(est.L);
    built.delta = declared.delta.value_or(est.delta);
    built.mu = declared.mu.value_or(est.mu);
  }
  built.diameter = built.problem.constraint.diameter();
  return built;
}

// ---------------------------------------------------------------------------
// Trace output
// ---------------------------------------------------------------------------

namespace {

std::string format_value(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path() && !target.parent_path().empty())
    fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot open output file: " + tmp.string());
    out << content;
    out.flush();
    if (!out.good())
      throw InvalidArgument("write failed for output file: " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace

void emit_trace(const MetricTrace& trace, const std::string& path) {
  std::ostringstream os;
  os << "round,comm_units,grad_calls,inner_grad_calls,metric,value\n";
  for (const MetricRow& row : trace.rows) {
    os << row.round << ',' << row.comm_units << ',' << row.grad_calls << ','
       << row.inner_grad_calls << ',' << row.metric << ','
       << format_value(row.value) << '\n';
  }
  write_file_atomic(path, os.str());
}

// ---------------------------------------------------------------------------
// Metric evaluation
// ---------------------------------------------------------------------------

namespace {

struct MetricContext {
  const BuiltProblem* built = nullptr;
  const Point* z_star = nullptr;  // set when a reference solution exists
  double tau = 0.0;
  // Loop state for the potential metric (svogs only).
  const SvogsState* state = nullptr;
  LyapunovCoeffs coeffs;
};

double evaluate_metric(const std::string& name, const MetricContext& ctx,
                       const Point& at) {
  const SaddleProblem& problem = ctx.built->problem;
  if (name == "grad_mapping_norm")
    return grad_mapping_norm(problem, at, ctx.tau);
  if (name == "exact_gap") return exact_bilinear_gap(*ctx.built->instance, at);
  if (name == "duality_gap") return duality_gap(problem, at, {});
  if (name == "distance_sq") {
    detail::require_op(ctx.z_star != nullptr,
                       "distance_sq needs a computable reference solution");
    Point d = at;
    d -= *ctx.z_star;
    return d.squared_norm();
  }
  if (name == "lyapunov") {
    detail::require_op(ctx.state != nullptr && ctx.z_star != nullptr,
                       "lyapunov metric needs loop state and a reference "
                       "solution");
    return lyapunov(problem, ctx.coeffs, LyapunovVariant::kDriftQuarter,
                    ctx.state->z_k, ctx.state->z_km1, ctx.state->w_k,
                    ctx.state->w_km1, *ctx.z_star);
  }
  throw InvalidArgument("unknown metric: " + name);
}

bool needs_reference(const ExperimentConfig& config) {
  auto uses = [&](const std::string& m) {
    return m == "distance_sq" || m == "lyapunov";
  };
  for (const std::string& m : config.metrics)
    if (uses(m)) return true;
  return !config.stop_metric.empty() && uses(config.stop_metric);
}

// Largest initial local-operator norm, measured outside the ledger: used to
// resolve schedule constants before a run starts.
double initial_operator_scale(const SaddleProblem& problem, const Point& z0) {
  double m = 0.0;
  for (int i = 1; i <= problem.n; ++i)
    m = std::max(m, problem.eval_local(i, z0).norm());
  return m;
}

struct ResolvedAlgorithm {
  SvogsParams params;  // svogs / ogs
  double eta = 0.0;    // eg
  int K_budget = 0;
  double dist_bound = 0.0;
};

ResolvedAlgorithm resolve_algorithm(const ExperimentConfig& config,
                                    const BuiltProblem& built,
                                    const Point& z0) {
  ResolvedAlgorithm out;
  const int n = built.problem.n;
  const double D_F_init =
      std::max(initial_operator_scale(built.problem, z0), 1e-12);
  double dist = 0.0;
  if (built.diameter) {
    dist = *built.diameter;
  } else {
    detail::require(built.mu > 0.0,
                    "unbounded domains need a strongly monotone problem to "
                    "bound the solution distance");
    dist = 2.0 * D_F_init / built.mu;
  }
  out.dist_bound = dist;

  switch (config.algorithm) {
    case AlgorithmKind::kEg:
      out.eta = config.eta > 0.0 ? config.eta : 1.0 / (2.0 * built.L);
      out.K_budget = config.max_K > 0 ? config.max_K : config.K;
      return out;
    case AlgorithmKind::kOgs: {
      SvogsParams& p = out.params;
      p.gamma = 0.0;
      p.p = 1.0;
      p.b = n;
      p.alpha = 1.0;
      p.L = built.L;
      p.delta = std::max(built.delta, 1e-12);
      p.mu = built.mu;
      p.eta = config.eta > 0.0 ? config.eta : 1.0 / (32.0 * p.delta);
      p.inner = config.inner;
      if (built.mu > 0.0) {
        p.eps_mode = EpsMode::kScsc;
        finalize_eps_constants(p, dist);
      } else {
        p.eps_mode = EpsMode::kCc;
        detail::require(config.epsilon > 0.0,
                        "ogs on a merely convex-concave problem needs "
                        "algorithm.epsilon to resolve the inner schedule");
        p.D_F_init = D_F_init;
        finalize_eps_constants(p, dist, config.epsilon);
      }
      out.K_budget = config.max_K > 0 ? config.max_K : config.K;
      return out;
    }
    case AlgorithmKind::kSvogs:
      break;
  }

  SvogsParams& p = out.params;
  const double delta_eff = std::max(built.delta, 1e-12);
  switch (config.mode) {
    case ParamMode::kAutoCc: {
      detail::require(built.diameter.has_value(),
                      "svogs auto-cc needs a bounded constraint set for its "
                      "round count; give explicit parameters instead");
      p = auto_params_cc(n, delta_eff, built.L, dist, config.epsilon, D_F_init);
      break;
    }
    case ParamMode::kAutoScsc: {
      detail::require(built.mu > 0.0,
                      "svogs auto-scsc needs a strongly monotone problem "
                      "(mu > 0)");
      p = auto_params_scsc(n, delta_eff, built.mu, built.L);
      p.D_F_init = D_F_init;
      finalize_eps_constants(p, dist);
      break;
    }
    case ParamMode::kExplicit: {
      p.eta = config.eta;
      p.gamma = config.gamma;
      p.p = config.p;
      p.b = config.b;
      p.alpha = config.alpha;
      p.L = built.L;
      p.delta = delta_eff;
      p.mu = built.mu;
      p.D_F_init = D_F_init;
      if (built.mu > 0.0) {
        p.eps_mode = EpsMode::kScsc;
        p.rho = std::max(1.0 - p.eta * p.mu / 6.0,
                         1.0 - p.p * p.eta * p.mu /
                                   (2.0 * p.gamma + p.eta * p.mu));
        finalize_eps_constants(p, dist);
      } else {
        p.eps_mode = EpsMode::kCc;
        detail::require(config.epsilon > 0.0,
                        "explicit svogs on a merely convex-concave problem "
                        "needs algorithm.epsilon to resolve the inner "
                        "schedule");
        finalize_eps_constants(p, dist, config.epsilon);
      }
      break;
    }
  }
  p.inner.step = config.inner.step != 0.0 ? config.inner.step : p.inner.step;
  p.inner.max_iters = config.inner.max_iters;
  if (config.inner.eps_floor != 1e-16) p.inner.eps_floor = config.inner.eps_floor;

  if (config.max_K > 0)
    out.K_budget = config.max_K;
  else if (config.K > 0)
    out.K_budget = config.K;
  else
    out.K_budget = p.K;
  detail::require(out.K_budget > 0, "resolved round budget must be positive");
  return out;
}

json config_echo(const ExperimentConfig& config) {
  json problem;
  problem["type"] = to_string(config.problem);
  switch (config.problem) {
    case ProblemKind::kRobustRegression:
      problem["path"] = config.data_path;
      break;
    case ProblemKind::kSyntheticRegression:
      problem["N"] = config.synthetic.N;
      problem["d"] = config.synthetic.d;
      problem["mean_scale"] = config.synthetic.mean_scale;
      problem["spread"] = config.synthetic.spread;
      problem["noise"] = config.synthetic.noise;
      problem["data_seed"] = config.synthetic.seed;
      break;
    case ProblemKind::kHardInstance:
      problem["kind"] = to_string(config.instance.kind);
      problem["d"] = config.instance.d;
      problem["delta"] = config.instance.delta;
      problem["mu"] = config.instance.mu;
      problem["L"] = config.instance.L;
      problem["R_x"] = config.instance.R_x;
      problem["R_y"] = config.instance.R_y;
      break;
  }
  problem["n"] = config.n;
  if (config.problem != ProblemKind::kHardInstance) {
    problem["partition_seed"] = config.partition_seed;
    json variant;
    const bool constrained =
        config.variant.kind == RegressionVariant::Kind::kConstrained;
    variant["type"] = constrained ? "constrained" : "regularized";
    if (constrained) {
      variant["R_x"] = config.variant.R_x;
      variant["R_y"] = config.variant.R_y;
    } else {
      variant["lambda"] = config.variant.lambda;
      variant["beta"] = config.variant.beta;
    }
    problem["variant"] = variant;
  }

  json algorithm;
  algorithm["name"] = to_string(config.algorithm);
  if (config.algorithm == AlgorithmKind::kSvogs) {
    algorithm["mode"] = to_string(config.mode);
    if (config.epsilon > 0.0) algorithm["epsilon"] = config.epsilon;
    if (config.mode == ParamMode::kExplicit) {
      algorithm["eta"] = config.eta;
      algorithm["gamma"] = config.gamma;
      algorithm["p"] = config.p;
      algorithm["b"] = config.b;
      algorithm["alpha"] = config.alpha;
    }
  } else {
    if (config.eta > 0.0) algorithm["eta"] = config.eta;
    if (config.algorithm == AlgorithmKind::kOgs && config.epsilon > 0.0)
      algorithm["epsilon"] = config.epsilon;
  }
  json inner;
  inner["step"] = config.inner.step;
  inner["max_iters"] = config.inner.max_iters;
  inner["eps_floor"] = config.inner.eps_floor;
  algorithm["inner"] = inner;

  json run;
  run["seeds"] = config.seeds;
  run["K"] = config.K;
  if (!config.stop_metric.empty()) {
    json stop;
    stop["metric"] = config.stop_metric;
    stop["threshold"] = config.stop_threshold;
    stop["max_K"] = config.max_K;
    run["stop"] = stop;
  }
  run["metrics"] = config.metrics;
  run["cadence"] = config.cadence;
  run["tau"] = config.tau;
  run["output"] = config.output;

  json root;
  root["problem"] = problem;
  root["algorithm"] = algorithm;
  root["run"] = run;
  return root;
}

json params_echo(const SvogsParams& p) {
  json out;
  out["eta"] = p.eta;
  out["gamma"] = p.gamma;
  out["p"] = p.p;
  out["b"] = p.b;
  out["alpha"] = p.alpha;
  out["K"] = p.K;
  out["eps_mode"] = to_string(p.eps_mode);
  out["zeta"] = p.zeta;
  out["c_hat"] = p.c_hat;
  out["c"] = p.c;
  out["rho"] = p.rho;
  out["D_F_init"] = p.D_F_init;
  out["L"] = p.L;
  out["delta"] = p.delta;
  out["mu"] = p.mu;
  out["inner_step"] = p.inner.step;
  out["inner_max_iters"] = p.inner.max_iters;
  out["inner_eps_floor"] = p.inner.eps_floor;
  out["force_full_batch"] = p.force_full_batch;
  out["fingerprint"] = p.fingerprint();
  return out;
}

struct SeedOutcome {
  MetricTrace trace;
  json meta;
};

SeedOutcome run_one_seed(const ExperimentConfig& config,
                         const BuiltProblem& built, const Point* z_star,
                         std::uint64_t seed) {
  const SaddleProblem& problem = built.problem;
  Network net(problem);
  const Point z0 =
      problem.constraint.project(Point::Zero(problem.dx, problem.dy));
  ResolvedAlgorithm resolved = resolve_algorithm(config, built, z0);

  MetricContext ctx;
  ctx.built = &built;
  ctx.z_star = z_star;
  ctx.tau = config.tau > 0.0 ? config.tau : 1.0 / built.L;
  if (config.algorithm == AlgorithmKind::kSvogs) {
    ctx.coeffs.eta = resolved.params.eta;
    ctx.coeffs.gamma = resolved.params.gamma;
    ctx.coeffs.p = resolved.params.p;
    ctx.coeffs.mu = resolved.params.mu;
  }

  SeedOutcome out;
  out.trace.algorithm = to_string(config.algorithm);
  out.trace.seed = seed;
  if (config.algorithm == AlgorithmKind::kEg)
    out.trace.params_fingerprint = "eta=" + format_value(resolved.eta);
  else
    out.trace.params_fingerprint = resolved.params.fingerprint();

  const int K = resolved.K_budget;
  const bool has_stop = !config.stop_metric.empty();
  auto record = [&](int round, const Point& at) -> bool {
    // Returns false when the early-stop threshold is reached.
    if (round % config.cadence != 0 && round != K) return true;
    const OracleLedger& led = net.ledger();
    bool keep_going = true;
    double stop_value = 0.0;
    bool stop_seen = false;
    for (const std::string& name : config.metrics) {
      MetricRow row;
      row.round = round;
      row.comm_units = led.comm_units;
      row.grad_calls = led.grad_calls_total;
      row.inner_grad_calls = led.inner_grad_calls;
      row.metric = name;
      row.value = evaluate_metric(name, ctx, at);
      if (has_stop && name == config.stop_metric) {
        stop_seen = true;
        stop_value = row.value;
      }
      out.trace.rows.push_back(std::move(row));
    }
    if (has_stop) {
      if (!stop_seen) stop_value = evaluate_metric(config.stop_metric, ctx, at);
      if (stop_value <= config.stop_threshold) keep_going = false;
    }
    return keep_going;
  };

  RunResult run;
  switch (config.algorithm) {
    case AlgorithmKind::kSvogs: {
      const SvogsParams& params = resolved.params;
      run = run_svogs(net, z0, params, seed, K,
                      [&](const SvogsState& st) {
                        ctx.state = &st;
                        const Point& at = params.eps_mode == EpsMode::kCc
                                              ? st.u_avg
                                              : st.z_k;
                        const bool cont = record(st.round, at);
                        ctx.state = nullptr;
                        return cont;
                      });
      out.meta["params"] = params_echo(params);
      break;
    }
    case AlgorithmKind::kEg: {
      run = run_eg(net, z0, resolved.eta, K,
                   [&](int round, const Point& z) { return record(round, z); });
      out.meta["eta"] = resolved.eta;
      break;
    }
    case AlgorithmKind::kOgs: {
      run = run_ogs(net, z0, resolved.params, K,
                    [&](int round, const Point& z) { return record(round, z); });
      out.meta["params"] = params_echo(resolved.params);
      break;
    }
  }

  out.meta["version"] = kVersion;
  out.meta["seed"] = seed;
  out.meta["algorithm"] = to_string(config.algorithm);
  out.meta["config"] = config_echo(config);
  json constants;
  constants["L"] = built.L;
  constants["delta"] = built.delta;
  constants["mu"] = built.mu;
  if (built.diameter)
    constants["D"] = *built.diameter;
  else
    constants["D"] = nullptr;
  constants["dist_bound"] = resolved.dist_bound;
  out.meta["constants"] = constants;
  json shape;
  shape["n"] = problem.n;
  shape["dx"] = problem.dx;
  shape["dy"] = problem.dy;
  out.meta["problem_shape"] = shape;
  json res;
  res["K_budget"] = K;
  res["rounds"] = run.rounds;
  res["inner_budget_hits"] = run.inner_budget_hits;
  res["comm_units"] = run.ledger.comm_units;
  res["grad_calls"] = run.ledger.grad_calls_total;
  res["inner_grad_calls"] = run.ledger.inner_grad_calls;
  res["tau"] = ctx.tau;
  out.meta["result"] = res;
  return out;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 1) return v[0];
  const double h = q * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= n) return v[n - 1];
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

std::string aggregate_csv(const std::vector<MetricTrace>& traces) {
  // (round, metric) -> values across seeds, ordered by round then name.
  std::vector<std::pair<std::pair<int, std::string>, std::vector<double>>> rows;
  auto slot = [&](int round, const std::string& metric) -> std::vector<double>& {
    for (auto& r : rows)
      if (r.first.first == round && r.first.second == metric) return r.second;
    rows.push_back({{round, metric}, {}});
    return rows.back().second;
  };
  for (const MetricTrace& t : traces)
    for (const MetricRow& r : t.rows) slot(r.round, r.metric).push_back(r.value);
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.first.first != b.first.first ? a.first.first < b.first.first
                                          : a.first.second < b.first.second;
  });
  std::ostringstream os;
  os << "round,metric,q25,median,q75\n";
  for (const auto& r : rows) {
    os << r.first.first << ',' << r.first.second << ','
       << format_value(quantile(r.second, 0.25)) << ','
       << format_value(quantile(r.second, 0.5)) << ','
       << format_value(quantile(r.second, 0.75)) << '\n';
  }
  return os.str();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  detail::require(!config.output.empty(),
                  "config: run.output is required to run an experiment");
  BuiltProblem built = build_problem(config);

  std::optional<Point> z_star;
  if (needs_reference(config))
    z_star = reference_solution(built.problem, {}).z_star;

  ExperimentResult result;
  std::vector<std::string> written;
  try {
    for (std::uint64_t seed : config.seeds) {
      SeedOutcome outcome = run_one_seed(config, built,
                                         z_star ? &*z_star : nullptr, seed);
      const std::string base =
          config.output + ".seed" + std::to_string(seed);
      emit_trace(outcome.trace, base + ".csv");
      written.push_back(base + ".csv");
      write_file_atomic(base + ".meta.json", outcome.meta.dump(2) + "\n");
      written.push_back(base + ".meta.json");
      result.traces.push_back(std::move(outcome.trace));
    }
    const std::string agg = config.output + ".aggregate.csv";
    write_file_atomic(agg, aggregate_csv(result.traces));
    written.push_back(agg);
  } catch (...) {
    std::error_code ec;
    for (const std::string& p : written) std::filesystem::remove(p, ec);
    throw;
  }
  result.files = std::move(written);
  return result;
}

// ---------------------------------------------------------------------------
// verify subcommand
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

void add_similarity_entries(VerifyReport& report) {
  {
    // Identical nodes: zero spread and zero label noise make every row equal
    // to the shared mean row, so the local operators coincide and the
    // similarity constant is zero.
    SyntheticRegressionConfig scfg;
    scfg.N = 320;
    scfg.d = 12;
    scfg.spread = 0.0;
    scfg.noise = 0.0;
    scfg.seed = 21;
    SaddleProblem prob =
        build_robust_regression(make_synthetic_regression(scfg), 8,
                                RegressionVariant::Constrained(2.0, 0.05), 0);
    SimilarityCheckResult r = check_similarity(prob, 200, 1e-9, 77);
    report.entries.push_back(
        {"similarity/identical-nodes", r.pass,
         "delta=" + fmt(r.delta) + " max_ratio=" + fmt(r.max_ratio) +
             " pairs=" + std::to_string(r.pairs)});
  }
  {
    SyntheticRegressionConfig scfg;
    scfg.N = 640;
    scfg.d = 16;
    scfg.spread = 0.4;
    scfg.noise = 0.1;
    scfg.seed = 22;
    SaddleProblem prob =
        build_robust_regression(make_synthetic_regression(scfg), 8,
                                RegressionVariant::Constrained(2.0, 0.05), 0);
    SimilarityCheckResult r = check_similarity(prob, 200, 1e-9, 78);
    report.entries.push_back(
        {"similarity/heterogeneous", r.pass,
         "delta=" + fmt(r.delta) + " max_ratio=" + fmt(r.max_ratio) +
             " pairs=" + std::to_string(r.pairs)});
  }
}

void add_lyapunov_entries(VerifyReport& report) {
  LyapunovCheckResult r = check_lyapunov_nonneg(1000, 1e-10, 7);
  report.entries.push_back(
      {"lyapunov/nonnegative", r.pass,
       "min_scaled=" + fmt(r.min_scaled) + " min_value=" + fmt(r.min_value) +
           " states=" + std::to_string(r.states)});
}

void add_zero_chain_entries(VerifyReport& report) {
  {
    ZeroChainCheckResult r =
        check_zero_chain(InstanceKind::kCcRounds, 12, 3, 8, 5);
    report.entries.push_back(
        {"zero-chain/cc-rounds", r.pass,
         "final_bound=" + std::to_string(r.final_bound) +
             " final_observed=" + std::to_string(r.final_observed) +
             (r.message.empty() ? "" : " " + r.message)});
  }
  {
    ZeroChainCheckResult r =
        check_zero_chain(InstanceKind::kScscComm, 10, 4, 8, 6);
    report.entries.push_back(
        {"zero-chain/scsc-comm", r.pass,
         "final_bound=" + std::to_string(r.final_bound) +
             " final_observed=" + std::to_string(r.final_observed) +
             (r.message.empty() ? "" : " " + r.message)});
  }
}

void add_unbiasedness_entries(VerifyReport& report) {
  UnbiasednessCheckResult r = check_estimator_unbiasedness(20000, 3.5, 2024);
  report.entries.push_back(
      {"estimator-unbiasedness/conditional-mean", r.pass,
       "max_dev_over_se=" + fmt(r.max_dev_over_se) +
           " resamples=" + std::to_string(r.resamples)});
}

void add_accounting_entries(VerifyReport& report) {
  AccountingCheckResult r = check_accounting(16, 4, 1.0 / 12.0, 10000, 3.0, 5);
  report.entries.push_back(
      {"accounting/comm-units", r.pass,
       "mean=" + fmt(r.mean_increment) + " expected=" + fmt(r.expected) +
           " sigma=" + fmt(r.sigma) + " rounds=" + std::to_string(r.rounds)});
}

}  // namespace

VerifyReport verify_suite(const std::string& selector) {
  VerifyReport report;
  bool known = false;
  if (selector == "similarity" || selector == "all") {
    add_similarity_entries(report);
    known = true;
  }
  if (selector == "lyapunov" || selector == "all") {
    add_lyapunov_entries(report);
    known = true;
  }
  if (selector == "zero-chain" || selector == "all") {
    add_zero_chain_entries(report);
    known = true;
  }
  if (selector == "estimator-unbiasedness" || selector == "all") {
    add_unbiasedness_entries(report);
    known = true;
  }
  if (selector == "accounting" || selector == "all") {
    add_accounting_entries(report);
    known = true;
  }
  if (!known)
    throw InvalidArgument(
        "unknown verify selector \"" + selector +
        "\"; choose similarity, lyapunov, zero-chain, estimator-unbiasedness, "
        "accounting, or all");
  for (const VerifyEntry& e : report.entries)
    if (!e.pass) report.all_pass = false;
  return report;
}

}  // namespace svogs
