#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "svogs/experiment.hpp"

namespace {

int cmd_run(const std::string& config_path) {
  svogs::ExperimentConfig config = svogs::load_config(config_path);
  svogs::ExperimentResult result = svogs::run_experiment(config);
  for (const std::string& f : result.files) std::cout << f << "\n";
  return 0;
}

int cmd_verify(const std::string& suite) {
  svogs::VerifyReport report = svogs::verify_suite(suite);
  for (const svogs::VerifyEntry& e : report.entries)
    std::cout << (e.pass ? "PASS " : "FAIL ") << e.name << "  " << e.details
              << "\n";
  std::cout << (report.all_pass ? "all checks passed" : "some checks FAILED")
            << "\n";
  return report.all_pass ? 0 : 1;
}

int cmd_estimate(const std::string& config_path) {
  svogs::ExperimentConfig config = svogs::load_config(config_path);
  svogs::BuiltProblem built = svogs::build_problem(config);
  std::cout << std::setprecision(12);
  std::cout << "L = " << built.L << "\n";
  std::cout << "delta = " << built.delta << "\n";
  std::cout << "mu = " << built.mu << "\n";
  if (built.diameter)
    std::cout << "D = " << *built.diameter << "\n";
  else
    std::cout << "D = unbounded\n";
  return 0;
}

int cmd_reference(const std::string& config_path) {
  svogs::ExperimentConfig config = svogs::load_config(config_path);
  if (config.output.empty())
    throw svogs::InvalidArgument(
        "config: run.output is required to place the reference file");
  svogs::BuiltProblem built = svogs::build_problem(config);
  svogs::ReferenceSolution ref = svogs::reference_solution(built.problem, {});

  std::ostringstream os;
  os << "block,index,value\n";
  auto emit = [&](const char* block, const svogs::Vector& v) {
    for (svogs::Index i = 0; i < v.size(); ++i)
      os << block << ',' << (i + 1) << ',' << std::setprecision(17) << v[i]
         << '\n';
  };
  emit("x", ref.z_star.x);
  emit("y", ref.z_star.y);

  const std::string path = config.output + ".reference.csv";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw svogs::InvalidArgument("cannot open output file: " + path);
  out << os.str();
  out.flush();
  if (!out.good()) throw svogs::InvalidArgument("write failed: " + path);
  std::cout << path << "\n";
  std::cout << "residual = " << std::setprecision(6) << ref.residual << "\n";
  return 0;
}

int cmd_make_instance(const std::string& kind_name, int n, int d, double delta,
                      double mu, double L, double R_x, double R_y,
                      const std::string& out_path) {
  svogs::HardInstanceSpec spec;
  if (kind_name == "cc-rounds")
    spec.kind = svogs::InstanceKind::kCcRounds;
  else if (kind_name == "cc-comm")
    spec.kind = svogs::InstanceKind::kCcComm;
  else if (kind_name == "cc-grad")
    spec.kind = svogs::InstanceKind::kCcGrad;
  else if (kind_name == "scsc-comm")
    spec.kind = svogs::InstanceKind::kScscComm;
  else if (kind_name == "scsc-grad")
    spec.kind = svogs::InstanceKind::kScscGrad;
  else
    throw svogs::InvalidArgument(
        "kind must be one of cc-rounds, cc-comm, cc-grad, scsc-comm, "
        "scsc-grad");
  spec.n = n;
  spec.d = d;
  spec.delta = delta;
  spec.mu = mu;
  spec.L = L;
  spec.R_x = R_x;
  spec.R_y = R_y;

  svogs::HardInstance inst = svogs::build_hard_instance(spec);
  svogs::InstanceConstantsReport rep = svogs::verify_instance_constants(inst);

  nlohmann::json out;
  out["kind"] = to_string(spec.kind);
  out["n"] = spec.n;
  out["d"] = spec.d;
  out["dx"] = inst.problem.dx;
  out["dy"] = inst.problem.dy;
  out["R_x"] = spec.R_x;
  out["R_y"] = spec.R_y;
  out["theta"] = inst.theta;
  nlohmann::json claimed;
  claimed["L"] = rep.L_claimed;
  claimed["delta"] = rep.delta_claimed;
  claimed["mu"] = rep.mu_claimed;
  out["claimed_constants"] = claimed;
  nlohmann::json estimated;
  estimated["L"] = rep.L_est;
  estimated["delta"] = rep.delta_est;
  estimated["mu"] = rep.mu_est;
  out["estimated_constants"] = estimated;
  out["constants_verified"] = rep.pass;
  if (!rep.message.empty()) out["constants_note"] = rep.message;

  const std::string text = out.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
    if (!file)
      throw svogs::InvalidArgument("cannot open output file: " + out_path);
    file << text;
    file.flush();
    if (!file.good()) throw svogs::InvalidArgument("write failed: " + out_path);
    std::cout << out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed saddle-point optimization simulator"};
  app.require_subcommand(1);

  std::string run_config, verify_selector = "all", estimate_config,
              reference_config;
  CLI::App* run = app.add_subcommand("run", "run an experiment from a config");
  run->add_option("config", run_config, "JSON experiment config")->required();

  CLI::App* verify =
      app.add_subcommand("verify", "run a named property-check suite");
  verify->add_option("suite", verify_selector,
                     "similarity | lyapunov | zero-chain | "
                     "estimator-unbiasedness | accounting | all");

  CLI::App* estimate = app.add_subcommand(
      "estimate", "print the problem constants of a config's problem");
  estimate->add_option("config", estimate_config, "JSON experiment config")
      ->required();

  CLI::App* reference = app.add_subcommand(
      "reference", "solve for the reference saddle point and write it out");
  reference->add_option("config", reference_config, "JSON experiment config")
      ->required();

  std::string mi_kind, mi_output;
  int mi_n = 3, mi_d = 12;
  double mi_delta = 1.0, mi_mu = 0.0, mi_L = 1.0, mi_Rx = 1.0, mi_Ry = 1.0;
  CLI::App* make_instance = app.add_subcommand(
      "make-instance", "build a hard instance and report its constants");
  make_instance->add_option("kind", mi_kind,
                            "cc-rounds | cc-comm | cc-grad | scsc-comm | "
                            "scsc-grad")
      ->required();
  make_instance->add_option("--n", mi_n, "number of nodes");
  make_instance->add_option("--d", mi_d, "per-block dimension");
  make_instance->add_option("--delta", mi_delta, "target similarity constant");
  make_instance->add_option("--mu", mi_mu, "strong monotonicity (scsc kinds)");
  make_instance->add_option("--L", mi_L, "target smoothness constant");
  make_instance->add_option("--R_x", mi_Rx, "x-ball radius (cc kinds)");
  make_instance->add_option("--R_y", mi_Ry, "y-ball radius (cc kinds)");
  make_instance->add_option("--output", mi_output,
                            "write the description JSON here (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_config);
    if (verify->parsed()) return cmd_verify(verify_selector);
    if (estimate->parsed()) return cmd_estimate(estimate_config);
    if (reference->parsed()) return cmd_reference(reference_config);
    if (make_instance->parsed())
      return cmd_make_instance(mi_kind, mi_n, mi_d, mi_delta, mi_mu, mi_L,
                               mi_Rx, mi_Ry, mi_output);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
