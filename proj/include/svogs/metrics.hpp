#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "svogs/hard_instances.hpp"
#include "svogs/problem.hpp"

namespace svogs {

// One emitted measurement, keyed by the oracle counters at the time it was
// taken. Metric evaluations themselves never touch the counters.
struct MetricRow {
  int round = 0;
  std::uint64_t comm_units = 0;
  std::uint64_t grad_calls = 0;
  std::uint64_t inner_grad_calls = 0;
  std::string metric;
  double value = 0.0;
};

struct MetricTrace {
  std::string algorithm;
  std::uint64_t seed = 0;
  std::string params_fingerprint;
  std::vector<MetricRow> rows;
};

// Gradient mapping F_tau(z) = (z - P_Z(z - tau F(z))) / tau. Coincides with
// F(z) when the problem is unconstrained.
Point grad_mapping(const SaddleProblem& p, const Point& z, double tau);
double grad_mapping_norm(const SaddleProblem& p, const Point& z, double tau);

// Duality gap sup_{y' in Y} f(x, y') - inf_{x' in X} f(x', y), estimated by
// budgeted projected gradient ascent/descent on the two frozen subproblems.
// Requires objective values and declared concavity in y; the result is a
// lower estimate of the true gap.
struct DualityGapConfig {
  int max_iters = 20000;
  double tol = 1e-10;  // subproblem gradient-mapping tolerance
  double step = 0.0;   // 0 = auto (1/L)
};
double duality_gap(const SaddleProblem& p, const Point& z,
                   const DualityGapConfig& cfg = {});
// Closed-form variant for the bilinear ball-constrained instances.
double duality_gap(const HardInstance& inst, const Point& z);

// Potential function combining distance to the solution, an estimator-drift
// cross term, iterate displacement, snapshot drift, and snapshot distance:
//   (1/eta + mu) ||z_k - z*||^2
//   + 2 <(F - F_1)(z_{k-1}) - (F - F_1)(z_k), z_k - z*>
//   + 1/(64 eta) ||z_k - z_{k-1}||^2
//   + c_drift gamma/eta ||w_{k-1} - z_k||^2
//   + (2 gamma + eta mu)/(2 p eta) ||w_k - z*||^2
// with c_drift = 1/4 (default) or 1/2 (alternative weighting; the decrease
// test reports which one contracts).
enum class LyapunovVariant { kDriftQuarter, kDriftHalf };
struct LyapunovCoeffs {
  double eta = 0.0;
  double gamma = 0.0;
  double p = 1.0;
  double mu = 0.0;
};
double lyapunov(const SaddleProblem& p, const LyapunovCoeffs& c,
                LyapunovVariant variant, const Point& z_k, const Point& z_km1,
                const Point& w_k, const Point& w_km1, const Point& z_star);

// High-accuracy solution of the saddle problem: a direct linear solve for
// unconstrained affine operators, otherwise extragradient iterated until the
// gradient-mapping norm falls below tol (requires strong monotonicity).
struct ReferenceConfig {
  double tol = 1e-10;
  int max_iters = 500000;
  double tau = 0.0;  // gradient-mapping step for certification; 0 = 1/L
};
struct ReferenceSolution {
  Point z_star;
  double residual = 0.0;  // gradient-mapping norm at z_star
};
ReferenceSolution reference_solution(const SaddleProblem& p,
                                     const ReferenceConfig& cfg = {});

}  // namespace svogs
