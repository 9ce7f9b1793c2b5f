#pragma once

#include <cstdint>
#include <string>

#include "svogs/hard_instances.hpp"
#include "svogs/problem.hpp"

namespace svogs {

// Reusable property checks shared by the `verify` subcommand and the
// acceptance harness. Each returns pass/fail plus the measured statistics
// so reports can show margins, not just verdicts.

// max_i sup ||(F_i - F)(z1) - (F_i - F)(z2)|| / ||z1 - z2|| over random pairs
// must not exceed delta * (1 + tol_factor), where delta is the declared or
// spectrally estimated similarity constant of the problem.
struct SimilarityCheckResult {
  bool pass = false;
  double delta = 0.0;      // bound the ratios are compared against
  double max_ratio = 0.0;  // worst observed difference quotient
  int pairs = 0;
};
SimilarityCheckResult check_similarity(const SaddleProblem& problem, int pairs,
                                       double tol_factor, std::uint64_t seed);

// Potential non-negativity: on a strongly monotone quadratic instance with
// eta = 1/(32 delta), the round potential must stay above -tol * scale over
// randomized (z_k, z_{k-1}, w_k, w_{k-1}) states.
struct LyapunovCheckResult {
  bool pass = false;
  double min_value = 0.0;
  double min_scaled = 0.0;  // min over states of value / scale
  int states = 0;
};
LyapunovCheckResult check_lyapunov_nonneg(int states, double tol,
                                          std::uint64_t seed);

// Conditional mean of the round estimator: with the state frozen, the
// Monte-Carlo mean over batch resamples must match
// (F - F_1)(z_k) + alpha [(F - F_1)(z_k) - (F - F_1)(z_{k-1})]
// coordinatewise within z_score standard errors.
struct UnbiasednessCheckResult {
  bool pass = false;
  double max_dev_over_se = 0.0;  // worst coordinate |mean - analytic| / SE
  int resamples = 0;
};
UnbiasednessCheckResult check_estimator_unbiasedness(int resamples,
                                                     double z_score,
                                                     std::uint64_t seed);

// Accounting law: across many rounds the empirical mean per-round increment
// of communication units must sit within z_score sigma of b + p n.
struct AccountingCheckResult {
  bool pass = false;
  double mean_increment = 0.0;
  double expected = 0.0;
  double sigma = 0.0;  // std. deviation of the mean under the Bernoulli law
  int rounds = 0;
};
AccountingCheckResult check_accounting(int n, int b, double p, int rounds,
                                       double z_score, std::uint64_t seed);

// Sparsity-propagation audit: runs the requested rounds of the main loop on
// a chain instance from zero initialization with event recording on, then
// replays the event log through the frontier argument and compares the
// observed nonzero support of every iterate against the certified bound.
struct ZeroChainCheckResult {
  bool pass = false;
  int rounds = 0;
  int final_bound = 0;
  int final_observed = 0;
  std::string message;
};
ZeroChainCheckResult check_zero_chain(InstanceKind kind, int d, int n,
                                      int rounds, std::uint64_t seed);

}  // namespace svogs
