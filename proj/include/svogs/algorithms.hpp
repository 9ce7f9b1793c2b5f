#pragma once

#include <cstdint>
#include <functional>

#include "svogs/netsim.hpp"

namespace svogs {

// Inner (sub-problem) solver settings. The sub-problem at each round is the
// strongly monotone prox system on the server function; it is solved by
// extragradient with a certified natural-residual stopping rule.
struct InnerSolverConfig {
  double step = 0.0;      // 0 = auto: 1/(sqrt(2) (L + 1/eta))
  int max_iters = 20000;
  double eps_floor = 1e-16;  // absolute floor on the inner target
};

enum class EpsMode { kCc, kScsc };
std::string to_string(EpsMode mode);

// Tunable parameters of the variance-reduced optimistic sliding loop.
// zeta / c_hat control the convex-concave inner-accuracy schedule
//   eps_k = min{zeta, min(d, d^2) / c_hat},      d = ||u - z_k||,
// and c the strongly monotone schedule eps_k = min(d, d^2) / c.
struct SvogsParams {
  double eta = 0.0;    // outer step size
  double gamma = 0.0;  // snapshot mixing weight in [0, 1)
  double p = 1.0;      // snapshot probability in (0, 1]
  int b = 1;           // mini-batch size in [1, n]
  double alpha = 1.0;  // optimism weight in (0, 1]
  int K = 0;           // planned outer rounds (0 = caller decides)
  EpsMode eps_mode = EpsMode::kCc;
  double zeta = 0.0;   // cc: absolute cap on eps_k (0 = not yet resolved)
  double c_hat = 0.0;  // cc: schedule divisor (0 = not yet resolved)
  double c = 0.0;      // scsc: schedule divisor (0 = not yet resolved)
  double rho = 1.0;    // scsc: per-round contraction factor (reporting)
  double D_F_init = 0.0;  // max_i ||F_i(z0)||, measured at startup
  // Problem constants the parameters were tuned against.
  double L = 0.0;
  double delta = 0.0;
  double mu = 0.0;
  InnerSolverConfig inner;
  bool force_full_batch = false;  // deterministic batch (1..n); needs b = n

  void validate(int n) const;  // throws InvalidArgument on range violations
  std::string fingerprint() const;
};

// Loop state. The running average u_avg is maintained as an exact
// accumulated sum divided once per update, so after round k it equals
// (1/k) * sum of the k sub-problem outputs.
struct SvogsState {
  Point z_k, z_km1, w_k, w_km1;
  Point F_w_km1;  // mean operator at w_{k-1} (the round's anchor)
  Point F_w_k;    // mean operator at w_k (next round's anchor)
  Point u_avg;
  Point u_sum;
  int round = 0;
  int inner_budget_hits = 0;  // rounds whose inner solve hit max_iters
  PointId z_k_id = 0, z_km1_id = 0, w_k_id = 0, w_km1_id = 0;
};

// ---------------------------------------------------------------------------
// Parameter selection
// ---------------------------------------------------------------------------

// Convex-concave preset: b = ceil(sqrt(n)), gamma = p = 1/(sqrt(n)+8),
// eta = min{sqrt(gamma b)/(4 delta), 1/(32 delta)}, alpha = 1,
// K = ceil(20 D^2 / (eps eta)); zeta and c_hat resolved from (L, D, eps,
// D_F_init) with the initial potential bounded through the diameter.
SvogsParams auto_params_cc(int n, double delta, double L, double D, double eps,
                           double D_F_init);

// Strongly monotone preset: m = min{sqrt(n), delta/mu}, b = ceil(m),
// gamma = p = 1/(m+8), eta = min{sqrt(alpha gamma b)/(4 delta), 1/(32 delta)}
// with alpha = max{1 - eta mu/6, 1 - p eta mu/(2 gamma + eta mu)} resolved by
// fixed-point iteration from alpha = 7/8. dist_bound (an upper bound on
// ||z0 - z*||, e.g. the domain diameter) resolves the schedule constant c;
// pass 0 to resolve it later via finalize_eps_constants.
SvogsParams auto_params_scsc(int n, double delta, double mu, double L,
                             double dist_bound = 0.0);

// Resolves zeta / c_hat / c (and the inner floor) once a distance bound is
// known: cc mode needs the target accuracy and the measured D_F_init as well.
void finalize_eps_constants(SvogsParams& params, double dist_bound,
                            double eps_target = 0.0);

// Upper bound on the initial potential when started from a single point
// within dist_bound of the solution (the cross, displacement, and drift
// terms vanish at initialization).
double initial_potential_bound(const SvogsParams& params, double dist_bound);

// ---------------------------------------------------------------------------
// Inner solver
// ---------------------------------------------------------------------------

// Current inner-accuracy target given the running proxy iterate u for the
// exact sub-problem solution and the round's base point z_k.
double eps_schedule(const SvogsParams& params, const Point& u, const Point& z_k);

struct InnerResult {
  Point u;
  double certified_sq = 0.0;  // certified bound on ||u - u_exact||^2
  double eps_final = 0.0;     // accepted target at the returned iterate
  int iters = 0;              // extragradient iterations taken
  bool converged = true;
};

// Solves min-max of f_1(u) + (1/(2 eta)) (||u_x - v_x||^2 - -||u_y - v_y||^2)
// over Z, i.e. the strongly monotone system H(u) = F_1(u) + (u - v)/eta,
// by projected extragradient. Stops once the certified error bound
//   ||u - u_exact|| <= (1 + s Lh)/(s muh) ||u - P_Z(u - s H(u))||,
// with Lh = L + 1/eta, muh = 1/eta, squared, falls below the (re-evaluated)
// schedule target. Server evaluations are counted as inner gradient calls.
InnerResult inner_solve(Network& net, const Point& v, const Point& z_k,
                        const SvogsParams& params);

// ---------------------------------------------------------------------------
// Round updates
// ---------------------------------------------------------------------------

// One loop round: mixes toward the snapshot, samples the batch, assembles
// the variance-reduced optimistic estimate through the gradient cache,
// solves the prox sub-problem, and applies the Bernoulli snapshot refresh.
// Returns the inner-solver summary for the round.
InnerResult svogs_round(Network& net, SvogsState& state,
                        const SvogsParams& params, const SamplerConfig& sampler);

struct EgState {
  Point z;
  int round = 0;
  PointId z_id = 0;
};

// Classical two-call extragradient round on the mean operator; costs one
// interaction per client.
void eg_round(Network& net, EgState& state, double eta);

struct OgsState {
  Point z_k, z_km1;
  Point G_km1;  // mean-minus-server operator at z_{k-1}
  int round = 0;
  int inner_budget_hits = 0;
  PointId z_k_id = 0, z_km1_id = 0;
};

// Full-batch optimistic sliding round: v = z - eta (2 G(z_k) - G(z_{k-1}))
// with G = F - F_1, followed by the same prox sub-problem as the main loop.
InnerResult ogs_round(Network& net, OgsState& state, const SvogsParams& params);

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

// Initialization: projects z0, publishes it, performs the startup broadcast
// (n communication units, n fresh gradients), and measures
// D_F_init = max_i ||F_i(z0)||.
struct SvogsInit {
  SvogsState state;
  double D_F_init = 0.0;
};
SvogsInit svogs_init(Network& net, const Point& z0);

// Observer runs after every completed round; return false to stop early.
using SvogsObserver = std::function<bool(const SvogsState&)>;
using IterateObserver = std::function<bool(int round, const Point& z)>;

struct RunResult {
  Point output;     // u_avg in cc mode, z_K in scsc mode
  Point z_final;
  int rounds = 0;
  int inner_budget_hits = 0;
  OracleLedger ledger;
};

RunResult run_svogs(Network& net, SvogsState state, const SvogsParams& params,
                    std::uint64_t seed, int K, const SvogsObserver& observer = {});
// Convenience overload that initializes from z0 (params must be fully
// resolved, including the schedule constants).
RunResult run_svogs(Network& net, const Point& z0, const SvogsParams& params,
                    std::uint64_t seed, int K, const SvogsObserver& observer = {});

RunResult run_eg(Network& net, const Point& z0, double eta, int K,
                 const IterateObserver& observer = {});

RunResult run_ogs(Network& net, const Point& z0, const SvogsParams& params,
                  int K, const IterateObserver& observer = {});

}  // namespace svogs
