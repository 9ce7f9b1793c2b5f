#include "svogs/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "svogs/algorithms.hpp"
#include "svogs/metrics.hpp"
#include "svogs/rng.hpp"

namespace svogs {

namespace {

Point random_point(int dx, int dy, double scale, std::uint64_t seed,
                   std::uint64_t round) {
  Point z = Point::Zero(dx, dy);
  for (int i = 0; i < dx; ++i)
    z.x[i] = scale * rng::draw_normal(seed, rng::Stream::kProbe, round, i);
  for (int i = 0; i < dy; ++i)
    z.y[i] = scale * rng::draw_normal(seed, rng::Stream::kProbe, round, dx + i);
  return z;
}

}  // namespace

SimilarityCheckResult check_similarity(const SaddleProblem& problem, int pairs,
                                       double tol_factor, std::uint64_t seed) {
  detail::require(pairs > 0, "pair count must be positive");
  SimilarityCheckResult out;
  out.pairs = pairs;
  const EstimatedConstants est = estimate_constants(problem);
  out.delta = est.delta;

  const double scale = problem.constraint.diameter().value_or(4.0) / 2.0;
  double max_ratio = 0.0;
  for (int t = 0; t < pairs; ++t) {
    Point z1 = problem.constraint.project(
        random_point(problem.dx, problem.dy, scale, seed, 2 * t));
    Point z2 = problem.constraint.project(
        random_point(problem.dx, problem.dy, scale, seed, 2 * t + 1));
    Point step = z1;
    step -= z2;
    const double dist = step.norm();
    if (dist == 0.0) continue;
    Point mean_diff = problem.eval_mean(z1);
    mean_diff -= problem.eval_mean(z2);
    for (int i = 1; i <= problem.n; ++i) {
      Point diff = problem.eval_local(i, z1);
      diff -= problem.eval_local(i, z2);
      diff -= mean_diff;
      max_ratio = std::max(max_ratio, diff.norm() / dist);
    }
  }
  out.max_ratio = max_ratio;
  // Tiny absolute slack so identical-node problems (true delta = 0) are not
  // failed on accumulated rounding in the mean.
  out.pass =
      max_ratio <= out.delta * (1.0 + tol_factor) + 1e-12 * std::max(1.0, est.L);
  return out;
}

LyapunovCheckResult check_lyapunov_nonneg(int states, double tol,
                                          std::uint64_t seed) {
  detail::require(states > 0, "state count must be positive");
  LyapunovCheckResult out;
  out.states = states;

  HardInstanceSpec spec;
  spec.kind = InstanceKind::kScscComm;
  spec.n = 4;
  spec.d = 12;
  spec.delta = 1.0;
  spec.mu = 0.25;
  spec.L = 2.0;
  HardInstance inst = build_hard_instance(spec);
  const SaddleProblem& problem = inst.problem;

  ReferenceSolution ref = reference_solution(problem, {});

  LyapunovCoeffs coeffs;
  coeffs.eta = 1.0 / (32.0 * spec.delta);
  SvogsParams preset = auto_params_scsc(problem.n, spec.delta, spec.mu, spec.L);
  coeffs.gamma = preset.gamma;
  coeffs.p = preset.p;
  coeffs.mu = spec.mu;

  double min_value = std::numeric_limits<double>::infinity();
  double min_scaled = std::numeric_limits<double>::infinity();
  for (int t = 0; t < states; ++t) {
    const std::uint64_t r = 4 * static_cast<std::uint64_t>(t);
    Point z_k = random_point(problem.dx, problem.dy, 1.0, seed, r);
    Point z_km1 = random_point(problem.dx, problem.dy, 1.0, seed, r + 1);
    Point w_k = random_point(problem.dx, problem.dy, 1.0, seed, r + 2);
    Point w_km1 = random_point(problem.dx, problem.dy, 1.0, seed, r + 3);
    const double value = lyapunov(problem, coeffs, LyapunovVariant::kDriftQuarter,
                                  z_k, z_km1, w_k, w_km1, ref.z_star);
    // Scale of the positive terms, for a relative tolerance.
    Point dz = z_k;
    dz -= ref.z_star;
    Point dk = z_k;
    dk -= z_km1;
    Point dw = w_k;
    dw -= ref.z_star;
    Point dd = w_km1;
    dd -= z_k;
    const double scale = (1.0 / coeffs.eta + coeffs.mu) * dz.squared_norm() +
                         dk.squared_norm() / (64.0 * coeffs.eta) +
                         0.25 * (coeffs.gamma / coeffs.eta) * dd.squared_norm() +
                         (2.0 * coeffs.gamma + coeffs.eta * coeffs.mu) /
                             (2.0 * coeffs.p * coeffs.eta) * dw.squared_norm() +
                         1.0;
    min_value = std::min(min_value, value);
    min_scaled = std::min(min_scaled, value / scale);
  }
  out.min_value = min_value;
  out.min_scaled = min_scaled;
  out.pass = min_scaled >= -tol;
  return out;
}

UnbiasednessCheckResult check_estimator_unbiasedness(int resamples,
                                                     double z_score,
                                                     std::uint64_t seed) {
  detail::require(resamples > 1, "need at least two resamples");
  UnbiasednessCheckResult out;
  out.resamples = resamples;

  HardInstanceSpec spec;
  spec.kind = InstanceKind::kCcRounds;
  spec.n = 6;
  spec.d = 8;
  spec.delta = 1.0;
  spec.L = 1.0;
  spec.R_x = 1.0;
  spec.R_y = 1.0;
  HardInstance inst = build_hard_instance(spec);
  const SaddleProblem& problem = inst.problem;
  const int n = problem.n;
  const double alpha = 0.75;
  const int b = 3;

  // Frozen state: three arbitrary in-set points.
  Point z_k = problem.constraint.project(
      random_point(problem.dx, problem.dy, 1.0, seed, 1));
  Point z_km1 = problem.constraint.project(
      random_point(problem.dx, problem.dy, 1.0, seed, 2));
  Point w_km1 = problem.constraint.project(
      random_point(problem.dx, problem.dy, 1.0, seed, 3));

  // Per-node centered differences d_j = F_j - F_1 at the three points, and
  // the exact conditional mean G(z_k) + alpha (G(z_k) - G(z_km1)).
  auto centered = [&](const Point& at) {
    std::vector<Point> d;
    Point f1 = problem.eval_local(1, at);
    d.reserve(n);
    for (int j = 1; j <= n; ++j) {
      Point g = problem.eval_local(j, at);
      g -= f1;
      d.push_back(std::move(g));
    }
    return d;
  };
  const std::vector<Point> dz = centered(z_k);
  const std::vector<Point> dzm = centered(z_km1);
  const std::vector<Point> dw = centered(w_km1);
  auto mean_of = [&](const std::vector<Point>& d) {
    Point m = Point::Zero(problem.dx, problem.dy);
    for (const Point& g : d) m += g;
    m *= 1.0 / n;
    return m;
  };
  const Point G_z = mean_of(dz);
  const Point G_zm = mean_of(dzm);
  const Point G_w = mean_of(dw);

  Point analytic = G_z;
  Point corr = G_z;
  corr -= G_zm;
  corr *= alpha;
  analytic += corr;

  const int dim = problem.dx + problem.dy;
  Vector mean = Vector::Zero(dim);
  Vector m2 = Vector::Zero(dim);  // running sum of squared deviations
  SamplerConfig cfg;
  cfg.n = n;
  cfg.b = b;
  cfg.p = 0.5;
  cfg.seed = seed;
  for (int t = 0; t < resamples; ++t) {
    const std::vector<int> batch =
        sample_batch(cfg, static_cast<std::uint64_t>(t));
    Point delta_est = G_w;
    Point acc = Point::Zero(problem.dx, problem.dy);
    for (int j : batch) {
      Point term = dz[j - 1];
      term *= (1.0 + alpha);
      term -= dw[j - 1];
      Point lag = dzm[j - 1];
      lag *= alpha;
      term -= lag;
      acc += term;
    }
    acc *= 1.0 / static_cast<double>(batch.size());
    delta_est += acc;

    const Vector sample = delta_est.stacked();
    const Vector d1 = sample - mean;
    mean += d1 / static_cast<double>(t + 1);
    m2 += d1.cwiseProduct(sample - mean);  // Welford update
  }

  const Vector target = analytic.stacked();
  double worst = 0.0;
  bool pass = true;
  for (int i = 0; i < dim; ++i) {
    const double var = m2[i] / static_cast<double>(resamples - 1);
    const double se = std::sqrt(std::max(var, 0.0) / resamples);
    const double dev = std::abs(mean[i] - target[i]);
    if (se > 0.0) {
      worst = std::max(worst, dev / se);
      if (dev > z_score * se) pass = false;
    } else if (dev > 1e-12 * std::max(1.0, std::abs(target[i]))) {
      pass = false;
      worst = std::max(worst, 1e30);
    }
  }
  out.max_dev_over_se = worst;
  out.pass = pass;
  return out;
}

AccountingCheckResult check_accounting(int n, int b, double p, int rounds,
                                       double z_score, std::uint64_t seed) {
  detail::require(rounds > 0, "round count must be positive");
  AccountingCheckResult out;
  out.rounds = rounds;
  SamplerConfig cfg;
  cfg.n = n;
  cfg.b = b;
  cfg.p = p;
  cfg.seed = seed;
  OracleLedger ledger;
  for (int r = 0; r < rounds; ++r) {
    const std::vector<int> batch =
        sample_batch(cfg, static_cast<std::uint64_t>(r));
    const bool snap = snapshot_draw(cfg, static_cast<std::uint64_t>(r));
    account_round(ledger, batch, snap, n);
  }
  out.mean_increment =
      static_cast<double>(ledger.comm_units) / static_cast<double>(rounds);
  out.expected = b + p * n;
  out.sigma = n * std::sqrt(p * (1.0 - p)) / std::sqrt(double(rounds));
  const double dev = std::abs(out.mean_increment - out.expected);
  out.pass = out.sigma > 0.0 ? dev <= z_score * out.sigma : dev <= 1e-12;
  return out;
}

ZeroChainCheckResult check_zero_chain(InstanceKind kind, int d, int n,
                                      int rounds, std::uint64_t seed) {
  ZeroChainCheckResult out;
  out.rounds = rounds;

  HardInstanceSpec spec;
  spec.kind = kind;
  spec.n = n;
  spec.d = d;
  spec.delta = 1.0;
  switch (kind) {
    case InstanceKind::kCcRounds:
      spec.L = 1.0;
      break;
    case InstanceKind::kCcComm:
      spec.L = std::max(1.0, std::sqrt(double(n)) / 4.0);
      break;
    case InstanceKind::kCcGrad:
      spec.delta = 0.0;
      spec.L = 1.0;
      break;
    case InstanceKind::kScscComm:
    case InstanceKind::kScscGrad:
      spec.mu = 0.25;
      spec.L = 2.0;
      break;
  }
  HardInstance inst = build_hard_instance(spec);
  const SaddleProblem& problem = inst.problem;

  Network net(problem, /*use_cache=*/true, /*record_events=*/true);
  Point z0 = problem.constraint.project(Point::Zero(problem.dx, problem.dy));
  SvogsInit init = svogs_init(net, z0);

  const double delta_eff = std::max(spec.delta, 1e-6);
  SvogsParams params;
  const double diam = problem.constraint.diameter().value_or(4.0);
  if (spec.mu > 0.0) {
    params = auto_params_scsc(problem.n, delta_eff, spec.mu, spec.L);
    params.D_F_init = init.D_F_init;
    finalize_eps_constants(params, diam);
  } else {
    params = auto_params_cc(problem.n, delta_eff, spec.L, diam, 1e-2,
                            std::max(init.D_F_init, 1e-12));
  }

  std::vector<TracedIterate> iterates;
  iterates.push_back({0, init.state.z_k});
  RunResult run = run_svogs(net, std::move(init.state), params, seed, rounds,
                            [&](const SvogsState& st) {
                              iterates.push_back({st.round, st.z_k});
                              return true;
                            });
  (void)run;

  ZeroChainReport report = verify_zero_chain(inst, net.events(), iterates);
  out.pass = report.pass;
  out.message = report.message;
  if (!report.frontier_bound.empty())
    out.final_bound = static_cast<int>(report.frontier_bound.back());
  if (!report.observed_support.empty())
    out.final_observed = static_cast<int>(report.observed_support.back());
  return out;
}

}  // namespace svogs
