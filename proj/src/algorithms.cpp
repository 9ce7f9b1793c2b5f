#include "svogs/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace svogs {

std::string to_string(EpsMode mode) {
  return mode == EpsMode::kCc ? "cc" : "scsc";
}

void SvogsParams::validate(int n) const {
  detail::require(std::isfinite(eta) && eta > 0.0, "eta must be positive");
  detail::require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  detail::require(p > 0.0 && p <= 1.0, "p must lie in (0, 1]");
  detail::require(b >= 1 && b <= n, "batch size must lie in [1, n]");
  detail::require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  detail::require(K >= 0, "round budget must be nonnegative");
  detail::require(!force_full_batch || b == n,
                  "forced full batch requires b = n");
  if (eps_mode == EpsMode::kCc) {
    detail::require(zeta > 0.0 && c_hat > 0.0,
                    "cc schedule constants are unresolved; call "
                    "finalize_eps_constants first");
  } else {
    detail::require(c > 0.0,
                    "scsc schedule constant is unresolved; call "
                    "finalize_eps_constants first");
  }
  detail::require(L > 0.0, "smoothness constant L must be set");
  detail::require(inner.max_iters > 0, "inner budget must be positive");
  detail::require(inner.eps_floor > 0.0, "inner floor must be positive");
}

std::string SvogsParams::fingerprint() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "eta=" << eta << ";gamma=" << gamma << ";p=" << p << ";b=" << b
     << ";alpha=" << alpha << ";K=" << K << ";mode=" << to_string(eps_mode)
     << ";zeta=" << zeta << ";c_hat=" << c_hat << ";c=" << c
     << ";rho=" << rho << ";L=" << L << ";delta=" << delta << ";mu=" << mu
     << ";D_F_init=" << D_F_init;
  return os.str();
}

double initial_potential_bound(const SvogsParams& params, double dist_bound) {
  detail::require(dist_bound > 0.0, "distance bound must be positive");
  const double d2 = dist_bound * dist_bound;
  const double eta = params.eta, mu = params.mu;
  return (1.0 / eta + mu) * d2 + 2.0 * params.delta * d2 +
         (2.0 * params.gamma + eta * mu) / (2.0 * params.p * eta) * d2;
}

void finalize_eps_constants(SvogsParams& params, double dist_bound,
                            double eps_target) {
  detail::require(dist_bound > 0.0, "distance bound must be positive");
  const double eta = params.eta, delta = params.delta;
  const double phi0 = initial_potential_bound(params, dist_bound);
  if (params.eps_mode == EpsMode::kCc) {
    detail::require(eps_target > 0.0,
                    "cc schedule needs the target accuracy");
    params.c_hat = 100.0 + 2048.0 * eta * eta * delta * delta +
                   64.0 * std::sqrt(2.0 * eta * phi0);
    const double reach =
        9.0 * eta * params.L * dist_bound + 3.0 * eta * params.D_F_init +
        dist_bound;
    params.zeta = std::min(
        eta * eta * eps_target * eps_target / (16.0 * reach * reach),
        eta * eps_target / (4.0 * (12.0 * eta * eta * delta * delta + 1.0)));
  } else {
    const double mu = params.mu;
    params.c = 100.0 + 64.0 * eta * delta * delta / mu +
               2048.0 * eta * eta * delta * delta + 96.0 * eta * mu +
               64.0 * std::sqrt(2.0 * eta * phi0);
  }
  params.inner.eps_floor = 1e-16 * std::max(1.0, dist_bound * dist_bound);
}

SvogsParams auto_params_cc(int n, double delta, double L, double D, double eps,
                           double D_F_init) {
  detail::require(n >= 1, "node count must be positive");
  detail::require(delta > 0.0 && L > 0.0 && D > 0.0 && eps > 0.0,
                  "delta, L, D, eps must be positive");
  detail::require(D_F_init >= 0.0, "initial gradient bound must be >= 0");
  SvogsParams params;
  const double sq = std::sqrt(static_cast<double>(n));
  params.b = static_cast<int>(std::ceil(sq));
  params.gamma = 1.0 / (sq + 8.0);
  params.p = params.gamma;
  params.eta = std::min(std::sqrt(params.gamma * params.b) / (4.0 * delta),
                        1.0 / (32.0 * delta));
  params.alpha = 1.0;
  params.eps_mode = EpsMode::kCc;
  params.L = L;
  params.delta = delta;
  params.mu = 0.0;
  params.D_F_init = D_F_init;
  const double k_real = std::ceil(20.0 * D * D / (eps * params.eta));
  detail::require(k_real < static_cast<double>(std::numeric_limits<int>::max()),
                  "requested accuracy needs more rounds than representable");
  params.K = static_cast<int>(k_real);
  finalize_eps_constants(params, D, eps);
  return params;
}

SvogsParams auto_params_scsc(int n, double delta, double mu, double L,
                             double dist_bound) {
  detail::require(n >= 1, "node count must be positive");
  detail::require(mu > 0.0 && mu <= delta && delta <= L,
                  "strongly monotone preset requires 0 < mu <= delta <= L");
  SvogsParams params;
  const double m = std::min(std::sqrt(static_cast<double>(n)), delta / mu);
  params.b = static_cast<int>(std::ceil(m));
  params.gamma = 1.0 / (m + 8.0);
  params.p = params.gamma;
  params.eps_mode = EpsMode::kScsc;
  params.L = L;
  params.delta = delta;
  params.mu = mu;

  // eta and alpha define each other; iterate from the guaranteed lower
  // bound alpha = 7/8 until both stabilize.
  double alpha = 7.0 / 8.0;
  double eta = 0.0;
  for (int it = 0; it < 100; ++it) {
    const double eta_next =
        std::min(std::sqrt(alpha * params.gamma * params.b) / (4.0 * delta),
                 1.0 / (32.0 * delta));
    const double a1 = 1.0 - eta_next * mu / 6.0;
    const double a2 = 1.0 - params.p * eta_next * mu /
                                 (2.0 * params.gamma + eta_next * mu);
    const double alpha_next = std::max(a1, a2);
    const bool done = std::abs(alpha_next - alpha) < 1e-12 &&
                      std::abs(eta_next - eta) < 1e-12;
    alpha = alpha_next;
    eta = eta_next;
    if (done) break;
  }
  detail::require(alpha >= 7.0 / 8.0 - 1e-12,
                  "optimism weight fell below its guaranteed bound");
  params.alpha = std::min(alpha, 1.0);
  params.eta = eta;
  params.rho = alpha;  // the contraction factor shares the max expression
  if (dist_bound > 0.0) finalize_eps_constants(params, dist_bound);
  return params;
}

double eps_schedule(const SvogsParams& params, const Point& u,
                    const Point& z_k) {
  Point diff = u;
  diff -= z_k;
  const double d = diff.norm();
  const double md = std::min(d, d * d);
  double eps;
  if (params.eps_mode == EpsMode::kCc) {
    eps = std::min(params.zeta, md / params.c_hat);
  } else {
    eps = md / params.c;
  }
  return std::max(eps, params.inner.eps_floor);
}

InnerResult inner_solve(Network& net, const Point& v, const Point& z_k,
                        const SvogsParams& params) {
  const SaddleProblem& problem = net.problem();
  const double eta = params.eta;
  const double Lh = params.L + 1.0 / eta;
  const double muh = 1.0 / eta;
  const double s = params.inner.step > 0.0
                       ? params.inner.step
                       : 1.0 / (std::sqrt(2.0) * Lh);
  detail::require(s > 0.0 && s <= 1.0 / Lh * (1.0 + 1e-12),
                  "inner step must lie in (0, 1/(L + 1/eta)]");
  const double cert = (1.0 + s * Lh) / (s * muh);

  InnerResult res;
  Point u = problem.constraint.project(v);
  Point best = u;
  double best_sq = std::numeric_limits<double>::infinity();
  double best_eps = 0.0;
  for (int t = 0; t <= params.inner.max_iters; ++t) {
    Point h = net.eval_inner(u);
    Point pull = u;
    pull -= v;
    pull *= 1.0 / eta;
    h += pull;

    Point half = u;
    half -= s * h;
    half = problem.constraint.project(half);
    Point resid = u;
    resid -= half;
    const double bound = cert * resid.norm();
    const double bound_sq = bound * bound;
    const double eps_cur = eps_schedule(params, u, z_k);
    if (bound_sq <= eps_cur) {
      res.u = std::move(u);
      res.certified_sq = bound_sq;
      res.eps_final = eps_cur;
      res.iters = t;
      res.converged = true;
      return res;
    }
    if (bound_sq < best_sq) {
      best = u;
      best_sq = bound_sq;
      best_eps = eps_cur;
    }
    if (t == params.inner.max_iters) break;

    Point hh = net.eval_inner(half);
    Point pull_h = half;
    pull_h -= v;
    pull_h *= 1.0 / eta;
    hh += pull_h;
    Point next = u;
    next -= s * hh;
    u = problem.constraint.project(next);
  }
  res.u = std::move(best);
  res.certified_sq = best_sq;
  res.eps_final = best_eps;
  res.iters = params.inner.max_iters;
  res.converged = false;
  return res;
}

namespace {

std::vector<int> all_nodes(int n) {
  std::vector<int> nodes(n);
  std::iota(nodes.begin(), nodes.end(), 1);
  return nodes;
}

}  // namespace

InnerResult svogs_round(Network& net, SvogsState& state,
                        const SvogsParams& params,
                        const SamplerConfig& sampler) {
  net.begin_round(state.round + 1);

  Point zbar = state.z_k;
  if (params.gamma != 0.0) {
    zbar *= 1.0 - params.gamma;
    Point mix = state.w_k;
    mix *= params.gamma;
    zbar += mix;
  }

  const std::vector<int> batch =
      sample_batch(sampler, static_cast<std::uint64_t>(state.round));

  // Estimate assembled through the gradient cache. The anchor terms at the
  // snapshot are always cache hits (the snapshot broadcast stored them);
  // fresh cost per round is the server plus the sampled clients.
  Point delta_est = state.F_w_km1;
  delta_est -= net.fetch(1, state.w_km1_id);

  // Copies, not references: with caching disabled fetch() reuses one
  // scratch slot, so references would be clobbered by the batch fetches.
  const Point f1_z = net.fetch(1, state.z_k_id);
  const Point f1_zm = net.fetch(1, state.z_km1_id);
  const Point f1_w = net.fetch(1, state.w_km1_id);
  Point acc = Point::Zero(net.problem().dx, net.problem().dy);
  for (int j : batch) {
    Point term = net.fetch(j, state.z_k_id);
    term -= f1_z;
    term *= 1.0 + params.alpha;

    Point anchor = net.fetch(j, state.w_km1_id);
    anchor -= f1_w;
    term -= anchor;

    Point optimistic = net.fetch(j, state.z_km1_id);
    optimistic -= f1_zm;
    optimistic *= params.alpha;
    term -= optimistic;

    acc += term;
  }
  acc *= 1.0 / static_cast<double>(batch.size());
  delta_est += acc;

  Point v = zbar;
  Point step = delta_est;
  step *= params.eta;
  v -= step;

  InnerResult inner = inner_solve(net, v, state.z_k, params);
  if (!inner.converged) ++state.inner_budget_hits;
  const Point& z_next = inner.u;
  const PointId next_id = net.publish(z_next);

  state.u_sum += z_next;
  state.u_avg = state.u_sum;
  state.u_avg *= 1.0 / static_cast<double>(state.round + 1);

  const bool snap =
      snapshot_draw(sampler, static_cast<std::uint64_t>(state.round));
  net.account_round(batch, snap);

  state.w_km1 = state.w_k;
  state.w_km1_id = state.w_k_id;
  state.F_w_km1 = state.F_w_k;
  if (snap) {
    state.w_k = z_next;
    state.w_k_id = next_id;
    state.F_w_k = net.fetch_mean(next_id);
  }

  state.z_km1 = state.z_k;
  state.z_km1_id = state.z_k_id;
  state.z_k = z_next;
  state.z_k_id = next_id;
  ++state.round;
  return inner;
}

void eg_round(Network& net, EgState& state, double eta) {
  detail::require(eta > 0.0, "extragradient step must be positive");
  const SaddleProblem& problem = net.problem();
  net.begin_round(state.round + 1);

  const Point g = net.fetch_mean(state.z_id);
  Point half = state.z;
  half -= eta * g;
  half = problem.constraint.project(half);
  const PointId half_id = net.publish(half);

  const Point gh = net.fetch_mean(half_id);
  Point next = state.z;
  next -= eta * gh;
  state.z = problem.constraint.project(next);
  state.z_id = net.publish(state.z);

  net.account_round(all_nodes(problem.n), false);
  ++state.round;
}

InnerResult ogs_round(Network& net, OgsState& state, const SvogsParams& params) {
  const SaddleProblem& problem = net.problem();
  net.begin_round(state.round + 1);

  Point g_cur = net.fetch_mean(state.z_k_id);
  g_cur -= net.fetch(1, state.z_k_id);

  Point v = state.z_k;
  Point drive = g_cur;
  drive *= 2.0;
  drive -= state.G_km1;
  drive *= params.eta;
  v -= drive;

  InnerResult inner = inner_solve(net, v, state.z_k, params);
  if (!inner.converged) ++state.inner_budget_hits;

  net.account_round(all_nodes(problem.n), false);

  state.z_km1 = state.z_k;
  state.z_km1_id = state.z_k_id;
  state.G_km1 = std::move(g_cur);
  state.z_k = inner.u;
  state.z_k_id = net.publish(state.z_k);
  ++state.round;
  return inner;
}

SvogsInit svogs_init(Network& net, const Point& z0) {
  const SaddleProblem& problem = net.problem();
  detail::require(z0.x.size() == problem.dx && z0.y.size() == problem.dy,
                  "initial point has the wrong shape");
  net.begin_round(0);
  SvogsInit init;
  SvogsState& st = init.state;
  st.z_k = problem.constraint.project(z0);
  st.z_k_id = net.publish(st.z_k);
  st.z_km1 = st.z_k;
  st.z_km1_id = st.z_k_id;
  st.w_k = st.z_k;
  st.w_k_id = st.z_k_id;
  st.w_km1 = st.z_k;
  st.w_km1_id = st.z_k_id;
  st.F_w_k = net.fetch_mean(st.z_k_id);
  st.F_w_km1 = st.F_w_k;
  st.u_sum = Point::Zero(problem.dx, problem.dy);
  st.u_avg = st.z_k;
  net.account_init();
  for (int i = 1; i <= problem.n; ++i) {
    const double norm = net.fetch(i, st.z_k_id).norm();  // cache hits
    init.D_F_init = std::max(init.D_F_init, norm);
  }
  return init;
}

RunResult run_svogs(Network& net, SvogsState state, const SvogsParams& params,
                    std::uint64_t seed, int K, const SvogsObserver& observer) {
  const int n = net.problem().n;
  params.validate(n);
  detail::require(K >= 0, "round count must be nonnegative");
  SamplerConfig sampler;
  sampler.n = n;
  sampler.b = params.b;
  sampler.p = params.p;
  sampler.seed = seed;
  sampler.force_full_batch = params.force_full_batch;

  for (int k = 0; k < K; ++k) {
    svogs_round(net, state, params, sampler);
    if (observer && !observer(state)) break;
  }

  RunResult out;
  out.z_final = state.z_k;
  out.output = (params.eps_mode == EpsMode::kCc && state.round > 0)
                   ? state.u_avg
                   : state.z_k;
  out.rounds = state.round;
  out.inner_budget_hits = state.inner_budget_hits;
  out.ledger = net.ledger_summary();
  return out;
}

RunResult run_svogs(Network& net, const Point& z0, const SvogsParams& params,
                    std::uint64_t seed, int K, const SvogsObserver& observer) {
  SvogsInit init = svogs_init(net, z0);
  SvogsParams resolved = params;
  if (resolved.D_F_init == 0.0) resolved.D_F_init = init.D_F_init;
  return run_svogs(net, std::move(init.state), resolved, seed, K, observer);
}

RunResult run_eg(Network& net, const Point& z0, double eta, int K,
                 const IterateObserver& observer) {
  const SaddleProblem& problem = net.problem();
  detail::require(eta > 0.0, "extragradient step must be positive");
  detail::require(K >= 0, "round count must be nonnegative");
  net.begin_round(0);
  EgState state;
  state.z = problem.constraint.project(z0);
  state.z_id = net.publish(state.z);
  net.fetch_mean(state.z_id);
  net.account_init();

  for (int k = 0; k < K; ++k) {
    eg_round(net, state, eta);
    if (observer && !observer(state.round, state.z)) break;
  }
  RunResult out;
  out.z_final = state.z;
  out.output = state.z;
  out.rounds = state.round;
  out.ledger = net.ledger_summary();
  return out;
}

RunResult run_ogs(Network& net, const Point& z0, const SvogsParams& params,
                  int K, const IterateObserver& observer) {
  const SaddleProblem& problem = net.problem();
  params.validate(problem.n);
  detail::require(K >= 0, "round count must be nonnegative");
  net.begin_round(0);
  OgsState state;
  state.z_k = problem.constraint.project(z0);
  state.z_k_id = net.publish(state.z_k);
  state.z_km1 = state.z_k;
  state.z_km1_id = state.z_k_id;
  Point g0 = net.fetch_mean(state.z_k_id);
  g0 -= net.fetch(1, state.z_k_id);
  state.G_km1 = std::move(g0);
  net.account_init();

  int hits = 0;
  for (int k = 0; k < K; ++k) {
    ogs_round(net, state, params);
    if (observer && !observer(state.round, state.z_k)) break;
  }
  hits = state.inner_budget_hits;

  RunResult out;
  out.z_final = state.z_k;
  out.output = state.z_k;
  out.rounds = state.round;
  out.inner_budget_hits = hits;
  out.ledger = net.ledger_summary();
  return out;
}

}  // namespace svogs
