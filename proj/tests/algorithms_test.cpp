#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "svogs/algorithms.hpp"
#include "svogs/hard_instances.hpp"
#include "svogs/metrics.hpp"
#include "svogs/netsim.hpp"
#include "svogs/problem.hpp"

using namespace svogs;

namespace {

Vector probe_vector(Index d, double phase) {
  Vector v(d);
  for (Index i = 0; i < d; ++i)
    v[i] = std::sin(2.3 * static_cast<double>(i) + phase) +
           0.25 * std::cos(0.7 * static_cast<double>(i) - phase);
  return v;
}

Point probe_point(Index d, double phase) {
  return Point(probe_vector(d, phase), probe_vector(d, phase + 1.9));
}

bool same_bits(const Vector& a, const Vector& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

bool same_bits(const Point& a, const Point& b) {
  return same_bits(a.x, b.x) && same_bits(a.y, b.y);
}

HardInstance small_scsc(int n = 4) {
  HardInstanceSpec s;
  s.kind = InstanceKind::kScscComm;
  s.n = n; s.d = 5; s.mu = 0.25; s.delta = 0.5; s.L = 2.0;
  return build_hard_instance(s);
}

// Dense affine monotone operator F(z) = B z + q with sym(B) >= mu I,
// exposed as a single-node problem for inner-solver oracles.
struct AffineCase {
  SaddleProblem problem;
  Matrix B;
  Vector q;
  double L = 0.0;
};

AffineCase make_affine_case(Index half, double mu, double phase) {
  const Index dim = 2 * half;
  Matrix G(dim, dim), W(dim, dim);
  for (Index r = 0; r < dim; ++r)
    for (Index c = 0; c < dim; ++c) {
      G(r, c) = std::sin(1.3 * double(r) + 0.7 * double(c) + phase);
      W(r, c) = std::cos(0.9 * double(r) - 1.1 * double(c) + 2.0 * phase);
    }
  AffineCase out;
  out.B = mu * Matrix::Identity(dim, dim) +
          G.transpose() * G / double(dim) + 0.5 * (W - W.transpose());
  out.q = probe_vector(dim, phase + 0.4);
  out.L = Eigen::JacobiSVD<Matrix>(out.B).singularValues()(0);

  QuadraticForm qf;
  const Matrix B = out.B;
  qf.apply.push_back([B](const Vector& v) { return Vector(B * v); });
  qf.apply_t.push_back(
      [B](const Vector& v) { return Vector(B.transpose() * v); });
  qf.offset.push_back(out.q);
  ProblemConstants declared;
  declared.L = out.L;
  declared.delta = 0.0;
  declared.mu = mu;
  out.problem = make_quadratic_problem(std::move(qf), half,
                                       ConstraintSet::Free(), declared);
  return out;
}

}  // namespace

TEST_SUITE("algorithms") {

TEST_CASE("convex-concave preset pins the published tuning") {
  const double D = 2.0, eps = 0.05, DF = 1.0;
  const SvogsParams p = auto_params_cc(16, 1.0, 4.0, D, eps, DF);
  CHECK(p.b == 4);
  CHECK(p.gamma == 1.0 / 12.0);
  CHECK(p.p == 1.0 / 12.0);
  CHECK(p.eta == 1.0 / 32.0);  // 1/(32 delta) beats sqrt(gamma b)/(4 delta)
  CHECK(p.alpha == 1.0);
  CHECK(p.K == 51200);  // ceil(20 D^2 / (eps eta))
  CHECK(p.eps_mode == EpsMode::kCc);
  CHECK(p.zeta > 0.0);
  CHECK(p.c_hat > 100.0);
  // Schedule divisor recomputed from the initial-potential bound.
  const double phi0 = initial_potential_bound(p, D);
  CHECK(p.c_hat ==
        doctest::Approx(100.0 + 2048.0 * p.eta * p.eta +
                        64.0 * std::sqrt(2.0 * p.eta * phi0))
            .epsilon(1e-12));

  const SvogsParams single = auto_params_cc(1, 1.0, 4.0, D, eps, DF);
  CHECK(single.b == 1);
  CHECK(single.gamma == 1.0 / 9.0);
  CHECK(single.p == 1.0 / 9.0);

  CHECK_THROWS_AS(auto_params_cc(0, 1.0, 4.0, D, eps, DF), InvalidArgument);
  CHECK_THROWS_AS(auto_params_cc(16, 0.0, 4.0, D, eps, DF), InvalidArgument);
  CHECK_THROWS_AS(auto_params_cc(16, 1.0, 4.0, D, 0.0, DF), InvalidArgument);
}

TEST_CASE("strongly monotone preset pins the published tuning") {
  const SvogsParams p = auto_params_scsc(16, 1.0, 0.5, 2.0, 3.0);
  CHECK(p.b == 2);  // min(sqrt(16), delta/mu) = 2
  CHECK(p.gamma == 1.0 / 10.0);
  CHECK(p.p == 1.0 / 10.0);
  CHECK(p.eta == 1.0 / 32.0);
  CHECK(p.eps_mode == EpsMode::kScsc);
  CHECK(p.c > 0.0);
  CHECK(p.rho == p.alpha);
  CHECK(p.alpha > 0.9);
  CHECK(p.alpha < 1.0);
  // The optimism weight is a fixed point of its own defining maximum.
  const double target =
      std::max(1.0 - p.eta * p.mu / 6.0,
               1.0 - p.p * p.eta * p.mu / (2.0 * p.gamma + p.eta * p.mu));
  CHECK(p.alpha == doctest::Approx(target).epsilon(1e-9));

  // Similarity equal to the modulus caps the batch at one regardless of n.
  const SvogsParams tiny = auto_params_scsc(100, 0.4, 0.4, 2.0, 3.0);
  CHECK(tiny.b == 1);
  CHECK(tiny.gamma == 1.0 / 9.0);

  CHECK_THROWS_AS(auto_params_scsc(4, 1.0, 0.0, 2.0, 3.0), InvalidArgument);
  CHECK_THROWS_AS(auto_params_scsc(4, 0.0, 0.5, 2.0, 3.0), InvalidArgument);
  // The modulus may not exceed the similarity bound.
  CHECK_THROWS_AS(auto_params_scsc(4, 0.1, 0.4, 2.0, 3.0), InvalidArgument);
}

TEST_CASE("parameter validation rejects out-of-range settings") {
  SvogsParams base = auto_params_scsc(4, 0.5, 0.25, 2.0, 3.0);
  base.validate(4);  // sanity: the preset itself is valid

  auto reject = [&](auto&& mutate) {
    SvogsParams p = base;
    mutate(p);
    CHECK_THROWS_AS(p.validate(4), InvalidArgument);
  };
  reject([](SvogsParams& p) { p.b = 0; });
  reject([](SvogsParams& p) { p.b = 5; });
  reject([](SvogsParams& p) { p.gamma = 1.0; });
  reject([](SvogsParams& p) { p.gamma = -0.1; });
  reject([](SvogsParams& p) { p.p = 0.0; });
  reject([](SvogsParams& p) { p.p = 1.5; });
  reject([](SvogsParams& p) { p.alpha = 0.0; });
  reject([](SvogsParams& p) { p.alpha = 1.5; });
  reject([](SvogsParams& p) { p.eta = 0.0; });
  reject([](SvogsParams& p) { p.force_full_batch = true; });  // b != n
}

TEST_CASE("inner solve certificate bounds the true error") {
  for (int t = 0; t < 100; ++t) {
    CAPTURE(t);
    const double phase = 0.17 * t;
    const AffineCase c = make_affine_case(3, 0.3, phase);
    Network net(c.problem);

    SvogsParams params;
    params.eta = 0.2;
    params.gamma = 0.0;
    params.p = 1.0;
    params.b = 1;
    params.alpha = 1.0;
    params.eps_mode = EpsMode::kScsc;
    params.c = 1e4;
    params.L = c.L;
    params.mu = 0.3;

    const Point z_k = probe_point(3, phase + 1.0);
    const Point v = probe_point(3, phase + 2.3);

    const InnerResult res = inner_solve(net, v, z_k, params);
    CHECK(res.converged);
    CHECK(res.iters <= params.inner.max_iters);
    CHECK(res.certified_sq <= res.eps_final + 1e-18);

    // Exact sub-problem solution: (B + I/eta) u = v/eta - q.
    const Index dim = 2 * 3;
    const Matrix H = c.B + Matrix::Identity(dim, dim) / params.eta;
    Vector stacked(dim);
    stacked.head(3) = v.x;
    stacked.tail(3) = v.y;
    const Vector u_exact = H.fullPivLu().solve(stacked / params.eta - c.q);
    Vector u_got(dim);
    u_got.head(3) = res.u.x;
    u_got.tail(3) = res.u.y;
    const double err_sq = (u_got - u_exact).squaredNorm();
    CHECK(err_sq <= res.certified_sq * (1.0 + 1e-9) + 1e-18);

    // Residual checks cost one evaluation, full steps two.
    CHECK(net.ledger().inner_grad_calls >=
          2 * static_cast<std::uint64_t>(res.iters));
    CHECK(net.ledger().consistent());
  }
}

TEST_CASE("single-node rounds reduce to the exact prox step") {
  // With one node the variance-reduced estimate cancels term by term, so the
  // drive must be the mixed iterate itself, bitwise.
  HardInstanceSpec s;
  s.kind = InstanceKind::kScscGrad;
  s.n = 1; s.d = 5; s.mu = 0.4; s.delta = 0.4; s.L = 2.0;
  const HardInstance inst = build_hard_instance(s);

  SvogsParams params = auto_params_scsc(1, s.delta, s.mu, s.L, 5.0);
  Network net(inst.problem);
  SvogsInit init = svogs_init(net, probe_point(5, 0.8));
  params.D_F_init = init.D_F_init;
  SvogsState state = init.state;

  SamplerConfig sampler;
  sampler.n = 1;
  sampler.b = params.b;
  sampler.p = params.p;
  sampler.seed = 3;

  for (int k = 0; k < 4; ++k) {
    CAPTURE(k);
    const SvogsState pre = state;
    svogs_round(net, state, params, sampler);

    Point zbar = pre.z_k;
    zbar *= 1.0 - params.gamma;
    Point mix = pre.w_k;
    mix *= params.gamma;
    zbar += mix;

    Network side(inst.problem);
    const InnerResult direct = inner_solve(side, zbar, pre.z_k, params);
    CHECK(same_bits(state.z_k, direct.u));

    // Snapshot bookkeeping replays from the coin stream.
    const bool snap = snapshot_draw(sampler, static_cast<std::uint64_t>(k));
    CHECK(same_bits(state.w_k, snap ? state.z_k : pre.w_k));
  }
}

TEST_CASE("forced full batch with eager snapshots matches sliding") {
  const HardInstance inst = small_scsc();
  const int n = inst.params.n;
  SvogsParams params = auto_params_scsc(n, 0.5, 0.25, 2.0, 10.0);
  params.force_full_batch = true;
  params.b = n;
  params.gamma = 0.0;
  params.p = 1.0;
  params.alpha = 1.0;
  params.c = 1e16;  // near-exact inner solves so the paths track tightly
  params.validate(n);

  const Point z0 = probe_point(5, 1.3);
  const int K = 5;

  Network net_a(inst.problem);
  std::vector<Point> svogs_iters;
  run_svogs(net_a, z0, params, 7, K, [&](const SvogsState& st) {
    svogs_iters.push_back(st.z_k);
    return true;
  });

  Network net_b(inst.problem);
  std::vector<Point> ogs_iters;
  run_ogs(net_b, z0, params, K, [&](int, const Point& z) {
    ogs_iters.push_back(z);
    return true;
  });

  REQUIRE(svogs_iters.size() == static_cast<std::size_t>(K));
  REQUIRE(ogs_iters.size() == static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    CAPTURE(k);
    CHECK((svogs_iters[k].x - ogs_iters[k].x).norm() <= 1e-6);
    CHECK((svogs_iters[k].y - ogs_iters[k].y).norm() <= 1e-6);
  }
}

TEST_CASE("round accounting follows the batch and the coin stream") {
  const HardInstance inst = small_scsc();
  const int n = inst.params.n;
  SvogsParams params = auto_params_scsc(n, 0.5, 0.25, 2.0, 10.0);
  const std::uint64_t seed = 11;
  const int K = 12;

  Network net(inst.problem);
  const RunResult out = run_svogs(net, probe_point(5, 0.2), params, seed, K);
  CHECK(out.rounds == K);

  SamplerConfig sampler;
  sampler.n = n;
  sampler.b = params.b;
  sampler.p = params.p;
  sampler.seed = seed;
  std::uint64_t comm = n;  // startup broadcast
  std::uint64_t snaps = 0;
  for (int k = 0; k < K; ++k) {
    comm += static_cast<std::uint64_t>(params.b);
    if (snapshot_draw(sampler, static_cast<std::uint64_t>(k))) {
      comm += static_cast<std::uint64_t>(n);
      ++snaps;
    }
  }
  CHECK(out.ledger.comm_units == comm);
  CHECK(out.ledger.snapshot_events == snaps);
  CHECK(out.ledger.rounds == static_cast<std::uint64_t>(K));
  CHECK(out.ledger.consistent());
  CHECK(out.ledger.inner_grad_calls > 0);
}

TEST_CASE("extragradient run converges and pays full rounds") {
  const HardInstance inst = small_scsc();
  const int n = inst.params.n;
  const ReferenceSolution ref = reference_solution(inst.problem);

  const Point z0 = probe_point(5, 2.9);
  const double eta = 1.0 / (2.0 * inst.params.L);
  const int K = 200;
  Network net(inst.problem);
  const RunResult out = run_eg(net, z0, eta, K);

  const double d0 = std::sqrt((z0.x - ref.z_star.x).squaredNorm() +
                              (z0.y - ref.z_star.y).squaredNorm());
  const double dK = std::sqrt((out.z_final.x - ref.z_star.x).squaredNorm() +
                              (out.z_final.y - ref.z_star.y).squaredNorm());
  CHECK(dK <= 0.01 * d0);

  // Every round touches every client once; the first round reuses the
  // startup broadcast for its leading evaluation.
  CHECK(out.ledger.comm_units == static_cast<std::uint64_t>(n * (K + 1)));
  CHECK(out.ledger.grad_calls_total == static_cast<std::uint64_t>(2 * n * K));
  CHECK(out.ledger.inner_grad_calls == 0);
  CHECK(out.ledger.rounds == static_cast<std::uint64_t>(K));

  CHECK_THROWS_AS(run_eg(net, z0, 0.0, 1), InvalidArgument);
}

TEST_CASE("reported output follows the mode") {
  HardInstanceSpec s;
  s.kind = InstanceKind::kCcRounds;
  s.n = 3; s.d = 6; s.delta = 1.0; s.L = 1.0; s.R_x = 1.0; s.R_y = 1.0;
  const HardInstance inst = build_hard_instance(s);

  const double D = 2.0 * std::sqrt(2.0);  // diameter of the product of balls
  SvogsParams params = auto_params_cc(3, 1.0, 1.0, D, 0.05, 1.0);
  const int K = 6;
  Network net(inst.problem);
  std::vector<Point> outputs;
  const RunResult out = run_svogs(net, Point(Vector::Zero(6), Vector::Zero(6)),
                                  params, 5, K, [&](const SvogsState& st) {
                                    outputs.push_back(st.z_k);
                                    return true;
                                  });
  CHECK(out.rounds == K);

  // Convex-concave mode reports the running average of sub-problem outputs.
  Point avg = Point::Zero(6, 6);
  for (const Point& u : outputs) {
    avg.x += u.x;
    avg.y += u.y;
  }
  avg.x /= double(K);
  avg.y /= double(K);
  CHECK((out.output.x - avg.x).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK((out.output.y - avg.y).lpNorm<Eigen::Infinity>() <= 1e-12);

  // Zero rounds reports the (projected) start point.
  Network net0(inst.problem);
  const RunResult none =
      run_svogs(net0, probe_point(6, 0.5), params, 5, 0);
  CHECK(none.rounds == 0);
  CHECK(same_bits(none.output, none.z_final));

  // Observers can stop the loop early.
  Network net1(inst.problem);
  int seen = 0;
  const RunResult stopped =
      run_svogs(net1, Point(Vector::Zero(6), Vector::Zero(6)), params, 5, K,
                [&](const SvogsState&) { return ++seen < 2; });
  CHECK(stopped.rounds == 2);
}

}  // TEST_SUITE
