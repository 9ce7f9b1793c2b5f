#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "svogs/hard_instances.hpp"
#include "svogs/problem.hpp"
#include "svogs/verify.hpp"

using namespace svogs;

namespace {

// Deterministic, node-count-free fill so matvec comparisons need no RNG.
Vector probe_vector(Index d, double phase) {
  Vector v(d);
  for (Index i = 0; i < d; ++i)
    v[i] = std::sin(2.3 * static_cast<double>(i) + phase) +
           0.25 * std::cos(0.7 * static_cast<double>(i) - phase);
  return v;
}

Matrix dense_from_matvec(const std::function<Vector(const Vector&)>& f,
                         Index rows, Index cols) {
  Matrix M(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    Vector e = Vector::Zero(cols);
    e[j] = 1.0;
    M.col(j) = f(e);
  }
  return M;
}

// Independent dense references, written down from the row descriptions.
Matrix dense_A(Index d) {
  Matrix M = Matrix::Identity(d, d);
  for (Index i = 0; i + 1 < d; ++i) M(i, i + 1) = -1.0;
  return M;
}

Matrix dense_A1(Index d) {
  Matrix M = Matrix::Identity(d, d);
  for (Index i = 0; i + 1 < d; ++i)
    if ((i + 1) % 2 == 0) M(i, i + 1) = -2.0;  // 1-based even rows
  return M;
}

Matrix dense_A2(Index d) {
  Matrix M = Matrix::Identity(d, d);
  for (Index i = 0; i + 1 < d; ++i)
    if ((i + 1) % 2 == 1) M(i, i + 1) = -2.0;  // 1-based odd rows
  return M;
}

Matrix dense_row_block(int n, int i, Index d) {
  Matrix M = Matrix::Zero(d, d);
  const Index m = n - 1;
  const Index res = (i - 1) % m;
  for (Index j = 1; j <= d; ++j) {
    if (j % m != res) continue;
    M(j - 1, j - 1) = 1.0;
    if (j < d) M(j - 1, j) = -1.0;
  }
  return M;
}

double spectral_norm_dense(const Matrix& M) {
  return Eigen::JacobiSVD<Matrix>(M).singularValues()(0);
}

Point probe_point(Index d, double phase) {
  return Point(probe_vector(d, phase), probe_vector(d, phase + 1.9));
}

// Scales a probe point into the instance's product of Euclidean balls.
Point feasible_point(const HardInstance& inst, double phase, double fill) {
  Point z = probe_point(inst.params.d, phase);
  z.x *= fill * inst.params.R_x / z.x.norm();
  z.y *= fill * inst.params.R_y / z.y.norm();
  return z;
}

}  // namespace

TEST_SUITE("hard_instances") {

TEST_CASE("chain matvecs match their dense definitions") {
  for (Index d : {Index(3), Index(5), Index(8)}) {
    CAPTURE(d);
    ChainMatrices chain(d);
    auto bind = [&](Vector (ChainMatrices::*fn)(const Vector&) const) {
      return [&chain, fn](const Vector& v) { return (chain.*fn)(v); };
    };
    struct Case {
      const char* name;
      Vector (ChainMatrices::*fwd)(const Vector&) const;
      Vector (ChainMatrices::*tr)(const Vector&) const;
      Matrix dense;
    };
    const std::vector<Case> cases = {
        {"A", &ChainMatrices::A, &ChainMatrices::At_, dense_A(d)},
        {"A1", &ChainMatrices::A1, &ChainMatrices::A1t, dense_A1(d)},
        {"A2", &ChainMatrices::A2, &ChainMatrices::A2t, dense_A2(d)},
        {"Anti", &ChainMatrices::Anti, &ChainMatrices::Antit,
         dense_A(d).colwise().reverse()},
    };
    for (const auto& c : cases) {
      CAPTURE(c.name);
      const Matrix fwd = dense_from_matvec(bind(c.fwd), d, d);
      const Matrix tr = dense_from_matvec(bind(c.tr), d, d);
      CHECK((fwd - c.dense).lpNorm<Eigen::Infinity>() == 0.0);
      CHECK((tr - c.dense.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
      // Adjoint identity on generic vectors, independent of the dense copy.
      const Vector u = probe_vector(d, 0.3), v = probe_vector(d, 4.1);
      CHECK(bind(c.fwd)(u).dot(v) ==
            doctest::Approx(u.dot(bind(c.tr)(v))).epsilon(1e-12));
    }
  }
}

TEST_CASE("row blocks partition the chain") {
  const Index d = 9;
  const int n = 4;
  ChainMatrices chain(d);

  std::vector<Matrix> blocks;
  for (int i = 2; i <= n; ++i) {
    const Matrix B = dense_from_matvec(
        [&](const Vector& v) { return chain.row_block(n, i, v); }, d, d);
    const Matrix Bt = dense_from_matvec(
        [&](const Vector& v) { return chain.row_block_t(n, i, v); }, d, d);
    CHECK((B - dense_row_block(n, i, d)).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((Bt - B.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
    blocks.push_back(B);
  }

  // The blocks sum to A exactly, including the diagonal-only last row.
  Matrix sum = Matrix::Zero(d, d);
  for (const Matrix& B : blocks) sum += B;
  CHECK((sum - dense_A(d)).lpNorm<Eigen::Infinity>() == 0.0);

  // No row of A is assigned twice.
  for (std::size_t a = 0; a < blocks.size(); ++a)
    for (std::size_t b = a + 1; b < blocks.size(); ++b)
      CHECK((blocks[a].cwiseAbs().cwiseProduct(blocks[b].cwiseAbs())).sum() ==
            0.0);

  // Rows within one block touch disjoint columns (spacing n-1 >= 2), so each
  // block's spectral norm is the norm of a single [1, -1] row.
  for (const Matrix& B : blocks)
    CHECK(spectral_norm_dense(B) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  // The two alternating-row variants reconstruct the chain.
  const Matrix twoA = dense_from_matvec(
      [&](const Vector& v) -> Vector { return chain.A1(v) + chain.A2(v); },
      d, d);
  CHECK((twoA - 2.0 * dense_A(d)).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("mean operator matches the recorded closed form") {
  std::vector<HardInstanceSpec> specs;
  {
    HardInstanceSpec s;
    s.kind = InstanceKind::kCcRounds;
    s.n = 6; s.d = 7; s.delta = 0.8; s.L = 1.2; s.R_x = 1.5; s.R_y = 0.7;
    specs.push_back(s);
    s.kind = InstanceKind::kCcComm;
    s.n = 4; s.delta = 1.0; s.L = 0.6; s.R_x = 2.0; s.R_y = 0.5;
    specs.push_back(s);
    s.kind = InstanceKind::kCcGrad;
    s.n = 3; s.d = 6; s.delta = 0.5; s.L = 0.9;
    specs.push_back(s);
    s.kind = InstanceKind::kScscComm;
    s.n = 4; s.d = 7; s.mu = 0.1; s.delta = 0.5; s.L = 2.0;
    specs.push_back(s);
    s.kind = InstanceKind::kScscGrad;
    s.n = 3; s.d = 6; s.mu = 0.2; s.delta = 0.3; s.L = 2.0;
    specs.push_back(s);
  }

  for (const auto& spec : specs) {
    CAPTURE(to_string(spec.kind));
    const HardInstance inst = build_hard_instance(spec);
    const Index d = spec.d;
    ChainMatrices chain(d);
    const Point z = probe_point(d, 0.6);

    Point expected(Vector::Zero(d), Vector::Zero(d));
    expected.x = inst.theta * (inst.anti_chain ? chain.Anti(z.y) : chain.A(z.y))
                 + inst.c_x + spec.mu * z.x;
    expected.y = -inst.theta *
                     (inst.anti_chain ? chain.Antit(z.x) : chain.At_(z.x)) -
                 inst.c_y + spec.mu * z.y;

    const Point mean = inst.problem.eval_mean(z);
    CHECK((mean.x - expected.x).norm() <= 1e-12 * (1.0 + expected.x.norm()));
    CHECK((mean.y - expected.y).norm() <= 1e-12 * (1.0 + expected.y.norm()));

    // Average of the locals reproduces the mean.
    Point acc(Vector::Zero(d), Vector::Zero(d));
    for (int i = 1; i <= spec.n; ++i) {
      const Point g = inst.problem.eval_local(i, z);
      acc.x += g.x;
      acc.y += g.y;
    }
    acc.x /= spec.n;
    acc.y /= spec.n;
    CHECK((acc.x - mean.x).norm() <= 1e-12 * (1.0 + mean.x.norm()));
    CHECK((acc.y - mean.y).norm() <= 1e-12 * (1.0 + mean.y.norm()));

    // The affine view agrees with the operator view.
    REQUIRE(inst.problem.quadratic.has_value());
    Vector stacked(2 * d);
    stacked.head(d) = z.x;
    stacked.tail(d) = z.y;
    const Vector affine = inst.problem.quadratic->apply_mean(stacked) +
                          inst.problem.quadratic->mean_offset();
    CHECK((affine.head(d) - mean.x).norm() <= 1e-12 * (1.0 + mean.x.norm()));
    CHECK((affine.tail(d) - mean.y).norm() <= 1e-12 * (1.0 + mean.y.norm()));
  }

  // Spot-check the stored coefficients against the construction arithmetic.
  {
    const auto& s = specs[0];  // cc-rounds
    const HardInstance inst = build_hard_instance(s);
    CHECK(inst.theta == doctest::Approx(s.delta / 6.0).epsilon(1e-15));
    CHECK(inst.c_x[0] ==
          doctest::Approx(-s.delta * s.R_y / (6.0 * std::sqrt(double(s.d))))
              .epsilon(1e-15));
    CHECK(inst.c_x.tail(s.d - 1).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(inst.c_y.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK_FALSE(inst.anti_chain);
  }
  {
    const auto& s = specs[1];  // cc-comm
    const HardInstance inst = build_hard_instance(s);
    CHECK(inst.theta ==
          doctest::Approx(s.delta / (8.0 * std::sqrt(double(s.n))))
              .epsilon(1e-15));
    CHECK(inst.c_x[0] ==
          doctest::Approx(-s.delta * s.R_y /
                          (8.0 * std::sqrt(double(s.n) * double(s.d))))
              .epsilon(1e-15));
  }
  {
    const auto& s = specs[3];  // scsc-comm
    const HardInstance inst = build_hard_instance(s);
    CHECK(inst.theta ==
          doctest::Approx(s.delta / (4.0 * std::sqrt(double(s.n))))
              .epsilon(1e-15));
    CHECK(inst.c_y[0] ==
          doctest::Approx(s.delta * s.delta / (16.0 * s.n * s.mu))
              .epsilon(1e-15));
    CHECK(inst.c_x.lpNorm<Eigen::Infinity>() == 0.0);
  }
  {
    const auto& s = specs[4];  // scsc-grad
    const HardInstance inst = build_hard_instance(s);
    CHECK(inst.theta == doctest::Approx(s.L / 2.0).epsilon(1e-15));
    CHECK(inst.c_y[0] ==
          doctest::Approx(s.L * s.L / (4.0 * s.mu)).epsilon(1e-15));
    CHECK(inst.anti_chain);
  }
}

TEST_CASE("claimed constants hold under independent estimation") {
  std::vector<HardInstanceSpec> specs;
  {
    HardInstanceSpec s;
    s.kind = InstanceKind::kCcRounds; s.n = 6; s.d = 6; s.delta = 1.0; s.L = 1.0;
    specs.push_back(s);
    s.kind = InstanceKind::kCcComm; s.n = 4; s.L = 0.6;
    specs.push_back(s);
    s.kind = InstanceKind::kCcGrad; s.n = 3; s.d = 5; s.delta = 1.0; s.L = 0.9;
    specs.push_back(s);
    s.kind = InstanceKind::kScscComm; s.n = 4; s.d = 6; s.mu = 0.1;
    s.delta = 0.5; s.L = 2.0;
    specs.push_back(s);
    s.kind = InstanceKind::kScscGrad; s.n = 3; s.d = 5; s.mu = 0.1;
    s.delta = 1.0; s.L = 2.0;
    specs.push_back(s);
  }
  for (const auto& spec : specs) {
    CAPTURE(to_string(spec.kind));
    const HardInstance inst = build_hard_instance(spec);
    const InstanceConstantsReport rep = verify_instance_constants(inst);
    CHECK(rep.pass);
    CHECK(rep.L_est <= rep.L_claimed * (1.0 + 1e-9));
    CHECK(rep.delta_est <= rep.delta_claimed * (1.0 + 1e-9) + 1e-10);
    if (spec.mu > 0.0) CHECK(rep.mu_est >= rep.mu_claimed * (1.0 - 1e-9) - 1e-10);
  }

  SUBCASE("identical-node instance has vanishing similarity") {
    HardInstanceSpec s;
    s.kind = InstanceKind::kCcGrad; s.n = 3; s.d = 5; s.L = 0.9;
    s.delta = 0.0;  // honest claim: every node holds the same operator
    const HardInstance inst = build_hard_instance(s);
    const InstanceConstantsReport rep = verify_instance_constants(inst);
    CHECK(rep.pass);
    CHECK(rep.delta_est <= 1e-10);
  }

  SUBCASE("estimates agree with a dense spectral oracle") {
    HardInstanceSpec s;
    s.kind = InstanceKind::kScscComm; s.n = 4; s.d = 5; s.mu = 0.1;
    s.delta = 0.5; s.L = 2.0;
    const HardInstance inst = build_hard_instance(s);
    const auto& qf = *inst.problem.quadratic;
    const Index dim = 2 * s.d;
    std::vector<Matrix> B;
    for (int i = 0; i < qf.nodes(); ++i)
      B.push_back(dense_from_matvec(qf.apply[i], dim, dim));
    Matrix Bmean = Matrix::Zero(dim, dim);
    for (const Matrix& Bi : B) Bmean += Bi;
    Bmean /= static_cast<double>(B.size());

    double L_oracle = 0.0, delta_oracle = 0.0;
    for (const Matrix& Bi : B) {
      L_oracle = std::max(L_oracle, spectral_norm_dense(Bi));
      delta_oracle = std::max(delta_oracle, spectral_norm_dense(Bi - Bmean));
    }
    const Matrix sym = 0.5 * (Bmean + Bmean.transpose());
    const double mu_oracle =
        Eigen::SelfAdjointEigenSolver<Matrix>(sym).eigenvalues().minCoeff();

    const EstimatedConstants est = estimate_constants(inst.problem);
    CHECK(est.L == doctest::Approx(L_oracle).epsilon(1e-6));
    CHECK(est.delta == doctest::Approx(delta_oracle).epsilon(1e-6));
    CHECK(est.mu == doctest::Approx(std::max(0.0, mu_oracle)).epsilon(1e-6));
  }
}

TEST_CASE("constants verifier flags understated claims") {
  HardInstanceSpec s;
  s.kind = InstanceKind::kCcComm; s.n = 4; s.d = 6; s.delta = 1.0; s.L = 0.6;
  HardInstance inst = build_hard_instance(s);

  SUBCASE("similarity understated") {
    inst.problem.constants.delta = 0.05;
    const auto rep = verify_instance_constants(inst);
    CHECK_FALSE(rep.pass);
    CHECK(rep.message.find("similarity") != std::string::npos);
  }
  SUBCASE("smoothness understated") {
    inst.problem.constants.L = 0.01;
    const auto rep = verify_instance_constants(inst);
    CHECK_FALSE(rep.pass);
    CHECK(rep.message.find("smoothness") != std::string::npos);
  }
  SUBCASE("strong monotonicity overstated") {
    HardInstanceSpec t;
    t.kind = InstanceKind::kScscComm; t.n = 4; t.d = 6; t.mu = 0.1;
    t.delta = 0.5; t.L = 2.0;
    HardInstance scsc = build_hard_instance(t);
    scsc.problem.constants.mu = 0.5;  // actual modulus is 0.1
    const auto rep = verify_instance_constants(scsc);
    CHECK_FALSE(rep.pass);
    CHECK(rep.message.find("strong monotonicity") != std::string::npos);
  }
}

TEST_CASE("closed-form gap agrees with a direct optimization oracle") {
  for (InstanceKind kind : {InstanceKind::kCcRounds, InstanceKind::kCcComm,
                            InstanceKind::kCcGrad}) {
    CAPTURE(to_string(kind));
    HardInstanceSpec s;
    s.kind = kind;
    s.n = kind == InstanceKind::kCcRounds ? 6 : 4;
    s.d = 5; s.delta = 1.0;
    s.L = kind == InstanceKind::kCcComm ? 0.6 : 1.0;
    s.R_x = 1.3; s.R_y = 0.8;
    const HardInstance inst = build_hard_instance(s);
    const Index d = s.d;
    const Point z = feasible_point(inst, 0.4, 0.8);

    // f is bilinear, so f(x, .) and f(., y) are affine and central differences
    // of the value recover their gradients exactly; the ball maxima are then
    // value-at-center plus radius times gradient norm.
    const double h = 0.5;
    Vector ly(d), lx(d);
    for (Index j = 0; j < d; ++j) {
      Vector e = Vector::Zero(d);
      e[j] = h;
      ly[j] = (inst.problem.value_mean(Point(z.x, e)) -
               inst.problem.value_mean(Point(z.x, -e))) /
              (2.0 * h);
      lx[j] = (inst.problem.value_mean(Point(e, z.y)) -
               inst.problem.value_mean(Point(-e, z.y))) /
              (2.0 * h);
    }
    const Vector zero = Vector::Zero(d);
    const double oracle = inst.problem.value_mean(Point(z.x, zero)) +
                          s.R_y * ly.norm() -
                          inst.problem.value_mean(Point(zero, z.y)) +
                          s.R_x * lx.norm();
    const double gap = exact_bilinear_gap(inst, z);
    CHECK(gap == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(gap >= -1e-12);  // a feasible point can never have negative gap

    // The closed form dominates every sampled primal-dual competitor.
    for (int t = 0; t < 50; ++t) {
      const Point w = feasible_point(inst, 1.7 + 0.31 * t, 0.97);
      const double candidate = inst.problem.value_mean(Point(z.x, w.y)) -
                               inst.problem.value_mean(Point(w.x, z.y));
      CHECK(gap + 1e-10 * (1.0 + std::abs(gap)) >= candidate);
    }
  }

  SUBCASE("rejects strongly monotone instances and bad shapes") {
    HardInstanceSpec s;
    s.kind = InstanceKind::kScscComm; s.n = 4; s.d = 5; s.mu = 0.1;
    s.delta = 0.5; s.L = 2.0;
    const HardInstance scsc = build_hard_instance(s);
    const Point z(Vector::Zero(5), Vector::Zero(5));
    CHECK_THROWS_AS(exact_bilinear_gap(scsc, z), UnsupportedOperation);

    HardInstanceSpec c;
    c.kind = InstanceKind::kCcGrad; c.n = 2; c.d = 5; c.L = 1.0;
    const HardInstance cc = build_hard_instance(c);
    const Point bad(Vector::Zero(4), Vector::Zero(5));
    CHECK_THROWS_AS(exact_bilinear_gap(cc, bad), InvalidArgument);
  }
}

TEST_CASE("support frontier measures the largest active coordinate") {
  Point z(Vector::Zero(6), Vector::Zero(6));
  CHECK(support_frontier(z) == 0);
  z.x[0] = 0.5;
  CHECK(support_frontier(z) == 1);
  z.y[3] = -2e-14;  // above the dead-band
  CHECK(support_frontier(z) == 4);
  z.x[5] = 1e-15;  // below the dead-band: ignored
  CHECK(support_frontier(z) == 4);
  z.x[4] = 1.0;
  CHECK(support_frontier(z) == 5);
}

TEST_CASE("frontier growth permissions follow the node roles") {
  HardInstanceSpec s;
  s.kind = InstanceKind::kCcRounds; s.n = 6; s.d = 8; s.delta = 1.0; s.L = 1.0;
  const HardInstance rounds = build_hard_instance(s);
  // Node type cycles with period 3: seed/odd-row, even-row, inert.
  CHECK(rounds.advance_allowed(2, 0));
  CHECK_FALSE(rounds.advance_allowed(2, 1));
  CHECK(rounds.advance_allowed(2, 2));
  CHECK_FALSE(rounds.advance_allowed(3, 0));
  CHECK(rounds.advance_allowed(3, 1));
  CHECK_FALSE(rounds.advance_allowed(1, 0));
  CHECK_FALSE(rounds.advance_allowed(4, 5));
  CHECK(rounds.advance_allowed(5, 2));   // same role as node 2
  CHECK(rounds.advance_allowed(6, 3));   // same role as node 3

  HardInstanceSpec c;
  c.kind = InstanceKind::kCcComm; c.n = 4; c.d = 9; c.delta = 1.0; c.L = 0.6;
  const HardInstance comm = build_hard_instance(c);
  CHECK(comm.advance_allowed(1, 0));      // the seed opens the chain
  CHECK_FALSE(comm.advance_allowed(1, 1));
  CHECK(comm.advance_allowed(2, 1));      // client 2 owns rows 1, 4, 7
  CHECK(comm.advance_allowed(2, 4));
  CHECK_FALSE(comm.advance_allowed(2, 2));
  CHECK_FALSE(comm.advance_allowed(2, 0));
  CHECK(comm.advance_allowed(3, 2));
  CHECK(comm.advance_allowed(4, 3));
  CHECK_FALSE(comm.advance_allowed(4, 0));
  CHECK_FALSE(comm.advance_allowed(2, 9));  // frontier at full support

  HardInstanceSpec g;
  g.kind = InstanceKind::kCcGrad; g.n = 2; g.d = 5; g.L = 1.0;
  const HardInstance grad = build_hard_instance(g);
  CHECK(grad.advance_allowed(1, 0));
  CHECK(grad.advance_allowed(2, 3));
}

TEST_CASE("evaluation history bounds iterate support") {
  HardInstanceSpec s;
  s.kind = InstanceKind::kCcRounds; s.n = 3; s.d = 12; s.delta = 1.0; s.L = 1.0;
  const HardInstance inst = build_hard_instance(s);
  const Index d = s.d;
  auto zero_point = [d] { return Point(Vector::Zero(d), Vector::Zero(d)); };

  std::vector<RoundEvents> events;
  events.push_back({0, {{1, 0}}});              // inert node: no growth
  events.push_back({1, {{2, 5}}});              // even frontier 0 -> 1
  events.push_back({2, {{3, 9}}});              // odd frontier 1 -> 2
  // Two phases in one round: a broadcast answered by nodes 2 and 3, then a
  // second point seen by node 3 alone. Frontier 2 -> 3 -> 4.
  events.push_back({3, {{2, 11}, {3, 11}, {3, 12}}});

  SUBCASE("consistent trace passes with the expected frontier") {
    std::vector<TracedIterate> iters;
    iters.push_back({0, zero_point()});
    Point z2 = zero_point();
    z2.x[0] = 0.3;
    z2.y[1] = -0.2;
    iters.push_back({2, z2});
    Point z3 = zero_point();
    z3.y[3] = 0.4;
    iters.push_back({3, z3});

    const ZeroChainReport rep = verify_zero_chain(inst, events, iters);
    CHECK(rep.pass);
    REQUIRE(rep.frontier_bound.size() == 4);
    CHECK(rep.frontier_bound[0] == 0);
    CHECK(rep.frontier_bound[1] == 1);
    CHECK(rep.frontier_bound[2] == 2);
    CHECK(rep.frontier_bound[3] == 4);
    CHECK(rep.observed_support[2] == 2);
    CHECK(rep.observed_support[3] == 4);
  }

  SUBCASE("forged iterate beyond the frontier is rejected") {
    Point forged = zero_point();
    forged.y[2] = 1.0;  // support 3, but only one growth phase has run
    const ZeroChainReport rep =
        verify_zero_chain(inst, events, {{1, forged}});
    CHECK_FALSE(rep.pass);
    CHECK(rep.observed_support[1] == 3);
    CHECK(rep.message.find("support 3") != std::string::npos);
    CHECK(rep.message.find("frontier 1") != std::string::npos);
  }

  SUBCASE("idle rounds carry the frontier forward unchanged") {
    std::vector<RoundEvents> sparse;
    sparse.push_back({1, {{2, 5}}});
    sparse.push_back({4, {{3, 9}}});
    const ZeroChainReport rep =
        verify_zero_chain(inst, sparse, {{3, zero_point()}});
    REQUIRE(rep.frontier_bound.size() == 5);
    CHECK(rep.frontier_bound[1] == 1);
    CHECK(rep.frontier_bound[2] == 1);
    CHECK(rep.frontier_bound[3] == 1);
    CHECK(rep.frontier_bound[4] == 2);
  }
}

TEST_CASE("anti-diagonal chain counts x support from the top") {
  HardInstanceSpec s;
  s.kind = InstanceKind::kScscGrad; s.n = 2; s.d = 8; s.mu = 0.2;
  s.delta = 0.5; s.L = 1.0;
  const HardInstance inst = build_hard_instance(s);
  const Index d = s.d;
  std::vector<RoundEvents> events = {{0, {{1, 0}}}};  // one growth phase

  Point ok(Vector::Zero(d), Vector::Zero(d));
  ok.y[0] = 0.1;      // y_1: support 1
  ok.x[d - 1] = 0.1;  // x_d counted as 1 step from the top
  CHECK(verify_zero_chain(inst, events, {{0, ok}}).pass);

  Point deep = ok;
  deep.x[d - 2] = 0.1;  // x_{d-1}: two steps from the top, beyond the bound
  const ZeroChainReport rep = verify_zero_chain(inst, events, {{0, deep}});
  CHECK_FALSE(rep.pass);
  CHECK(rep.observed_support[0] == 2);
}

TEST_CASE("main loop stays within the certified frontier") {
  const ZeroChainCheckResult rounds =
      check_zero_chain(InstanceKind::kCcRounds, 12, 3, 8, 77);
  CHECK(rounds.pass);
  CHECK(rounds.final_observed <= rounds.final_bound);

  const ZeroChainCheckResult grad =
      check_zero_chain(InstanceKind::kScscGrad, 10, 2, 6, 78);
  CHECK(grad.pass);
}

TEST_CASE("construction rejects invalid shapes") {
  auto spec = [](InstanceKind kind) {
    HardInstanceSpec s;
    s.kind = kind;
    s.n = kind == InstanceKind::kCcRounds ? 6 : 4;
    s.d = 6; s.delta = 0.5; s.L = 1.0;
    if (kind == InstanceKind::kScscComm || kind == InstanceKind::kScscGrad)
      s.mu = 0.1;
    return s;
  };

  {
    auto s = spec(InstanceKind::kCcRounds);
    s.d = 2;
    CHECK_THROWS_AS(build_hard_instance(s), InvalidArgument);
  }
  {
    auto s = spec(InstanceKind::kCcRounds);
    s.n = 4;  // node types would be unbalanced
    CHECK_THROWS_AS(build_hard_instance(s), InvalidArgument);
  }
  {
    auto s = spec(InstanceKind::kCcRounds);
    s.delta = 0.0;
    CHECK_THROWS_AS(build_hard_instance(s), InvalidArgument);
  }
  {
    auto s = spec(InstanceKind::kCcRounds);
    s.mu = 0.3;  // bilinear kinds must not declare strong monotonicity
    CHECK_THROWS_AS(build_hard_instance(s), InvalidArgument);
  }
  {
    auto s = spec(InstanceKind::kCcRounds);
    s.L = 0.1;  // below the similarity it claims
    CHECK_THROWS_AS(build_hard_instance(s), InvalidArgument);
  }
  {
    auto s = spec(InstanceKind::kCcRounds);
    s.R_x = 0.0;
    CHECK_THROWS_AS(build_hard_instance(s), InvalidArgument);
  }
  {
    auto s = spec(InstanceKind::kCcComm);
    s.delta = 1.0;
    s.L = 0.4;  // needs L >= sqrt(n) delta / 4 = 0.5
    CHECK_THROWS_AS(build_hard_instance(s), InvalidArgument);
  }
  {
    auto s = spec(InstanceKind::kCcGrad);
    s.n = 1;
    CHECK_THROWS_AS(build_hard_instance(s), InvalidArgument);
  }
  {
    auto s = spec(InstanceKind::kScscComm);
    s.mu = 0.0;
    CHECK_THROWS_AS(build_hard_instance(s), InvalidArgument);
  }
  {
    auto s = spec(InstanceKind::kScscComm);
    s.mu = 0.3;
    s.delta = 0.2;  // similarity below the strong-monotonicity modulus
    CHECK_THROWS_AS(build_hard_instance(s), InvalidArgument);
  }
  {
    auto s = spec(InstanceKind::kScscGrad);
    s.delta = 2.0;
    s.L = 1.0;
    CHECK_THROWS_AS(build_hard_instance(s), InvalidArgument);
  }
  {
    auto s = spec(InstanceKind::kCcGrad);
    s.L = 0.0;
    CHECK_THROWS_AS(build_hard_instance(s), InvalidArgument);
  }
  {
    auto s = spec(InstanceKind::kCcGrad);
    s.delta = -1.0;
    CHECK_THROWS_AS(build_hard_instance(s), InvalidArgument);
  }
}

}  // TEST_SUITE
