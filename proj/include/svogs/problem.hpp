#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "svogs/constraint.hpp"
#include "svogs/point.hpp"

namespace svogs {

// Smoothness / similarity / strong-convexity constants of a problem.
//   L     : per-node smoothness (Lipschitz constant of each F_i),
//   delta : second-order similarity (max_i sup_z ||Hess f_i(z) - Hess f(z)||),
//   mu    : strong convexity-concavity modulus of the mean objective (0 for
//           merely convex-concave problems).
struct ProblemConstants {
  std::optional<double> L;
  std::optional<double> delta;
  std::optional<double> mu;
};

// Affine structure of the stacked operators, present when every local
// operator is F_i(z) = B_i z + q_i with a constant matrix B_i. Matrices are
// exposed as matvec closures on stacked d-vectors so that structured
// instances (chains, row partitions) stay O(d) per application; dense copies
// are assembled on demand only for moderate dimensions.
struct QuadraticForm {
  std::vector<std::function<Vector(const Vector&)>> apply;    // z -> B_i z
  std::vector<std::function<Vector(const Vector&)>> apply_t;  // z -> B_i' z
  std::vector<Vector> offset;                                 // q_i

  Index dim() const { return offset.empty() ? 0 : offset.front().size(); }
  int nodes() const { return static_cast<int>(offset.size()); }

  Vector apply_mean(const Vector& z) const;
  Vector apply_mean_t(const Vector& z) const;
  Vector mean_offset() const;

  // Dense mean matrix, assembled column by column. Guarded by a dimension
  // cap because structured instances can be large.
  Matrix dense_mean(Index max_dim = 1024) const;
};

// Finite-sum saddle problem  min_x max_y f(x,y) = (1/n) sum_i f_i(x,y)
// over Z = X x Y, presented through the stacked local operators
//   F_i(z) = [ grad_x f_i(z); -grad_y f_i(z) ].
// Local objective values are optional; they are required only by metrics
// that evaluate f itself (duality gaps).
struct SaddleProblem {
  int n = 0;
  Index dx = 0;
  Index dy = 0;
  std::vector<std::function<Point(const Point&)>> operators;      // F_i
  std::vector<std::function<double(const Point&)>> values;        // f_i, may be empty
  ConstraintSet constraint;
  ProblemConstants constants;
  // Whether f(x, .) is concave for every feasible x. Gates duality-gap
  // evaluation; builders set it from the structure they create.
  bool concave_in_y = false;
  std::optional<QuadraticForm> quadratic;

  bool has_values() const { return !values.empty(); }

  // 1-based node index, matching the sampler's convention (node 1 = server).
  Point eval_local(int node, const Point& z) const;
  Point eval_mean(const Point& z) const;
  double value_local(int node, const Point& z) const;
  double value_mean(const Point& z) const;

  void validate() const;  // throws InvalidArgument on structural problems
};

// Assembles a SaddleProblem from explicit affine operators; constants are
// estimated from the blocks unless declared.
SaddleProblem make_quadratic_problem(QuadraticForm form, Index dx,
                                     ConstraintSet constraint,
                                     ProblemConstants declared = {},
                                     bool concave_in_y = true);

// ---------------------------------------------------------------------------
// Robust linear regression with adversarial feature noise:
//   f(x, y) = (1/N) sum_s 0.5 (x'(a_s + y) - b_s)^2  (+ optional regularizers)
// with x, y in R^{d'}. Rows are shuffled once with a seeded permutation and
// split into n near-equal contiguous blocks, one per node.
// ---------------------------------------------------------------------------

struct RegressionData {
  Matrix A;  // N x d' feature rows a_s'
  Vector b;  // N labels

  Index rows() const { return A.rows(); }
  Index cols() const { return A.cols(); }
};

struct RegressionVariant {
  enum class Kind { kConstrained, kRegularized };
  Kind kind = Kind::kConstrained;
  // kConstrained: X = l1 ball of radius R_x, Y = Euclidean ball of radius R_y.
  double R_x = 2.0;
  double R_y = 0.05;
  // kRegularized: unconstrained, + (lambda/2)||x||^2 - (beta/2)||y||^2.
  double lambda = 0.0;
  double beta = 0.0;

  static RegressionVariant Constrained(double R_x, double R_y);
  static RegressionVariant Regularized(double lambda, double beta);
};

SaddleProblem build_robust_regression(const RegressionData& data, int n,
                                      const RegressionVariant& variant,
                                      std::uint64_t partition_seed);

// Seeded synthetic regression data: rows a_s = a_bar + spread * g_s with
// standard normal g_s, labels b_s = a_s' x_true + noise * eps_s. Small tool
// for tests and desk-scale experiments.
struct SyntheticRegressionConfig {
  Index N = 1000;
  Index d = 20;
  double mean_scale = 1.0;  // ||a_bar|| target
  double spread = 1.0;
  double noise = 0.1;
  std::uint64_t seed = 0;
};
RegressionData make_synthetic_regression(const SyntheticRegressionConfig& cfg);

// ---------------------------------------------------------------------------
// Constants and conditioning
// ---------------------------------------------------------------------------

struct EstimatedConstants {
  double L = 0.0;
  double delta = 0.0;
  double mu = 0.0;
};

// For problems with affine operators: spectral quantities of the blocks,
//   L     = max_i ||B_i||,
//   delta = max_i ||B_i - B_mean||,
//   mu    = max(0, lambda_min(sym(B_mean))),
// computed by power iteration (relative tolerance 1e-9, deterministic start
// vector). For problems without affine structure, returns the declared
// constants and throws if any of them is missing.
EstimatedConstants estimate_constants(const SaddleProblem& problem);

// Shifted problem  f_i + (lambda/2)||x - x0||^2 - (lambda/2)||y - y0||^2
// with lambda = sqrt(eps / (4 D^2)): turns a merely convex-concave problem
// into a strongly-convex-concave one whose solution is an eps-accurate
// stationary point of the original. D defaults to the constraint diameter.
struct RegularizedProblem {
  SaddleProblem problem;
  double lambda = 0.0;
};
RegularizedProblem regularize_for_small_gradient(
    const SaddleProblem& problem, double eps, const Point& z0,
    std::optional<double> diameter = std::nullopt);

// Largest singular value of a linear map given by matvec closures, by power
// iteration on B'B. Shared by constants estimation and the verifiers.
double spectral_norm(const std::function<Vector(const Vector&)>& apply,
                     const std::function<Vector(const Vector&)>& apply_t,
                     Index dim, double rel_tol = 1e-9, int max_iters = 10000);

// Smallest eigenvalue of a symmetric map given by a matvec closure.
double min_eigenvalue_sym(const std::function<Vector(const Vector&)>& apply,
                          Index dim, double rel_tol = 1e-9,
                          int max_iters = 10000);

}  // namespace svogs
