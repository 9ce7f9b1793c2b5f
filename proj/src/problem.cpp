#include "svogs/problem.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numeric>

#include "svogs/rng.hpp"

namespace svogs {

// ---------------------------------------------------------------------------
// QuadraticForm
// ---------------------------------------------------------------------------

Vector QuadraticForm::apply_mean(const Vector& z) const {
  Vector acc = Vector::Zero(z.size());
  for (const auto& f : apply) acc += f(z);
  return acc / static_cast<double>(apply.size());
}

Vector QuadraticForm::apply_mean_t(const Vector& z) const {
  Vector acc = Vector::Zero(z.size());
  for (const auto& f : apply_t) acc += f(z);
  return acc / static_cast<double>(apply_t.size());
}

Vector QuadraticForm::mean_offset() const {
  Vector acc = Vector::Zero(dim());
  for (const auto& q : offset) acc += q;
  return acc / static_cast<double>(offset.size());
}

Matrix QuadraticForm::dense_mean(Index max_dim) const {
  const Index d = dim();
  detail::require(d <= max_dim,
                  "QuadraticForm::dense_mean: dimension exceeds dense cap");
  Matrix B = Matrix::Zero(d, d);
  Vector e = Vector::Zero(d);
  for (Index j = 0; j < d; ++j) {
    e[j] = 1.0;
    B.col(j) = apply_mean(e);
    e[j] = 0.0;
  }
  return B;
}

// ---------------------------------------------------------------------------
// SaddleProblem
// ---------------------------------------------------------------------------

void SaddleProblem::validate() const {
  detail::require(n >= 1, "SaddleProblem: n must be >= 1");
  detail::require(dx >= 1 && dy >= 1,
                  "SaddleProblem: block dimensions must be >= 1");
  detail::require(static_cast<int>(operators.size()) == n,
                  "SaddleProblem: operator count must equal n");
  detail::require(values.empty() || static_cast<int>(values.size()) == n,
                  "SaddleProblem: value count must be 0 or n");
}

Point SaddleProblem::eval_local(int node, const Point& z) const {
  detail::require(node >= 1 && node <= n,
                  "SaddleProblem::eval_local: node index out of range");
  detail::require(z.dx() == dx && z.dy() == dy,
                  "SaddleProblem::eval_local: point dimension mismatch");
  return operators[static_cast<size_t>(node - 1)](z);
}

Point SaddleProblem::eval_mean(const Point& z) const {
  detail::require(z.dx() == dx && z.dy() == dy,
                  "SaddleProblem::eval_mean: point dimension mismatch");
  Point acc = Point::Zero(dx, dy);
  for (const auto& op : operators) acc += op(z);
  return acc * (1.0 / static_cast<double>(n));
}

double SaddleProblem::value_local(int node, const Point& z) const {
  detail::require(node >= 1 && node <= n,
                  "SaddleProblem::value_local: node index out of range");
  detail::require(has_values(),
                  "SaddleProblem::value_local: no objective values available");
  return values[static_cast<size_t>(node - 1)](z);
}

double SaddleProblem::value_mean(const Point& z) const {
  detail::require(has_values(),
                  "SaddleProblem::value_mean: no objective values available");
  double acc = 0.0;
  for (const auto& v : values) acc += v(z);
  return acc / static_cast<double>(n);
}

SaddleProblem make_quadratic_problem(QuadraticForm form, Index dx,
                                     ConstraintSet constraint,
                                     ProblemConstants declared,
                                     bool concave_in_y) {
  const int n = form.nodes();
  detail::require(n >= 1, "make_quadratic_problem: need at least one node");
  const Index d = form.dim();
  detail::require(dx >= 1 && dx < d,
                  "make_quadratic_problem: dx must split the stacked dim");

  auto shared = std::make_shared<QuadraticForm>(std::move(form));
  SaddleProblem p;
  p.n = n;
  p.dx = dx;
  p.dy = d - dx;
  p.constraint = std::move(constraint);
  p.constants = declared;
  p.concave_in_y = concave_in_y;
  for (int i = 0; i < n; ++i) {
    p.operators.push_back([shared, i, dx](const Point& z) {
      const Vector w =
          shared->apply[static_cast<size_t>(i)](z.stacked()) +
          shared->offset[static_cast<size_t>(i)];
      return Point::from_stacked(w, dx);
    });
    // With S = diag(I, -I): F_i = S grad f_i, so f_i(z) = z'(S B_i)z/2 +
    // (S q_i)'z (constant term dropped). Evaluated through the matvec.
    p.values.push_back([shared, i, dx](const Point& z) {
      const Vector zs = z.stacked();
      const Vector w = shared->apply[static_cast<size_t>(i)](zs);
      const Vector& q = shared->offset[static_cast<size_t>(i)];
      const Index dyy = zs.size() - dx;
      const double quad = 0.5 * (w.head(dx).dot(zs.head(dx)) -
                                 w.tail(dyy).dot(zs.tail(dyy)));
      const double lin =
          q.head(dx).dot(zs.head(dx)) - q.tail(dyy).dot(zs.tail(dyy));
      return quad + lin;
    });
  }
  p.quadratic = *shared;
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Spectral helpers (power iteration, deterministic start vector)
// ---------------------------------------------------------------------------

namespace {

Vector spectral_start(Index dim) {
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) {
    v[i] = rng::draw_normal(0x5EEDCAFEULL, rng::Stream::kSpectral,
                            static_cast<std::uint64_t>(dim),
                            static_cast<std::uint64_t>(i));
  }
  const double nrm = v.norm();
  return nrm > 0 ? Vector(v / nrm) : Vector(Vector::Unit(dim, 0));
}

// Largest eigenvalue of a symmetric PSD map by power iteration.
double power_iteration_psd(const std::function<Vector(const Vector&)>& apply,
                           Index dim, double rel_tol, int max_iters) {
  Vector v = spectral_start(dim);
  double lam = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Vector w = apply(v);
    const double nrm = w.norm();
    if (nrm <= 1e-300) return 0.0;
    w /= nrm;
    const double lam_new = w.dot(apply(w));
    if (std::abs(lam_new - lam) <= rel_tol * std::max(std::abs(lam_new), 1e-30))
      return lam_new;
    lam = lam_new;
    v = std::move(w);
  }
  return lam;
}

}  // namespace

double spectral_norm(const std::function<Vector(const Vector&)>& apply,
                     const std::function<Vector(const Vector&)>& apply_t,
                     Index dim, double rel_tol, int max_iters) {
  const auto gram = [&](const Vector& v) { return apply_t(apply(v)); };
  const double lam = power_iteration_psd(gram, dim, rel_tol, max_iters);
  return std::sqrt(std::max(lam, 0.0));
}

double min_eigenvalue_sym(const std::function<Vector(const Vector&)>& apply,
                          Index dim, double rel_tol, int max_iters) {
  // ||A|| first; then the largest eigenvalue of (s I - A) is s - lambda_min.
  const double s = spectral_norm(apply, apply, dim, rel_tol, max_iters);
  if (s <= 0.0) return 0.0;
  const auto shifted = [&](const Vector& v) { return Vector(s * v - apply(v)); };
  const double t = power_iteration_psd(shifted, dim, rel_tol, max_iters);
  return s - t;
}

EstimatedConstants estimate_constants(const SaddleProblem& problem) {
  if (!problem.quadratic) {
    detail::require(
        problem.constants.L && problem.constants.delta && problem.constants.mu,
        "estimate_constants: problem has no affine structure and no declared "
        "constants");
    return {*problem.constants.L, *problem.constants.delta,
            *problem.constants.mu};
  }
  const QuadraticForm& form = *problem.quadratic;
  const Index d = form.dim();
  EstimatedConstants est;
  for (int i = 0; i < form.nodes(); ++i) {
    const auto& Bi = form.apply[static_cast<size_t>(i)];
    const auto& Bit = form.apply_t[static_cast<size_t>(i)];
    est.L = std::max(est.L, spectral_norm(Bi, Bit, d));
    const auto diff = [&](const Vector& v) {
      return Vector(Bi(v) - form.apply_mean(v));
    };
    const auto diff_t = [&](const Vector& v) {
      return Vector(Bit(v) - form.apply_mean_t(v));
    };
    est.delta = std::max(est.delta, spectral_norm(diff, diff_t, d));
  }
  const auto sym_mean = [&](const Vector& v) {
    return Vector(0.5 * (form.apply_mean(v) + form.apply_mean_t(v)));
  };
  est.mu = std::max(0.0, min_eigenvalue_sym(sym_mean, d));
  return est;
}

// ---------------------------------------------------------------------------
// Robust regression
// ---------------------------------------------------------------------------

RegressionVariant RegressionVariant::Constrained(double R_x, double R_y) {
  detail::require(R_x > 0 && R_y > 0,
                  "RegressionVariant::Constrained: radii must be positive");
  RegressionVariant v;
  v.kind = Kind::kConstrained;
  v.R_x = R_x;
  v.R_y = R_y;
  return v;
}

RegressionVariant RegressionVariant::Regularized(double lambda, double beta) {
  detail::require(lambda > 0 && beta > 0,
                  "RegressionVariant::Regularized: lambda/beta must be positive");
  RegressionVariant v;
  v.kind = Kind::kRegularized;
  v.lambda = lambda;
  v.beta = beta;
  return v;
}

namespace {

struct RegressionShared {
  Matrix A;  // shuffled rows
  Vector b;
  std::vector<Index> start;  // n+1 block boundaries
  RegressionVariant variant;
};

// Rigorous bounds on smoothness and similarity over the region
// ||x|| <= Rx2, ||y|| <= Ry. The Hessian of block i at (x, y) is
//   [ M_i + a_i y' + y a_i' + y y',  (a_i + y) x' + r_i I ]
//   [ (x (a_i + y)' + r_i I)',       x x'                 ]
// with M_i the block second moment, a_i the block feature mean, r_i the block
// mean residual; spectral norms of block matrices are bounded by
// max(diag blocks) + off-diagonal block.
struct RegionBounds {
  double L = 0.0;
  double delta = 0.0;
};

RegionBounds regression_region_bounds(const RegressionShared& sh, double Rx2,
                                      double Ry) {
  const Index d = sh.A.cols();
  const Index N = sh.A.rows();
  const int n = static_cast<int>(sh.start.size()) - 1;
  const Matrix M = (sh.A.transpose() * sh.A) / static_cast<double>(N);
  const Vector a_bar = sh.A.colwise().mean().transpose();
  const double b_bar = sh.b.mean();

  RegionBounds out;
  Matrix Mi(d, d);
  for (int i = 0; i < n; ++i) {
    const Index s0 = sh.start[static_cast<size_t>(i)];
    const Index m = sh.start[static_cast<size_t>(i) + 1] - s0;
    const auto Ab = sh.A.middleRows(s0, m);
    Mi.noalias() = (Ab.transpose() * Ab) / static_cast<double>(m);
    const Vector ai = Ab.colwise().mean().transpose();
    const double bi = sh.b.segment(s0, m).mean();

    Eigen::SelfAdjointEigenSolver<Matrix> es_i(Mi,
                                               Eigen::EigenvaluesOnly);
    const double nMi = es_i.eigenvalues().cwiseAbs().maxCoeff();
    Eigen::SelfAdjointEigenSolver<Matrix> es_d(Matrix(Mi - M),
                                               Eigen::EigenvaluesOnly);
    const double nDiff = es_d.eigenvalues().cwiseAbs().maxCoeff();

    const double da = (ai - a_bar).norm();
    const double db = std::abs(bi - b_bar);
    out.delta =
        std::max(out.delta, nDiff + 2.0 * da * (Ry + Rx2) + db);

    const double na = ai.norm();
    const double diag = std::max(nMi + 2.0 * na * Ry + Ry * Ry, Rx2 * Rx2);
    const double off =
        (na + Ry) * Rx2 + (na * Rx2 + Rx2 * Ry + std::abs(bi));
    out.L = std::max(out.L, diag + off);
  }
  return out;
}

}  // namespace

SaddleProblem build_robust_regression(const RegressionData& data, int n,
                                      const RegressionVariant& variant,
                                      std::uint64_t partition_seed) {
  const Index N = data.rows();
  const Index d = data.cols();
  detail::require(N >= 1 && d >= 1, "build_robust_regression: empty data");
  detail::require(data.b.size() == N,
                  "build_robust_regression: label count mismatch");
  detail::require(n >= 1, "build_robust_regression: n must be >= 1");
  detail::require(static_cast<Index>(n) <= N,
                  "build_robust_regression: more nodes than data rows");

  // Seeded Fisher-Yates shuffle of the row order, then contiguous blocks of
  // near-equal size (larger blocks first).
  std::vector<Index> perm(static_cast<size_t>(N));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = N - 1; i >= 1; --i) {
    const int j = rng::draw_index(partition_seed, rng::Stream::kPartition, 0,
                                  static_cast<std::uint64_t>(i),
                                  static_cast<int>(i) + 1);
    std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
  }

  auto sh = std::make_shared<RegressionShared>();
  sh->A.resize(N, d);
  sh->b.resize(N);
  for (Index s = 0; s < N; ++s) {
    sh->A.row(s) = data.A.row(perm[static_cast<size_t>(s)]);
    sh->b[s] = data.b[perm[static_cast<size_t>(s)]];
  }
  sh->variant = variant;
  sh->start.resize(static_cast<size_t>(n) + 1);
  const Index base = N / n;
  const Index rem = N % n;
  sh->start[0] = 0;
  for (int i = 0; i < n; ++i) {
    sh->start[static_cast<size_t>(i) + 1] =
        sh->start[static_cast<size_t>(i)] + base + (i < rem ? 1 : 0);
  }

  SaddleProblem p;
  p.n = n;
  p.dx = d;
  p.dy = d;
  p.concave_in_y = false;  // the y y'-curvature x x' >= 0 is convex in y
  const bool reg = variant.kind == RegressionVariant::Kind::kRegularized;
  if (reg) {
    p.constraint = ConstraintSet::Free();
  } else {
    p.constraint.x_set = BlockSet::L1Ball(variant.R_x);
    p.constraint.y_set = BlockSet::Ball(variant.R_y);
  }

  for (int i = 0; i < n; ++i) {
    const Index s0 = sh->start[static_cast<size_t>(i)];
    const Index m = sh->start[static_cast<size_t>(i) + 1] - s0;
    p.operators.push_back([sh, s0, m, reg](const Point& z) {
      const auto Ab = sh->A.middleRows(s0, m);
      const double t = z.x.dot(z.y);
      Vector r = Ab * z.x;
      r.array() += t;
      r -= sh->b.segment(s0, m);
      const double rbar = r.mean();
      Vector gx = (Ab.transpose() * r) / static_cast<double>(m) + rbar * z.y;
      Vector gy = rbar * z.x;  // grad_y
      if (reg) {
        gx += sh->variant.lambda * z.x;
        gy -= sh->variant.beta * z.y;
      }
      return Point(std::move(gx), Vector(-gy));
    });
    p.values.push_back([sh, s0, m, reg](const Point& z) {
      const auto Ab = sh->A.middleRows(s0, m);
      const double t = z.x.dot(z.y);
      Vector r = Ab * z.x;
      r.array() += t;
      r -= sh->b.segment(s0, m);
      double v = 0.5 * r.squaredNorm() / static_cast<double>(m);
      if (reg) {
        v += 0.5 * sh->variant.lambda * z.x.squaredNorm() -
             0.5 * sh->variant.beta * z.y.squaredNorm();
      }
      return v;
    });
  }

  // Declared constants: rigorous over the feasible region for the constrained
  // variant (for the l1 ball, ||x||_2 <= R_x). The unconstrained regularized
  // variant uses a reference ball sized from the ridge solution at zero
  // noise; those values feed step-size tuning only.
  double Rx2, Ry;
  if (reg) {
    const Matrix M = (sh->A.transpose() * sh->A) / static_cast<double>(N);
    const Vector c = (sh->A.transpose() * sh->b) / static_cast<double>(N);
    const Vector x_ridge =
        (M + variant.lambda * Matrix::Identity(d, d)).ldlt().solve(c);
    Rx2 = Ry = 2.0 * std::max(1.0, x_ridge.norm());
  } else {
    Rx2 = variant.R_x;
    Ry = variant.R_y;
  }
  const RegionBounds bounds = regression_region_bounds(*sh, Rx2, Ry);
  p.constants.delta = bounds.delta;
  p.constants.L =
      bounds.L + (reg ? std::max(variant.lambda, variant.beta) : 0.0);
  // Nominal modulus: the regularizers contribute min(lambda, beta); the data
  // term's y-curvature x x' >= 0 works against concavity, so this is the
  // design value, not a certified global modulus.
  p.constants.mu = reg ? std::min(variant.lambda, variant.beta) : 0.0;

  p.validate();
  return p;
}

RegressionData make_synthetic_regression(const SyntheticRegressionConfig& cfg) {
  detail::require(cfg.N >= 1 && cfg.d >= 1,
                  "make_synthetic_regression: N and d must be positive");
  const std::uint64_t seed = cfg.seed;
  Vector a_bar(cfg.d), x_true(cfg.d);
  for (Index j = 0; j < cfg.d; ++j) {
    a_bar[j] = rng::draw_normal(seed, rng::Stream::kSynthetic, 0,
                                static_cast<std::uint64_t>(j));
    x_true[j] = rng::draw_normal(seed, rng::Stream::kSynthetic, 0,
                                 static_cast<std::uint64_t>(cfg.d + j));
  }
  if (a_bar.norm() > 0) a_bar *= cfg.mean_scale / a_bar.norm();
  if (x_true.norm() > 0) x_true /= x_true.norm();

  RegressionData data;
  data.A.resize(cfg.N, cfg.d);
  data.b.resize(cfg.N);
  for (Index s = 0; s < cfg.N; ++s) {
    const auto row = static_cast<std::uint64_t>(s) + 1;
    for (Index j = 0; j < cfg.d; ++j) {
      data.A(s, j) = a_bar[j] + cfg.spread * rng::draw_normal(
                                                 seed, rng::Stream::kSynthetic,
                                                 row,
                                                 static_cast<std::uint64_t>(j));
    }
    data.b[s] = data.A.row(s).dot(x_true) +
                cfg.noise * rng::draw_normal(seed, rng::Stream::kSynthetic,
                                             row,
                                             static_cast<std::uint64_t>(cfg.d));
  }
  return data;
}

// ---------------------------------------------------------------------------
// Regularization toward a small gradient mapping
// ---------------------------------------------------------------------------

RegularizedProblem regularize_for_small_gradient(
    const SaddleProblem& problem, double eps, const Point& z0,
    std::optional<double> diameter) {
  detail::require(eps > 0, "regularize_for_small_gradient: eps must be > 0");
  detail::require(z0.dx() == problem.dx && z0.dy() == problem.dy,
                  "regularize_for_small_gradient: anchor dimension mismatch");
  double D;
  if (diameter) {
    D = *diameter;
  } else {
    const auto dia = problem.constraint.diameter();
    detail::require(dia.has_value(),
                    "regularize_for_small_gradient: unbounded domain needs an "
                    "explicit diameter");
    D = *dia;
  }
  detail::require(D > 0, "regularize_for_small_gradient: diameter must be > 0");
  const double lambda = std::sqrt(eps / (4.0 * D * D));

  RegularizedProblem out;
  out.lambda = lambda;
  SaddleProblem& q = out.problem;
  q.n = problem.n;
  q.dx = problem.dx;
  q.dy = problem.dy;
  q.constraint = problem.constraint;
  q.concave_in_y = problem.concave_in_y;
  const auto anchor = std::make_shared<Point>(z0);
  for (int i = 0; i < problem.n; ++i) {
    auto base = problem.operators[static_cast<size_t>(i)];
    // f_i + (lambda/2)||x-x0||^2 - (lambda/2)||y-y0||^2 shifts the stacked
    // operator by lambda (z - z0) in both blocks.
    q.operators.push_back([base, anchor, lambda](const Point& z) {
      Point g = base(z);
      g.x += lambda * (z.x - anchor->x);
      g.y += lambda * (z.y - anchor->y);
      return g;
    });
    if (problem.has_values()) {
      auto val = problem.values[static_cast<size_t>(i)];
      q.values.push_back([val, anchor, lambda](const Point& z) {
        return val(z) + 0.5 * lambda * (z.x - anchor->x).squaredNorm() -
               0.5 * lambda * (z.y - anchor->y).squaredNorm();
      });
    }
  }
  if (problem.constants.L) q.constants.L = *problem.constants.L + lambda;
  q.constants.delta = problem.constants.delta;
  q.constants.mu = problem.constants.mu.value_or(0.0) + lambda;
  if (problem.quadratic) {
    QuadraticForm form;
    const Vector z0s = z0.stacked();
    for (int i = 0; i < problem.n; ++i) {
      auto Bi = problem.quadratic->apply[static_cast<size_t>(i)];
      auto Bit = problem.quadratic->apply_t[static_cast<size_t>(i)];
      form.apply.push_back(
          [Bi, lambda](const Vector& v) { return Vector(Bi(v) + lambda * v); });
      form.apply_t.push_back([Bit, lambda](const Vector& v) {
        return Vector(Bit(v) + lambda * v);
      });
      form.offset.push_back(
          problem.quadratic->offset[static_cast<size_t>(i)] - lambda * z0s);
    }
    q.quadratic = std::move(form);
  }
  q.validate();
  return out;
}

}  // namespace svogs
