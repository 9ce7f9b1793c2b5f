#include "svogs/metrics.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace svogs {

namespace {

double smoothness_or_estimate(const SaddleProblem& p) {
  if (p.constants.L && *p.constants.L > 0.0) return *p.constants.L;
  const EstimatedConstants est = estimate_constants(p);
  detail::require(est.L > 0.0, "cannot determine a smoothness constant");
  return est.L;
}

}  // namespace

Point grad_mapping(const SaddleProblem& p, const Point& z, double tau) {
  detail::require(tau > 0.0, "gradient-mapping step must be positive");
  const Point g = p.eval_mean(z);
  if (p.constraint.is_free()) return g;
  Point step = z;
  step -= tau * g;
  const Point proj = p.constraint.project(step);
  Point out = z;
  out -= proj;
  out *= 1.0 / tau;
  return out;
}

double grad_mapping_norm(const SaddleProblem& p, const Point& z, double tau) {
  return grad_mapping(p, z, tau).norm();
}

double duality_gap(const SaddleProblem& p, const Point& z,
                   const DualityGapConfig& cfg) {
  detail::require_op(p.has_values(),
                     "duality gap needs objective values, which this problem "
                     "does not provide");
  detail::require_op(p.concave_in_y,
                     "duality gap by ascent requires the objective to be "
                     "declared concave in y");
  detail::require(cfg.max_iters > 0, "duality gap budget must be positive");
  const double L = cfg.step > 0.0 ? 1.0 / cfg.step : smoothness_or_estimate(p);
  const double s = cfg.step > 0.0 ? cfg.step : 1.0 / L;

  // max over y' of f(x, y'): projected ascent on the y block (F carries
  // -grad_y, so the ascent direction is -F_y).
  Point best_y = z;
  for (int it = 0; it < cfg.max_iters; ++it) {
    const Point g = p.eval_mean(best_y);
    Vector y_next = p.constraint.y_set.project(best_y.y - s * g.y);
    const double move = (y_next - best_y.y).norm() / s;
    best_y.y = std::move(y_next);
    if (move <= cfg.tol) break;
  }
  // min over x' of f(x', y): projected descent on the x block.
  Point best_x = z;
  for (int it = 0; it < cfg.max_iters; ++it) {
    const Point g = p.eval_mean(best_x);
    Vector x_next = p.constraint.x_set.project(best_x.x - s * g.x);
    const double move = (x_next - best_x.x).norm() / s;
    best_x.x = std::move(x_next);
    if (move <= cfg.tol) break;
  }
  return p.value_mean(Point(z.x, best_y.y)) - p.value_mean(Point(best_x.x, z.y));
}

double duality_gap(const HardInstance& inst, const Point& z) {
  return exact_bilinear_gap(inst, z);
}

double lyapunov(const SaddleProblem& p, const LyapunovCoeffs& c,
                LyapunovVariant variant, const Point& z_k, const Point& z_km1,
                const Point& w_k, const Point& w_km1, const Point& z_star) {
  detail::require(c.eta > 0.0 && c.p > 0.0 && c.gamma >= 0.0 && c.mu >= 0.0,
                  "potential coefficients out of range");
  const double drift_w = variant == LyapunovVariant::kDriftQuarter ? 0.25 : 0.5;

  Point dz = z_k;
  dz -= z_star;
  double phi = (1.0 / c.eta + c.mu) * dz.squared_norm();

  // Cross term: 2 <(F - F_1)(z_{k-1}) - (F - F_1)(z_k), z_k - z*>.
  Point g_prev = p.eval_mean(z_km1);
  g_prev -= p.eval_local(1, z_km1);
  Point g_cur = p.eval_mean(z_k);
  g_cur -= p.eval_local(1, z_k);
  g_prev -= g_cur;
  phi += 2.0 * g_prev.dot(dz);

  Point disp = z_k;
  disp -= z_km1;
  phi += disp.squared_norm() / (64.0 * c.eta);

  Point drift = w_km1;
  drift -= z_k;
  phi += drift_w * (c.gamma / c.eta) * drift.squared_norm();

  Point dw = w_k;
  dw -= z_star;
  phi += (2.0 * c.gamma + c.eta * c.mu) / (2.0 * c.p * c.eta) * dw.squared_norm();
  return phi;
}

ReferenceSolution reference_solution(const SaddleProblem& p,
                                     const ReferenceConfig& cfg) {
  detail::require(cfg.tol > 0.0 && cfg.max_iters > 0,
                  "reference solve needs a positive tolerance and budget");
  const double L = smoothness_or_estimate(p);
  const double tau = cfg.tau > 0.0 ? cfg.tau : 1.0 / L;

  ReferenceSolution ref;
  const Index dim = p.dx + p.dy;
  if (p.quadratic && p.constraint.is_free() && dim <= 2048) {
    // Stationarity is the linear system B z = -q for the mean operator.
    const Matrix B = p.quadratic->dense_mean(dim);
    const Vector q = p.quadratic->mean_offset();
    Eigen::FullPivLU<Matrix> lu(B);
    lu.setThreshold(1e-12);
    detail::require_op(lu.isInvertible(),
                       "the affine saddle operator is singular; the solution "
                       "set is not a single point");
    const Vector z = lu.solve(-q);
    ref.z_star = Point(z.head(p.dx), z.tail(p.dy));
    ref.residual = grad_mapping_norm(p, ref.z_star, tau);
    return ref;
  }

  double mu = p.constants.mu.value_or(0.0);
  if (mu <= 0.0 && p.quadratic) mu = estimate_constants(p).mu;
  detail::require_op(mu > 0.0,
                     "iterative reference solve requires strong monotonicity "
                     "(or an unconstrained affine operator)");

  // Extragradient with step 1/(2L), started from the projected origin.
  const double s = 0.5 / L;
  Point z = p.constraint.project(Point(Vector::Zero(p.dx), Vector::Zero(p.dy)));
  double res = grad_mapping_norm(p, z, tau);
  for (int it = 0; it < cfg.max_iters && res > cfg.tol; ++it) {
    Point half = z;
    half -= s * p.eval_mean(z);
    half = p.constraint.project(half);
    Point next = z;
    next -= s * p.eval_mean(half);
    z = p.constraint.project(next);
    if ((it + 1) % 16 == 0 || it + 1 == cfg.max_iters)
      res = grad_mapping_norm(p, z, tau);
  }
  ref.z_star = std::move(z);
  ref.residual = grad_mapping_norm(p, ref.z_star, tau);
  return ref;
}

}  // namespace svogs
