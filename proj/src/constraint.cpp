#include "svogs/constraint.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace svogs {

BlockSet BlockSet::Ball(double r) {
  detail::require(r > 0.0, "BlockSet::Ball: radius must be positive");
  BlockSet s;
  s.kind = Kind::kBall;
  s.radius = r;
  return s;
}

BlockSet BlockSet::L1Ball(double r) {
  detail::require(r > 0.0, "BlockSet::L1Ball: radius must be positive");
  BlockSet s;
  s.kind = Kind::kL1Ball;
  s.radius = r;
  return s;
}

BlockSet BlockSet::Box(Vector lo, Vector hi) {
  detail::require(lo.size() == hi.size(),
                  "BlockSet::Box: lo/hi dimension mismatch");
  detail::require((lo.array() <= hi.array()).all(),
                  "BlockSet::Box: requires lo <= hi componentwise");
  BlockSet s;
  s.kind = Kind::kBox;
  s.lo = std::move(lo);
  s.hi = std::move(hi);
  return s;
}

Vector project_l1_ball(const Vector& v, double r) {
  detail::require(r > 0.0, "project_l1_ball: radius must be positive");
  if (v.lpNorm<1>() <= r) return v;
  // Threshold theta solves sum_i max(|v_i| - theta, 0) = r; with u = sorted
  // |v| descending, theta = (sum_{i<=k} u_i - r)/k for the largest feasible k.
  const Index d = v.size();
  std::vector<double> u(static_cast<size_t>(d));
  for (Index i = 0; i < d; ++i) u[static_cast<size_t>(i)] = std::abs(v[i]);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Index k = 0; k < d; ++k) {
    cumsum += u[static_cast<size_t>(k)];
    const double cand = (cumsum - r) / static_cast<double>(k + 1);
    if (cand < u[static_cast<size_t>(k)]) {
      theta = cand;
    } else {
      break;
    }
  }
  Vector w(d);
  for (Index i = 0; i < d; ++i) {
    const double mag = std::abs(v[i]) - theta;
    w[i] = mag > 0.0 ? (v[i] > 0.0 ? mag : -mag) : 0.0;
  }
  return w;
}

Vector BlockSet::project(const Vector& v) const {
  switch (kind) {
    case Kind::kFree:
      return v;
    case Kind::kBall: {
      const double nrm = v.norm();
      if (nrm <= radius) return v;
      return v * (radius / nrm);
    }
    case Kind::kL1Ball:
      return project_l1_ball(v, radius);
    case Kind::kBox: {
      detail::require(v.size() == lo.size(),
                      "BlockSet::project: box dimension mismatch");
      return v.cwiseMax(lo).cwiseMin(hi);
    }
  }
  throw InvalidArgument("BlockSet::project: unknown set kind");
}

bool BlockSet::contains(const Vector& v, double tol) const {
  switch (kind) {
    case Kind::kFree:
      return true;
    case Kind::kBall:
      return v.norm() <= radius + tol;
    case Kind::kL1Ball:
      return v.lpNorm<1>() <= radius + tol;
    case Kind::kBox:
      detail::require(v.size() == lo.size(),
                      "BlockSet::contains: box dimension mismatch");
      return (v.array() >= lo.array() - tol).all() &&
             (v.array() <= hi.array() + tol).all();
  }
  throw InvalidArgument("BlockSet::contains: unknown set kind");
}

std::optional<double> BlockSet::diameter() const {
  switch (kind) {
    case Kind::kFree:
      return std::nullopt;
    case Kind::kBall:
    case Kind::kL1Ball:
      // The l1 ball contains +-r e_1, and ||u - w||_2 <= ||u - w||_1 <= 2r.
      return 2.0 * radius;
    case Kind::kBox:
      return (hi - lo).norm();
  }
  throw InvalidArgument("BlockSet::diameter: unknown set kind");
}

std::optional<double> ConstraintSet::diameter() const {
  const auto dx = x_set.diameter();
  const auto dy = y_set.diameter();
  if (!dx || !dy) return std::nullopt;
  return std::sqrt(*dx * *dx + *dy * *dy);
}

}  // namespace svogs
