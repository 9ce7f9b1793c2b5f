#pragma once

#include <optional>

#include "svogs/point.hpp"

namespace svogs {

// Feasible set for one variable block. Supported primitives: unconstrained,
// origin-centered Euclidean ball, origin-centered l1 ball, axis-aligned box.
struct BlockSet {
  enum class Kind { kFree, kBall, kL1Ball, kBox };

  Kind kind = Kind::kFree;
  double radius = 0.0;  // kBall / kL1Ball
  Vector lo, hi;        // kBox

  static BlockSet Free() { return BlockSet{}; }
  static BlockSet Ball(double r);
  static BlockSet L1Ball(double r);
  static BlockSet Box(Vector lo, Vector hi);

  // Euclidean projection onto the set.
  Vector project(const Vector& v) const;

  bool contains(const Vector& v, double tol) const;

  // Euclidean diameter; nullopt means unbounded.
  std::optional<double> diameter() const;
};

// Product set Z = X x Y with per-block projection. The projection of a
// product set is the product of the block projections.
struct ConstraintSet {
  BlockSet x_set;
  BlockSet y_set;

  static ConstraintSet Free() { return ConstraintSet{}; }

  Point project(const Point& z) const {
    return Point(x_set.project(z.x), y_set.project(z.y));
  }
  bool contains(const Point& z, double tol) const {
    return x_set.contains(z.x, tol) && y_set.contains(z.y, tol);
  }
  bool is_free() const {
    return x_set.kind == BlockSet::Kind::kFree &&
           y_set.kind == BlockSet::Kind::kFree;
  }
  // Diameter of the product set: sqrt(Dx^2 + Dy^2); nullopt if unbounded.
  std::optional<double> diameter() const;
};

// Projection onto { w : ||w||_1 <= r }. Sort-based O(d log d) algorithm:
// project |v| onto the simplex of radius r via the sorted-threshold rule,
// then restore signs. Exposed for direct testing.
Vector project_l1_ball(const Vector& v, double r);

}  // namespace svogs
