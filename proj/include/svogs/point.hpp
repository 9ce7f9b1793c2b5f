#pragma once

#include <Eigen/Core>

#include "svogs/common.hpp"

namespace svogs {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// A primal-dual pair z = (x, y). Algorithms treat z as one stacked vector in
// R^{dx+dy}; keeping the blocks explicit avoids repeated slicing at call
// sites and keeps the sign convention of the stacked operator
//   F_i(z) = [ grad_x f_i(z); -grad_y f_i(z) ]
// local to the operator implementations.
struct Point {
  Vector x;
  Vector y;

  Point() = default;
  Point(Vector x_in, Vector y_in) : x(std::move(x_in)), y(std::move(y_in)) {}

  static Point Zero(Index dx, Index dy) {
    return Point(Vector::Zero(dx), Vector::Zero(dy));
  }

  Index dx() const { return x.size(); }
  Index dy() const { return y.size(); }
  Index dim() const { return x.size() + y.size(); }

  Vector stacked() const {
    Vector z(dim());
    z << x, y;
    return z;
  }

  static Point from_stacked(const Vector& z, Index dx) {
    detail::require(dx >= 0 && dx <= z.size(),
                    "Point::from_stacked: dx out of range");
    return Point(z.head(dx), z.tail(z.size() - dx));
  }

  double dot(const Point& o) const { return x.dot(o.x) + y.dot(o.y); }
  double squared_norm() const { return x.squaredNorm() + y.squaredNorm(); }
  double norm() const { return std::sqrt(squared_norm()); }

  Point& operator+=(const Point& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Point& operator-=(const Point& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  Point& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }

  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }
  friend Point operator*(double s, Point a) { return a *= s; }
  friend Point operator*(Point a, double s) { return a *= s; }

  bool same_shape(const Point& o) const {
    return x.size() == o.x.size() && y.size() == o.y.size();
  }
};

}  // namespace svogs
