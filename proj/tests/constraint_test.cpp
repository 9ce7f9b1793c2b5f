#include <cmath>

#include "doctest.h"
#include "svogs/constraint.hpp"
#include "svogs/rng.hpp"

using namespace svogs;

namespace {

Vector random_vector(Index d, double scale, std::uint64_t seed,
                     std::uint64_t round) {
  Vector v(d);
  for (Index i = 0; i < d; ++i)
    v[i] = scale * rng::draw_normal(seed, rng::Stream::kProbe, round, i);
  return v;
}

// Independent l1-ball projection: soft threshold with the multiplier found
// by bisection on sum_i max(|v_i| - t, 0) = r.
Vector l1_project_bisection(const Vector& v, double r) {
  if (v.lpNorm<1>() <= r) return v;
  double lo = 0.0, hi = v.cwiseAbs().maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    double s = 0.0;
    for (Index i = 0; i < v.size(); ++i)
      s += std::max(std::abs(v[i]) - mid, 0.0);
    (s > r ? lo : hi) = mid;
  }
  const double t = 0.5 * (lo + hi);
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double m = std::max(std::abs(v[i]) - t, 0.0);
    out[i] = v[i] >= 0.0 ? m : -m;
  }
  return out;
}

}  // namespace

TEST_SUITE("constraint") {

TEST_CASE("ball projection scales to the boundary") {
  BlockSet ball = BlockSet::Ball(2.0);
  Vector v(3);
  v << 3.0, 4.0, 0.0;  // norm 5
  Vector p = ball.project(v);
  CHECK(p[0] == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(1.6).epsilon(1e-15));
  CHECK(p.norm() == doctest::Approx(2.0).epsilon(1e-15));
  // Interior points are fixed.
  Vector w(3);
  w << 0.5, -0.5, 0.1;
  CHECK((ball.project(w) - w).norm() == 0.0);
  CHECK(ball.contains(p, 1e-12));
  CHECK_FALSE(ball.contains(v, 1e-12));
  CHECK(ball.diameter().value() == doctest::Approx(4.0));
}

TEST_CASE("box projection clamps coordinatewise") {
  Vector lo(2), hi(2);
  lo << -1.0, 0.0;
  hi << 1.0, 2.0;
  BlockSet box = BlockSet::Box(lo, hi);
  Vector v(2);
  v << -3.0, 5.0;
  Vector p = box.project(v);
  CHECK(p[0] == -1.0);
  CHECK(p[1] == 2.0);
  CHECK(box.diameter().value() == doctest::Approx(std::sqrt(4.0 + 4.0)));
}

TEST_CASE("l1 projection matches a bisection oracle") {
  for (int t = 0; t < 200; ++t) {
    const Index d = 1 + t % 13;
    const double r = 0.25 + 0.5 * (t % 7);
    Vector v = random_vector(d, 2.0, 11, static_cast<std::uint64_t>(t));
    Vector mine = project_l1_ball(v, r);
    Vector oracle = l1_project_bisection(v, r);
    CHECK((mine - oracle).lpNorm<Eigen::Infinity>() <= 1e-9);
    CHECK(mine.lpNorm<1>() <= r * (1.0 + 1e-12));
  }
}

TEST_CASE("l1 projection optimality via random competitors") {
  const double r = 1.5;
  Vector v = random_vector(8, 2.0, 13, 1);
  Vector p = project_l1_ball(v, r);
  const double best = (p - v).squaredNorm();
  for (int t = 0; t < 500; ++t) {
    Vector q = project_l1_ball(
        random_vector(8, 2.0, 13, 2 + static_cast<std::uint64_t>(t)), r);
    CHECK((q - v).squaredNorm() >= best - 1e-10);
  }
}

TEST_CASE("free set is the identity with no diameter") {
  BlockSet freeb = BlockSet::Free();
  Vector v = random_vector(5, 3.0, 17, 0);
  CHECK((freeb.project(v) - v).norm() == 0.0);
  CHECK_FALSE(freeb.diameter().has_value());
}

TEST_CASE("product set projects blockwise and composes diameters") {
  ConstraintSet set;
  set.x_set = BlockSet::Ball(1.0);
  set.y_set = BlockSet::Ball(2.0);
  Point z(random_vector(4, 5.0, 19, 0), random_vector(3, 5.0, 19, 1));
  Point pz = set.project(z);
  CHECK((pz.x - set.x_set.project(z.x)).norm() == 0.0);
  CHECK((pz.y - set.y_set.project(z.y)).norm() == 0.0);
  CHECK(set.diameter().value() ==
        doctest::Approx(std::sqrt(4.0 + 16.0)).epsilon(1e-15));
  ConstraintSet partly;
  partly.x_set = BlockSet::Ball(1.0);
  CHECK_FALSE(partly.diameter().has_value());
  CHECK_FALSE(partly.is_free());
  CHECK(ConstraintSet::Free().is_free());
}

TEST_CASE("projection is idempotent and nonexpansive") {
  ConstraintSet set;
  set.x_set = BlockSet::L1Ball(1.0);
  set.y_set = BlockSet::Ball(0.5);
  for (int t = 0; t < 100; ++t) {
    const std::uint64_t r = static_cast<std::uint64_t>(t);
    Point a(random_vector(6, 2.0, 23, 2 * r), random_vector(4, 2.0, 23, 2 * r + 1));
    Point b(random_vector(6, 2.0, 29, 2 * r), random_vector(4, 2.0, 29, 2 * r + 1));
    Point pa = set.project(a), pb = set.project(b);
    CHECK((set.project(pa) - pa).norm() <= 1e-14);
    CHECK((pa - pb).norm() <= (a - b).norm() + 1e-12);
    CHECK(set.contains(pa, 1e-10));
  }
}

TEST_CASE("invalid radii are rejected") {
  CHECK_THROWS_AS(BlockSet::Ball(-1.0), InvalidArgument);
  CHECK_THROWS_AS(BlockSet::L1Ball(0.0), InvalidArgument);
  Vector lo(2), hi(1);
  lo << 0, 0;
  hi << 1;
  CHECK_THROWS_AS(BlockSet::Box(lo, hi), InvalidArgument);
}

}  // TEST_SUITE
