#pragma once

#include <string>
#include <vector>

#include "svogs/netsim.hpp"
#include "svogs/problem.hpp"

namespace svogs {

// Chain ("zero-chain") coupling matrices, applied as O(d) matvecs and never
// stored densely. With 1-based rows:
//   A  : unit diagonal, -1 on the superdiagonal;
//   A1 : unit diagonal, -2 on the superdiagonal in even rows (2, 4, ...);
//   A2 : unit diagonal, -2 on the superdiagonal in odd rows (1, 3, ...);
//   At : row-reversed A (ones on the anti-diagonal, -1 beside it);
//   row_block(n, i): the rows j of A with j == (i-1) (mod n-1), i >= 2 —
//     a partition of A's rows across n-1 client nodes.
// A1 + A2 == 2A, and the row blocks sum to A.
struct ChainMatrices {
  Index d = 0;

  explicit ChainMatrices(Index dim) : d(dim) {}

  Vector A(const Vector& v) const;
  Vector At_(const Vector& v) const;  // A'
  Vector A1(const Vector& v) const;
  Vector A1t(const Vector& v) const;
  Vector A2(const Vector& v) const;
  Vector A2t(const Vector& v) const;
  Vector Anti(const Vector& v) const;   // row-reversed A
  Vector Antit(const Vector& v) const;  // its transpose
  Vector row_block(int n, int i, const Vector& v) const;
  Vector row_block_t(int n, int i, const Vector& v) const;
};

enum class InstanceKind {
  kCcRounds,   // bilinear chain split across three node types
  kCcComm,     // bilinear chain rows partitioned across clients
  kCcGrad,     // identical bilinear chain on every node
  kScscComm,   // strongly-monotone variant of the row partition
  kScscGrad,   // identical anti-diagonal chain with quadratic terms
};
std::string to_string(InstanceKind kind);

struct HardInstanceSpec {
  InstanceKind kind = InstanceKind::kCcRounds;
  int n = 3;
  Index d = 3;      // per-block dimension: x, y in R^d each
  double delta = 1.0;
  double mu = 0.0;  // required > 0 for scsc kinds, 0 for cc kinds
  double L = 1.0;
  double R_x = 1.0;  // ball radii, cc kinds only
  double R_y = 1.0;
};

// A constructed worst-case instance. The mean objective has the form
//   f(x, y) = theta x'A_mean y + c_x'x + c_y'y + (mu/2)||x||^2 - (mu/2)||y||^2
// where A_mean is A (or its row-reversed variant) and the linear parts are
// multiples of e_1; those coefficients drive the closed-form gap.
struct HardInstance {
  HardInstanceSpec params;
  SaddleProblem problem;
  double theta = 0.0;
  bool anti_chain = false;  // mean coupling is the row-reversed chain
  Vector c_x, c_y;

  // Whether a fresh gradient evaluation by `node` can extend the nonzero
  // coordinate range from `frontier` to frontier+1 (the numeric form of the
  // coordinate-growth lemmas).
  bool advance_allowed(int node, Index frontier) const;
};

HardInstance build_hard_instance(const HardInstanceSpec& spec);

// Closed-form duality gap for the bilinear cc kinds:
//   Gap(x,y) = c_x'x + R_y ||theta A'x + c_y|| + R_x ||theta A y + c_x|| - c_y'y.
// Errors on scsc kinds (quadratic terms; use the iterative gap instead).
double exact_bilinear_gap(const HardInstance& inst, const Point& z);

// Zero-chain verification: replays the recorded fresh-evaluation history
// through the coordinate-growth rule and checks that no recorded iterate has
// support beyond the predicted frontier. `iterates` pairs each published
// point with the round after which it existed (round 0 = initialization).
struct ZeroChainReport {
  bool pass = true;
  std::vector<Index> frontier_bound;    // predicted frontier after each round
  std::vector<Index> observed_support;  // max support of iterates per round
  std::string message;
};
struct TracedIterate {
  int round = 0;
  Point z;
};
ZeroChainReport verify_zero_chain(const HardInstance& inst,
                                  const std::vector<RoundEvents>& events,
                                  const std::vector<TracedIterate>& iterates);

// Compares the spectral constants of the realized operator blocks against
// the construction's claims.
struct InstanceConstantsReport {
  bool pass = true;
  double L_est = 0, delta_est = 0, mu_est = 0;
  double L_claimed = 0, delta_claimed = 0, mu_claimed = 0;
  std::string message;
};
InstanceConstantsReport verify_instance_constants(const HardInstance& inst);

// Largest 1-based coordinate index with |value| > 1e-14 across both blocks.
Index support_frontier(const Point& z);

}  // namespace svogs
