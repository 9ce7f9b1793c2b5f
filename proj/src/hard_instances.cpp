#include "svogs/hard_instances.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <utility>

namespace svogs {

namespace {

double ball_radius_or_throw(double r, const char* name) {
  detail::require(r > 0.0 && std::isfinite(r),
                  std::string(name) + " must be positive and finite");
  return r;
}

}  // namespace

Vector ChainMatrices::A(const Vector& v) const {
  Vector out(d);
  for (Index i = 0; i < d; ++i)
    out[i] = v[i] - (i + 1 < d ? v[i + 1] : 0.0);
  return out;
}

Vector ChainMatrices::At_(const Vector& v) const {
  Vector out(d);
  for (Index i = 0; i < d; ++i) out[i] = v[i] - (i >= 1 ? v[i - 1] : 0.0);
  return out;
}

Vector ChainMatrices::A1(const Vector& v) const {
  // -2 on the superdiagonal of even 1-based rows (rows 2, 4, ...).
  Vector out(d);
  for (Index i = 0; i < d; ++i) {
    const bool hot = ((i + 1) % 2 == 0) && (i + 1 < d);
    out[i] = v[i] - (hot ? 2.0 * v[i + 1] : 0.0);
  }
  return out;
}

Vector ChainMatrices::A1t(const Vector& v) const {
  Vector out(d);
  for (Index i = 0; i < d; ++i) {
    const bool hot = (i >= 1) && (i % 2 == 0);  // source row i (1-based) even
    out[i] = v[i] - (hot ? 2.0 * v[i - 1] : 0.0);
  }
  return out;
}

Vector ChainMatrices::A2(const Vector& v) const {
  // -2 on the superdiagonal of odd 1-based rows (rows 1, 3, ...).
  Vector out(d);
  for (Index i = 0; i < d; ++i) {
    const bool hot = ((i + 1) % 2 == 1) && (i + 1 < d);
    out[i] = v[i] - (hot ? 2.0 * v[i + 1] : 0.0);
  }
  return out;
}

Vector ChainMatrices::A2t(const Vector& v) const {
  Vector out(d);
  for (Index i = 0; i < d; ++i) {
    const bool hot = (i >= 1) && (i % 2 == 1);
    out[i] = v[i] - (hot ? 2.0 * v[i - 1] : 0.0);
  }
  return out;
}

Vector ChainMatrices::Anti(const Vector& v) const {
  // Row-reversal of A: row 1 is e_d, row i is e_{d+1-i} - e_{d+2-i}.
  Vector av = A(v);
  return av.reverse();
}

Vector ChainMatrices::Antit(const Vector& v) const {
  Vector rev = v.reverse();
  return At_(rev);
}

Vector ChainMatrices::row_block(int n, int i, const Vector& v) const {
  detail::require(n >= 2 && i >= 2 && i <= n, "row_block requires 2 <= i <= n");
  const Index m = n - 1;
  const Index res = static_cast<Index>((i - 1) % m);
  Vector out = Vector::Zero(d);
  for (Index j = 1; j <= d; ++j) {
    if (j % m != res) continue;
    out[j - 1] = v[j - 1] - (j < d ? v[j] : 0.0);
  }
  return out;
}

Vector ChainMatrices::row_block_t(int n, int i, const Vector& v) const {
  detail::require(n >= 2 && i >= 2 && i <= n, "row_block requires 2 <= i <= n");
  const Index m = n - 1;
  const Index res = static_cast<Index>((i - 1) % m);
  Vector out = Vector::Zero(d);
  for (Index j = 1; j <= d; ++j) {
    if (j % m != res) continue;
    out[j - 1] += v[j - 1];
    if (j < d) out[j] -= v[j - 1];
  }
  return out;
}

std::string to_string(InstanceKind kind) {
  switch (kind) {
    case InstanceKind::kCcRounds: return "cc-rounds";
    case InstanceKind::kCcComm: return "cc-comm";
    case InstanceKind::kCcGrad: return "cc-grad";
    case InstanceKind::kScscComm: return "scsc-comm";
    case InstanceKind::kScscGrad: return "scsc-grad";
  }
  return "unknown";
}

namespace {

// Per-node affine description: grad_x = theta M y + c_x + mu x and
// grad_y = theta M' x + c_y - mu y, so F = [grad_x; -grad_y].
struct NodeDef {
  double theta = 0.0;
  std::function<Vector(const Vector&)> M, Mt;
  Vector cx, cy;  // empty when absent
};

SaddleProblem assemble(const HardInstanceSpec& s,
                       const std::vector<NodeDef>& defs, double mu,
                       ConstraintSet constraint, ProblemConstants claimed) {
  const Index d = s.d;
  SaddleProblem p;
  p.n = s.n;
  p.dx = d;
  p.dy = d;
  p.constraint = std::move(constraint);
  p.constants = claimed;
  p.concave_in_y = true;

  QuadraticForm qf;
  for (const NodeDef& def : defs) {
    p.operators.push_back([def, mu, d](const Point& z) {
      Point g(Vector::Zero(d), Vector::Zero(d));
      if (def.theta != 0.0) {
        g.x = def.theta * def.M(z.y);
        g.y = -def.theta * def.Mt(z.x);
      }
      if (def.cx.size() > 0) g.x += def.cx;
      if (def.cy.size() > 0) g.y -= def.cy;
      if (mu != 0.0) {
        g.x += mu * z.x;
        g.y += mu * z.y;
      }
      return g;
    });
    p.values.push_back([def, mu](const Point& z) {
      double v = 0.0;
      if (def.theta != 0.0) v += def.theta * z.x.dot(def.M(z.y));
      if (def.cx.size() > 0) v += def.cx.dot(z.x);
      if (def.cy.size() > 0) v += def.cy.dot(z.y);
      if (mu != 0.0) v += 0.5 * mu * (z.x.squaredNorm() - z.y.squaredNorm());
      return v;
    });
    qf.apply.push_back([def, mu, d](const Vector& v) {
      Vector out(2 * d);
      Vector gx = Vector::Zero(d), gy = Vector::Zero(d);
      if (def.theta != 0.0) {
        gx = def.theta * def.M(v.tail(d));
        gy = -def.theta * def.Mt(v.head(d));
      }
      if (mu != 0.0) {
        gx += mu * v.head(d);
        gy += mu * v.tail(d);
      }
      out.head(d) = gx;
      out.tail(d) = gy;
      return out;
    });
    qf.apply_t.push_back([def, mu, d](const Vector& v) {
      Vector out(2 * d);
      Vector gx = Vector::Zero(d), gy = Vector::Zero(d);
      if (def.theta != 0.0) {
        gx = -def.theta * def.M(v.tail(d));
        gy = def.theta * def.Mt(v.head(d));
      }
      if (mu != 0.0) {
        gx += mu * v.head(d);
        gy += mu * v.tail(d);
      }
      out.head(d) = gx;
      out.tail(d) = gy;
      return out;
    });
    Vector q = Vector::Zero(2 * d);
    if (def.cx.size() > 0) q.head(d) = def.cx;
    if (def.cy.size() > 0) q.tail(d) = -def.cy;
    qf.offset.push_back(std::move(q));
  }
  p.quadratic = std::move(qf);
  p.validate();
  return p;
}

Vector e1_scaled(Index d, double c) {
  Vector v = Vector::Zero(d);
  v[0] = c;
  return v;
}

}  // namespace

HardInstance build_hard_instance(const HardInstanceSpec& spec) {
  const auto kind = spec.kind;
  const int n = spec.n;
  const Index d = spec.d;
  const double delta = spec.delta, mu = spec.mu, L = spec.L;

  detail::require(d >= 3, "hard instances require d >= 3");
  detail::require(std::isfinite(delta) && delta >= 0.0, "delta must be >= 0");
  detail::require(std::isfinite(L) && L > 0.0, "L must be positive");

  const bool cc = kind == InstanceKind::kCcRounds ||
                  kind == InstanceKind::kCcComm || kind == InstanceKind::kCcGrad;
  if (cc) {
    detail::require(mu == 0.0, "cc instances are not strongly monotone; mu must be 0");
  } else {
    detail::require(mu > 0.0 && mu <= L, "scsc instances require 0 < mu <= L");
  }

  auto chain = std::make_shared<ChainMatrices>(d);
  auto matA = [chain](const Vector& v) { return chain->A(v); };
  auto matAt = [chain](const Vector& v) { return chain->At_(v); };

  std::vector<NodeDef> defs(n);
  HardInstance inst;
  inst.params = spec;
  inst.c_x = Vector::Zero(d);
  inst.c_y = Vector::Zero(d);

  ConstraintSet constraint = ConstraintSet::Free();
  ProblemConstants claimed;
  claimed.L = L;
  claimed.delta = delta;
  claimed.mu = mu;

  const double sqd = std::sqrt(static_cast<double>(d));
  const double sqn = std::sqrt(static_cast<double>(n));

  switch (kind) {
    case InstanceKind::kCcRounds: {
      detail::require(n >= 3 && n % 3 == 0,
                      "cc-rounds requires n >= 3 divisible by 3 so each node "
                      "type has equal weight in the mean");
      detail::require(delta > 0.0, "cc-rounds requires delta > 0");
      detail::require(L >= delta, "cc-rounds requires L >= delta");
      const double Rx = ball_radius_or_throw(spec.R_x, "R_x");
      const double Ry = ball_radius_or_throw(spec.R_y, "R_y");
      for (int i = 1; i <= n; ++i) {
        NodeDef& nd = defs[i - 1];
        switch ((i - 1) % 3) {
          case 1:
            nd.theta = delta / 4.0;
            nd.M = [chain](const Vector& v) { return chain->A1(v); };
            nd.Mt = [chain](const Vector& v) { return chain->A1t(v); };
            nd.cx = e1_scaled(d, -delta * Ry / (2.0 * sqd));
            break;
          case 2:
            nd.theta = delta / 4.0;
            nd.M = [chain](const Vector& v) { return chain->A2(v); };
            nd.Mt = [chain](const Vector& v) { return chain->A2t(v); };
            break;
          default:
            break;  // zero function
        }
      }
      constraint.x_set = BlockSet::Ball(Rx);
      constraint.y_set = BlockSet::Ball(Ry);
      inst.theta = delta / 6.0;
      inst.c_x = e1_scaled(d, -delta * Ry / (6.0 * sqd));
      break;
    }
    case InstanceKind::kCcComm: {
      detail::require(n >= 2, "cc-comm requires n >= 2");
      detail::require(delta > 0.0, "cc-comm requires delta > 0");
      detail::require(L >= sqn * delta / 4.0, "cc-comm requires L >= sqrt(n) delta / 4");
      const double Rx = ball_radius_or_throw(spec.R_x, "R_x");
      const double Ry = ball_radius_or_throw(spec.R_y, "R_y");
      defs[0].cx = e1_scaled(d, -sqn * delta * Ry / (8.0 * sqd));
      for (int i = 2; i <= n; ++i) {
        NodeDef& nd = defs[i - 1];
        nd.theta = sqn * delta / 8.0;
        nd.M = [chain, n, i](const Vector& v) { return chain->row_block(n, i, v); };
        nd.Mt = [chain, n, i](const Vector& v) { return chain->row_block_t(n, i, v); };
      }
      constraint.x_set = BlockSet::Ball(Rx);
      constraint.y_set = BlockSet::Ball(Ry);
      inst.theta = delta / (8.0 * sqn);
      inst.c_x = e1_scaled(d, -delta * Ry / (8.0 * std::sqrt(static_cast<double>(n) * d)));
      break;
    }
    case InstanceKind::kCcGrad: {
      detail::require(n >= 2, "cc-grad requires n >= 2");
      const double Rx = ball_radius_or_throw(spec.R_x, "R_x");
      const double Ry = ball_radius_or_throw(spec.R_y, "R_y");
      for (int i = 1; i <= n; ++i) {
        NodeDef& nd = defs[i - 1];
        nd.theta = L / 2.0;
        nd.M = matA;
        nd.Mt = matAt;
        nd.cx = e1_scaled(d, -L * Ry / (2.0 * sqd));
      }
      constraint.x_set = BlockSet::Ball(Rx);
      constraint.y_set = BlockSet::Ball(Ry);
      inst.theta = L / 2.0;
      inst.c_x = e1_scaled(d, -L * Ry / (2.0 * sqd));
      break;
    }
    case InstanceKind::kScscComm: {
      detail::require(n >= 2, "scsc-comm requires n >= 2");
      detail::require(delta >= mu, "scsc-comm requires mu <= delta");
      detail::require(L >= delta, "scsc-comm requires L >= delta");
      defs[0].cy = e1_scaled(d, delta * delta / (16.0 * mu));
      for (int i = 2; i <= n; ++i) {
        NodeDef& nd = defs[i - 1];
        nd.theta = delta * sqn / 4.0;
        nd.M = [chain, n, i](const Vector& v) { return chain->row_block(n, i, v); };
        nd.Mt = [chain, n, i](const Vector& v) { return chain->row_block_t(n, i, v); };
      }
      inst.theta = delta / (4.0 * sqn);
      inst.c_y = e1_scaled(d, delta * delta / (16.0 * n * mu));
      break;
    }
    case InstanceKind::kScscGrad: {
      detail::require(n >= 1, "scsc-grad requires n >= 1");
      detail::require(L >= delta, "scsc-grad requires L >= delta");
      for (int i = 1; i <= n; ++i) {
        NodeDef& nd = defs[i - 1];
        nd.theta = L / 2.0;
        nd.M = [chain](const Vector& v) { return chain->Anti(v); };
        nd.Mt = [chain](const Vector& v) { return chain->Antit(v); };
        nd.cy = e1_scaled(d, L * L / (4.0 * mu));
      }
      inst.theta = L / 2.0;
      inst.anti_chain = true;
      inst.c_y = e1_scaled(d, L * L / (4.0 * mu));
      break;
    }
  }

  inst.problem = assemble(spec, defs, mu, std::move(constraint), claimed);
  return inst;
}

double exact_bilinear_gap(const HardInstance& inst, const Point& z) {
  const auto kind = inst.params.kind;
  detail::require_op(kind == InstanceKind::kCcRounds ||
                         kind == InstanceKind::kCcComm ||
                         kind == InstanceKind::kCcGrad,
                     "exact_bilinear_gap is defined for the bilinear ball-"
                     "constrained kinds only; use the iterative duality gap "
                     "for strongly monotone instances");
  const Index d = inst.params.d;
  detail::require(z.x.size() == d && z.y.size() == d, "point has wrong shape");
  ChainMatrices chain(d);
  // f(x, y) = theta x'Ay + c_x'x + c_y'y with X, Y Euclidean balls:
  //   max over the y-ball of (theta A'x + c_y)'y  =  R_y ||theta A'x + c_y||
  //   min over the x-ball of (theta A y + c_x)'x  = -R_x ||theta A y + c_x||.
  const Vector ycoef = inst.theta * chain.At_(z.x) + inst.c_y;
  const Vector xcoef = inst.theta * chain.A(z.y) + inst.c_x;
  return inst.c_x.dot(z.x) + inst.params.R_y * ycoef.norm() +
         inst.params.R_x * xcoef.norm() - inst.c_y.dot(z.y);
}

bool HardInstance::advance_allowed(int node, Index frontier) const {
  const int n = params.n;
  switch (params.kind) {
    case InstanceKind::kCcRounds:
      switch ((node - 1) % 3) {
        case 1: return frontier % 2 == 0;  // holds the e_1 seed and A1
        case 2: return frontier % 2 == 1;  // holds A2
        default: return false;             // zero function
      }
    case InstanceKind::kCcComm:
    case InstanceKind::kScscComm: {
      if (node == 1) return frontier == 0;  // only the e_1 seed
      // Client `node` owns chain rows j = (node-1) mod (n-1); its transposed
      // coupling reaches coordinate j+1 from coordinate j.
      if (frontier == 0 || frontier >= params.d) return false;
      return frontier % (n - 1) ==
             static_cast<Index>((node - 1) % (n - 1));
    }
    case InstanceKind::kCcGrad:
    case InstanceKind::kScscGrad:
      return true;  // every node holds the full chain and the seed
  }
  return false;
}

Index support_frontier(const Point& z) {
  const double tol = 1e-14;
  Index hi = 0;
  for (Index i = 0; i < z.x.size(); ++i)
    if (std::abs(z.x[i]) > tol) hi = std::max(hi, i + 1);
  for (Index i = 0; i < z.y.size(); ++i)
    if (std::abs(z.y[i]) > tol) hi = std::max(hi, i + 1);
  return hi;
}

namespace {

// Kind-aware support measure. The anti-diagonal chain grows the x block from
// coordinate d downward (y_1 feeds x_d, x_d feeds y_2, ...), so its x support
// is counted from the top; all other kinds grow both blocks from e_1 up.
Index measure_support(const HardInstance& inst, const Point& z) {
  const double tol = 1e-14;
  if (inst.params.kind != InstanceKind::kScscGrad) return support_frontier(z);
  const Index d = inst.params.d;
  Index hi = 0;
  for (Index i = 0; i < z.y.size(); ++i)
    if (std::abs(z.y[i]) > tol) hi = std::max(hi, i + 1);
  for (Index i = 0; i < z.x.size(); ++i)
    if (std::abs(z.x[i]) > tol) {
      hi = std::max(hi, d - i);
      break;  // smallest nonzero x index dominates
    }
  return hi;
}

}  // namespace

ZeroChainReport verify_zero_chain(const HardInstance& inst,
                                  const std::vector<RoundEvents>& events,
                                  const std::vector<TracedIterate>& iterates) {
  ZeroChainReport report;
  const Index d = inst.params.d;

  int max_round = 0;
  for (const auto& re : events) max_round = std::max(max_round, re.round);
  for (const auto& it : iterates) max_round = std::max(max_round, it.round);

  report.frontier_bound.assign(max_round + 1, 0);
  report.observed_support.assign(max_round + 1, 0);

  // Replay the evaluation history. Within a round, evaluations of the same
  // published point form one phase (a broadcast answered in parallel); a
  // phase advances the frontier by at most one, and only when some
  // participant's local structure can extend the chain at the current
  // frontier. Inner-solver evaluations carry unique synthetic ids and are
  // singleton phases.
  Index frontier = 0;
  int cursor = 0;  // next round whose bound is still unset
  for (const auto& re : events) {
    detail::require(re.round >= cursor - 1, "event rounds must be nondecreasing");
    for (; cursor < re.round; ++cursor) report.frontier_bound[cursor] = frontier;
    std::vector<PointId> order;
    std::vector<std::vector<int>> members;
    for (const auto& ev : re.events) {
      auto pos = std::find(order.begin(), order.end(), ev.point);
      if (pos == order.end()) {
        order.push_back(ev.point);
        members.push_back({ev.node});
      } else {
        members[pos - order.begin()].push_back(ev.node);
      }
    }
    for (std::size_t ph = 0; ph < order.size(); ++ph) {
      bool advance = false;
      for (int node : members[ph])
        if (inst.advance_allowed(node, frontier)) {
          advance = true;
          break;
        }
      if (advance && frontier < d) ++frontier;
    }
    report.frontier_bound[re.round] = frontier;
    cursor = re.round + 1;
  }
  for (; cursor <= max_round; ++cursor) report.frontier_bound[cursor] = frontier;

  for (const auto& it : iterates) {
    detail::require(it.round >= 0, "iterate rounds must be nonnegative");
    const Index sup = measure_support(inst, it.z);
    auto& obs = report.observed_support[it.round];
    obs = std::max(obs, sup);
    if (sup > report.frontier_bound[it.round] && report.pass) {
      report.pass = false;
      std::ostringstream msg;
      msg << "iterate at round " << it.round << " has support " << sup
          << " beyond the predicted frontier "
          << report.frontier_bound[it.round];
      report.message = msg.str();
    }
  }
  if (report.pass) report.message = "all iterates within the predicted frontier";
  return report;
}

InstanceConstantsReport verify_instance_constants(const HardInstance& inst) {
  InstanceConstantsReport rep;
  const EstimatedConstants est = estimate_constants(inst.problem);
  rep.L_est = est.L;
  rep.delta_est = est.delta;
  rep.mu_est = est.mu;
  rep.L_claimed = inst.problem.constants.L.value_or(0.0);
  rep.delta_claimed = inst.problem.constants.delta.value_or(0.0);
  rep.mu_claimed = inst.problem.constants.mu.value_or(0.0);

  const double tol = 1e-9;
  // Absolute slack absorbs rounding noise when a claimed constant is zero
  // (e.g. identical-node instances whose true similarity vanishes).
  const double slack = 1e-12 * std::max(1.0, rep.L_claimed);
  std::ostringstream msg;
  if (rep.delta_est > rep.delta_claimed * (1.0 + tol) + slack) {
    rep.pass = false;
    msg << "similarity " << rep.delta_est << " exceeds claimed "
        << rep.delta_claimed << "; ";
  }
  if (rep.L_est > rep.L_claimed * (1.0 + tol)) {
    rep.pass = false;
    msg << "smoothness " << rep.L_est << " exceeds claimed " << rep.L_claimed
        << "; ";
  }
  const bool scsc = inst.params.kind == InstanceKind::kScscComm ||
                    inst.params.kind == InstanceKind::kScscGrad;
  if (scsc && rep.mu_est < rep.mu_claimed * (1.0 - tol) - slack) {
    rep.pass = false;
    msg << "strong monotonicity " << rep.mu_est << " below claimed "
        << rep.mu_claimed << "; ";
  }
  rep.message = rep.pass ? "estimated constants within claimed bounds" : msg.str();
  return rep;
}

}  // namespace svogs
