#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "svogs/problem.hpp"
#include "svogs/rng.hpp"

namespace svogs {

using PointId = std::uint64_t;

// Exact oracle accounting. Conventions:
//   * one communication unit = one client<->server interaction within a
//     round (a constant number of d-vectors each way counts as one unit);
//   * grad_calls_total counts fresh local-gradient evaluations routed
//     through the network (cache hits are free);
//   * inner_grad_calls counts the server's own f_1 evaluations inside
//     prox sub-problem solves, kept out of the per-node vector.
// Invariant: grad_calls_total == sum(grad_calls_per_node) + inner_grad_calls.
struct OracleLedger {
  std::uint64_t rounds = 0;
  std::uint64_t comm_units = 0;
  std::uint64_t grad_calls_total = 0;
  std::uint64_t inner_grad_calls = 0;
  std::uint64_t snapshot_events = 0;
  std::vector<std::uint64_t> grad_calls_per_node;

  bool consistent() const {
    std::uint64_t s = inner_grad_calls;
    for (auto c : grad_calls_per_node) s += c;
    return s == grad_calls_total;
  }
};

inline OracleLedger ledger_summary(const OracleLedger& ledger) {
  return ledger;  // value snapshot of all counters
}

// Mini-batch sampling configuration. Indices are 1-based over [n]; the batch
// is b i.i.d. uniform draws WITH replacement (duplicates allowed and each
// duplicate costs a communication unit). force_full_batch replaces sampling
// with the deterministic batch (1, ..., n); the snapshot coin is still
// consumed every round so the coin stream stays aligned across
// configurations.
struct SamplerConfig {
  int n = 1;
  int b = 1;
  double p = 1.0;  // snapshot probability
  std::uint64_t seed = 0;
  bool force_full_batch = false;
};

std::vector<int> sample_batch(const SamplerConfig& cfg, std::uint64_t round);
bool snapshot_draw(const SamplerConfig& cfg, std::uint64_t round);

// Per-round bookkeeping: comm_units += |batch| (+ n more on snapshot rounds,
// when the server refreshes every node), rounds += 1.
void account_round(OracleLedger& ledger, const std::vector<int>& batch,
                   bool snapshot_taken, int n);

// One fresh gradient evaluation: node i evaluated F_i at the registered
// point `point`. Events are recorded in execution order; evaluations that
// hit the cache produce no event. Sub-problem evaluations by the server at
// unpublished points get unique synthetic ids (>= kInnerPointBase).
inline constexpr PointId kInnerPointBase = 1ull << 62;
struct EvalEvent {
  int node = 0;
  PointId point = 0;
};
struct RoundEvents {
  int round = 0;  // 0 = initialization broadcast
  std::vector<EvalEvent> events;
};

// Memoizes F_i(z) per (node, point id): repeated fetches of the same
// gradient at the same published point are served locally and never
// re-counted.
class GradientCache {
 public:
  const Point* find(int node, PointId id) const;
  void store(int node, PointId id, Point value);
  void clear() { map_.clear(); }
  std::size_t size() const { return map_.size(); }

 private:
  // Published ids are small sequential integers, so (id, node) packs into
  // one 64-bit key. Synthetic inner-point ids are never cached.
  static std::uint64_t key(int node, PointId id) {
    return (id << 32) ^ static_cast<std::uint64_t>(node);
  }
  std::unordered_map<std::uint64_t, Point> map_;
};

// Cache-aware gradient fetch as a standalone operation: returns the cached
// value of F_node(z) for the given point id, or evaluates, stores, and
// counts it. The Network facade below adds point registration and event
// recording on top of the same logic.
const Point& fetch_gradient(GradientCache& cache, OracleLedger& ledger,
                            const SaddleProblem& problem, int node, PointId id,
                            const Point& z);

// Simulated star network: registers published iterates, routes gradient
// fetches through the cache, and keeps the ledger and the event log. All
// counting lives here; metrics bypass the network and evaluate the problem
// directly.
class Network {
 public:
  explicit Network(const SaddleProblem& problem, bool use_cache = true,
                   bool record_events = false);

  const SaddleProblem& problem() const { return *problem_; }

  // Registers a server-published point (an iterate everyone may be asked to
  // evaluate) and returns its id.
  PointId publish(const Point& z);
  const Point& lookup(PointId id) const;

  // F_node at a published point; counts a fresh gradient call on a cache
  // miss. Node indices are 1-based.
  const Point& fetch(int node, PointId id);
  // Mean over all nodes at a published point (initialization / snapshot /
  // full-batch rounds).
  Point fetch_mean(PointId id);

  // The server's own evaluation of F_1 at an arbitrary (unpublished) point
  // inside an inner sub-problem solve; counted as inner_grad_calls.
  Point eval_inner(const Point& u);

  // Initialization broadcast: the server contacts every node once (n
  // communication units); callers typically follow with fetch_mean(z0).
  void account_init();
  void account_round(const std::vector<int>& batch, bool snapshot_taken);
  void begin_round(int round) { current_round_ = round; }

  OracleLedger ledger_summary() const { return ledger_; }
  const OracleLedger& ledger() const { return ledger_; }
  const std::vector<RoundEvents>& events() const { return events_; }
  bool cache_enabled() const { return use_cache_; }

 private:
  void record_event(int node, PointId id);

  const SaddleProblem* problem_;
  bool use_cache_;
  bool record_events_;
  int current_round_ = 0;
  PointId next_inner_id_ = kInnerPointBase;
  std::vector<Point> points_;
  GradientCache cache_;
  OracleLedger ledger_;
  std::vector<RoundEvents> events_;
  Point scratch_;  // returned by fetch() when caching is disabled
};

}  // namespace svogs
