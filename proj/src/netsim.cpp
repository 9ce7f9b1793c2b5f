#include "svogs/netsim.hpp"

#include <numeric>

namespace svogs {

std::vector<int> sample_batch(const SamplerConfig& cfg, std::uint64_t round) {
  detail::require(cfg.n >= 1, "sample_batch: n must be >= 1");
  detail::require(cfg.b >= 1 && cfg.b <= cfg.n,
                  "sample_batch: b must lie in [1, n]");
  std::vector<int> batch;
  if (cfg.force_full_batch) {
    batch.resize(static_cast<size_t>(cfg.n));
    std::iota(batch.begin(), batch.end(), 1);
    return batch;
  }
  batch.reserve(static_cast<size_t>(cfg.b));
  for (int j = 0; j < cfg.b; ++j) {
    batch.push_back(1 + rng::draw_index(cfg.seed, rng::Stream::kBatch, round,
                                        static_cast<std::uint64_t>(j), cfg.n));
  }
  return batch;
}

bool snapshot_draw(const SamplerConfig& cfg, std::uint64_t round) {
  detail::require(cfg.p > 0.0 && cfg.p <= 1.0,
                  "snapshot_draw: p must lie in (0, 1]");
  // Consumed once per round on its own stream regardless of b or
  // force_full_batch, so coin sequences align across configurations.
  return rng::draw_unit(cfg.seed, rng::Stream::kSnapshot, round, 0) < cfg.p;
}

void account_round(OracleLedger& ledger, const std::vector<int>& batch,
                   bool snapshot_taken, int n) {
  detail::require(n >= 1, "account_round: n must be >= 1");
  ledger.rounds += 1;
  ledger.comm_units += batch.size();
  if (snapshot_taken) {
    ledger.comm_units += static_cast<std::uint64_t>(n);
    ledger.snapshot_events += 1;
  }
}

const Point* GradientCache::find(int node, PointId id) const {
  const auto it = map_.find(key(node, id));
  return it == map_.end() ? nullptr : &it->second;
}

void GradientCache::store(int node, PointId id, Point value) {
  map_.insert_or_assign(key(node, id), std::move(value));
}

const Point& fetch_gradient(GradientCache& cache, OracleLedger& ledger,
                            const SaddleProblem& problem, int node, PointId id,
                            const Point& z) {
  detail::require(node >= 1 && node <= problem.n,
                  "fetch_gradient: node index out of range");
  if (const Point* hit = cache.find(node, id)) return *hit;
  cache.store(node, id, problem.eval_local(node, z));
  ledger.grad_calls_total += 1;
  if (!ledger.grad_calls_per_node.empty()) {
    ledger.grad_calls_per_node[static_cast<size_t>(node - 1)] += 1;
  }
  return *cache.find(node, id);
}

Network::Network(const SaddleProblem& problem, bool use_cache,
                 bool record_events)
    : problem_(&problem), use_cache_(use_cache), record_events_(record_events) {
  problem.validate();
  ledger_.grad_calls_per_node.assign(static_cast<size_t>(problem.n), 0);
}

PointId Network::publish(const Point& z) {
  detail::require(z.dx() == problem_->dx && z.dy() == problem_->dy,
                  "Network::publish: point dimension mismatch");
  points_.push_back(z);
  return static_cast<PointId>(points_.size() - 1);
}

const Point& Network::lookup(PointId id) const {
  detail::require(id < points_.size(), "Network::lookup: unknown point id");
  return points_[static_cast<size_t>(id)];
}

void Network::record_event(int node, PointId id) {
  if (!record_events_) return;
  if (events_.empty() || events_.back().round != current_round_) {
    events_.push_back(RoundEvents{current_round_, {}});
  }
  events_.back().events.push_back(EvalEvent{node, id});
}

const Point& Network::fetch(int node, PointId id) {
  detail::require(node >= 1 && node <= problem_->n,
                  "Network::fetch: node index out of range");
  if (use_cache_) {
    if (const Point* hit = cache_.find(node, id)) return *hit;
  }
  Point g = problem_->eval_local(node, lookup(id));
  ledger_.grad_calls_total += 1;
  ledger_.grad_calls_per_node[static_cast<size_t>(node - 1)] += 1;
  record_event(node, id);
  if (!use_cache_) {
    scratch_ = std::move(g);
    return scratch_;
  }
  cache_.store(node, id, std::move(g));
  return *cache_.find(node, id);
}

Point Network::fetch_mean(PointId id) {
  Point acc = Point::Zero(problem_->dx, problem_->dy);
  for (int i = 1; i <= problem_->n; ++i) acc += fetch(i, id);
  return acc * (1.0 / static_cast<double>(problem_->n));
}

Point Network::eval_inner(const Point& u) {
  // Counted in the total as well: grad_calls_total tracks every fresh
  // evaluation, with inner_grad_calls identifying the sub-problem share.
  ledger_.grad_calls_total += 1;
  ledger_.inner_grad_calls += 1;
  record_event(1, next_inner_id_++);
  return problem_->eval_local(1, u);
}

void Network::account_init() {
  ledger_.comm_units += static_cast<std::uint64_t>(problem_->n);
}

void Network::account_round(const std::vector<int>& batch,
                            bool snapshot_taken) {
  svogs::account_round(ledger_, batch, snapshot_taken, problem_->n);
}

}  // namespace svogs
