#include "shapgraph/shapley.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include "shapgraph/error.hpp"
#include "shapgraph/rng.hpp"

namespace shapgraph {

TableGame::TableGame(std::size_t num_players, std::vector<double> values)
    : num_players_(num_players), values_(std::move(values)) {
  if (num_players >= 63) throw CapacityError("table game supports at most 62 players");
  if (values_.size() != (std::size_t{1} << num_players)) {
    throw InputError("table game needs 2^n values");
  }
}

double TableGame::Value(std::span<const char> members) const {
  std::uint64_t mask = 0;
  for (std::size_t p = 0; p < num_players_; ++p) {
    if (members[p]) mask |= std::uint64_t{1} << p;
  }
  return values_[mask];
}

namespace {

double Binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace

double ExactShapleyValue(const CooperativeGame& game, std::size_t player) {
  const std::size_t n = game.num_players();
  if (player >= n) throw InputError("player index out of range");
  if (n > kMaxExactPlayers) {
    throw CapacityError("exact Shapley enumeration limited to " + std::to_string(kMaxExactPlayers) +
                        " players, got " + std::to_string(n));
  }
  // weight(s) = s!(n-s-1)!/n! = 1 / (n * C(n-1, s))
  std::vector<double> weight(n);
  for (std::size_t s = 0; s < n; ++s) weight[s] = 1.0 / (static_cast<double>(n) * Binomial(n - 1, s));

  std::vector<std::size_t> others;
  for (std::size_t p = 0; p < n; ++p) {
    if (p != player) others.push_back(p);
  }
  std::vector<char> members(n, 0);
  double total = 0.0;
  const std::uint64_t subsets = std::uint64_t{1} << others.size();
  for (std::uint64_t mask = 0; mask < subsets; ++mask) {
    for (std::size_t i = 0; i < others.size(); ++i) members[others[i]] = (mask >> i) & 1U;
    members[player] = 0;
    const double without = game.Value(members);
    members[player] = 1;
    const double with = game.Value(members);
    total += weight[static_cast<std::size_t>(std::popcount(mask))] * (with - without);
  }
  return total;
}

namespace {

double SampleMarginal(const CooperativeGame& game, std::size_t player, std::uint64_t seed,
                      std::size_t t, std::vector<std::size_t>& order, std::vector<char>& members) {
  Rng rng = MakeRng(seed, t);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Fisher-Yates with an explicit draw per position.
  for (std::size_t i = order.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  std::fill(members.begin(), members.end(), 0);
  for (std::size_t p : order) {
    if (p == player) break;
    members[p] = 1;
  }
  const double without = game.Value(members);
  members[player] = 1;
  return game.Value(members) - without;
}

}  // namespace

double MonteCarloShapleyValue(const CooperativeGame& game, std::size_t player,
                              std::size_t samples, std::uint64_t seed, unsigned workers) {
  const std::size_t n = game.num_players();
  if (player >= n) throw InputError("player index out of range");
  if (samples < 1) throw InputError("Monte-Carlo Shapley needs at least one sample");
  std::vector<double> marginal(samples, 0.0);
  auto run = [&](std::size_t first, std::size_t stride) {
    std::vector<std::size_t> order(n);
    std::vector<char> members(n);
    for (std::size_t t = first; t < samples; t += stride) {
      marginal[t] = SampleMarginal(game, player, seed, t, order, members);
    }
  };
  workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(samples)));
  if (workers == 1) {
    run(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
    for (auto& th : pool) th.join();
  }
  // Fixed summation order keeps the estimate independent of scheduling.
  double total = 0.0;
  for (double m : marginal) total += m;
  return total / static_cast<double>(samples);
}

MaskedProbability::MaskedProbability(const ModelSpec& model, const Graph& g, int target_class)
    : runner_(model, g), target_class_(target_class) {
  if (target_class < 0 || target_class >= model.num_classes) {
    throw InputError("target class " + std::to_string(target_class) + " out of range");
  }
}

std::size_t MaskedProbability::KeyHash::operator()(const std::vector<std::uint64_t>& key) const noexcept {
  std::uint64_t h = 0x84222325cbf29ce4ULL;
  for (std::uint64_t w : key) h = SplitMix64(h ^ w);
  return static_cast<std::size_t>(h);
}

double MaskedProbability::operator()(const std::vector<char>& active) const {
  const std::size_t n = static_cast<std::size_t>(graph().num_nodes());
  if (active.size() != n) throw InputError("activity mask length does not match node count");
  std::vector<std::uint64_t> key((n + 63) / 64, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (active[i]) key[i / 64] |= std::uint64_t{1} << (i % 64);
  }
  {
    std::shared_lock lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  const double p = runner_.Predict(active).probabilities[target_class_];
  std::unique_lock lock(mutex_);
  // First writer wins; a concurrent duplicate computes the same value.
  return cache_.emplace(std::move(key), p).first->second;
}

double MaskedProbability::operator()(const NodeSet& active) const {
  CheckNodes(graph(), active);
  std::vector<char> flags(static_cast<std::size_t>(graph().num_nodes()), 0);
  for (NodeId v : active) flags[v] = 1;
  return (*this)(flags);
}

std::size_t MaskedProbability::forward_passes() const {
  std::shared_lock lock(mutex_);
  return cache_.size();
}

std::string ToString(Estimator estimator) {
  switch (estimator) {
    case Estimator::kExactFull: return "exact_full";
    case Estimator::kExactReduced: return "exact_reduced";
    case Estimator::kMonteCarlo: return "monte_carlo";
    case Estimator::kDirect: return "direct";
  }
  return "direct";
}

CoalitionGame::CoalitionGame(std::shared_ptr<const MaskedProbability> value, NodeSet target_subgraph,
                             std::vector<NodeSet> other_players, NodeSet protected_nodes)
    : value_(std::move(value)),
      target_(std::move(target_subgraph)),
      other_players_(std::move(other_players)),
      protected_(std::move(protected_nodes)) {
  if (!value_) throw InputError("coalition game without a value function");
  if (target_.empty()) throw InputError("target subgraph is empty");
  const Graph& g = value_->graph();
  CheckNodes(g, target_);
  CheckNodes(g, protected_);
  std::vector<char> seen(static_cast<std::size_t>(g.num_nodes()), 0);
  for (NodeId v : target_) seen[v] = 1;
  for (const NodeSet& p : other_players_) {
    CheckNodes(g, p);
    if (p.empty()) throw InputError("empty player");
    for (NodeId v : p) {
      if (seen[v]) throw InputError("players overlap at node " + std::to_string(v));
      seen[v] = 1;
    }
  }
}

double CoalitionGame::Value(std::span<const char> members) const {
  const Graph& g = value_->graph();
  std::vector<char> active(static_cast<std::size_t>(g.num_nodes()), 0);
  for (NodeId v : protected_) active[v] = 1;
  if (members[0]) {
    for (NodeId v : target_) active[v] = 1;
  }
  for (std::size_t p = 0; p < other_players_.size(); ++p) {
    if (!members[p + 1]) continue;
    for (NodeId v : other_players_[p]) active[v] = 1;
  }
  return (*value_)(active);
}

CoalitionGame BuildReducedGame(std::shared_ptr<const MaskedProbability> value, const NodeSet& subgraph,
                               int hops, const NodeSet& protected_nodes) {
  if (subgraph.empty()) throw InputError("cannot build a game for an empty subgraph");
  if (hops < 1) throw InputError("hop count must be at least 1");
  NodeSet neighbors = LHopNeighbors(value->graph(), subgraph, hops).Difference(protected_nodes);
  std::vector<NodeSet> others;
  others.reserve(neighbors.size());
  for (NodeId v : neighbors) others.push_back(NodeSet{v});
  return CoalitionGame(std::move(value), subgraph, std::move(others), protected_nodes);
}

double CoalitionValue(const CoalitionGame& game, std::span<const std::size_t> coalition) {
  std::vector<char> members(game.num_players(), 0);
  for (std::size_t p : coalition) {
    if (p >= game.num_players()) throw InputError("player index out of range");
    members[p] = 1;
  }
  return game.Value(members);
}

double MarginalContribution(const CoalitionGame& game, std::span<const std::size_t> coalition) {
  if (std::find(coalition.begin(), coalition.end(), std::size_t{0}) != coalition.end()) {
    throw InputError("coalition already contains the target subgraph");
  }
  std::vector<std::size_t> with(coalition.begin(), coalition.end());
  with.push_back(0);
  return CoalitionValue(game, with) - CoalitionValue(game, coalition);
}

ScoreEstimate ExactShapley(const CoalitionGame& game) {
  // A game whose co-players cover every node outside the subgraph uses the
  // full player set.
  const auto covered = std::accumulate(
      game.other_players().begin(), game.other_players().end(),
      game.target_subgraph().Union(game.protected_nodes()).size(),
      [](std::size_t acc, const NodeSet& p) { return acc + p.size(); });
  const bool full = covered >= static_cast<std::size_t>(game.value_function().graph().num_nodes());
  return {ExactShapleyValue(game, 0), 1, full ? Estimator::kExactFull : Estimator::kExactReduced};
}

ScoreEstimate MonteCarloShapley(const CoalitionGame& game, std::size_t samples, std::uint64_t seed,
                                unsigned workers) {
  return {MonteCarloShapleyValue(game, 0, samples, seed, workers), samples, Estimator::kMonteCarlo};
}

ScoreEstimate DirectScore(const MaskedProbability& value, const NodeSet& subgraph,
                          const NodeSet& protected_nodes) {
  if (subgraph.empty()) throw InputError("cannot score an empty subgraph");
  return {value(subgraph.Union(protected_nodes)), 1, Estimator::kDirect};
}

std::string ToString(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::kShapleyMc: return "shapley-mc";
    case ScorerKind::kShapleyExact: return "shapley-exact";
    case ScorerKind::kDirect: return "direct";
  }
  return "direct";
}

ScorerKind ParseScorerKind(const std::string& text) {
  if (text == "shapley-mc") return ScorerKind::kShapleyMc;
  if (text == "shapley-exact") return ScorerKind::kShapleyExact;
  if (text == "direct") return ScorerKind::kDirect;
  throw InputError("unknown scorer '" + text + "'");
}

std::uint64_t NodeSetSeed(std::uint64_t seed, const NodeSet& nodes) {
  std::uint64_t h = SplitMix64(seed);
  for (NodeId v : nodes) h = SplitMix64(h ^ static_cast<std::uint64_t>(v));
  return h;
}

SubgraphScorer::SubgraphScorer(std::shared_ptr<const MaskedProbability> value, ScorerConfig config,
                               NodeSet protected_nodes, std::uint64_t seed, unsigned workers)
    : value_(std::move(value)),
      config_(config),
      protected_(std::move(protected_nodes)),
      seed_(seed),
      workers_(workers) {
  if (config_.kind == ScorerKind::kShapleyMc && config_.samples < 1) {
    throw InputError("Monte-Carlo scorer needs at least one sample");
  }
  if (config_.kind != ScorerKind::kDirect && config_.hops < 1) {
    throw InputError("hop count must be at least 1");
  }
}

ScoreEstimate SubgraphScorer::Score(const NodeSet& subgraph) const {
  switch (config_.kind) {
    case ScorerKind::kDirect:
      return DirectScore(*value_, subgraph, protected_);
    case ScorerKind::kShapleyExact:
      return ExactShapley(BuildReducedGame(value_, subgraph, config_.hops, protected_));
    case ScorerKind::kShapleyMc:
      return MonteCarloShapley(BuildReducedGame(value_, subgraph, config_.hops, protected_),
                               config_.samples, NodeSetSeed(seed_, subgraph), workers_);
  }
  throw InputError("unknown scorer");
}

}  // namespace shapgraph
