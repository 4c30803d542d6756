#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "shapgraph/gnn.hpp"
#include "shapgraph/graph.hpp"

namespace shapgraph {

// A transferable-utility game over players 0..n-1.
class CooperativeGame {
 public:
  virtual ~CooperativeGame() = default;
  virtual std::size_t num_players() const = 0;
  // `members[p]` != 0 iff player p is in the coalition.
  virtual double Value(std::span<const char> members) const = 0;
};

// Game given by an explicit table indexed by coalition bitmask (bit p set iff
// player p is a member).
class TableGame : public CooperativeGame {
 public:
  TableGame(std::size_t num_players, std::vector<double> values);
  std::size_t num_players() const override { return num_players_; }
  double Value(std::span<const char> members) const override;
  double ValueOfMask(std::uint64_t mask) const { return values_.at(mask); }

 private:
  std::size_t num_players_;
  std::vector<double> values_;
};

inline constexpr std::size_t kMaxExactPlayers = 20;

// Full enumeration with weights |S|!(n-|S|-1)!/n!. Throws CapacityError above
// kMaxExactPlayers players.
double ExactShapleyValue(const CooperativeGame& game, std::size_t player);

// Permutation sampling: sample t draws a uniform permutation from a stream
// derived from (seed, t) and takes the marginal contribution of `player` to
// its predecessors. The result does not depend on `workers`.
double MonteCarloShapleyValue(const CooperativeGame& game, std::size_t player,
                              std::size_t samples, std::uint64_t seed, unsigned workers = 1);

// Predicted probability of one class under zero-padding of inactive nodes,
// memoized by active node set. Safe for concurrent use. Holds references to
// the model and graph.
class MaskedProbability {
 public:
  MaskedProbability(const ModelSpec& model, const Graph& g, int target_class);

  double operator()(const std::vector<char>& active) const;
  double operator()(const NodeSet& active) const;

  const Graph& graph() const { return runner_.graph(); }
  const ModelSpec& model() const { return runner_.model(); }
  int target_class() const { return target_class_; }
  // Distinct masks evaluated so far (each costs one forward pass).
  std::size_t forward_passes() const;

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<std::uint64_t>& key) const noexcept;
  };

  ModelRunner runner_;
  int target_class_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<std::vector<std::uint64_t>, double, KeyHash> cache_;
};

enum class Estimator { kExactFull, kExactReduced, kMonteCarlo, kDirect };
std::string ToString(Estimator estimator);

struct ScoreEstimate {
  double value = 0.0;
  std::size_t num_samples = 0;
  Estimator estimator = Estimator::kDirect;
};

// Player 0 is the target subgraph; players 1..n are the other node sets.
// Protected nodes keep their features in every coalition.
class CoalitionGame : public CooperativeGame {
 public:
  CoalitionGame(std::shared_ptr<const MaskedProbability> value, NodeSet target_subgraph,
                std::vector<NodeSet> other_players, NodeSet protected_nodes = {});

  std::size_t num_players() const override { return 1 + other_players_.size(); }
  double Value(std::span<const char> members) const override;

  const NodeSet& target_subgraph() const { return target_; }
  const std::vector<NodeSet>& other_players() const { return other_players_; }
  const NodeSet& protected_nodes() const { return protected_; }
  int target_class() const { return value_->target_class(); }
  const MaskedProbability& value_function() const { return *value_; }

 private:
  std::shared_ptr<const MaskedProbability> value_;
  NodeSet target_;
  std::vector<NodeSet> other_players_;
  NodeSet protected_;
};

// Co-players are the singletons of the nodes within `hops` of the subgraph
// (kUnboundedHops: every reachable node), minus protected nodes.
CoalitionGame BuildReducedGame(std::shared_ptr<const MaskedProbability> value,
                               const NodeSet& subgraph, int hops, const NodeSet& protected_nodes = {});

// Value of a coalition given as player indices.
double CoalitionValue(const CoalitionGame& game, std::span<const std::size_t> coalition);

// v(S + target) - v(S). Throws InputError if `coalition` contains player 0.
double MarginalContribution(const CoalitionGame& game, std::span<const std::size_t> coalition);

ScoreEstimate ExactShapley(const CoalitionGame& game);
ScoreEstimate MonteCarloShapley(const CoalitionGame& game, std::size_t samples, std::uint64_t seed,
                                unsigned workers = 1);
// Probability with only the subgraph (plus protected nodes) active.
ScoreEstimate DirectScore(const MaskedProbability& value, const NodeSet& subgraph,
                          const NodeSet& protected_nodes = {});

enum class ScorerKind { kShapleyMc, kShapleyExact, kDirect };
std::string ToString(ScorerKind kind);
ScorerKind ParseScorerKind(const std::string& text);

struct ScorerConfig {
  ScorerKind kind = ScorerKind::kShapleyMc;
  std::size_t samples = 100;
  int hops = 3;
};

// Scores subgraphs of one graph for one class. The Monte-Carlo seed of a
// subgraph is derived from (seed, node set), so a score is a pure function of
// the subgraph.
class SubgraphScorer {
 public:
  SubgraphScorer(std::shared_ptr<const MaskedProbability> value, ScorerConfig config,
                 NodeSet protected_nodes, std::uint64_t seed, unsigned workers = 1);

  ScoreEstimate Score(const NodeSet& subgraph) const;
  const ScorerConfig& config() const { return config_; }
  const MaskedProbability& value_function() const { return *value_; }

 private:
  std::shared_ptr<const MaskedProbability> value_;
  ScorerConfig config_;
  NodeSet protected_;
  std::uint64_t seed_;
  unsigned workers_;
};

std::uint64_t NodeSetSeed(std::uint64_t seed, const NodeSet& nodes);

}  // namespace shapgraph
