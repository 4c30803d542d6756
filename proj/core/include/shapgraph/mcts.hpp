#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "shapgraph/gnn.hpp"
#include "shapgraph/graph.hpp"
#include "shapgraph/shapley.hpp"

namespace shapgraph {

struct SearchConfig {
  std::size_t iterations = 20;  // M
  std::size_t min_nodes = 5;    // N_min, leaf threshold
  double lambda = 10.0;
  PruneStrategy strategy{PruneOrder::kLow2High, 12};
  ScorerConfig scorer;
  std::uint64_t seed = 0;
  // Threads used for Monte-Carlo sampling inside one score. Results do not
  // depend on it.
  unsigned workers = 1;

  void Validate() const;
};

// Statistics of one (state, action) pair.
struct ActionStats {
  NodeId action = 0;       // pruned node
  std::size_t child = 0;   // index of the resulting state
  std::size_t visits = 0;  // C
  double total = 0.0;      // W
  double mean = 0.0;       // Q
  double reward = 0.0;     // R, score of the child state
};

struct SearchState {
  NodeSet nodes;
  bool expanded = false;
  std::vector<ActionStats> actions;
  // Iterations whose path passed through this state as a non-leaf.
  std::size_t traversals = 0;
};

// Q + lambda * R * sqrt(sum C) / (1 + C), maximized; ties go to the smallest
// pruned-node index. Returns an index into `actions`. Throws ContractError
// when `actions` is empty.
std::size_t SelectAction(std::span<const ActionStats> actions, double lambda);

struct PathStep {
  std::size_t state = 0;
  std::size_t action = 0;  // index into the state's actions
};

// Search tree whose states are canonical node sets: the same subgraph reached
// through different pruning orders is one state.
class SearchTree {
 public:
  explicit SearchTree(NodeSet root);

  std::size_t Intern(const NodeSet& nodes);
  std::size_t root() const { return 0; }
  std::size_t size() const { return states_.size(); }
  SearchState& state(std::size_t i) { return states_[i]; }
  const SearchState& state(std::size_t i) const { return states_[i]; }
  std::optional<std::size_t> Find(const NodeSet& nodes) const;

  // C += 1, W += leaf_score, Q = W / C for every pair on the path.
  void UpdatePath(std::span<const PathStep> path, double leaf_score);

 private:
  std::vector<SearchState> states_;
  std::unordered_map<NodeSet, std::size_t, NodeSetHash> index_;
};

struct SizedSubgraph {
  NodeSet nodes;
  double score = 0.0;
};

struct SearchDiagnostics {
  std::size_t iterations = 0;
  std::size_t states_expanded = 0;
  std::size_t states_scored = 0;
  std::size_t tree_states = 0;
  std::size_t forward_passes = 0;
};

struct SearchResult {
  SizedSubgraph best;                          // best-scoring leaf
  std::map<std::size_t, SizedSubgraph> per_size;  // best scored state per size
  std::vector<std::size_t> leaves;             // leaf states, in discovery order
  SearchDiagnostics diagnostics;
};

// Monte Carlo tree search over connected subgraphs of `root`. Scores always
// refer to the scorer's full graph.
class SubgraphSearch {
 public:
  SubgraphSearch(const SubgraphScorer& scorer, NodeSet root, SearchConfig config);

  SearchResult Run();

  const SearchTree& tree() const { return tree_; }
  // Cached score of a state (scored on first request).
  double Reward(std::size_t state);

 private:
  void Expand(std::size_t state);

  const SubgraphScorer& scorer_;
  SearchConfig config_;
  SearchTree tree_;
  std::vector<std::optional<double>> rewards_;
  std::size_t expanded_ = 0;
};

enum class Task { kGraph, kNode };
std::string ToString(Task task);

struct Explanation {
  std::string graph_id;
  Task task = Task::kGraph;
  std::optional<NodeId> target_node;
  int predicted_class = 0;
  double predicted_probability = 0.0;
  NodeSet nodes;
  double score = 0.0;
  double sparsity = 0.0;
  std::map<std::size_t, SizedSubgraph> per_size;
  SearchConfig config;
  SearchDiagnostics diagnostics;
};

// Explains the model's prediction on `g`. Graph-level models search from the
// largest connected component. Node-level models explain g.target_node() and
// search its L-hop computation graph, never zero-padding the target.
Explanation Explain(const ModelSpec& model, const Graph& g, const SearchConfig& config);

// Every connected node set of exactly `size` nodes, lexicographic order.
std::vector<NodeSet> ConnectedSubsets(const Graph& g, std::size_t size);

inline constexpr NodeId kBruteForceMaxNodes = 12;

// Highest-scoring connected subgraph with exactly `size` nodes (ties: the
// lexicographically smallest). Throws CapacityError above 12 nodes.
SizedSubgraph BruteForceBest(const SubgraphScorer& scorer, std::size_t size);

}  // namespace shapgraph
