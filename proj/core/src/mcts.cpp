#include "shapgraph/mcts.hpp"

#include <algorithm>
#include <cmath>

#include "shapgraph/error.hpp"

namespace shapgraph {

void SearchConfig::Validate() const {
  if (iterations < 1) throw InputError("iterations (M) must be at least 1");
  if (min_nodes < 1) throw InputError("N_min must be at least 1");
  if (!(lambda >= 0.0)) throw InputError("lambda must be non-negative");
  strategy.Validate();
  if (scorer.kind == ScorerKind::kShapleyMc && scorer.samples < 1) {
    throw InputError("Monte-Carlo scorer needs at least one sample");
  }
  if (scorer.kind != ScorerKind::kDirect && scorer.hops < 1) {
    throw InputError("hop count must be at least 1");
  }
}

std::size_t SelectAction(std::span<const ActionStats> actions, double lambda) {
  if (actions.empty()) throw ContractError("action selection on a state without actions");
  std::size_t visits = 0;
  for (const ActionStats& a : actions) visits += a.visits;
  const double root_visits = std::sqrt(static_cast<double>(visits));
  std::size_t best = 0;
  double best_value = 0.0;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const ActionStats& a = actions[i];
    const double value =
        a.mean + lambda * a.reward * root_visits / (1.0 + static_cast<double>(a.visits));
    if (i == 0 || value > best_value ||
        (value == best_value && a.action < actions[best].action)) {
      best = i;
      best_value = value;
    }
  }
  return best;
}

SearchTree::SearchTree(NodeSet root) { Intern(root); }

std::size_t SearchTree::Intern(const NodeSet& nodes) {
  auto [it, inserted] = index_.try_emplace(nodes, states_.size());
  if (inserted) states_.push_back(SearchState{nodes, false, {}, 0});
  return it->second;
}

std::optional<std::size_t> SearchTree::Find(const NodeSet& nodes) const {
  auto it = index_.find(nodes);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void SearchTree::UpdatePath(std::span<const PathStep> path, double leaf_score) {
  for (const PathStep& step : path) {
    ActionStats& a = states_[step.state].actions[step.action];
    a.visits += 1;
    a.total += leaf_score;
    a.mean = a.total / static_cast<double>(a.visits);
  }
}

SubgraphSearch::SubgraphSearch(const SubgraphScorer& scorer, NodeSet root, SearchConfig config)
    : scorer_(scorer), config_(std::move(config)), tree_(root) {
  config_.Validate();
  if (root.empty()) throw InputError("search root is empty");
  if (!IsConnected(scorer_.value_function().graph(), root)) {
    throw ContractError("search root must be connected");
  }
}

double SubgraphSearch::Reward(std::size_t state) {
  if (rewards_.size() < tree_.size()) rewards_.resize(tree_.size());
  auto& slot = rewards_[state];
  if (!slot) slot = scorer_.Score(tree_.state(state).nodes).value;
  return *slot;
}

void SubgraphSearch::Expand(std::size_t state) {
  const Graph& g = scorer_.value_function().graph();
  // Copy: interning children may reallocate the state vector.
  const NodeSet nodes = tree_.state(state).nodes;
  std::vector<ActionStats> actions;
  for (PruneAction& pa : PruneActions(g, nodes, config_.strategy)) {
    ActionStats stats;
    stats.action = pa.removed;
    stats.child = tree_.Intern(pa.child);
    actions.push_back(stats);
  }
  for (ActionStats& a : actions) a.reward = Reward(a.child);
  SearchState& s = tree_.state(state);
  s.actions = std::move(actions);
  s.expanded = true;
  ++expanded_;
}

SearchResult SubgraphSearch::Run() {
  SearchResult result;
  std::vector<char> is_leaf;
  std::vector<PathStep> path;
  for (std::size_t it = 0; it < config_.iterations; ++it) {
    path.clear();
    std::size_t current = tree_.root();
    while (tree_.state(current).nodes.size() > config_.min_nodes) {
      if (!tree_.state(current).expanded) Expand(current);
      SearchState& s = tree_.state(current);
      if (s.actions.empty()) break;
      ++s.traversals;
      const std::size_t a = SelectAction(s.actions, config_.lambda);
      path.push_back({current, a});
      current = s.actions[a].child;
    }
    const double leaf_score = Reward(current);
    if (is_leaf.size() < tree_.size()) is_leaf.resize(tree_.size(), 0);
    if (!is_leaf[current]) {
      is_leaf[current] = 1;
      result.leaves.push_back(current);
    }
    tree_.UpdatePath(path, leaf_score);
    ++result.diagnostics.iterations;
  }

  auto better = [](double score, const NodeSet& nodes, const SizedSubgraph& incumbent) {
    return score > incumbent.score || (score == incumbent.score && nodes < incumbent.nodes);
  };
  bool have_best = false;
  for (std::size_t leaf : result.leaves) {
    const double score = Reward(leaf);
    const NodeSet& nodes = tree_.state(leaf).nodes;
    if (!have_best || better(score, nodes, result.best)) {
      result.best = {nodes, score};
      have_best = true;
    }
  }
  std::size_t scored = 0;
  for (std::size_t i = 0; i < rewards_.size(); ++i) {
    if (!rewards_[i]) continue;
    ++scored;
    const NodeSet& nodes = tree_.state(i).nodes;
    auto it = result.per_size.find(nodes.size());
    if (it == result.per_size.end()) {
      result.per_size.emplace(nodes.size(), SizedSubgraph{nodes, *rewards_[i]});
    } else if (better(*rewards_[i], nodes, it->second)) {
      it->second = {nodes, *rewards_[i]};
    }
  }
  result.diagnostics.states_expanded = expanded_;
  result.diagnostics.states_scored = scored;
  result.diagnostics.tree_states = tree_.size();
  result.diagnostics.forward_passes = scorer_.value_function().forward_passes();
  return result;
}

std::string ToString(Task task) { return task == Task::kGraph ? "graph" : "node"; }

namespace {

NodeSet MapNodes(const NodeSet& local, const NodeSet& to_global) {
  std::vector<NodeId> ids;
  ids.reserve(local.size());
  for (NodeId v : local) ids.push_back(to_global[static_cast<std::size_t>(v)]);
  return NodeSet::FromUnsorted(std::move(ids));
}

}  // namespace

Explanation Explain(const ModelSpec& model, const Graph& g, const SearchConfig& config) {
  config.Validate();
  Explanation out;
  out.graph_id = g.id();
  out.config = config;
  out.task = model.node_level() ? Task::kNode : Task::kGraph;

  // The search runs on `work`; `to_global` maps its indices back to g.
  Graph work;
  NodeSet to_global;
  NodeSet root;
  NodeSet protect;
  if (out.task == Task::kGraph) {
    if (g.num_nodes() == 0) throw InputError("cannot explain an empty graph");
    work = g;
    to_global = NodeSet::Range(g.num_nodes());
    root = ConnectedComponents(g, to_global).front();
  } else {
    if (!g.target_node()) throw InputError("node task needs a target node");
    const NodeId target = *g.target_node();
    out.target_node = target;
    const int layers = static_cast<int>(model.num_layers());
    // (L+1)-hop ball around the target; the outer ring only supplies degrees.
    to_global = LHopNeighbors(g, NodeSet{target}, layers + 1).Union(NodeSet{target});
    const auto local_target = static_cast<NodeId>(
        std::lower_bound(to_global.begin(), to_global.end(), target) - to_global.begin());
    work = InducedSubgraph(g, to_global).WithTarget(local_target);
    root = LHopNeighbors(work, NodeSet{local_target}, layers).Union(NodeSet{local_target});
    protect = NodeSet{local_target};
  }

  const Prediction original = ModelRunner(model, work).Predict();
  out.predicted_class = original.predicted_class;
  out.predicted_probability = original.probabilities[original.predicted_class];

  auto value = std::make_shared<MaskedProbability>(model, work, original.predicted_class);
  SubgraphScorer scorer(value, config.scorer, protect, config.seed, config.workers);
  SubgraphSearch search(scorer, root, config);
  SearchResult result = search.Run();

  out.nodes = MapNodes(result.best.nodes, to_global);
  out.score = result.best.score;
  out.sparsity = 1.0 - static_cast<double>(out.nodes.size()) / static_cast<double>(g.num_nodes());
  for (const auto& [size, sub] : result.per_size) {
    out.per_size.emplace(size, SizedSubgraph{MapNodes(sub.nodes, to_global), sub.score});
  }
  out.diagnostics = result.diagnostics;
  return out;
}

std::vector<NodeSet> ConnectedSubsets(const Graph& g, std::size_t size) {
  const auto n = static_cast<std::size_t>(g.num_nodes());
  std::vector<NodeSet> out;
  if (size == 0 || size > n) return out;
  std::vector<NodeId> pick(size);
  for (std::size_t i = 0; i < size; ++i) pick[i] = static_cast<NodeId>(i);
  while (true) {
    NodeSet candidate = NodeSet::FromUnsorted(pick);
    if (IsConnected(g, candidate)) out.push_back(std::move(candidate));
    // Next combination in lexicographic order.
    std::size_t i = size;
    while (i > 0 && static_cast<std::size_t>(pick[i - 1]) == n - size + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

SizedSubgraph BruteForceBest(const SubgraphScorer& scorer, std::size_t size) {
  const Graph& g = scorer.value_function().graph();
  if (g.num_nodes() > kBruteForceMaxNodes) {
    throw CapacityError("brute-force search limited to " + std::to_string(kBruteForceMaxNodes) +
                        " nodes, graph has " + std::to_string(g.num_nodes()));
  }
  std::vector<NodeSet> candidates = ConnectedSubsets(g, size);
  if (candidates.empty()) throw InputError("no connected subgraph of the requested size");
  SizedSubgraph best{candidates.front(), scorer.Score(candidates.front()).value};
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double s = scorer.Score(candidates[i]).value;
    if (s > best.score) best = {candidates[i], s};
  }
  return best;
}

}  // namespace shapgraph
