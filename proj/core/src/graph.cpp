#include "shapgraph/graph.hpp"

#include <algorithm>
#include <deque>
#include <iterator>
#include <numeric>
#include <sstream>

#include "shapgraph/error.hpp"

namespace shapgraph {

NodeSet::NodeSet(std::initializer_list<NodeId> ids)
    : NodeSet(FromUnsorted(std::vector<NodeId>(ids))) {}

NodeSet NodeSet::FromUnsorted(std::vector<NodeId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  NodeSet s;
  s.ids_ = std::move(ids);
  return s;
}

NodeSet NodeSet::Range(NodeId n) {
  NodeSet s;
  s.ids_.resize(static_cast<std::size_t>(std::max<NodeId>(n, 0)));
  std::iota(s.ids_.begin(), s.ids_.end(), 0);
  return s;
}

bool NodeSet::contains(NodeId v) const {
  return std::binary_search(ids_.begin(), ids_.end(), v);
}

NodeSet NodeSet::Union(const NodeSet& other) const {
  NodeSet s;
  std::set_union(ids_.begin(), ids_.end(), other.ids_.begin(),
                 other.ids_.end(), std::back_inserter(s.ids_));
  return s;
}

NodeSet NodeSet::Difference(const NodeSet& other) const {
  NodeSet s;
  std::set_difference(ids_.begin(), ids_.end(), other.ids_.begin(),
                      other.ids_.end(), std::back_inserter(s.ids_));
  return s;
}

NodeSet NodeSet::Intersection(const NodeSet& other) const {
  NodeSet s;
  std::set_intersection(ids_.begin(), ids_.end(), other.ids_.begin(),
                        other.ids_.end(), std::back_inserter(s.ids_));
  return s;
}

NodeSet NodeSet::Without(NodeId v) const {
  NodeSet s;
  s.ids_.reserve(ids_.size());
  for (NodeId x : ids_) {
    if (x != v) s.ids_.push_back(x);
  }
  return s;
}

std::size_t NodeSetHash::operator()(const NodeSet& s) const noexcept {
  // FNV-1a over the indices.
  std::uint64_t h = 1469598103934665603ULL;
  for (NodeId v : s) {
    h ^= static_cast<std::uint32_t>(v);
    h *= 1099511628211ULL;
  }
  return static_cast<std::size_t>(h);
}

Graph::Graph(std::string id, NodeId num_nodes, std::vector<Edge> edges,
             Eigen::MatrixXd features, std::optional<int> label,
             std::optional<NodeId> target_node)
    : id_(std::move(id)),
      num_nodes_(num_nodes),
      features_(std::move(features)),
      label_(label),
      target_node_(target_node) {
  if (num_nodes < 0) throw InputError("negative node count");
  if (features_.rows() != num_nodes) {
    std::ostringstream msg;
    msg << "feature matrix has " << features_.rows() << " rows, expected "
        << num_nodes;
    throw InputError(msg.str());
  }
  if (!features_.allFinite()) throw InputError("non-finite feature value");
  for (Edge& e : edges) {
    if (!valid(e.u) || !valid(e.v)) {
      std::ostringstream msg;
      msg << "edge (" << e.u << "," << e.v << ") out of range for "
          << num_nodes << " nodes";
      throw InputError(msg.str());
    }
    if (e.u == e.v) {
      throw InputError("self-loop on node " + std::to_string(e.u));
    }
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end());
  if (auto dup = std::adjacent_find(edges.begin(), edges.end());
      dup != edges.end()) {
    std::ostringstream msg;
    msg << "duplicate edge (" << dup->u << "," << dup->v << ")";
    throw InputError(msg.str());
  }
  if (target_node_ && !valid(*target_node_)) {
    throw InputError("target node " + std::to_string(*target_node_) +
                     " out of range");
  }
  edges_ = std::move(edges);

  std::vector<std::size_t> deg(static_cast<std::size_t>(num_nodes), 0);
  for (const Edge& e : edges_) {
    ++deg[e.u];
    ++deg[e.v];
  }
  offsets_.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
  for (NodeId v = 0; v < num_nodes; ++v) offsets_[v + 1] = offsets_[v] + deg[v];
  adjacency_.resize(offsets_.back());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const Edge& e : edges_) {
    adjacency_[fill[e.u]++] = e.v;
    adjacency_[fill[e.v]++] = e.u;
  }
  for (NodeId v = 0; v < num_nodes; ++v) {
    std::sort(adjacency_.begin() + offsets_[v], adjacency_.begin() + offsets_[v + 1]);
  }
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  if (!valid(u) || !valid(v)) return false;
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

Graph Graph::WithLabel(std::optional<int> label) const {
  Graph g = *this;
  g.label_ = label;
  return g;
}

Graph Graph::WithTarget(std::optional<NodeId> target) const {
  if (target && !valid(*target)) {
    throw InputError("target node " + std::to_string(*target) + " out of range");
  }
  Graph g = *this;
  g.target_node_ = target;
  return g;
}

void CheckNodes(const Graph& g, const NodeSet& nodes) {
  for (NodeId v : nodes) {
    if (!g.valid(v)) {
      throw InputError("node " + std::to_string(v) + " out of range for graph '" +
                       g.id() + "' with " + std::to_string(g.num_nodes()) +
                       " nodes");
    }
  }
}

namespace {

// Membership flags for a node set.
std::vector<char> Mask(const Graph& g, const NodeSet& nodes) {
  std::vector<char> in(static_cast<std::size_t>(g.num_nodes()), 0);
  for (NodeId v : nodes) in[v] = 1;
  return in;
}

}  // namespace

std::vector<NodeSet> ConnectedComponents(const Graph& g, const NodeSet& nodes) {
  CheckNodes(g, nodes);
  std::vector<char> in = Mask(g, nodes);
  std::vector<char> seen(in.size(), 0);
  std::vector<NodeSet> components;
  std::vector<NodeId> stack;
  for (NodeId start : nodes) {
    if (seen[start]) continue;
    std::vector<NodeId> members;
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      NodeId v = stack.back();
      stack.pop_back();
      members.push_back(v);
      for (NodeId w : g.neighbors(v)) {
        if (in[w] && !seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
    components.push_back(NodeSet::FromUnsorted(std::move(members)));
  }
  std::stable_sort(components.begin(), components.end(),
                   [](const NodeSet& a, const NodeSet& b) {
                     if (a.size() != b.size()) return a.size() > b.size();
                     return a.front() < b.front();
                   });
  return components;
}

bool IsConnected(const Graph& g, const NodeSet& nodes) {
  if (nodes.empty()) return true;
  return ConnectedComponents(g, nodes).size() == 1;
}

NodeSet LHopNeighbors(const Graph& g, const NodeSet& seed, int hops) {
  if (seed.empty()) throw InputError("L-hop neighborhood of an empty seed set");
  if (hops < 0) throw InputError("negative hop count");
  CheckNodes(g, seed);
  std::vector<int> dist(static_cast<std::size_t>(g.num_nodes()), -1);
  std::deque<NodeId> queue;
  for (NodeId v : seed) {
    dist[v] = 0;
    queue.push_back(v);
  }
  std::vector<NodeId> found;
  while (!queue.empty()) {
    NodeId v = queue.front();
    queue.pop_front();
    if (dist[v] >= hops) continue;
    for (NodeId w : g.neighbors(v)) {
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        found.push_back(w);
        queue.push_back(w);
      }
    }
  }
  return NodeSet::FromUnsorted(std::move(found));
}

void PruneStrategy::Validate() const {
  if (k && *k < 1) throw InputError("prune k must be at least 1");
}

std::vector<NodeId> InducedDegreeOrder(const Graph& g, const NodeSet& nodes,
                                       PruneOrder order) {
  CheckNodes(g, nodes);
  std::vector<std::pair<std::size_t, NodeId>> keyed;
  keyed.reserve(nodes.size());
  for (NodeId v : nodes) {
    std::size_t d = 0;
    for (NodeId w : g.neighbors(v)) d += nodes.contains(w) ? 1 : 0;
    keyed.emplace_back(d, v);
  }
  std::sort(keyed.begin(), keyed.end(), [order](const auto& a, const auto& b) {
    if (a.first != b.first) {
      return order == PruneOrder::kLow2High ? a.first < b.first
                                            : a.first > b.first;
    }
    return a.second < b.second;
  });
  std::vector<NodeId> out;
  out.reserve(keyed.size());
  for (const auto& [d, v] : keyed) out.push_back(v);
  return out;
}

std::vector<PruneAction> PruneActions(const Graph& g, const NodeSet& current,
                                      const PruneStrategy& strategy) {
  strategy.Validate();
  CheckNodes(g, current);
  if (current.size() < 2) {
    throw ContractError("pruning needs a subgraph with at least 2 nodes");
  }
  if (!IsConnected(g, current)) {
    throw ContractError("pruning requires a connected subgraph");
  }
  std::vector<NodeId> candidates = InducedDegreeOrder(g, current, strategy.order);
  if (strategy.k && candidates.size() > *strategy.k) candidates.resize(*strategy.k);

  std::vector<PruneAction> actions;
  for (NodeId removed : candidates) {
    // Components come back largest first, smallest index breaking ties.
    NodeSet child = ConnectedComponents(g, current.Without(removed)).front();
    bool duplicate = std::any_of(actions.begin(), actions.end(),
                                 [&](const PruneAction& a) { return a.child == child; });
    if (!duplicate) actions.push_back({removed, std::move(child)});
  }
  return actions;
}

Graph InducedSubgraph(const Graph& g, const NodeSet& nodes) {
  CheckNodes(g, nodes);
  std::vector<NodeId> remap(static_cast<std::size_t>(g.num_nodes()), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) remap[nodes[i]] = static_cast<NodeId>(i);
  std::vector<Edge> edges;
  for (const Edge& e : g.edges()) {
    if (remap[e.u] >= 0 && remap[e.v] >= 0) edges.push_back({remap[e.u], remap[e.v]});
  }
  Eigen::MatrixXd feats(static_cast<Eigen::Index>(nodes.size()), g.feature_dim());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    feats.row(static_cast<Eigen::Index>(i)) = g.features().row(nodes[i]);
  }
  return Graph(g.id(), static_cast<NodeId>(nodes.size()), std::move(edges),
               std::move(feats));
}

std::string ToString(PruneOrder order) {
  return order == PruneOrder::kLow2High ? "low2high" : "high2low";
}

PruneOrder ParsePruneOrder(const std::string& text) {
  if (text == "low2high") return PruneOrder::kLow2High;
  if (text == "high2low") return PruneOrder::kHigh2Low;
  throw InputError("unknown prune order '" + text + "'");
}

}  // namespace shapgraph
