#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace shapgraph {

using NodeId = std::int32_t;

// Sorted, duplicate-free set of node indices. A subgraph is identified by its
// node set; its edges are the ones induced from the host graph.
class NodeSet {
 public:
  NodeSet() = default;
  NodeSet(std::initializer_list<NodeId> ids);
  // Sorts and deduplicates.
  static NodeSet FromUnsorted(std::vector<NodeId> ids);
  // Every index in [0, n).
  static NodeSet Range(NodeId n);

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  bool contains(NodeId v) const;
  NodeId front() const { return ids_.front(); }
  NodeId back() const { return ids_.back(); }
  NodeId operator[](std::size_t i) const { return ids_[i]; }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }
  const std::vector<NodeId>& ids() const { return ids_; }

  NodeSet Union(const NodeSet& other) const;
  NodeSet Difference(const NodeSet& other) const;
  NodeSet Intersection(const NodeSet& other) const;
  NodeSet Without(NodeId v) const;

  friend bool operator==(const NodeSet&, const NodeSet&) = default;
  friend auto operator<=>(const NodeSet&, const NodeSet&) = default;

 private:
  std::vector<NodeId> ids_;
};

struct NodeSetHash {
  std::size_t operator()(const NodeSet& s) const noexcept;
};

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Immutable undirected graph with per-node feature rows. Edges are stored
// canonically (u < v), sorted, without self-loops or duplicates.
class Graph {
 public:
  Graph() = default;
  // Throws InputError if an invariant is broken. Edges may be given in
  // either orientation.
  Graph(std::string id, NodeId num_nodes, std::vector<Edge> edges,
        Eigen::MatrixXd features, std::optional<int> label = std::nullopt,
        std::optional<NodeId> target_node = std::nullopt);

  const std::string& id() const { return id_; }
  NodeId num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Eigen::MatrixXd& features() const { return features_; }
  Eigen::Index feature_dim() const { return features_.cols(); }
  const std::optional<int>& label() const { return label_; }
  const std::optional<NodeId>& target_node() const { return target_node_; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {adjacency_.data() + offsets_[v],
            adjacency_.data() + offsets_[v + 1]};
  }
  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
  bool has_edge(NodeId u, NodeId v) const;
  bool valid(NodeId v) const { return v >= 0 && v < num_nodes_; }

  Graph WithLabel(std::optional<int> label) const;
  Graph WithTarget(std::optional<NodeId> target) const;

 private:
  std::string id_;
  NodeId num_nodes_ = 0;
  std::vector<Edge> edges_;
  Eigen::MatrixXd features_;
  std::optional<int> label_;
  std::optional<NodeId> target_node_;
  // CSR adjacency, neighbors sorted ascending.
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> adjacency_;
};

// Throws InputError unless every index in `nodes` is valid for `g`.
void CheckNodes(const Graph& g, const NodeSet& nodes);

// Components of the subgraph induced by `nodes`, sorted by size descending
// then smallest member ascending.
std::vector<NodeSet> ConnectedComponents(const Graph& g, const NodeSet& nodes);

bool IsConnected(const Graph& g, const NodeSet& nodes);

inline constexpr int kUnboundedHops = std::numeric_limits<int>::max();

// Nodes at shortest-path distance 1..hops from the seed set, seed excluded.
NodeSet LHopNeighbors(const Graph& g, const NodeSet& seed, int hops);

enum class PruneOrder { kLow2High, kHigh2Low };

struct PruneStrategy {
  PruneOrder order = PruneOrder::kLow2High;
  // nullopt: every node of the current subgraph is a candidate.
  std::optional<std::size_t> k = 12;

  void Validate() const;
};

// Nodes ordered by degree inside the induced subgraph; ties by index.
std::vector<NodeId> InducedDegreeOrder(const Graph& g, const NodeSet& nodes,
                                       PruneOrder order);

struct PruneAction {
  NodeId removed = 0;
  NodeSet child;
};

// Node-pruning children of `current`: drop a candidate node, keep the largest
// remaining component (ties: the component holding the smallest index).
// Children are deduplicated, keeping the first candidate that produced each.
std::vector<PruneAction> PruneActions(const Graph& g, const NodeSet& current,
                                      const PruneStrategy& strategy);

// Induced subgraph re-indexed to 0..|nodes|-1 in ascending order of the
// original indices. Label and target are dropped.
Graph InducedSubgraph(const Graph& g, const NodeSet& nodes);

std::string ToString(PruneOrder order);
PruneOrder ParsePruneOrder(const std::string& text);

}  // namespace shapgraph
