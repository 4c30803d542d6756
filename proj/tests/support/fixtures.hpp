#pragma once

#include <cstdint>
#include <deque>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "shapgraph/graph.hpp"

namespace shapgraph {

// Readable NodeSet values in test failure messages.
inline void PrintTo(const NodeSet& nodes, std::ostream* os) {
  *os << "{";
  bool first = true;
  for (NodeId v : nodes) {
    *os << (first ? "" : ",") << v;
    first = false;
  }
  *os << "}";
}

}  // namespace shapgraph

namespace shapgraph::testing {

inline Graph MakeGraph(NodeId n, std::vector<std::pair<NodeId, NodeId>> pairs,
                       Eigen::Index dim = 1, std::string id = "g") {
  std::vector<Edge> edges;
  for (auto [u, v] : pairs) edges.push_back({u, v});
  return Graph(std::move(id), n, std::move(edges), Eigen::MatrixXd::Ones(n, dim));
}

inline Graph Path(NodeId n, Eigen::Index dim = 1) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return MakeGraph(n, e, dim, "path");
}

inline Graph Cycle(NodeId n, Eigen::Index dim = 1) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return MakeGraph(n, e, dim, "cycle");
}

inline Graph Star(NodeId leaves, Eigen::Index dim = 1) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return MakeGraph(leaves + 1, e, dim, "star");
}

// Connected random graph: a random spanning tree plus extra edges, with
// Gaussian features.
inline Graph RandomConnectedGraph(NodeId n, int extra_edges, Eigen::Index dim,
                                  std::uint64_t seed, std::string id = "rand") {
  std::mt19937_64 rng(seed);
  std::vector<Edge> edges;
  auto has = [&](NodeId a, NodeId b) {
    for (const Edge& e : edges) {
      if ((e.u == a && e.v == b) || (e.u == b && e.v == a)) return true;
    }
    return false;
  };
  for (NodeId v = 1; v < n; ++v) {
    std::uniform_int_distribution<NodeId> pick(0, v - 1);
    edges.push_back({pick(rng), v});
  }
  std::uniform_int_distribution<NodeId> any(0, n - 1);
  for (int i = 0; i < extra_edges * 20 && extra_edges > 0; ++i) {
    NodeId a = any(rng), b = any(rng);
    if (a == b || has(a, b)) continue;
    edges.push_back({a, b});
    if (--extra_edges == 0) break;
  }
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(n, dim);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  return Graph(std::move(id), n, std::move(edges), std::move(x));
}

// Breadth-first distances from every seed node, written independently of the
// library's traversal code. Unreachable nodes get -1.
inline std::vector<int> BfsDistances(const Graph& g, const std::vector<NodeId>& seeds) {
  std::vector<std::vector<NodeId>> adj(static_cast<std::size_t>(g.num_nodes()));
  for (const Edge& e : g.edges()) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  std::vector<int> dist(adj.size(), -1);
  std::deque<NodeId> queue;
  for (NodeId s : seeds) {
    dist[s] = 0;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    NodeId v = queue.front();
    queue.pop_front();
    for (NodeId w : adj[v]) {
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

}  // namespace shapgraph::testing
