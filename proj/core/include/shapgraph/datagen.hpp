#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shapgraph/graph.hpp"

namespace shapgraph {

enum class MotifKind { kHouse, kCycle5 };

std::string ToString(MotifKind kind);
MotifKind ParseMotifKind(const std::string& text);

// Ground-truth motif inside a generated graph. For node tasks `node_id` is
// the annotated node; the motif is the house it belongs to.
struct MotifSpec {
  std::string graph_id;
  std::optional<NodeId> node_id;
  MotifKind kind = MotifKind::kHouse;
  NodeSet nodes;
};

// Barabási-Albert preferential attachment: `m_attach` fully connected seed
// nodes, then each new node links to `m_attach` distinct existing nodes
// drawn with probability proportional to degree.
Graph GenerateBarabasiAlbert(NodeId n, NodeId m_attach, std::uint64_t seed,
                             std::string id = "ba", Eigen::Index feature_dim = 10);

struct MotifDataset {
  std::vector<Graph> graphs;
  std::vector<MotifSpec> motifs;
  // Labels assigned per node (node tasks only).
  std::vector<int> node_labels;
};

inline constexpr NodeId kMotifBaseNodes = 20;
inline constexpr NodeId kMotifSize = 5;

// 20-node BA base plus one 5-node motif (house -> label 1, 5-cycle ->
// label 0) hooked to a random base node by one edge. First half cycles,
// second half houses (floor(n/2) cycles).
MotifDataset GenerateBa2Motifs(std::size_t num_graphs, std::uint64_t seed);

inline constexpr NodeId kShapeBaseNodes = 300;
inline constexpr NodeId kShapeHouses = 80;

// Single graph: 300-node BA base plus 80 houses, each attached by one edge
// from its bottom-left node. Node labels: 0 base, 1 roof apex, 2 middle,
// 3 bottom. One MotifSpec per house node.
MotifDataset GenerateBaShape(std::uint64_t seed);

nlohmann::ordered_json MotifToJson(const MotifSpec& motif);
MotifSpec MotifFromJson(const nlohmann::json& record);
std::vector<MotifSpec> ReadGroundTruth(const std::string& path);
void WriteGroundTruth(const std::string& path, const std::vector<MotifSpec>& motifs);

}  // namespace shapgraph
