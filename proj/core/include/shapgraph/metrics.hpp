#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shapgraph/gnn.hpp"
#include "shapgraph/graph.hpp"
#include "shapgraph/mcts.hpp"

namespace shapgraph {

struct EvalRecord {
  std::string graph_id;
  std::optional<NodeId> target_node;
  NodeSet mask;  // important nodes
  int predicted_class = 0;
  double original_prob = 0.0;
  double occluded_prob = 0.0;
  double sparsity = 0.0;
};

// Zero-pads the mask nodes (never a node-level target) and records the
// probability of the originally predicted class before and after.
EvalRecord EvaluateMask(const ModelSpec& model, const Graph& g, const NodeSet& mask);

// Mean of f(G)_y - f(G with mask occluded)_y. One mask per graph; per-graph
// terms are summed in (graph id, target node) order. Throws InputError on an
// empty batch or a count mismatch.
double Fidelity(const ModelSpec& model, std::span<const Graph> graphs, std::span<const NodeSet> masks);
double FidelityOf(std::span<const EvalRecord> records);

// Mean of 1 - |mask| / |graph|.
double Sparsity(std::span<const NodeSet> masks, std::span<const Graph> graphs);

struct CurvePoint {
  std::size_t size = 0;
  double sparsity = 0.0;
  double fidelity = 0.0;
  std::size_t n_graphs = 0;
  // Graphs lacking this size that used the nearest smaller one (or, with
  // none smaller, the nearest larger one).
  std::size_t fallbacks = 0;
};

// Subgraph of the explanation with the requested size, or the fallback.
// Returns false in `exact` when a fallback was used.
const SizedSubgraph& SubgraphOfSize(const Explanation& e, std::size_t size, bool* exact);

// One point per requested size, sorted by sparsity ascending. explanations[i]
// must explain graphs[i].
std::vector<CurvePoint> SparsityFidelityCurve(const ModelSpec& model, std::span<const Graph> graphs,
                                              std::span<const Explanation> explanations,
                                              std::span<const std::size_t> sizes);

// |explanation ∩ truth| / |truth|. Throws InputError on empty truth.
double MotifRecall(const NodeSet& explanation, const NodeSet& truth);

// "size,sparsity,fidelity,n_graphs" header plus one row per point.
std::string CurveToCsv(std::span<const CurvePoint> curve);
nlohmann::ordered_json CurveToJson(std::span<const CurvePoint> curve);

}  // namespace shapgraph
