#include "shapgraph/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "shapgraph/error.hpp"

namespace shapgraph {

EvalRecord EvaluateMask(const ModelSpec& model, const Graph& g, const NodeSet& mask) {
  CheckNodes(g, mask);
  ModelRunner runner(model, g);
  const Prediction original = runner.Predict();
  std::vector<char> active(static_cast<std::size_t>(g.num_nodes()), 1);
  for (NodeId v : mask) active[v] = 0;
  if (model.node_level() && g.target_node()) active[*g.target_node()] = 1;
  const Prediction occluded = runner.Predict(active);
  EvalRecord r;
  r.graph_id = g.id();
  r.target_node = model.node_level() ? g.target_node() : std::nullopt;
  r.mask = mask;
  r.predicted_class = original.predicted_class;
  r.original_prob = original.probabilities[original.predicted_class];
  r.occluded_prob = occluded.probabilities[original.predicted_class];
  r.sparsity = g.num_nodes() == 0
                   ? 0.0
                   : 1.0 - static_cast<double>(mask.size()) / static_cast<double>(g.num_nodes());
  return r;
}

double FidelityOf(std::span<const EvalRecord> records) {
  if (records.empty()) throw InputError("fidelity of an empty batch");
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (records[a].graph_id != records[b].graph_id) return records[a].graph_id < records[b].graph_id;
    return records[a].target_node < records[b].target_node;
  });
  double total = 0.0;
  for (std::size_t i : order) total += records[i].original_prob - records[i].occluded_prob;
  return total / static_cast<double>(records.size());
}

double Fidelity(const ModelSpec& model, std::span<const Graph> graphs, std::span<const NodeSet> masks) {
  if (graphs.empty()) throw InputError("fidelity of an empty batch");
  if (graphs.size() != masks.size()) throw InputError("one mask per graph required");
  std::vector<EvalRecord> records;
  records.reserve(graphs.size());
  for (std::size_t i = 0; i < graphs.size(); ++i) records.push_back(EvaluateMask(model, graphs[i], masks[i]));
  return FidelityOf(records);
}

double Sparsity(std::span<const NodeSet> masks, std::span<const Graph> graphs) {
  if (graphs.empty()) throw InputError("sparsity of an empty batch");
  if (graphs.size() != masks.size()) throw InputError("one mask per graph required");
  double total = 0.0;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    CheckNodes(graphs[i], masks[i]);
    total += 1.0 - static_cast<double>(masks[i].size()) / static_cast<double>(graphs[i].num_nodes());
  }
  return total / static_cast<double>(graphs.size());
}

const SizedSubgraph& SubgraphOfSize(const Explanation& e, std::size_t size, bool* exact) {
  if (e.per_size.empty()) throw InputError("explanation for '" + e.graph_id + "' has no per-size subgraphs");
  auto it = e.per_size.find(size);
  if (exact) *exact = it != e.per_size.end();
  if (it != e.per_size.end()) return it->second;
  auto above = e.per_size.lower_bound(size);
  if (above != e.per_size.begin()) return std::prev(above)->second;
  return above->second;
}

std::vector<CurvePoint> SparsityFidelityCurve(const ModelSpec& model, std::span<const Graph> graphs,
                                              std::span<const Explanation> explanations,
                                              std::span<const std::size_t> sizes) {
  if (graphs.size() != explanations.size()) throw InputError("one explanation per graph required");
  std::vector<CurvePoint> curve;
  for (std::size_t size : sizes) {
    CurvePoint point;
    point.size = size;
    std::vector<NodeSet> masks;
    for (const Explanation& e : explanations) {
      bool exact = true;
      masks.push_back(SubgraphOfSize(e, size, &exact).nodes);
      if (!exact) ++point.fallbacks;
    }
    point.n_graphs = graphs.size();
    point.sparsity = Sparsity(masks, graphs);
    point.fidelity = Fidelity(model, graphs, masks);
    curve.push_back(point);
  }
  std::stable_sort(curve.begin(), curve.end(),
                   [](const CurvePoint& a, const CurvePoint& b) { return a.sparsity < b.sparsity; });
  return curve;
}

double MotifRecall(const NodeSet& explanation, const NodeSet& truth) {
  if (truth.empty()) throw InputError("motif recall needs a non-empty ground truth");
  return static_cast<double>(explanation.Intersection(truth).size()) / static_cast<double>(truth.size());
}

std::string CurveToCsv(std::span<const CurvePoint> curve) {
  std::ostringstream out;
  out << "size,sparsity,fidelity,n_graphs\n";
  char buf[128];
  for (const CurvePoint& p : curve) {
    std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,%zu\n", p.size, p.sparsity, p.fidelity, p.n_graphs);
    out << buf;
  }
  return out.str();
}

nlohmann::ordered_json CurveToJson(std::span<const CurvePoint> curve) {
  auto rows = nlohmann::ordered_json::array();
  for (const CurvePoint& p : curve) {
    nlohmann::ordered_json row;
    row["size"] = p.size;
    row["sparsity"] = p.sparsity;
    row["fidelity"] = p.fidelity;
    row["n_graphs"] = p.n_graphs;
    row["fallbacks"] = p.fallbacks;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace shapgraph
