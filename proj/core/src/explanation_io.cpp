#include "shapgraph/explanation_io.hpp"

#include <sstream>

#include "shapgraph/dataset_io.hpp"
#include "shapgraph/error.hpp"

namespace shapgraph {

nlohmann::ordered_json ConfigToJson(const SearchConfig& config) {
  nlohmann::ordered_json j;
  j["iterations"] = config.iterations;
  j["min_nodes"] = config.min_nodes;
  j["lambda"] = config.lambda;
  j["prune"] = ToString(config.strategy.order);
  if (config.strategy.k) {
    j["prune_k"] = *config.strategy.k;
  } else {
    j["prune_k"] = "all";
  }
  j["scorer"] = ToString(config.scorer.kind);
  j["samples"] = config.scorer.samples;
  if (config.scorer.hops == kUnboundedHops) {
    j["hops"] = "inf";
  } else {
    j["hops"] = config.scorer.hops;
  }
  j["seed"] = config.seed;
  return j;
}

SearchConfig ConfigFromJson(const nlohmann::json& doc) {
  SearchConfig c;
  c.iterations = doc.at("iterations").get<std::size_t>();
  c.min_nodes = doc.at("min_nodes").get<std::size_t>();
  c.lambda = doc.at("lambda").get<double>();
  c.strategy.order = ParsePruneOrder(doc.at("prune").get<std::string>());
  if (doc.at("prune_k").is_string()) {
    c.strategy.k = std::nullopt;
  } else {
    c.strategy.k = doc.at("prune_k").get<std::size_t>();
  }
  c.scorer.kind = ParseScorerKind(doc.at("scorer").get<std::string>());
  c.scorer.samples = doc.at("samples").get<std::size_t>();
  c.scorer.hops = doc.at("hops").is_string() ? kUnboundedHops : doc.at("hops").get<int>();
  c.seed = doc.at("seed").get<std::uint64_t>();
  return c;
}

nlohmann::ordered_json ExplanationToJson(const Explanation& e) {
  nlohmann::ordered_json j;
  j["graph_id"] = e.graph_id;
  j["task"] = ToString(e.task);
  if (e.target_node) j["target_node"] = *e.target_node;
  j["predicted_class"] = e.predicted_class;
  j["predicted_probability"] = e.predicted_probability;
  j["explanation_nodes"] = e.nodes.ids();
  j["score"] = e.score;
  j["scorer"] = ToString(e.config.scorer.kind);
  j["sparsity"] = e.sparsity;
  auto per_size = nlohmann::ordered_json::array();
  for (const auto& [size, sub] : e.per_size) {
    nlohmann::ordered_json row;
    row["size"] = size;
    row["nodes"] = sub.nodes.ids();
    row["score"] = sub.score;
    per_size.push_back(std::move(row));
  }
  j["per_size"] = std::move(per_size);
  j["config"] = ConfigToJson(e.config);
  nlohmann::ordered_json d;
  d["iterations"] = e.diagnostics.iterations;
  d["states_expanded"] = e.diagnostics.states_expanded;
  d["states_scored"] = e.diagnostics.states_scored;
  d["tree_states"] = e.diagnostics.tree_states;
  d["forward_passes"] = e.diagnostics.forward_passes;
  j["diagnostics"] = std::move(d);
  return j;
}

Explanation ExplanationFromJson(const nlohmann::json& doc) {
  try {
    Explanation e;
    e.graph_id = doc.at("graph_id").get<std::string>();
    const auto task = doc.at("task").get<std::string>();
    if (task != "graph" && task != "node") throw FormatError("unknown task '" + task + "'");
    e.task = task == "graph" ? Task::kGraph : Task::kNode;
    if (doc.contains("target_node")) e.target_node = doc.at("target_node").get<NodeId>();
    e.predicted_class = doc.at("predicted_class").get<int>();
    e.predicted_probability = doc.at("predicted_probability").get<double>();
    e.nodes = NodeSet::FromUnsorted(doc.at("explanation_nodes").get<std::vector<NodeId>>());
    e.score = doc.at("score").get<double>();
    e.sparsity = doc.at("sparsity").get<double>();
    for (const auto& row : doc.at("per_size")) {
      e.per_size.emplace(row.at("size").get<std::size_t>(),
                         SizedSubgraph{NodeSet::FromUnsorted(row.at("nodes").get<std::vector<NodeId>>()),
                                       row.at("score").get<double>()});
    }
    e.config = ConfigFromJson(doc.at("config"));
    const auto& d = doc.at("diagnostics");
    e.diagnostics.iterations = d.at("iterations").get<std::size_t>();
    e.diagnostics.states_expanded = d.at("states_expanded").get<std::size_t>();
    e.diagnostics.states_scored = d.at("states_scored").get<std::size_t>();
    e.diagnostics.tree_states = d.at("tree_states").get<std::size_t>();
    e.diagnostics.forward_passes = d.at("forward_passes").get<std::size_t>();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("explanation document: ") + ex.what());
  } catch (const InputError& ex) {
    throw FormatError(std::string("explanation document: ") + ex.what());
  }
}

void WriteExplanations(const std::filesystem::path& path, const std::vector<Explanation>& items) {
  std::ostringstream out;
  for (const Explanation& e : items) out << ExplanationToJson(e).dump() << '\n';
  WriteTextFile(path, out.str());
}

std::vector<Explanation> ReadExplanations(const std::filesystem::path& path) {
  std::istringstream in(ReadTextFile(path));
  std::vector<Explanation> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(ExplanationFromJson(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace shapgraph
