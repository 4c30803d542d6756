#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "shapgraph/mcts.hpp"

namespace shapgraph {

// Explanation document fields: graph_id, task, target_node?, predicted_class,
// predicted_probability, explanation_nodes, score, scorer, sparsity, per_size
// [{size, nodes, score}], config, diagnostics. Worker count is not part of the
// document, so output bytes do not depend on it.
nlohmann::ordered_json ExplanationToJson(const Explanation& e);
Explanation ExplanationFromJson(const nlohmann::json& doc);

nlohmann::ordered_json ConfigToJson(const SearchConfig& config);
SearchConfig ConfigFromJson(const nlohmann::json& doc);

// One document per line.
void WriteExplanations(const std::filesystem::path& path, const std::vector<Explanation>& items);
std::vector<Explanation> ReadExplanations(const std::filesystem::path& path);

}  // namespace shapgraph
