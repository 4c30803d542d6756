#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shapgraph/graph.hpp"

namespace shapgraph {

// One graph per line: {"id", "num_nodes", "edges", "features", "label"?,
// "target_node"?}. Unknown fields are rejected.
Graph GraphFromJson(const nlohmann::json& record);
nlohmann::ordered_json GraphToJson(const Graph& g);

// Throws IoError if the file cannot be opened and FormatError (with the line
// number) on a malformed record.
std::vector<Graph> ReadDataset(const std::filesystem::path& path);
void WriteDataset(const std::filesystem::path& path, const std::vector<Graph>& graphs);

// Writes `text` to `path`, throwing IoError naming the path on failure.
void WriteTextFile(const std::filesystem::path& path, const std::string& text);
std::string ReadTextFile(const std::filesystem::path& path);

}  // namespace shapgraph
