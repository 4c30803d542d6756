#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "shapgraph/gnn.hpp"

namespace shapgraph {

inline constexpr const char* kWeightFormatVersion = "1";

// Weight document:
//   {"format_version": "1", "model_type": "GCN"|"GIN", "input_dim", "num_classes",
//    "readout": "max"|"mean"|"none",
//    "layers": [{"weight", "bias"?} | {"mlp_w1","mlp_b1","mlp_w2","mlp_b2","eps"}],
//    "classifier": {"weight", "bias"}}
// Matrices are row-major nested arrays shaped (input x output). Doubles are
// written in shortest round-trip form, so loading reproduces them exactly.
nlohmann::ordered_json ModelToJson(const ModelSpec& model);
// Throws FormatError on a schema violation or a broken dimension chain.
ModelSpec ModelFromJson(const nlohmann::json& doc);

std::string SerializeModel(const ModelSpec& model);
ModelSpec ParseModel(const std::string& text);

void SaveWeights(const ModelSpec& model, const std::filesystem::path& path);
ModelSpec LoadWeights(const std::filesystem::path& path);

}  // namespace shapgraph
