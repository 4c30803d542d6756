#include "shapgraph/model_io.hpp"

#include <set>

#include "shapgraph/dataset_io.hpp"
#include "shapgraph/error.hpp"

namespace shapgraph {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;

namespace {

nlohmann::ordered_json MatrixToJson(const MatrixXd& m) {
  auto rows = nlohmann::ordered_json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::ordered_json VectorToJson(const RowVectorXd& v) {
  auto out = nlohmann::ordered_json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

const nlohmann::json& Field(const nlohmann::json& obj, const std::string& key,
                            const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(where + ": missing field '" + key + "'");
  return *it;
}

void RejectUnknown(const nlohmann::json& obj, const std::set<std::string>& allowed,
                   const std::string& where) {
  if (!obj.is_object()) throw FormatError(where + ": expected an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw FormatError(where + ": unknown field '" + item.key() + "'");
    }
  }
}

double Number(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number()) throw FormatError(where + ": expected a number");
  return v.get<double>();
}

MatrixXd MatrixFromJson(const nlohmann::json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw FormatError(where + ": expected a non-empty 2-D array");
  const std::size_t cols = v.front().is_array() ? v.front().size() : 0;
  if (cols == 0) throw FormatError(where + ": expected a non-empty 2-D array");
  MatrixXd m(static_cast<Index>(v.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_array() || v[i].size() != cols) {
      throw FormatError(where + ": ragged matrix at row " + std::to_string(i));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Index>(i), static_cast<Index>(j)) = Number(v[i][j], where);
    }
  }
  return m;
}

RowVectorXd VectorFromJson(const nlohmann::json& v, const std::string& where) {
  if (!v.is_array()) throw FormatError(where + ": expected an array");
  RowVectorXd out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Index>(i)] = Number(v[i], where);
  return out;
}

template <class T>
T Scalar(const nlohmann::json& v, const std::string& where) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(where + ": " + e.what());
  }
}

}  // namespace

nlohmann::ordered_json ModelToJson(const ModelSpec& model) {
  nlohmann::ordered_json doc;
  doc["format_version"] = kWeightFormatVersion;
  doc["model_type"] = ToString(model.model_type);
  doc["input_dim"] = model.input_dim;
  doc["num_classes"] = model.num_classes;
  doc["readout"] = ToString(model.readout);
  auto layers = nlohmann::ordered_json::array();
  for (const LayerSpec& spec : model.layers) {
    nlohmann::ordered_json layer;
    if (const auto* gcn = std::get_if<GcnLayer>(&spec)) {
      layer["weight"] = MatrixToJson(gcn->weight);
      if (gcn->bias.size() != 0) layer["bias"] = VectorToJson(gcn->bias);
    } else {
      const auto& gin = std::get<GinLayer>(spec);
      layer["mlp_w1"] = MatrixToJson(gin.mlp_w1);
      layer["mlp_b1"] = VectorToJson(gin.mlp_b1);
      layer["mlp_w2"] = MatrixToJson(gin.mlp_w2);
      layer["mlp_b2"] = VectorToJson(gin.mlp_b2);
      layer["eps"] = gin.eps;
    }
    layers.push_back(std::move(layer));
  }
  doc["layers"] = std::move(layers);
  doc["classifier"]["weight"] = MatrixToJson(model.classifier.weight);
  doc["classifier"]["bias"] = VectorToJson(model.classifier.bias);
  return doc;
}

ModelSpec ModelFromJson(const nlohmann::json& doc) {
  RejectUnknown(doc, {"format_version", "model_type", "input_dim", "num_classes", "readout",
                      "layers", "classifier"},
                "weights");
  const auto version = Scalar<std::string>(Field(doc, "format_version", "weights"), "format_version");
  if (version != kWeightFormatVersion) {
    throw FormatError("unsupported format_version '" + version + "'");
  }
  ModelSpec model;
  try {
    model.model_type = ParseModelType(Scalar<std::string>(Field(doc, "model_type", "weights"), "model_type"));
    model.readout = ParseReadout(Scalar<std::string>(Field(doc, "readout", "weights"), "readout"));
  } catch (const InputError& e) {
    throw FormatError(e.what());
  }
  model.input_dim = Scalar<Index>(Field(doc, "input_dim", "weights"), "input_dim");
  model.num_classes = Scalar<int>(Field(doc, "num_classes", "weights"), "num_classes");

  const auto& layers = Field(doc, "layers", "weights");
  if (!layers.is_array()) throw FormatError("layers: expected an array");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string where = "layer " + std::to_string(i);
    const auto& l = layers[i];
    if (model.model_type == ModelType::kGcn) {
      RejectUnknown(l, {"weight", "bias"}, where);
      GcnLayer layer;
      layer.weight = MatrixFromJson(Field(l, "weight", where), where + ".weight");
      if (l.contains("bias")) layer.bias = VectorFromJson(l["bias"], where + ".bias");
      model.layers.emplace_back(std::move(layer));
    } else {
      RejectUnknown(l, {"mlp_w1", "mlp_b1", "mlp_w2", "mlp_b2", "eps"}, where);
      GinLayer layer;
      layer.mlp_w1 = MatrixFromJson(Field(l, "mlp_w1", where), where + ".mlp_w1");
      layer.mlp_b1 = VectorFromJson(Field(l, "mlp_b1", where), where + ".mlp_b1");
      layer.mlp_w2 = MatrixFromJson(Field(l, "mlp_w2", where), where + ".mlp_w2");
      layer.mlp_b2 = VectorFromJson(Field(l, "mlp_b2", where), where + ".mlp_b2");
      layer.eps = Number(Field(l, "eps", where), where + ".eps");
      model.layers.emplace_back(std::move(layer));
    }
  }
  const auto& cls = Field(doc, "classifier", "weights");
  RejectUnknown(cls, {"weight", "bias"}, "classifier");
  model.classifier.weight = MatrixFromJson(Field(cls, "weight", "classifier"), "classifier.weight");
  model.classifier.bias = VectorFromJson(Field(cls, "bias", "classifier"), "classifier.bias");
  model.Validate();
  return model;
}

std::string SerializeModel(const ModelSpec& model) { return ModelToJson(model).dump() + "\n"; }

ModelSpec ParseModel(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("weights: ") + e.what());
  }
  return ModelFromJson(doc);
}

void SaveWeights(const ModelSpec& model, const std::filesystem::path& path) {
  WriteTextFile(path, SerializeModel(model));
}

ModelSpec LoadWeights(const std::filesystem::path& path) {
  try {
    return ParseModel(ReadTextFile(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace shapgraph
