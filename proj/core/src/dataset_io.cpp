#include "shapgraph/dataset_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "shapgraph/error.hpp"

namespace shapgraph {

namespace {

const std::set<std::string>& KnownFields() {
  static const std::set<std::string> fields = {
      "id", "num_nodes", "edges", "features", "label", "target_node"};
  return fields;
}

template <class T>
T Require(const nlohmann::json& record, const char* key) {
  auto it = record.find(key);
  if (it == record.end()) throw FormatError(std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

Graph GraphFromJson(const nlohmann::json& record) {
  if (!record.is_object()) throw FormatError("graph record is not an object");
  for (const auto& item : record.items()) {
    if (!KnownFields().count(item.key())) {
      throw FormatError("unknown field '" + item.key() + "'");
    }
  }
  auto id = Require<std::string>(record, "id");
  auto num_nodes = Require<NodeId>(record, "num_nodes");
  auto raw_edges = Require<std::vector<std::vector<NodeId>>>(record, "edges");
  auto rows = Require<std::vector<std::vector<double>>>(record, "features");

  std::vector<Edge> edges;
  edges.reserve(raw_edges.size());
  for (const auto& pair : raw_edges) {
    if (pair.size() != 2) throw FormatError("edge entry must be a [u, v] pair");
    edges.push_back({pair[0], pair[1]});
  }
  if (rows.size() != static_cast<std::size_t>(std::max<NodeId>(num_nodes, 0))) {
    throw FormatError("graph '" + id + "': " + std::to_string(rows.size()) +
                      " feature rows for " + std::to_string(num_nodes) + " nodes");
  }
  const std::size_t dim = rows.empty() ? 0 : rows.front().size();
  Eigen::MatrixXd features(static_cast<Eigen::Index>(rows.size()),
                           static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) {
      throw FormatError("graph '" + id + "': feature rows differ in length");
    }
    for (std::size_t j = 0; j < dim; ++j) {
      features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  std::optional<int> label;
  if (record.contains("label")) label = Require<int>(record, "label");
  std::optional<NodeId> target;
  if (record.contains("target_node")) target = Require<NodeId>(record, "target_node");
  try {
    return Graph(std::move(id), num_nodes, std::move(edges), std::move(features),
                 label, target);
  } catch (const InputError& e) {
    throw FormatError(e.what());
  }
}

nlohmann::ordered_json GraphToJson(const Graph& g) {
  nlohmann::ordered_json record;
  record["id"] = g.id();
  record["num_nodes"] = g.num_nodes();
  auto edges = nlohmann::ordered_json::array();
  for (const Edge& e : g.edges()) edges.push_back({e.u, e.v});
  record["edges"] = std::move(edges);
  auto features = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < g.features().rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < g.features().cols(); ++j) row.push_back(g.features()(i, j));
    features.push_back(std::move(row));
  }
  record["features"] = std::move(features);
  if (g.label()) record["label"] = *g.label();
  if (g.target_node()) record["target_node"] = *g.target_node();
  return record;
}

std::vector<Graph> ReadDataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  std::vector<Graph> graphs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      graphs.push_back(GraphFromJson(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return graphs;
}

void WriteDataset(const std::filesystem::path& path, const std::vector<Graph>& graphs) {
  std::ostringstream out;
  for (const Graph& g : graphs) out << GraphToJson(g).dump() << '\n';
  WriteTextFile(path, out.str());
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace shapgraph
