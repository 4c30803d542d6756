#include "shapgraph/datagen.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "shapgraph/dataset_io.hpp"
#include "shapgraph/error.hpp"
#include "shapgraph/rng.hpp"

namespace shapgraph {

std::string ToString(MotifKind kind) { return kind == MotifKind::kHouse ? "house" : "cycle5"; }

MotifKind ParseMotifKind(const std::string& text) {
  if (text == "house") return MotifKind::kHouse;
  if (text == "cycle5") return MotifKind::kCycle5;
  throw FormatError("unknown motif kind '" + text + "'");
}

namespace {

// Edge list of a BA graph on nodes 0..n-1.
std::vector<Edge> BarabasiAlbertEdges(NodeId n, NodeId m, Rng& rng) {
  std::vector<Edge> edges;
  std::vector<double> degree(static_cast<std::size_t>(n), 0.0);
  for (NodeId u = 0; u < m; ++u) {
    for (NodeId v = u + 1; v < m; ++v) {
      edges.push_back({u, v});
      degree[u] += 1;
      degree[v] += 1;
    }
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<NodeId> chosen;
  for (NodeId v = m; v < n; ++v) {
    chosen.clear();
    for (NodeId pick = 0; pick < m; ++pick) {
      double total = 0.0;
      for (NodeId u = 0; u < v; ++u) {
        if (std::find(chosen.begin(), chosen.end(), u) == chosen.end()) total += degree[u];
      }
      NodeId target = -1;
      if (total <= 0.0) {
        // Only isolated candidates remain (the single seed node for m = 1).
        std::vector<NodeId> free;
        for (NodeId u = 0; u < v; ++u) {
          if (std::find(chosen.begin(), chosen.end(), u) == chosen.end()) free.push_back(u);
        }
        std::uniform_int_distribution<std::size_t> idx(0, free.size() - 1);
        target = free[idx(rng)];
      } else {
        double r = unit(rng) * total;
        for (NodeId u = 0; u < v; ++u) {
          if (std::find(chosen.begin(), chosen.end(), u) != chosen.end()) continue;
          target = u;
          r -= degree[u];
          if (r < 0.0) break;
        }
      }
      chosen.push_back(target);
    }
    for (NodeId u : chosen) {
      edges.push_back({u, v});
      degree[u] += 1;
      degree[v] += 1;
    }
  }
  return edges;
}

// House on base..base+4: square 0-1-2-3 with apex 4 over 2 and 3. Nodes 0
// and 1 are the bottom, 2 and 3 the middle.
void AddHouse(std::vector<Edge>& edges, NodeId base) {
  const NodeId b0 = base, b1 = base + 1, m0 = base + 2, m1 = base + 3, apex = base + 4;
  edges.insert(edges.end(), {{b0, b1}, {b1, m1}, {m1, m0}, {m0, b0}, {m0, apex}, {m1, apex}});
}

void AddCycle5(std::vector<Edge>& edges, NodeId base) {
  for (NodeId i = 0; i < 5; ++i) edges.push_back({base + i, base + (i + 1) % 5});
}

std::string PaddedId(const std::string& prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04zu", i);
  return prefix + buf;
}

}  // namespace

Graph GenerateBarabasiAlbert(NodeId n, NodeId m_attach, std::uint64_t seed, std::string id,
                             Eigen::Index feature_dim) {
  if (m_attach < 1 || n <= m_attach) {
    throw InputError("BA generator needs n > m_attach >= 1");
  }
  Rng rng = MakeRng(seed, 0xba);
  return Graph(std::move(id), n, BarabasiAlbertEdges(n, m_attach, rng),
               Eigen::MatrixXd::Ones(n, feature_dim));
}

MotifDataset GenerateBa2Motifs(std::size_t num_graphs, std::uint64_t seed) {
  if (num_graphs < 2) throw InputError("BA-2Motifs needs at least 2 graphs");
  MotifDataset data;
  const std::size_t cycles = num_graphs / 2;
  const NodeId n = kMotifBaseNodes + kMotifSize;
  for (std::size_t i = 0; i < num_graphs; ++i) {
    Rng rng = MakeRng(seed, 0x2000 + i);
    const bool house = i >= cycles;
    std::vector<Edge> edges = BarabasiAlbertEdges(kMotifBaseNodes, 1, rng);
    if (house) {
      AddHouse(edges, kMotifBaseNodes);
    } else {
      AddCycle5(edges, kMotifBaseNodes);
    }
    std::uniform_int_distribution<NodeId> anchor(0, kMotifBaseNodes - 1);
    edges.push_back({anchor(rng), kMotifBaseNodes});
    const std::string id = PaddedId("ba2motifs-", i);
    data.graphs.emplace_back(id, n, std::move(edges), Eigen::MatrixXd::Ones(n, 10),
                             house ? 1 : 0);
    data.motifs.push_back({id, std::nullopt, house ? MotifKind::kHouse : MotifKind::kCycle5,
                           NodeSet{20, 21, 22, 23, 24}});
  }
  return data;
}

MotifDataset GenerateBaShape(std::uint64_t seed) {
  Rng rng = MakeRng(seed, 0x5a);
  std::vector<Edge> edges = BarabasiAlbertEdges(kShapeBaseNodes, 1, rng);
  const NodeId n = kShapeBaseNodes + kShapeHouses * kMotifSize;
  MotifDataset data;
  data.node_labels.assign(static_cast<std::size_t>(n), 0);
  std::uniform_int_distribution<NodeId> anchor(0, kShapeBaseNodes - 1);
  const std::string id = "ba-shape";
  for (NodeId h = 0; h < kShapeHouses; ++h) {
    const NodeId base = kShapeBaseNodes + h * kMotifSize;
    AddHouse(edges, base);
    edges.push_back({anchor(rng), base});
    const int roles[5] = {3, 3, 2, 2, 1};
    NodeSet house{base, base + 1, base + 2, base + 3, base + 4};
    for (NodeId j = 0; j < kMotifSize; ++j) {
      data.node_labels[static_cast<std::size_t>(base + j)] = roles[j];
      data.motifs.push_back({id, base + j, MotifKind::kHouse, house});
    }
  }
  data.graphs.emplace_back(id, n, std::move(edges), Eigen::MatrixXd::Ones(n, 10));
  return data;
}

nlohmann::ordered_json MotifToJson(const MotifSpec& motif) {
  nlohmann::ordered_json j;
  j["graph_id"] = motif.graph_id;
  if (motif.node_id) j["node_id"] = *motif.node_id;
  j["motif_kind"] = ToString(motif.kind);
  j["motif_nodes"] = motif.nodes.ids();
  return j;
}

MotifSpec MotifFromJson(const nlohmann::json& record) {
  try {
    MotifSpec m;
    m.graph_id = record.at("graph_id").get<std::string>();
    if (record.contains("node_id")) m.node_id = record.at("node_id").get<NodeId>();
    m.kind = ParseMotifKind(record.at("motif_kind").get<std::string>());
    m.nodes = NodeSet::FromUnsorted(record.at("motif_nodes").get<std::vector<NodeId>>());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("ground-truth record: ") + e.what());
  }
}

std::vector<MotifSpec> ReadGroundTruth(const std::string& path) {
  std::istringstream in(ReadTextFile(path));
  std::vector<MotifSpec> motifs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      motifs.push_back(MotifFromJson(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return motifs;
}

void WriteGroundTruth(const std::string& path, const std::vector<MotifSpec>& motifs) {
  std::ostringstream out;
  for (const MotifSpec& m : motifs) out << MotifToJson(m).dump() << '\n';
  WriteTextFile(path, out.str());
}

}  // namespace shapgraph
