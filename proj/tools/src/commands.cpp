#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "shapgraph/datagen.hpp"
#include "shapgraph/dataset_io.hpp"
#include "shapgraph/error.hpp"
#include "shapgraph/explanation_io.hpp"
#include "shapgraph/metrics.hpp"
#include "shapgraph/model_io.hpp"
#include "shapgraph/rng.hpp"

namespace shapgraph::cli {
namespace {

using Json = nlohmann::ordered_json;

std::string Fixed(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", x);
  return buf;
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. Every index runs
// exactly once; exceptions are captured per index.
void ParallelFor(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(loop);
  loop();
  for (auto& t : pool) t.join();
}

// A node-level dataset holds one record per labeled node of the same graph.
struct NodeTaskData {
  Graph graph;
  std::vector<LabeledNode> nodes;
};

NodeTaskData CollectNodeTask(const std::vector<Graph>& records) {
  if (records.empty()) throw UsageError("dataset is empty");
  NodeTaskData data{records.front().WithLabel(std::nullopt).WithTarget(std::nullopt), {}};
  for (const Graph& r : records) {
    if (r.id() != records.front().id()) {
      throw UsageError("node-level training expects every record to describe graph '" +
                       records.front().id() + "', found '" + r.id() + "'");
    }
    if (!r.target_node() || !r.label()) {
      throw UsageError("node-level record of '" + r.id() + "' lacks target_node or label");
    }
    data.nodes.push_back({*r.target_node(), *r.label()});
  }
  return data;
}

std::string InstanceName(const std::string& id, std::optional<NodeId> target) {
  return target ? id + "#" + std::to_string(*target) : id;
}

}  // namespace

std::uint64_t InstanceSeed(std::uint64_t seed, const std::string& graph_id,
                           std::optional<NodeId> target) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : graph_id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  h = SplitMix64(h ^ static_cast<std::uint64_t>(target.value_or(-1) + 1));
  return DeriveSeed(seed, h);
}

int RunGen(const GenCommand& opts, std::ostream& out, std::ostream& err) {
  if (opts.out.empty()) throw UsageError("--out is required");
  MotifDataset data;
  std::vector<Graph> records;
  if (opts.dataset == "ba2motifs") {
    if (opts.num_graphs % 2 == 1) {
      err << "warning: odd graph count " << opts.num_graphs << "; labels split "
          << opts.num_graphs / 2 << " cycles / " << opts.num_graphs - opts.num_graphs / 2
          << " houses\n";
    }
    data = GenerateBa2Motifs(opts.num_graphs, opts.seed);
    records = data.graphs;
  } else if (opts.dataset == "bashape") {
    data = GenerateBaShape(opts.seed);
    const Graph& g = data.graphs.front();
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      records.push_back(g.WithLabel(data.node_labels[static_cast<std::size_t>(v)]).WithTarget(v));
    }
  } else {
    throw UsageError("unknown dataset '" + opts.dataset + "' (expected ba2motifs or bashape)");
  }
  WriteDataset(opts.out, records);
  if (!opts.truth.empty()) WriteGroundTruth(opts.truth, data.motifs);

  std::map<int, std::size_t> labels;
  for (const Graph& r : records) ++labels[r.label().value_or(-1)];
  out << "dataset=" << opts.dataset << " records=" << records.size()
      << " graphs=" << data.graphs.size() << " motifs=" << data.motifs.size() << " labels={";
  bool first = true;
  for (const auto& [label, count] : labels) {
    out << (first ? "" : ",") << label << ":" << count;
    first = false;
  }
  out << "}\n";
  return 0;
}

int RunTrain(const TrainCommand& opts, std::ostream& out, std::ostream&) {
  if (opts.data.empty() || opts.out.empty()) throw UsageError("--data and --out are required");
  if (opts.hidden.empty()) throw UsageError("--hidden needs at least one layer width");
  std::vector<Graph> records = ReadDataset(opts.data);
  if (records.empty()) throw UsageError("dataset '" + opts.data + "' is empty");

  Architecture arch;
  arch.model_type = ParseModelType(opts.model_type);
  arch.readout = ParseReadout(opts.readout);
  arch.input_dim = records.front().feature_dim();
  arch.hidden_dims.assign(opts.hidden.begin(), opts.hidden.end());
  shapgraph::TrainOptions train{opts.epochs, opts.learning_rate, opts.seed, ParseOptimizer(opts.optimizer)};

  int num_classes = 0;
  for (const Graph& r : records) {
    if (!r.label()) throw UsageError("record '" + r.id() + "' has no label");
    num_classes = std::max(num_classes, *r.label() + 1);
  }
  arch.num_classes = num_classes;

  const Split split = MakeSplit(records.size(), opts.seed);
  TrainResult result;
  double train_acc = 0.0, val_acc = 0.0, test_acc = 0.0;
  if (arch.readout == Readout::kNone) {
    NodeTaskData data = CollectNodeTask(records);
    auto pick = [&](const std::vector<std::size_t>& idx) {
      std::vector<LabeledNode> part;
      for (std::size_t i : idx) part.push_back(data.nodes[i]);
      return part;
    };
    const auto train_nodes = pick(split.train);
    result = TrainNodeClassifier(arch, data.graph, train_nodes, train);
    train_acc = NodeAccuracy(result.model, data.graph, train_nodes);
    val_acc = NodeAccuracy(result.model, data.graph, pick(split.validation));
    test_acc = NodeAccuracy(result.model, data.graph, pick(split.test));
  } else {
    auto pick = [&](const std::vector<std::size_t>& idx) {
      std::vector<Graph> part;
      for (std::size_t i : idx) part.push_back(records[i]);
      return part;
    };
    const auto train_graphs = pick(split.train);
    result = TrainGraphClassifier(arch, train_graphs, train);
    train_acc = GraphAccuracy(result.model, train_graphs);
    val_acc = GraphAccuracy(result.model, pick(split.validation));
    test_acc = GraphAccuracy(result.model, pick(split.test));
  }
  SaveWeights(result.model, opts.out);

  Json config;
  config["model_type"] = ToString(arch.model_type);
  config["readout"] = ToString(arch.readout);
  config["hidden"] = arch.hidden_dims;
  config["epochs"] = opts.epochs;
  config["lr"] = opts.learning_rate;
  config["optimizer"] = ToString(train.optimizer);
  config["seed"] = opts.seed;
  out << "config " << config.dump() << "\n";
  out << "initial_loss=" << Fixed(result.initial_loss) << " final_loss=" << Fixed(result.final_loss)
      << " train_accuracy=" << Fixed(train_acc) << " val_accuracy=" << Fixed(val_acc)
      << " test_accuracy=" << Fixed(test_acc) << "\n";
  return 0;
}

int RunExplain(const ExplainCommand& opts, std::ostream& out, std::ostream& err) {
  if (opts.model.empty() || opts.data.empty() || opts.out.empty()) {
    throw UsageError("--model, --data and --out are required");
  }
  opts.search.Validate();
  const ModelSpec model = LoadWeights(opts.model);
  const Task model_task = model.node_level() ? Task::kNode : Task::kGraph;
  if (!opts.task.empty() && opts.task != ToString(model_task)) {
    throw UsageError("--task " + opts.task + " does not match the " + ToString(model_task) +
                     "-level model");
  }
  if (model_task == Task::kGraph && opts.target_node) {
    throw UsageError("--target-node only applies to node tasks");
  }

  std::vector<Graph> records = ReadDataset(opts.data);
  std::set<std::string> wanted;
  if (opts.graphs != "all") {
    for (const auto& id : SplitList(opts.graphs)) wanted.insert(id);
  }
  std::vector<Graph> instances;
  std::set<std::string> seen;
  for (const Graph& r : records) {
    if (!wanted.empty() && !wanted.count(r.id())) continue;
    if (model_task == Task::kGraph) {
      if (seen.insert(r.id()).second) instances.push_back(r);
      continue;
    }
    if (opts.target_node) {
      if (seen.insert(r.id()).second) instances.push_back(r.WithTarget(*opts.target_node));
    } else if (r.target_node()) {
      instances.push_back(r);
    } else {
      throw UsageError("node task on '" + r.id() + "' needs --target-node");
    }
  }
  for (const auto& id : wanted) {
    bool found = std::any_of(records.begin(), records.end(), [&](const Graph& r) { return r.id() == id; });
    if (!found) throw UsageError("graph '" + id + "' is not in " + opts.data);
  }

  std::vector<std::optional<Explanation>> results(instances.size());
  std::vector<std::string> failures(instances.size());
  ParallelFor(instances.size(), opts.workers, [&](std::size_t i) {
    const Graph& g = instances[i];
    try {
      SearchConfig config = opts.search;
      config.workers = 1;
      config.seed = InstanceSeed(opts.search.seed, g.id(), g.target_node());
      Explanation e = Explain(model, g, config);
      e.config.seed = opts.search.seed;
      results[i] = std::move(e);
    } catch (const std::exception& ex) {
      failures[i] = ex.what();
    }
  });

  std::vector<Explanation> done;
  std::vector<std::string> failed;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (results[i]) {
      done.push_back(std::move(*results[i]));
    } else {
      failed.push_back(InstanceName(instances[i].id(), instances[i].target_node()));
      err << "error: " << failed.back() << ": " << failures[i] << "\n";
    }
  }
  WriteExplanations(opts.out, done);
  out << "config " << ConfigToJson(opts.search).dump() << "\n";
  out << "explained=" << done.size() << " failed=" << failed.size() << "\n";
  if (!failed.empty()) {
    err << "failed instances:";
    for (const auto& f : failed) err << " " << f;
    err << "\n";
    return 1;
  }
  return 0;
}

int RunEval(const EvalCommand& opts, std::ostream& out, std::ostream& err) {
  if (opts.model.empty() || opts.data.empty() || opts.explanations.empty()) {
    throw UsageError("--model, --data and --explanations are required");
  }
  if (opts.control != "none" && opts.control != "empty") {
    throw UsageError("--control must be none or empty");
  }
  const ModelSpec model = LoadWeights(opts.model);
  const std::vector<Graph> records = ReadDataset(opts.data);
  const std::vector<Explanation> explanations = ReadExplanations(opts.explanations);
  if (explanations.empty()) throw UsageError("no explanations in " + opts.explanations);

  std::map<std::string, const Graph*> by_id;
  for (const Graph& r : records) by_id.emplace(r.id(), &r);
  std::vector<Graph> graphs;
  std::vector<NodeSet> masks;
  for (const Explanation& e : explanations) {
    auto it = by_id.find(e.graph_id);
    if (it == by_id.end()) throw UsageError("explained graph '" + e.graph_id + "' is not in " + opts.data);
    graphs.push_back(e.target_node ? it->second->WithTarget(e.target_node) : *it->second);
    masks.push_back(opts.control == "empty" ? NodeSet{} : e.nodes);
  }

  Json report;
  report["config"] = {{"model", opts.model},
                      {"data", opts.data},
                      {"explanations", opts.explanations},
                      {"truth", opts.truth},
                      {"sizes", opts.sizes},
                      {"control", opts.control}};
  report["control"] = opts.control;
  report["n_instances"] = explanations.size();
  report["fidelity"] = Fidelity(model, graphs, masks);
  report["sparsity"] = Sparsity(masks, graphs);
  out << "instances=" << explanations.size() << " fidelity=" << Fixed(report["fidelity"].get<double>())
      << " sparsity=" << Fixed(report["sparsity"].get<double>()) << "\n";

  if (!opts.sizes.empty()) {
    auto curve = SparsityFidelityCurve(model, graphs, explanations, opts.sizes);
    report["curve"] = CurveToJson(curve);
    const std::string csv = CurveToCsv(curve);
    if (!opts.curve_out.empty()) WriteTextFile(opts.curve_out, csv);
    out << csv;
    std::size_t fallbacks = 0;
    for (const CurvePoint& p : curve) fallbacks += p.fallbacks;
    if (fallbacks > 0) {
      err << "note: " << fallbacks << " curve entries used the nearest available size\n";
    }
  }

  if (!opts.truth.empty()) {
    std::map<std::pair<std::string, NodeId>, NodeSet> truth;
    for (const MotifSpec& m : ReadGroundTruth(opts.truth)) {
      truth[{m.graph_id, m.node_id.value_or(-1)}] = m.nodes;
    }
    double total = 0.0;
    std::size_t matched = 0;
    for (const Explanation& e : explanations) {
      auto it = truth.find({e.graph_id, e.target_node.value_or(-1)});
      if (it == truth.end()) continue;
      total += MotifRecall(e.nodes, it->second);
      ++matched;
    }
    report["motif_recall_instances"] = matched;
    report["motif_recall"] = matched ? Json(total / static_cast<double>(matched)) : Json(nullptr);
    out << "motif_recall_instances=" << matched;
    if (matched) out << " motif_recall=" << Fixed(total / static_cast<double>(matched));
    out << "\n";
  }
  if (!opts.out.empty()) WriteTextFile(opts.out, report.dump(2) + "\n");
  return 0;
}

int RunLogits(const LogitsCommand& opts, std::ostream& out, std::ostream&) {
  if (opts.model.empty() || opts.data.empty() || opts.out.empty()) {
    throw UsageError("--model, --data and --out are required");
  }
  const ModelSpec model = LoadWeights(opts.model);
  std::string text;
  std::size_t count = 0;
  for (const Graph& g : ReadDataset(opts.data)) {
    Json row;
    row["id"] = g.id();
    if (model.node_level()) row["target_node"] = g.target_node().value_or(-1);
    const Prediction p = Forward(model, g);
    row["logits"] = std::vector<double>(p.logits.data(), p.logits.data() + p.logits.size());
    text += row.dump() + "\n";
    ++count;
  }
  WriteTextFile(opts.out, text);
  out << "rows=" << count << "\n";
  return 0;
}

}  // namespace shapgraph::cli
