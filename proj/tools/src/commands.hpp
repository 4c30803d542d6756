#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <ostream>
#include <string>
#include <vector>

#include "shapgraph/gnn.hpp"
#include "shapgraph/mcts.hpp"

namespace shapgraph::cli {

// Raised for invalid flag combinations; the tool exits with status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GenCommand {
  std::string dataset = "ba2motifs";
  std::size_t num_graphs = 1000;
  std::uint64_t seed = 0;
  std::string out;
  std::string truth;
};

struct TrainCommand {
  std::string data;
  std::string out;
  std::string model_type = "GCN";
  std::string readout = "mean";
  std::vector<long> hidden{20, 20, 20};
  std::size_t epochs = 800;
  double learning_rate = 0.005;
  std::string optimizer = "adam";
  std::uint64_t seed = 0;
};

struct ExplainCommand {
  std::string model;
  std::string data;
  std::string out;
  std::string graphs = "all";
  std::string task;  // empty: follow the model
  std::optional<NodeId> target_node;
  SearchConfig search;
  unsigned workers = 1;
};

struct EvalCommand {
  std::string model;
  std::string data;
  std::string explanations;
  std::string truth;
  std::string out;
  std::string curve_out;
  std::vector<std::size_t> sizes;
  // "none" evaluates the explanation masks; "empty" replaces every mask
  // with the empty set.
  std::string control = "none";
};

struct LogitsCommand {
  std::string model;
  std::string data;
  std::string out;
};

// Each returns the process exit status. Informational lines go to `out`,
// diagnostics to `err`.
int RunGen(const GenCommand& opts, std::ostream& out, std::ostream& err);
int RunTrain(const TrainCommand& opts, std::ostream& out, std::ostream& err);
int RunExplain(const ExplainCommand& opts, std::ostream& out, std::ostream& err);
int RunEval(const EvalCommand& opts, std::ostream& out, std::ostream& err);
int RunLogits(const LogitsCommand& opts, std::ostream& out, std::ostream& err);

// Seed of one explanation instance, derived from the run seed and the
// instance identity so results do not depend on scheduling.
std::uint64_t InstanceSeed(std::uint64_t seed, const std::string& graph_id,
                           std::optional<NodeId> target);

}  // namespace shapgraph::cli
