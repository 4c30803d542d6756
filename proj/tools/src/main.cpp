#include <cctype>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "shapgraph/error.hpp"

namespace {

using namespace shapgraph;
using namespace shapgraph::cli;

// Every flag can also come from SHAPGRAPH_<FLAG>, e.g. SHAPGRAPH_PRUNE_K.
void BindEnvironment(CLI::App& command) {
  for (CLI::Option* opt : command.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    std::string env = "SHAPGRAPH_";
    for (char c : name) env += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    opt->envname(env);
  }
}

int ParseHops(const std::string& text) {
  if (text == "inf") return kUnboundedHops;
  try {
    std::size_t used = 0;
    int hops = std::stoi(text, &used);
    if (used == text.size() && hops >= 0) return hops;
  } catch (const std::exception&) {
  }
  throw UsageError("--hops expects a non-negative integer or 'inf', got '" + text + "'");
}

std::optional<std::size_t> ParsePruneK(const std::string& text) {
  if (text == "all") return std::nullopt;
  try {
    std::size_t used = 0;
    long k = std::stol(text, &used);
    if (used == text.size() && k > 0) return static_cast<std::size_t>(k);
  } catch (const std::exception&) {
  }
  throw UsageError("--prune-k expects a positive integer or 'all', got '" + text + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shapley-guided subgraph explanations for graph neural networks"};
  app.set_config("--config", "", "TOML or INI file with flag values; command-line flags win");
  app.require_subcommand(1);

  GenCommand gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic motif dataset");
  gen_cmd->add_option("--dataset", gen.dataset, "ba2motifs or bashape")->capture_default_str();
  gen_cmd->add_option("--num-graphs", gen.num_graphs, "Graphs to generate (ba2motifs)")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Dataset JSONL")->required();
  gen_cmd->add_option("--truth", gen.truth, "Ground-truth motif JSONL");

  TrainCommand train;
  auto* train_cmd = app.add_subcommand("train", "Train a GCN or GIN classifier");
  train_cmd->add_option("--data", train.data)->required();
  train_cmd->add_option("--out", train.out, "Weight file")->required();
  train_cmd->add_option("--model", train.model_type, "GCN or GIN")->capture_default_str();
  train_cmd->add_option("--readout", train.readout, "mean, max, or none (node task)")->capture_default_str();
  train_cmd->add_option("--hidden", train.hidden, "Hidden layer widths")->delimiter(',')->capture_default_str();
  train_cmd->add_option("--epochs", train.epochs)->capture_default_str();
  train_cmd->add_option("--lr", train.learning_rate)->capture_default_str();
  train_cmd->add_option("--optimizer", train.optimizer, "adam or gd")->capture_default_str();
  train_cmd->add_option("--seed", train.seed)->capture_default_str();

  ExplainCommand explain;
  std::string scorer = "shapley-mc", hops = "3", prune = "low2high", prune_k = "12";
  std::optional<NodeId> target;
  auto* explain_cmd = app.add_subcommand("explain", "Search for explanatory subgraphs");
  explain_cmd->add_option("--model", explain.model)->required();
  explain_cmd->add_option("--data", explain.data)->required();
  explain_cmd->add_option("--out", explain.out, "Explanation JSONL")->required();
  explain_cmd->add_option("--graphs", explain.graphs, "Comma-separated ids or 'all'")->capture_default_str();
  explain_cmd->add_option("--task", explain.task, "graph or node")->check(CLI::IsMember({"graph", "node"}));
  explain_cmd->add_option("--target-node", target);
  explain_cmd->add_option("--scorer", scorer, "shapley-mc, shapley-exact, or direct")->capture_default_str();
  explain_cmd->add_option("--samples", explain.search.scorer.samples, "Monte-Carlo samples T")->capture_default_str();
  explain_cmd->add_option("--hops", hops, "Co-player radius L, or 'inf'")->capture_default_str();
  explain_cmd->add_option("--nmin", explain.search.min_nodes, "Leaf size N_min")->capture_default_str();
  explain_cmd->add_option("--iterations", explain.search.iterations, "Search iterations M")->capture_default_str();
  explain_cmd->add_option("--lambda", explain.search.lambda)->capture_default_str();
  explain_cmd->add_option("--prune", prune, "low2high or high2low")->capture_default_str();
  explain_cmd->add_option("--prune-k", prune_k, "Candidates per expansion, or 'all'")->capture_default_str();
  explain_cmd->add_option("--seed", explain.search.seed)->capture_default_str();
  explain_cmd->add_option("--workers", explain.workers)->check(CLI::PositiveNumber)->capture_default_str();

  EvalCommand eval;
  auto* eval_cmd = app.add_subcommand("eval", "Fidelity, sparsity, and motif recall");
  eval_cmd->add_option("--model", eval.model)->required();
  eval_cmd->add_option("--data", eval.data)->required();
  eval_cmd->add_option("--explanations", eval.explanations)->required();
  eval_cmd->add_option("--truth", eval.truth, "Ground-truth motif JSONL");
  eval_cmd->add_option("--out", eval.out, "Metrics JSON");
  eval_cmd->add_option("--curve-out", eval.curve_out, "Sparsity-fidelity CSV");
  eval_cmd->add_option("--sizes", eval.sizes, "Explanation sizes for the curve")->delimiter(',');
  eval_cmd->add_option("--control", eval.control, "none or empty")->capture_default_str();

  LogitsCommand logits;
  auto* logits_cmd = app.add_subcommand("logits", "Dump model logits for every record");
  logits_cmd->add_option("--model", logits.model)->required();
  logits_cmd->add_option("--data", logits.data)->required();
  logits_cmd->add_option("--out", logits.out)->required();

  for (CLI::App* cmd : {gen_cmd, train_cmd, explain_cmd, eval_cmd, logits_cmd}) BindEnvironment(*cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen_cmd) return RunGen(gen, std::cout, std::cerr);
    if (*train_cmd) return RunTrain(train, std::cout, std::cerr);
    if (*explain_cmd) {
      explain.search.scorer.kind = ParseScorerKind(scorer);
      explain.search.scorer.hops = ParseHops(hops);
      explain.search.strategy = {ParsePruneOrder(prune), ParsePruneK(prune_k)};
      explain.target_node = target;
      return RunExplain(explain, std::cout, std::cerr);
    }
    if (*eval_cmd) return RunEval(eval, std::cout, std::cerr);
    if (*logits_cmd) return RunLogits(logits, std::cout, std::cerr);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
