#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "shapgraph/graph.hpp"

namespace shapgraph {

enum class ModelType { kGcn, kGin };
// kNone means node classification: the classifier reads the target node's
// final embedding.
enum class Readout { kMax, kMean, kNone };

std::string ToString(ModelType type);
std::string ToString(Readout readout);
ModelType ParseModelType(const std::string& text);
Readout ParseReadout(const std::string& text);

// X' = relu(Â X W + b) with Â the symmetrically normalized adjacency with
// self-loops. An empty bias means no bias.
struct GcnLayer {
  Eigen::MatrixXd weight;  // in x out
  Eigen::RowVectorXd bias;
};

// X' = relu(relu(((1 + eps) X + A X) W1 + b1) W2 + b2).
struct GinLayer {
  Eigen::MatrixXd mlp_w1;
  Eigen::RowVectorXd mlp_b1;
  Eigen::MatrixXd mlp_w2;
  Eigen::RowVectorXd mlp_b2;
  double eps = 0.0;
};

using LayerSpec = std::variant<GcnLayer, GinLayer>;

Eigen::Index LayerInputDim(const LayerSpec& layer);
Eigen::Index LayerOutputDim(const LayerSpec& layer);

struct Classifier {
  Eigen::MatrixXd weight;  // hidden x num_classes
  Eigen::RowVectorXd bias;
};

struct ModelSpec {
  ModelType model_type = ModelType::kGcn;
  Eigen::Index input_dim = 0;
  int num_classes = 0;
  Readout readout = Readout::kMean;
  std::vector<LayerSpec> layers;
  Classifier classifier;

  std::size_t num_layers() const { return layers.size(); }
  bool node_level() const { return readout == Readout::kNone; }

  // Throws FormatError naming the offending layer when dimensions do not
  // chain or an entry is not finite.
  void Validate() const;
};

// Architecture used to initialize a model.
struct Architecture {
  ModelType model_type = ModelType::kGcn;
  Eigen::Index input_dim = 10;
  std::vector<Eigen::Index> hidden_dims{20, 20, 20};
  int num_classes = 2;
  Readout readout = Readout::kMean;
};

// Glorot-uniform weights and biases (bound sqrt(6 / (fan_in + fan_out))).
ModelSpec InitModel(const Architecture& arch, std::uint64_t seed);

// Visits every trainable array in a fixed order. GIN eps is not trainable.
void VisitParameters(ModelSpec& model,
                     const std::function<void(std::string_view, std::span<double>)>& fn);
void VisitParameters(const ModelSpec& model,
                     const std::function<void(std::string_view, std::span<const double>)>& fn);

// Same shapes as `model`, all zeros.
ModelSpec ZerosLike(const ModelSpec& model);

struct Prediction {
  Eigen::VectorXd logits;
  Eigen::VectorXd probabilities;
  int predicted_class = 0;
};

// Numerically stable softmax; argmax ties resolve to the lowest class index.
Prediction MakePrediction(Eigen::VectorXd logits);

// D^{-1/2} (A + I) D^{-1/2} as a dense matrix.
Eigen::MatrixXd NormalizeAdjacency(const Graph& g);

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Aggregation operators for one graph, reusable across many forward passes
// with different feature masks.
class GraphOperators {
 public:
  explicit GraphOperators(const Graph& g);
  const SparseMatrix& normalized() const { return normalized_; }
  const SparseMatrix& adjacency() const { return adjacency_; }

 private:
  SparseMatrix normalized_;
  SparseMatrix adjacency_;
};

// Runs a model against one graph. Holds references; both must outlive it.
class ModelRunner {
 public:
  ModelRunner(const ModelSpec& model, const Graph& g);

  // Unmasked prediction (graph level, or the graph's target node).
  Prediction Predict() const;
  // Nodes whose flag is 0 get all-zero input features. Structure unchanged.
  Prediction Predict(const std::vector<char>& active) const;
  Prediction PredictFromFeatures(const Eigen::MatrixXd& features) const;
  // Prediction for node `target` regardless of the graph's own target.
  Prediction PredictNode(NodeId target) const;
  // Final-layer node embeddings.
  Eigen::MatrixXd Embed(const Eigen::MatrixXd& features) const;

  const Graph& graph() const { return graph_; }
  const ModelSpec& model() const { return model_; }

 private:
  const ModelSpec& model_;
  const Graph& graph_;
  GraphOperators ops_;
};

// Throws InputError on feature-dimension mismatch, or for a node-level model
// on a graph without a target node.
Prediction Forward(const ModelSpec& model, const Graph& g);
Prediction Forward(const ModelSpec& model, const Graph& g, const NodeSet& feature_mask);

struct LabeledNode {
  NodeId node = 0;
  int label = 0;
};

// Mean cross-entropy over the batch; when `grad` is non-null it receives the
// analytic gradient (same shapes as the model).
double GraphLoss(const ModelSpec& model, std::span<const Graph> graphs, ModelSpec* grad);
double NodeLoss(const ModelSpec& model, const Graph& g, std::span<const LabeledNode> nodes,
                ModelSpec* grad);

enum class Optimizer { kAdam, kGradientDescent };
std::string ToString(Optimizer optimizer);
Optimizer ParseOptimizer(const std::string& text);

struct TrainOptions {
  std::size_t epochs = 800;
  double learning_rate = 0.005;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::kAdam;
};

struct TrainResult {
  ModelSpec model;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

// Full-batch training from InitModel(arch, seed), one Adam or plain
// gradient-descent step per epoch. Throws
// TrainingDivergedError if the loss becomes NaN or infinite.
TrainResult TrainGraphClassifier(const Architecture& arch, std::span<const Graph> graphs,
                                 const TrainOptions& options);
TrainResult TrainNodeClassifier(const Architecture& arch, const Graph& g,
                                std::span<const LabeledNode> nodes,
                                const TrainOptions& options);

double GraphAccuracy(const ModelSpec& model, std::span<const Graph> graphs);
double NodeAccuracy(const ModelSpec& model, const Graph& g, std::span<const LabeledNode> nodes);

// Deterministic 80/10/10 partition of 0..n-1.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};
Split MakeSplit(std::size_t n, std::uint64_t seed);

}  // namespace shapgraph
