#include "shapgraph/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "shapgraph/error.hpp"
#include "shapgraph/rng.hpp"

namespace shapgraph {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

std::string ToString(ModelType type) { return type == ModelType::kGcn ? "GCN" : "GIN"; }

std::string ToString(Readout readout) {
  switch (readout) {
    case Readout::kMax: return "max";
    case Readout::kMean: return "mean";
    case Readout::kNone: return "none";
  }
  return "none";
}

ModelType ParseModelType(const std::string& text) {
  if (text == "GCN" || text == "gcn") return ModelType::kGcn;
  if (text == "GIN" || text == "gin") return ModelType::kGin;
  throw InputError("unknown model type '" + text + "'");
}

Readout ParseReadout(const std::string& text) {
  if (text == "max") return Readout::kMax;
  if (text == "mean") return Readout::kMean;
  if (text == "none") return Readout::kNone;
  throw InputError("unknown readout '" + text + "'");
}

std::string ToString(Optimizer optimizer) {
  return optimizer == Optimizer::kAdam ? "adam" : "gd";
}

Optimizer ParseOptimizer(const std::string& text) {
  if (text == "adam") return Optimizer::kAdam;
  if (text == "gd") return Optimizer::kGradientDescent;
  throw InputError("unknown optimizer '" + text + "' (expected adam or gd)");
}

Index LayerInputDim(const LayerSpec& layer) {
  return std::visit(
      [](const auto& l) -> Index {
        if constexpr (std::is_same_v<std::decay_t<decltype(l)>, GcnLayer>) {
          return l.weight.rows();
        } else {
          return l.mlp_w1.rows();
        }
      },
      layer);
}

Index LayerOutputDim(const LayerSpec& layer) {
  return std::visit(
      [](const auto& l) -> Index {
        if constexpr (std::is_same_v<std::decay_t<decltype(l)>, GcnLayer>) {
          return l.weight.cols();
        } else {
          return l.mlp_w2.cols();
        }
      },
      layer);
}

void ModelSpec::Validate() const {
  auto fail = [](const std::string& where, const std::string& what) {
    throw FormatError(where + ": " + what);
  };
  if (layers.empty()) fail("model", "needs at least one layer");
  if (num_classes < 1) fail("model", "num_classes must be positive");
  Index dim = input_dim;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string where = "layer " + std::to_string(i);
    if (LayerInputDim(layers[i]) != dim) {
      std::ostringstream msg;
      msg << "input dim " << LayerInputDim(layers[i]) << " does not match " << dim;
      fail(where, msg.str());
    }
    if (const auto* gcn = std::get_if<GcnLayer>(&layers[i])) {
      if (model_type != ModelType::kGcn) fail(where, "GCN layer in a GIN model");
      if (gcn->bias.size() != 0 && gcn->bias.size() != gcn->weight.cols()) {
        fail(where, "bias length does not match weight columns");
      }
      if (!gcn->weight.allFinite() || !gcn->bias.allFinite()) fail(where, "non-finite entry");
    } else {
      const auto& gin = std::get<GinLayer>(layers[i]);
      if (model_type != ModelType::kGin) fail(where, "GIN layer in a GCN model");
      if (gin.mlp_b1.size() != gin.mlp_w1.cols()) fail(where, "mlp_b1 length mismatch");
      if (gin.mlp_w2.rows() != gin.mlp_w1.cols()) fail(where, "mlp_w2 rows do not match mlp_w1 columns");
      if (gin.mlp_b2.size() != gin.mlp_w2.cols()) fail(where, "mlp_b2 length mismatch");
      if (!gin.mlp_w1.allFinite() || !gin.mlp_b1.allFinite() || !gin.mlp_w2.allFinite() ||
          !gin.mlp_b2.allFinite() || !std::isfinite(gin.eps)) {
        fail(where, "non-finite entry");
      }
    }
    dim = LayerOutputDim(layers[i]);
  }
  if (classifier.weight.rows() != dim) fail("classifier", "input dim does not match final layer");
  if (classifier.weight.cols() != num_classes) fail("classifier", "output dim does not match num_classes");
  if (classifier.bias.size() != num_classes) fail("classifier", "bias length does not match num_classes");
  if (!classifier.weight.allFinite() || !classifier.bias.allFinite()) {
    fail("classifier", "non-finite entry");
  }
}

namespace {

// Uniform in [-s, s], s = sqrt(6 / (fan_in + fan_out)), for a weight matrix
// and its bias alike.
struct DenseInit {
  MatrixXd weight;
  RowVectorXd bias;
};

DenseInit Glorot(Index rows, Index cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  DenseInit init{MatrixXd(rows, cols), RowVectorXd(cols)};
  // Row-major fill order keeps initialization independent of Eigen storage.
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) init.weight(i, j) = dist(rng);
  }
  for (Index j = 0; j < cols; ++j) init.bias[j] = dist(rng);
  return init;
}

}  // namespace

ModelSpec InitModel(const Architecture& arch, std::uint64_t seed) {
  if (arch.hidden_dims.empty()) throw InputError("architecture needs at least one layer");
  if (arch.num_classes < 1) throw InputError("num_classes must be positive");
  Rng rng = MakeRng(seed, 0x1a17);
  ModelSpec model;
  model.model_type = arch.model_type;
  model.input_dim = arch.input_dim;
  model.num_classes = arch.num_classes;
  model.readout = arch.readout;
  Index dim = arch.input_dim;
  for (Index out : arch.hidden_dims) {
    if (arch.model_type == ModelType::kGcn) {
      auto init = Glorot(dim, out, rng);
      model.layers.emplace_back(GcnLayer{std::move(init.weight), std::move(init.bias)});
    } else {
      auto first = Glorot(dim, out, rng);
      auto second = Glorot(out, out, rng);
      model.layers.emplace_back(GinLayer{std::move(first.weight), std::move(first.bias),
                                         std::move(second.weight), std::move(second.bias), 0.0});
    }
    dim = out;
  }
  auto head = Glorot(dim, arch.num_classes, rng);
  model.classifier.weight = std::move(head.weight);
  model.classifier.bias = std::move(head.bias);
  model.Validate();
  return model;
}

namespace {

template <class Model, class Fn>
void VisitImpl(Model& model, Fn&& fn) {
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const std::string prefix = "layers[" + std::to_string(i) + "].";
    std::visit(
        [&](auto& layer) {
          using L = std::decay_t<decltype(layer)>;
          if constexpr (std::is_same_v<L, GcnLayer>) {
            fn(prefix + "weight", layer.weight.data(), layer.weight.size());
            fn(prefix + "bias", layer.bias.data(), layer.bias.size());
          } else {
            fn(prefix + "mlp_w1", layer.mlp_w1.data(), layer.mlp_w1.size());
            fn(prefix + "mlp_b1", layer.mlp_b1.data(), layer.mlp_b1.size());
            fn(prefix + "mlp_w2", layer.mlp_w2.data(), layer.mlp_w2.size());
            fn(prefix + "mlp_b2", layer.mlp_b2.data(), layer.mlp_b2.size());
          }
        },
        model.layers[i]);
  }
  fn("classifier.weight", model.classifier.weight.data(), model.classifier.weight.size());
  fn("classifier.bias", model.classifier.bias.data(), model.classifier.bias.size());
}

}  // namespace

void VisitParameters(ModelSpec& model,
                     const std::function<void(std::string_view, std::span<double>)>& fn) {
  VisitImpl(model, [&](const std::string& name, double* data, Index size) {
    fn(name, std::span<double>(data, static_cast<std::size_t>(size)));
  });
}

void VisitParameters(const ModelSpec& model,
                     const std::function<void(std::string_view, std::span<const double>)>& fn) {
  VisitImpl(model, [&](const std::string& name, const double* data, Index size) {
    fn(name, std::span<const double>(data, static_cast<std::size_t>(size)));
  });
}

ModelSpec ZerosLike(const ModelSpec& model) {
  ModelSpec zeros = model;
  VisitParameters(zeros, [](std::string_view, std::span<double> p) {
    std::fill(p.begin(), p.end(), 0.0);
  });
  return zeros;
}

Prediction MakePrediction(VectorXd logits) {
  Prediction p;
  Index best = 0;
  for (Index i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  const double shift = logits.size() ? logits[best] : 0.0;
  VectorXd e = (logits.array() - shift).exp();
  p.probabilities = e / e.sum();
  p.logits = std::move(logits);
  p.predicted_class = static_cast<int>(best);
  return p;
}

Eigen::MatrixXd NormalizeAdjacency(const Graph& g) {
  return MatrixXd(GraphOperators(g).normalized());
}

GraphOperators::GraphOperators(const Graph& g) {
  const Index n = g.num_nodes();
  std::vector<Eigen::Triplet<double>> adj;
  std::vector<Eigen::Triplet<double>> norm;
  adj.reserve(2 * g.num_edges());
  norm.reserve(2 * g.num_edges() + static_cast<std::size_t>(n));
  std::vector<double> inv_sqrt(static_cast<std::size_t>(n));
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    inv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(g.degree(v) + 1));
  }
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    norm.emplace_back(v, v, inv_sqrt[v] * inv_sqrt[v]);
    for (NodeId w : g.neighbors(v)) {
      adj.emplace_back(v, w, 1.0);
      norm.emplace_back(v, w, inv_sqrt[v] * inv_sqrt[w]);
    }
  }
  adjacency_.resize(n, n);
  adjacency_.setFromTriplets(adj.begin(), adj.end());
  normalized_.resize(n, n);
  normalized_.setFromTriplets(norm.begin(), norm.end());
}

namespace {

// Intermediate values kept for backpropagation.
struct LayerCache {
  MatrixXd input;
  MatrixXd aggregated;  // GCN: Â X. GIN: (1 + eps) X + A X.
  MatrixXd hidden_pre;  // GIN only: aggregated W1 + b1.
  MatrixXd hidden;      // GIN only: relu(hidden_pre).
  MatrixXd pre;         // pre-activation of the layer output.
};

void AddBias(MatrixXd& m, const RowVectorXd& bias) {
  if (bias.size() != 0) m.rowwise() += bias;
}

MatrixXd Relu(const MatrixXd& m) { return m.cwiseMax(0.0); }

MatrixXd ReluGrad(const MatrixXd& upstream, const MatrixXd& pre) {
  return (pre.array() > 0.0).select(upstream, 0.0);
}

MatrixXd RunLayers(const ModelSpec& model, const GraphOperators& ops, const MatrixXd& x,
                   std::vector<LayerCache>* caches) {
  MatrixXd h = x;
  if (caches) caches->clear();
  for (const LayerSpec& spec : model.layers) {
    LayerCache cache;
    if (const auto* gcn = std::get_if<GcnLayer>(&spec)) {
      cache.aggregated = ops.normalized() * h;
      cache.pre = cache.aggregated * gcn->weight;
      AddBias(cache.pre, gcn->bias);
    } else {
      const auto& gin = std::get<GinLayer>(spec);
      cache.aggregated = (1.0 + gin.eps) * h + MatrixXd(ops.adjacency() * h);
      cache.hidden_pre = cache.aggregated * gin.mlp_w1;
      AddBias(cache.hidden_pre, gin.mlp_b1);
      cache.hidden = Relu(cache.hidden_pre);
      cache.pre = cache.hidden * gin.mlp_w2;
      AddBias(cache.pre, gin.mlp_b2);
    }
    MatrixXd out = Relu(cache.pre);
    if (caches) {
      cache.input = std::move(h);
      caches->push_back(std::move(cache));
    }
    h = std::move(out);
  }
  return h;
}

// Accumulates parameter gradients into `grad` given dLoss/dOutput of the
// final layer.
void BackpropLayers(const ModelSpec& model, const GraphOperators& ops,
                    const std::vector<LayerCache>& caches, MatrixXd upstream,
                    ModelSpec& grad) {
  for (std::size_t li = model.layers.size(); li-- > 0;) {
    const LayerCache& c = caches[li];
    MatrixXd d_pre = ReluGrad(upstream, c.pre);
    if (const auto* gcn = std::get_if<GcnLayer>(&model.layers[li])) {
      auto& g = std::get<GcnLayer>(grad.layers[li]);
      g.weight.noalias() += c.aggregated.transpose() * d_pre;
      if (g.bias.size() != 0) g.bias += d_pre.colwise().sum();
      if (li > 0) {
        MatrixXd d_agg = d_pre * gcn->weight.transpose();
        // Â is symmetric.
        upstream = ops.normalized() * d_agg;
      }
    } else {
      const auto& gin = std::get<GinLayer>(model.layers[li]);
      auto& g = std::get<GinLayer>(grad.layers[li]);
      g.mlp_w2.noalias() += c.hidden.transpose() * d_pre;
      g.mlp_b2 += d_pre.colwise().sum();
      MatrixXd d_hidden_pre = ReluGrad(d_pre * gin.mlp_w2.transpose(), c.hidden_pre);
      g.mlp_w1.noalias() += c.aggregated.transpose() * d_hidden_pre;
      g.mlp_b1 += d_hidden_pre.colwise().sum();
      if (li > 0) {
        MatrixXd d_agg = d_hidden_pre * gin.mlp_w1.transpose();
        upstream = (1.0 + gin.eps) * d_agg + MatrixXd(ops.adjacency() * d_agg);
      }
    }
  }
}

// Readout over node embeddings. `argmax` receives, per channel, the row that
// supplied the max (lowest index on ties).
RowVectorXd ReadoutForward(Readout readout, const MatrixXd& h, std::vector<Index>* argmax) {
  if (h.rows() == 0) throw InputError("graph readout over an empty graph");
  if (readout == Readout::kMean) return h.colwise().mean();
  RowVectorXd out(h.cols());
  if (argmax) argmax->assign(static_cast<std::size_t>(h.cols()), 0);
  for (Index j = 0; j < h.cols(); ++j) {
    Index best = 0;
    for (Index i = 1; i < h.rows(); ++i) {
      if (h(i, j) > h(best, j)) best = i;
    }
    out[j] = h(best, j);
    if (argmax) (*argmax)[static_cast<std::size_t>(j)] = best;
  }
  return out;
}

VectorXd ClassifierLogits(const Classifier& c, const RowVectorXd& embedding) {
  RowVectorXd logits = embedding * c.weight + c.bias;
  return logits.transpose();
}

void CheckInput(const ModelSpec& model, const Graph& g) {
  if (g.feature_dim() != model.input_dim) {
    std::ostringstream msg;
    msg << "graph '" << g.id() << "' has feature dim " << g.feature_dim()
        << " but the model expects " << model.input_dim;
    throw InputError(msg.str());
  }
}

// Cross-entropy of one example and dLoss/dlogits.
double CrossEntropy(const VectorXd& logits, int label, VectorXd* d_logits) {
  Prediction p = MakePrediction(logits);
  if (label < 0 || label >= logits.size()) {
    throw InputError("label " + std::to_string(label) + " out of range");
  }
  if (d_logits) {
    *d_logits = p.probabilities;
    (*d_logits)[label] -= 1.0;
  }
  const double shift = logits.maxCoeff();
  const double lse = shift + std::log((logits.array() - shift).exp().sum());
  return lse - logits[label];
}

// Disjoint union of a graph batch: one block-diagonal operator set and
// stacked features, so a whole epoch is a handful of large products.
struct GraphBatch {
  std::vector<Index> offsets{0};  // row range of graph i: [offsets[i], offsets[i+1])
  std::vector<int> labels;
  MatrixXd features;
  std::optional<GraphOperators> ops;
};

GraphBatch MakeBatch(const ModelSpec& model, std::span<const Graph> graphs) {
  if (graphs.empty()) throw InputError("empty training batch");
  GraphBatch batch;
  std::vector<Edge> edges;
  for (const Graph& g : graphs) {
    CheckInput(model, g);
    if (!g.label()) throw InputError("graph '" + g.id() + "' has no label");
    if (g.num_nodes() == 0) throw InputError("graph '" + g.id() + "' is empty");
    const auto base = static_cast<NodeId>(batch.offsets.back());
    for (const Edge& e : g.edges()) edges.push_back({e.u + base, e.v + base});
    batch.offsets.push_back(batch.offsets.back() + g.num_nodes());
    batch.labels.push_back(*g.label());
  }
  batch.features.resize(batch.offsets.back(), model.input_dim);
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    batch.features.middleRows(batch.offsets[i], graphs[i].num_nodes()) = graphs[i].features();
  }
  Graph merged("batch", static_cast<NodeId>(batch.offsets.back()), std::move(edges),
               MatrixXd(batch.offsets.back(), 0));
  batch.ops.emplace(merged);
  return batch;
}

double BatchLoss(const ModelSpec& model, const GraphBatch& batch, ModelSpec* grad) {
  if (model.node_level()) throw InputError("graph loss needs a graph-level readout");
  const std::size_t count = batch.labels.size();
  const double scale = 1.0 / static_cast<double>(count);
  std::vector<LayerCache> caches;
  MatrixXd h = RunLayers(model, *batch.ops, batch.features, grad ? &caches : nullptr);
  MatrixXd d_h;
  if (grad) d_h = MatrixXd::Zero(h.rows(), h.cols());
  std::vector<Index> argmax;
  double total = 0.0;
  for (std::size_t gi = 0; gi < count; ++gi) {
    const Index begin = batch.offsets[gi];
    const Index rows = batch.offsets[gi + 1] - begin;
    RowVectorXd pooled = ReadoutForward(model.readout, h.middleRows(begin, rows), &argmax);
    VectorXd d_logits;
    total += CrossEntropy(ClassifierLogits(model.classifier, pooled), batch.labels[gi],
                          grad ? &d_logits : nullptr);
    if (!grad) continue;
    d_logits *= scale;
    grad->classifier.weight.noalias() += pooled.transpose() * d_logits.transpose();
    grad->classifier.bias += d_logits.transpose();
    RowVectorXd d_pooled = (model.classifier.weight * d_logits).transpose();
    if (model.readout == Readout::kMean) {
      d_h.middleRows(begin, rows).rowwise() = d_pooled / static_cast<double>(rows);
    } else {
      for (Index j = 0; j < h.cols(); ++j) {
        d_h(begin + argmax[static_cast<std::size_t>(j)], j) = d_pooled[j];
      }
    }
  }
  if (grad) BackpropLayers(model, *batch.ops, caches, std::move(d_h), *grad);
  return total * scale;
}

double NodeLossWithOps(const ModelSpec& model, const Graph& g, const GraphOperators& ops,
                       std::span<const LabeledNode> nodes, ModelSpec* grad) {
  if (nodes.empty()) throw InputError("empty training batch");
  if (!model.node_level()) throw InputError("node loss needs a node-level model");
  CheckInput(model, g);
  const double scale = 1.0 / static_cast<double>(nodes.size());
  std::vector<LayerCache> caches;
  MatrixXd h = RunLayers(model, ops, g.features(), grad ? &caches : nullptr);
  MatrixXd d_h;
  if (grad) d_h = MatrixXd::Zero(h.rows(), h.cols());
  double total = 0.0;
  for (const LabeledNode& ln : nodes) {
    if (!g.valid(ln.node)) throw InputError("labelled node out of range");
    RowVectorXd emb = h.row(ln.node);
    VectorXd d_logits;
    total += CrossEntropy(ClassifierLogits(model.classifier, emb), ln.label,
                          grad ? &d_logits : nullptr);
    if (!grad) continue;
    d_logits *= scale;
    grad->classifier.weight.noalias() += emb.transpose() * d_logits.transpose();
    grad->classifier.bias += d_logits.transpose();
    d_h.row(ln.node) += (model.classifier.weight * d_logits).transpose();
  }
  if (grad) BackpropLayers(model, ops, caches, std::move(d_h), *grad);
  return total * scale;
}

// Applies one update per epoch. Adam keeps first and second moment estimates
// per parameter (beta1 0.9, beta2 0.999, eps 1e-8, bias-corrected).
class ParameterUpdater {
 public:
  explicit ParameterUpdater(const TrainOptions& options) : options_(options) {}

  void Step(ModelSpec& model, const ModelSpec& grad) {
    std::vector<std::span<const double>> grads;
    VisitParameters(grad, [&](std::string_view, std::span<const double> p) { grads.push_back(p); });
    const double lr = options_.learning_rate;
    ++t_;
    std::size_t i = 0, flat = 0;
    VisitParameters(model, [&](std::string_view, std::span<double> p) {
      const auto& g = grads[i++];
      if (options_.optimizer == Optimizer::kGradientDescent) {
        for (std::size_t j = 0; j < p.size(); ++j) p[j] -= lr * g[j];
        return;
      }
      if (m_.size() < flat + p.size()) {
        m_.resize(flat + p.size(), 0.0);
        v_.resize(flat + p.size(), 0.0);
      }
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
      for (std::size_t j = 0; j < p.size(); ++j, ++flat) {
        m_[flat] = kBeta1 * m_[flat] + (1.0 - kBeta1) * g[j];
        v_[flat] = kBeta2 * v_[flat] + (1.0 - kBeta2) * g[j] * g[j];
        p[j] -= lr * (m_[flat] / c1) / (std::sqrt(v_[flat] / c2) + kEps);
      }
    });
  }

 private:
  static constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  TrainOptions options_;
  std::size_t t_ = 0;
  std::vector<double> m_, v_;
};

void CheckLoss(double loss, std::size_t epoch) {
  if (!std::isfinite(loss)) {
    throw TrainingDivergedError("training diverged at epoch " + std::to_string(epoch) +
                                " (loss " + std::to_string(loss) + ")");
  }
}

}  // namespace

ModelRunner::ModelRunner(const ModelSpec& model, const Graph& g)
    : model_(model), graph_(g), ops_(g) {
  CheckInput(model, g);
}

Prediction ModelRunner::Predict() const { return PredictFromFeatures(graph_.features()); }

Prediction ModelRunner::Predict(const std::vector<char>& active) const {
  if (active.size() != static_cast<std::size_t>(graph_.num_nodes())) {
    throw InputError("activity mask length does not match node count");
  }
  MatrixXd x = graph_.features();
  for (Index i = 0; i < x.rows(); ++i) {
    if (!active[static_cast<std::size_t>(i)]) x.row(i).setZero();
  }
  return PredictFromFeatures(x);
}

Prediction ModelRunner::PredictFromFeatures(const MatrixXd& features) const {
  MatrixXd h = RunLayers(model_, ops_, features, nullptr);
  if (model_.node_level()) {
    if (!graph_.target_node()) {
      throw InputError("node-level model needs a target node on graph '" + graph_.id() + "'");
    }
    return MakePrediction(ClassifierLogits(model_.classifier, h.row(*graph_.target_node())));
  }
  return MakePrediction(ClassifierLogits(model_.classifier, ReadoutForward(model_.readout, h, nullptr)));
}

Prediction ModelRunner::PredictNode(NodeId target) const {
  if (!model_.node_level()) throw InputError("PredictNode needs a node-level model");
  if (!graph_.valid(target)) throw InputError("target node out of range");
  MatrixXd h = RunLayers(model_, ops_, graph_.features(), nullptr);
  return MakePrediction(ClassifierLogits(model_.classifier, h.row(target)));
}

MatrixXd ModelRunner::Embed(const MatrixXd& features) const {
  return RunLayers(model_, ops_, features, nullptr);
}

Prediction Forward(const ModelSpec& model, const Graph& g) { return ModelRunner(model, g).Predict(); }

Prediction Forward(const ModelSpec& model, const Graph& g, const NodeSet& feature_mask) {
  CheckNodes(g, feature_mask);
  std::vector<char> active(static_cast<std::size_t>(g.num_nodes()), 0);
  for (NodeId v : feature_mask) active[v] = 1;
  return ModelRunner(model, g).Predict(active);
}

double GraphLoss(const ModelSpec& model, std::span<const Graph> graphs, ModelSpec* grad) {
  return BatchLoss(model, MakeBatch(model, graphs), grad);
}

double NodeLoss(const ModelSpec& model, const Graph& g, std::span<const LabeledNode> nodes,
                ModelSpec* grad) {
  return NodeLossWithOps(model, g, GraphOperators(g), nodes, grad);
}

TrainResult TrainGraphClassifier(const Architecture& arch, std::span<const Graph> graphs,
                                 const TrainOptions& options) {
  if (arch.readout == Readout::kNone) throw InputError("graph classifier needs a readout");
  TrainResult result{InitModel(arch, options.seed), 0.0, 0.0};
  const GraphBatch batch = MakeBatch(result.model, graphs);
  ParameterUpdater optimizer(options);
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    ModelSpec grad = ZerosLike(result.model);
    double loss = BatchLoss(result.model, batch, &grad);
    CheckLoss(loss, epoch);
    if (epoch == 0) result.initial_loss = loss;
    optimizer.Step(result.model, grad);
  }
  result.final_loss = BatchLoss(result.model, batch, nullptr);
  if (options.epochs == 0) result.initial_loss = result.final_loss;
  CheckLoss(result.final_loss, options.epochs);
  return result;
}

TrainResult TrainNodeClassifier(const Architecture& arch, const Graph& g,
                                std::span<const LabeledNode> nodes, const TrainOptions& options) {
  if (arch.readout != Readout::kNone) throw InputError("node classifier must not use a readout");
  TrainResult result{InitModel(arch, options.seed), 0.0, 0.0};
  GraphOperators ops(g);
  ParameterUpdater optimizer(options);
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    ModelSpec grad = ZerosLike(result.model);
    double loss = NodeLossWithOps(result.model, g, ops, nodes, &grad);
    CheckLoss(loss, epoch);
    if (epoch == 0) result.initial_loss = loss;
    optimizer.Step(result.model, grad);
  }
  result.final_loss = NodeLossWithOps(result.model, g, ops, nodes, nullptr);
  if (options.epochs == 0) result.initial_loss = result.final_loss;
  CheckLoss(result.final_loss, options.epochs);
  return result;
}

double GraphAccuracy(const ModelSpec& model, std::span<const Graph> graphs) {
  if (graphs.empty()) return 0.0;
  std::size_t correct = 0;
  for (const Graph& g : graphs) {
    if (g.label() && Forward(model, g).predicted_class == *g.label()) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(graphs.size());
}

double NodeAccuracy(const ModelSpec& model, const Graph& g, std::span<const LabeledNode> nodes) {
  if (nodes.empty()) return 0.0;
  ModelRunner runner(model, g);
  MatrixXd h = runner.Embed(g.features());
  std::size_t correct = 0;
  for (const LabeledNode& ln : nodes) {
    Prediction p = MakePrediction(ClassifierLogits(model.classifier, h.row(ln.node)));
    if (p.predicted_class == ln.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(nodes.size());
}

Split MakeSplit(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = MakeRng(seed, 0x5b17);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_train = n * 8 / 10;
  const std::size_t n_val = n / 10;
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                      order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  for (auto* part : {&s.train, &s.validation, &s.test}) std::sort(part->begin(), part->end());
  return s;
}

}  // namespace shapgraph
