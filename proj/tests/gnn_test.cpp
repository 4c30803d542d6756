#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "shapgraph/error.hpp"
#include "shapgraph/gnn.hpp"
#include "shapgraph/model_io.hpp"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"

namespace shapgraph {
namespace {

using testing::MakeGraph;
using testing::Path;
using testing::RandomConnectedGraph;

ModelSpec OneLayerGcn(Eigen::MatrixXd w, Eigen::MatrixXd cw, Eigen::RowVectorXd cb,
                      Readout readout = Readout::kMean) {
  ModelSpec m;
  m.model_type = ModelType::kGcn;
  m.input_dim = w.rows();
  m.num_classes = static_cast<int>(cw.cols());
  m.readout = readout;
  m.layers.emplace_back(GcnLayer{std::move(w), {}});
  m.classifier = {std::move(cw), std::move(cb)};
  m.Validate();
  return m;
}

TEST(NormalizeAdjacencyTest, Examples) {
  Eigen::MatrixXd single = NormalizeAdjacency(MakeGraph(1, {}));
  EXPECT_EQ(single.rows(), 1);
  EXPECT_DOUBLE_EQ(single(0, 0), 1.0);

  Eigen::MatrixXd pair = NormalizeAdjacency(Path(2));
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) EXPECT_DOUBLE_EQ(pair(i, j), 0.5);
  }

  Eigen::MatrixXd path = NormalizeAdjacency(Path(3));
  EXPECT_NEAR(path(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(path(0, 1), 1.0 / std::sqrt(6.0), 1e-15);
  EXPECT_NEAR(path(1, 1), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(path(0, 2), 0.0);
}

TEST(NormalizeAdjacencyTest, SymmetricOnRandomGraphs) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Eigen::MatrixXd a = NormalizeAdjacency(RandomConnectedGraph(9, 5, 1, seed));
    EXPECT_EQ((a - a.transpose()).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(GraphOperatorsTest, SparseMatchesDense) {
  Graph g = RandomConnectedGraph(8, 4, 1, 3);
  GraphOperators ops(g);
  Eigen::MatrixXd dense = ops.normalized();
  EXPECT_LT((dense - NormalizeAdjacency(g)).cwiseAbs().maxCoeff(), 1e-15);
  Eigen::MatrixXd adjacency = ops.adjacency();
  EXPECT_EQ(adjacency.sum(), 2.0 * static_cast<double>(g.num_edges()));
  EXPECT_EQ(adjacency.diagonal().sum(), 0.0);
}

TEST(MakePredictionTest, SoftmaxAndTies) {
  Prediction p = MakePrediction(Eigen::Vector3d(1000.0, 1000.0, -1000.0));
  EXPECT_EQ(p.predicted_class, 0);
  EXPECT_NEAR(p.probabilities.sum(), 1.0, 1e-12);
  EXPECT_NEAR(p.probabilities(0), 0.5, 1e-12);
  EXPECT_GE(p.probabilities.minCoeff(), 0.0);
}

TEST(ForwardTest, TwoNodeHandComputedLogits) {
  // Â = [[.5,.5],[.5,.5]], X = [[1,2],[3,4]] -> ÂX = [[2,3],[2,3]];
  // W = ones(2,2) -> [[5,5],[5,5]]; mean readout [5,5];
  // classifier diag(1,2) with bias (0,1) -> logits (5, 11).
  Eigen::MatrixXd x(2, 2);
  x << 1, 2, 3, 4;
  Graph g("pair", 2, {{0, 1}}, x);
  Eigen::MatrixXd cw(2, 2);
  cw << 1, 0, 0, 2;
  ModelSpec m = OneLayerGcn(Eigen::MatrixXd::Ones(2, 2), cw, Eigen::RowVector2d(0, 1));
  Prediction p = Forward(m, g);
  EXPECT_DOUBLE_EQ(p.logits(0), 5.0);
  EXPECT_DOUBLE_EQ(p.logits(1), 11.0);
  EXPECT_EQ(p.predicted_class, 1);
  EXPECT_NEAR(p.probabilities(1), 1.0 / (1.0 + std::exp(-6.0)), 1e-15);

  // Zero-padding node 1: ÂX = [[.5,1],[.5,1]] -> 1.5 everywhere.
  Prediction masked = Forward(m, g, NodeSet{0});
  EXPECT_DOUBLE_EQ(masked.logits(0), 1.5);
  EXPECT_DOUBLE_EQ(masked.logits(1), 4.0);
}

TEST(ForwardTest, GinHandComputedLogits) {
  // Path 0-1-2 with scalar features (1,2,3); (1+0)x + Ax = (3,6,5).
  // W1 = [1], b1 = [-4] -> relu (0,2,1); W2 = [2], b2 = [0] -> (0,4,2).
  // Max readout 4; classifier w = [1,-1], b = 0 -> logits (4,-4).
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  Graph g("p", 3, {{0, 1}, {1, 2}}, x);
  ModelSpec m;
  m.model_type = ModelType::kGin;
  m.input_dim = 1;
  m.num_classes = 2;
  m.readout = Readout::kMax;
  m.layers.emplace_back(GinLayer{Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::RowVectorXd::Constant(1, -4.0),
                                 Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::RowVectorXd::Zero(1), 0.0});
  m.classifier = {Eigen::RowVector2d(1, -1), Eigen::RowVector2d(0, 0)};
  m.Validate();
  Prediction p = Forward(m, g);
  EXPECT_DOUBLE_EQ(p.logits(0), 4.0);
  EXPECT_DOUBLE_EQ(p.logits(1), -4.0);
}

TEST(ForwardTest, FullMaskIsBitwiseIdentity) {
  for (ModelType type : {ModelType::kGcn, ModelType::kGin}) {
    Architecture arch;
    arch.model_type = type;
    arch.input_dim = 3;
    ModelSpec m = InitModel(arch, 11);
    Graph g = RandomConnectedGraph(9, 3, 3, 5);
    Prediction a = Forward(m, g);
    Prediction b = Forward(m, g, NodeSet::Range(9));
    EXPECT_EQ(a.logits, b.logits);
  }
}

TEST(ForwardTest, ZeroFeaturesStillNormalized) {
  ModelSpec m = InitModel({}, 4);
  Graph g("z", 3, {{0, 1}, {1, 2}}, Eigen::MatrixXd::Zero(3, 10));
  Prediction p = Forward(m, g);
  EXPECT_NEAR(p.probabilities.sum(), 1.0, 1e-9);
}

TEST(ForwardTest, Errors) {
  ModelSpec m = InitModel({}, 1);
  EXPECT_THROW(Forward(m, Path(3, 4)), InputError);
  Architecture node_arch;
  node_arch.readout = Readout::kNone;
  ModelSpec node_model = InitModel(node_arch, 1);
  EXPECT_THROW(Forward(node_model, Path(3, 10)), InputError);
  EXPECT_NO_THROW(Forward(node_model, Path(3, 10).WithTarget(1)));
}

TEST(ForwardTest, NodeModeReadsTargetEmbedding) {
  Architecture arch;
  arch.readout = Readout::kNone;
  arch.num_classes = 4;
  arch.input_dim = 2;
  ModelSpec m = InitModel(arch, 8);
  Graph g = RandomConnectedGraph(7, 2, 2, 2);
  ModelRunner runner(m, g);
  Eigen::MatrixXd h = runner.Embed(g.features());
  for (NodeId v = 0; v < 7; ++v) {
    Prediction p = Forward(m, g.WithTarget(v));
    Eigen::VectorXd want = (h.row(v) * m.classifier.weight + m.classifier.bias).transpose();
    EXPECT_LT((p.logits - want).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(p.logits, runner.PredictNode(v).logits);
  }
}

Graph Permuted(const Graph& g, const std::vector<NodeId>& perm) {
  std::vector<Edge> edges;
  for (const Edge& e : g.edges()) edges.push_back({perm[e.u], perm[e.v]});
  Eigen::MatrixXd x(g.num_nodes(), g.feature_dim());
  for (NodeId v = 0; v < g.num_nodes(); ++v) x.row(perm[v]) = g.features().row(v);
  return Graph(g.id(), g.num_nodes(), edges, x);
}

TEST(ForwardTest, PermutationInvariantGraphOutput) {
  for (ModelType type : {ModelType::kGcn, ModelType::kGin}) {
    for (Readout readout : {Readout::kMax, Readout::kMean}) {
      Architecture arch{type, 3, {8, 8}, 3, readout};
      ModelSpec m = InitModel(arch, 21);
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Graph g = RandomConnectedGraph(10, 4, 3, seed);
        std::vector<NodeId> perm(10);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), std::mt19937_64(seed + 100));
        Prediction a = Forward(m, g);
        Prediction b = Forward(m, Permuted(g, perm));
        EXPECT_LT((a.probabilities - b.probabilities).cwiseAbs().maxCoeff(), 1e-9);
      }
    }
  }
}

TEST(ModelSpecTest, ValidateNamesBrokenLayer) {
  ModelSpec m = InitModel({}, 2);
  std::get<GcnLayer>(m.layers[1]).weight = Eigen::MatrixXd::Ones(7, 20);
  try {
    m.Validate();
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("layer 1"), std::string::npos) << e.what();
  }
}

TEST(InitModelTest, GlorotBoundsAndDeterminism) {
  ModelSpec a = InitModel({}, 5);
  ModelSpec b = InitModel({}, 5);
  EXPECT_EQ(SerializeModel(a), SerializeModel(b));
  const auto& w = std::get<GcnLayer>(a.layers[0]).weight;
  double bound = std::sqrt(6.0 / (10.0 + 20.0));
  EXPECT_LE(w.cwiseAbs().maxCoeff(), bound);
  EXPECT_NE(SerializeModel(a), SerializeModel(InitModel({}, 6)));
}

class GradientCheck : public ::testing::TestWithParam<std::tuple<ModelType, Readout>> {};

TEST_P(GradientCheck, MatchesCentralDifferences) {
  auto [type, readout] = GetParam();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto report = testing::CheckGradient(type, readout, seed);
    EXPECT_TRUE(report.ok) << "seed " << seed << ": " << report.worst;
  }
}

INSTANTIATE_TEST_SUITE_P(
    AllModels, GradientCheck,
    ::testing::Combine(::testing::Values(ModelType::kGcn, ModelType::kGin),
                       ::testing::Values(Readout::kMax, Readout::kMean, Readout::kNone)),
    [](const auto& info) {
      return ToString(std::get<0>(info.param)) + "_" + ToString(std::get<1>(info.param));
    });

TEST(TrainTest, ZeroLearningRateKeepsInitialization) {
  Graph g = RandomConnectedGraph(6, 2, 10, 1).WithLabel(1);
  std::vector<Graph> data{g};
  Architecture arch;
  TrainResult r = TrainGraphClassifier(arch, data, {5, 0.0, 9});
  EXPECT_EQ(SerializeModel(r.model), SerializeModel(InitModel(arch, 9)));
}

TEST(TrainTest, OneStepDoesNotIncreaseLoss) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::vector<Graph> data{RandomConnectedGraph(6, 2, 10, seed).WithLabel(static_cast<int>(seed % 2))};
    TrainResult r = TrainGraphClassifier({}, data, {1, 1e-3, seed});
    EXPECT_LE(r.final_loss, r.initial_loss);
  }
}

TEST(TrainTest, FitsSmallNodeTask) {
  // Path 0-1-2-3-4 with one-hot-ish degree features; classify endpoints.
  Graph g = Path(5, 2);
  std::vector<LabeledNode> nodes{{0, 1}, {1, 0}, {2, 0}, {3, 0}, {4, 1}};
  Architecture arch{ModelType::kGcn, 2, {8, 8}, 2, Readout::kNone};
  TrainResult r = TrainNodeClassifier(arch, g, nodes, {400, 0.05, 3});
  EXPECT_LT(r.final_loss, r.initial_loss);
  EXPECT_EQ(NodeAccuracy(r.model, g, nodes), 1.0);
}

// One epoch from the same initialization: plain descent moves every
// parameter by -lr * g; Adam's first bias-corrected step is lr * g / (|g| + eps).
TEST(TrainTest, FirstStepOfEachOptimizer) {
  std::vector<Graph> data{RandomConnectedGraph(7, 2, 10, 4).WithLabel(1),
                          RandomConnectedGraph(6, 1, 10, 5).WithLabel(0)};
  Architecture arch{ModelType::kGin, 10, {6}, 2, Readout::kMax};
  const ModelSpec init = InitModel(arch, 2);
  ModelSpec grad = ZerosLike(init);
  GraphLoss(init, data, &grad);
  auto flat = [](const ModelSpec& m) {
    std::vector<double> out;
    VisitParameters(m, [&](std::string_view, std::span<const double> p) { out.insert(out.end(), p.begin(), p.end()); });
    return out;
  };
  const auto p0 = flat(init), g = flat(grad);
  const double lr = 0.01;
  const auto gd = flat(TrainGraphClassifier(arch, data, {1, lr, 2, Optimizer::kGradientDescent}).model);
  const auto adam = flat(TrainGraphClassifier(arch, data, {1, lr, 2, Optimizer::kAdam}).model);
  for (std::size_t i = 0; i < p0.size(); ++i) {
    EXPECT_NEAR(gd[i], p0[i] - lr * g[i], 1e-15);
    EXPECT_NEAR(adam[i], p0[i] - lr * g[i] / (std::abs(g[i]) + 1e-8), 1e-12);
  }
  EXPECT_EQ(ParseOptimizer("gd"), Optimizer::kGradientDescent);
  EXPECT_EQ(ToString(Optimizer::kAdam), "adam");
  EXPECT_THROW(ParseOptimizer("sgd"), InputError);
}

TEST(TrainTest, DivergenceIsReported) {
  std::vector<Graph> data{RandomConnectedGraph(6, 2, 10, 0).WithLabel(0),
                          RandomConnectedGraph(6, 2, 10, 1).WithLabel(1)};
  EXPECT_THROW(TrainGraphClassifier({}, data, {50, 1e200, 0}), TrainingDivergedError);
}

TEST(SplitTest, PartitionsEightyTenTen) {
  Split s = MakeSplit(1000, 3);
  EXPECT_EQ(s.train.size(), 800u);
  EXPECT_EQ(s.validation.size(), 100u);
  EXPECT_EQ(s.test.size(), 100u);
  std::vector<std::size_t> all;
  for (auto* part : {&s.train, &s.validation, &s.test}) all.insert(all.end(), part->begin(), part->end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
  EXPECT_EQ(MakeSplit(1000, 3).test, s.test);
}

}  // namespace
}  // namespace shapgraph
