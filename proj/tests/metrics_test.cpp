#include <cmath>

#include <gtest/gtest.h>

#include "shapgraph/error.hpp"
#include "shapgraph/metrics.hpp"
#include "support/fixtures.hpp"

namespace shapgraph {
namespace {

using testing::Path;
using testing::RandomConnectedGraph;

// One isolated node with feature 1 and a single identity GCN layer: the
// embedding is 1 unmasked and 0 occluded. Class-0 logit weight ln 36 with
// bias ln 0.25 against a zero class-1 logit gives p0 = 0.9 and then 0.2.
ModelSpec FlipModel() {
  ModelSpec m;
  m.model_type = ModelType::kGcn;
  m.input_dim = 1;
  m.num_classes = 2;
  m.readout = Readout::kMean;
  m.layers.emplace_back(GcnLayer{Eigen::MatrixXd::Ones(1, 1), {}});
  m.classifier.weight = Eigen::RowVector2d(std::log(36.0), 0.0);
  m.classifier.bias = Eigen::RowVector2d(std::log(0.25), 0.0);
  m.Validate();
  return m;
}

TEST(FidelityTest, HandComputedFlip) {
  ModelSpec m = FlipModel();
  std::vector<Graph> graphs{testing::MakeGraph(1, {}, 1, "one")};
  std::vector<NodeSet> masks{{0}};
  EvalRecord r = EvaluateMask(m, graphs[0], masks[0]);
  EXPECT_NEAR(r.original_prob, 0.9, 1e-12);
  EXPECT_NEAR(r.occluded_prob, 0.2, 1e-12);
  EXPECT_NEAR(Fidelity(m, graphs, masks), 0.7, 1e-12);
}

TEST(FidelityTest, EmptyMasksAndConstantModel) {
  ModelSpec m = InitModel({ModelType::kGcn, 2, {6}, 2, Readout::kMax}, 3);
  std::vector<Graph> graphs{RandomConnectedGraph(8, 2, 2, 1), RandomConnectedGraph(6, 1, 2, 2)};
  std::vector<NodeSet> empty(2);
  EXPECT_EQ(Fidelity(m, graphs, empty), 0.0);

  ModelSpec constant = m;
  constant.classifier.weight.setZero();
  std::vector<NodeSet> masks{{0, 1}, {2}};
  EXPECT_EQ(Fidelity(constant, graphs, masks), 0.0);

  EXPECT_THROW(Fidelity(m, std::span<const Graph>{}, std::span<const NodeSet>{}), InputError);
  std::vector<NodeSet> one{{0}};
  EXPECT_THROW(Fidelity(m, graphs, one), InputError);
}

TEST(FidelityTest, InvariantToReindexing) {
  ModelSpec m = InitModel({ModelType::kGin, 2, {6, 6}, 2, Readout::kMean}, 7);
  Graph g = RandomConnectedGraph(8, 3, 2, 4);
  // Reverse the node order.
  std::vector<Edge> edges;
  for (const Edge& e : g.edges()) edges.push_back({7 - e.u, 7 - e.v});
  Eigen::MatrixXd x = g.features().colwise().reverse();
  Graph reversed("r", 8, edges, x);
  std::vector<Graph> a{g}, b{reversed};
  std::vector<NodeSet> ma{{0, 1, 5}}, mb{{7, 6, 2}};
  EXPECT_NEAR(Fidelity(m, a, ma), Fidelity(m, b, mb), 1e-9);
}

TEST(FidelityTest, NodeTargetIsNeverOccluded) {
  Architecture arch{ModelType::kGcn, 2, {5}, 3, Readout::kNone};
  ModelSpec m = InitModel(arch, 2);
  Graph g = RandomConnectedGraph(7, 2, 2, 9).WithTarget(3);
  EvalRecord with_target = EvaluateMask(m, g, {2, 3, 4});
  EvalRecord without = EvaluateMask(m, g, {2, 4});
  EXPECT_EQ(with_target.occluded_prob, without.occluded_prob);
  EXPECT_EQ(with_target.target_node, 3);
}

TEST(SparsityTest, Examples) {
  std::vector<Graph> one{Path(25)};
  std::vector<NodeSet> five{{0, 1, 2, 3, 4}};
  EXPECT_DOUBLE_EQ(Sparsity(five, one), 0.8);
  std::vector<NodeSet> all{NodeSet::Range(25)};
  EXPECT_EQ(Sparsity(all, one), 0.0);
  std::vector<Graph> two{Path(10), Path(10)};
  std::vector<NodeSet> masks{{0, 1}, {0, 1, 2, 3}};
  EXPECT_DOUBLE_EQ(Sparsity(masks, two), 0.7);
}

Explanation WithSizes(const std::string& id, std::vector<std::size_t> sizes) {
  Explanation e;
  e.graph_id = id;
  for (std::size_t s : sizes) {
    e.per_size[s] = SizedSubgraph{NodeSet::Range(static_cast<NodeId>(s)), 0.0};
  }
  return e;
}

TEST(CurveTest, GridOnTwentyFiveNodeGraphs) {
  ModelSpec m = InitModel({ModelType::kGcn, 1, {4}, 2, Readout::kMean}, 1);
  std::vector<Graph> graphs{Path(25), Path(25)};
  std::vector<Explanation> ex{WithSizes("a", {5, 10, 15, 25}), WithSizes("b", {5, 10, 15, 25})};
  std::vector<std::size_t> grid{15, 5, 10};
  auto curve = SparsityFidelityCurve(m, graphs, ex, grid);
  ASSERT_EQ(curve.size(), 3u);
  EXPECT_NEAR(curve[0].sparsity, 0.4, 1e-12);
  EXPECT_NEAR(curve[1].sparsity, 0.6, 1e-12);
  EXPECT_NEAR(curve[2].sparsity, 0.8, 1e-12);
  for (const CurvePoint& p : curve) {
    EXPECT_EQ(p.n_graphs, 2u);
    EXPECT_EQ(p.fallbacks, 0u);
  }

  std::vector<std::size_t> full{25};
  auto whole = SparsityFidelityCurve(m, graphs, ex, full);
  ASSERT_EQ(whole.size(), 1u);
  EXPECT_EQ(whole[0].sparsity, 0.0);
}

TEST(CurveTest, FallsBackToNearestSmallerSize) {
  Explanation e = WithSizes("a", {3, 6, 9});
  bool exact = true;
  EXPECT_EQ(SubgraphOfSize(e, 7, &exact).nodes.size(), 6u);
  EXPECT_FALSE(exact);
  EXPECT_EQ(SubgraphOfSize(e, 2, &exact).nodes.size(), 3u);
  EXPECT_EQ(SubgraphOfSize(e, 9, &exact).nodes.size(), 9u);
  EXPECT_TRUE(exact);

  ModelSpec m = InitModel({ModelType::kGcn, 1, {4}, 2, Readout::kMean}, 1);
  std::vector<Graph> graphs{Path(12)};
  std::vector<Explanation> ex{e};
  std::vector<std::size_t> grid{7};
  EXPECT_EQ(SparsityFidelityCurve(m, graphs, ex, grid)[0].fallbacks, 1u);
}

TEST(CurveTest, CsvAndJson) {
  std::vector<CurvePoint> curve{{5, 0.8, 0.25, 20, 0}, {10, 0.6, 0.5, 20, 2}};
  EXPECT_EQ(CurveToCsv(curve),
            "size,sparsity,fidelity,n_graphs\n5,0.800000,0.250000,20\n10,0.600000,0.500000,20\n");
  auto doc = CurveToJson(curve);
  ASSERT_EQ(doc.size(), 2u);
  EXPECT_EQ(doc[1]["fallbacks"], 2);
}

TEST(MotifRecallTest, Examples) {
  NodeSet truth{20, 21, 22, 23, 24};
  EXPECT_EQ(MotifRecall(truth, truth), 1.0);
  EXPECT_EQ(MotifRecall({0, 1}, truth), 0.0);
  EXPECT_DOUBLE_EQ(MotifRecall({20, 21, 22, 23, 3}, truth), 0.8);
  EXPECT_THROW(MotifRecall(truth, {}), InputError);
}

}  // namespace
}  // namespace shapgraph
