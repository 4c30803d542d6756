#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "shapgraph/error.hpp"
#include "shapgraph/graph.hpp"
#include "support/fixtures.hpp"

namespace shapgraph {
namespace {

using testing::BfsDistances;
using testing::Cycle;
using testing::MakeGraph;
using testing::Path;
using testing::RandomConnectedGraph;
using testing::Star;

TEST(NodeSetTest, SortsAndDeduplicates) {
  NodeSet s{4, 1, 4, 2};
  EXPECT_EQ(s.ids(), (std::vector<NodeId>{1, 2, 4}));
  EXPECT_TRUE(s.contains(2));
  EXPECT_FALSE(s.contains(3));
}

TEST(NodeSetTest, SetAlgebra) {
  NodeSet a{0, 1, 2}, b{2, 3};
  EXPECT_EQ(a.Union(b), (NodeSet{0, 1, 2, 3}));
  EXPECT_EQ(a.Difference(b), (NodeSet{0, 1}));
  EXPECT_EQ(a.Intersection(b), (NodeSet{2}));
  EXPECT_EQ(a.Without(1), (NodeSet{0, 2}));
  EXPECT_LT((NodeSet{0, 1}), (NodeSet{0, 2}));
}

TEST(GraphTest, CanonicalizesEdges) {
  Graph g = MakeGraph(3, {{2, 1}, {1, 0}});
  ASSERT_EQ(g.num_edges(), 2u);
  EXPECT_EQ(g.edges()[0], (Edge{0, 1}));
  EXPECT_EQ(g.edges()[1], (Edge{1, 2}));
  EXPECT_TRUE(g.has_edge(2, 1));
  EXPECT_FALSE(g.has_edge(0, 2));
  EXPECT_EQ(g.degree(1), 2u);
}

TEST(GraphTest, RejectsBrokenInvariants) {
  EXPECT_THROW(MakeGraph(2, {{0, 2}}), InputError);
  EXPECT_THROW(MakeGraph(2, {{1, 1}}), InputError);
  EXPECT_THROW(MakeGraph(2, {{0, 1}, {1, 0}}), InputError);
  EXPECT_THROW(Graph("g", 2, {}, Eigen::MatrixXd::Ones(3, 1)), InputError);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(1, 1);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Graph("g", 1, {}, bad), InputError);
  EXPECT_THROW(Graph("g", 1, {}, Eigen::MatrixXd::Ones(1, 1), std::nullopt, 1), InputError);
}

TEST(ConnectedComponentsTest, Examples) {
  Graph path = Path(3);
  EXPECT_EQ(ConnectedComponents(path, {0, 1, 2}), (std::vector<NodeSet>{{0, 1, 2}}));
  EXPECT_EQ(ConnectedComponents(path, {0, 2}), (std::vector<NodeSet>{{0}, {2}}));
  EXPECT_TRUE(ConnectedComponents(path, {}).empty());
  EXPECT_THROW(ConnectedComponents(path, {5}), InputError);
}

TEST(ConnectedComponentsTest, OrderedBySizeThenSmallestIndex) {
  Graph g = MakeGraph(6, {{0, 1}, {2, 3}, {3, 4}});
  auto comps = ConnectedComponents(g, NodeSet::Range(6));
  ASSERT_EQ(comps.size(), 3u);
  EXPECT_EQ(comps[0], (NodeSet{2, 3, 4}));
  EXPECT_EQ(comps[1], (NodeSet{0, 1}));
  EXPECT_EQ(comps[2], (NodeSet{5}));
}

TEST(ConnectedComponentsTest, PartitionOnRandomSubsets) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Graph g = RandomConnectedGraph(12, 3, 1, seed);
    std::vector<NodeId> pick;
    for (NodeId v = 0; v < 12; ++v) {
      if ((seed >> (v % 5)) & 1 || v % 3 == 0) pick.push_back(v);
    }
    NodeSet nodes = NodeSet::FromUnsorted(pick);
    NodeSet seen;
    std::size_t total = 0;
    for (const NodeSet& c : ConnectedComponents(g, nodes)) {
      EXPECT_TRUE(IsConnected(g, c));
      EXPECT_TRUE(seen.Intersection(c).empty());
      seen = seen.Union(c);
      total += c.size();
    }
    EXPECT_EQ(seen, nodes);
    EXPECT_EQ(total, nodes.size());
  }
}

TEST(LHopNeighborsTest, Examples) {
  Graph isolated = MakeGraph(1, {});
  EXPECT_TRUE(LHopNeighbors(isolated, {0}, 3).empty());
  EXPECT_EQ(LHopNeighbors(Path(5), {0}, 2), (NodeSet{1, 2}));
  EXPECT_EQ(LHopNeighbors(Cycle(5), {0}, 3), (NodeSet{1, 2, 3, 4}));
  EXPECT_EQ(LHopNeighbors(Path(7), {3}, 3).size(), 6u);
}

TEST(LHopNeighborsTest, Errors) {
  EXPECT_THROW(LHopNeighbors(Path(3), {}, 1), InputError);
  EXPECT_THROW(LHopNeighbors(Path(3), {0}, -1), InputError);
  EXPECT_THROW(LHopNeighbors(Path(3), {7}, 1), InputError);
}

TEST(LHopNeighborsTest, MatchesBreadthFirstOracleAndIsMonotone) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    Graph g = RandomConnectedGraph(15, 4, 1, seed);
    std::vector<NodeId> seeds{static_cast<NodeId>(seed % 15), static_cast<NodeId>((seed * 7) % 15)};
    NodeSet seed_set = NodeSet::FromUnsorted(seeds);
    auto dist = BfsDistances(g, seed_set.ids());
    NodeSet previous;
    for (int hops = 0; hops <= 15; ++hops) {
      NodeSet got = LHopNeighbors(g, seed_set, hops);
      std::vector<NodeId> want;
      for (NodeId v = 0; v < 15; ++v) {
        if (dist[v] >= 1 && dist[v] <= hops) want.push_back(v);
      }
      EXPECT_EQ(got.ids(), want) << "seed " << seed << " hops " << hops;
      EXPECT_EQ(previous.Difference(got).size(), 0u);
      previous = got;
    }
    EXPECT_EQ(LHopNeighbors(g, seed_set, kUnboundedHops), NodeSet::Range(15).Difference(seed_set));
  }
}

TEST(InducedDegreeOrderTest, Examples) {
  Graph path = Path(3);
  EXPECT_EQ(InducedDegreeOrder(path, {0, 1, 2}, PruneOrder::kLow2High),
            (std::vector<NodeId>{0, 2, 1}));
  EXPECT_EQ(InducedDegreeOrder(path, {0, 1, 2}, PruneOrder::kHigh2Low),
            (std::vector<NodeId>{1, 0, 2}));
  EXPECT_EQ(InducedDegreeOrder(path, {1}, PruneOrder::kLow2High), (std::vector<NodeId>{1}));
}

TEST(InducedDegreeOrderTest, UsesInducedDegree) {
  // Node 0 is the star center but only one leaf is inside the subset.
  Graph star = Star(4);
  EXPECT_EQ(InducedDegreeOrder(star, {0, 1}, PruneOrder::kHigh2Low), (std::vector<NodeId>{0, 1}));
}

TEST(PruneActionsTest, Examples) {
  Graph path = Path(3);
  auto path_children = PruneActions(path, {0, 1, 2}, {PruneOrder::kHigh2Low, 1});
  ASSERT_EQ(path_children.size(), 1u);
  EXPECT_EQ(path_children[0].removed, 1);
  EXPECT_EQ(path_children[0].child, (NodeSet{0}));

  Graph triangle = Cycle(3);
  auto tri = PruneActions(triangle, {0, 1, 2}, {PruneOrder::kLow2High, 3});
  ASSERT_EQ(tri.size(), 3u);
  EXPECT_EQ(tri[0].child, (NodeSet{1, 2}));
  EXPECT_EQ(tri[1].child, (NodeSet{0, 2}));
  EXPECT_EQ(tri[2].child, (NodeSet{0, 1}));

  Graph star = Star(4);
  auto st = PruneActions(star, NodeSet::Range(5), {PruneOrder::kHigh2Low, 1});
  ASSERT_EQ(st.size(), 1u);
  EXPECT_EQ(st[0].removed, 0);
  EXPECT_EQ(st[0].child, (NodeSet{1}));
}

TEST(PruneActionsTest, ChildrenAreDistinct) {
  Graph path = Path(2);
  auto children = PruneActions(path, {0, 1}, {PruneOrder::kLow2High, std::nullopt});
  ASSERT_EQ(children.size(), 2u);
  EXPECT_EQ(children[0].child, (NodeSet{1}));
  EXPECT_EQ(children[1].child, (NodeSet{0}));

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Graph g = RandomConnectedGraph(9, 3, 1, seed);
    auto all = PruneActions(g, NodeSet::Range(9), {PruneOrder::kLow2High, std::nullopt});
    std::set<NodeSet> unique;
    for (const auto& a : all) unique.insert(a.child);
    EXPECT_EQ(unique.size(), all.size());
  }
}

TEST(PruneActionsTest, RespectsContract) {
  EXPECT_THROW(PruneActions(Path(3), {0, 2}, {}), ContractError);
  EXPECT_THROW(PruneActions(Path(3), {0}, {}), ContractError);
  EXPECT_THROW((PruneStrategy{PruneOrder::kLow2High, 0}).Validate(), InputError);
}

TEST(PruneActionsTest, ChildrenAreSmallerAndConnected) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Graph g = RandomConnectedGraph(10, 4, 1, seed);
    for (PruneOrder order : {PruneOrder::kLow2High, PruneOrder::kHigh2Low}) {
      for (const PruneAction& a : PruneActions(g, NodeSet::Range(10), {order, std::nullopt})) {
        EXPECT_LT(a.child.size(), 10u);
        EXPECT_FALSE(a.child.contains(a.removed));
        EXPECT_TRUE(IsConnected(g, a.child));
        // The child is the largest component after removal.
        auto comps = ConnectedComponents(g, NodeSet::Range(10).Without(a.removed));
        EXPECT_EQ(a.child, comps.front());
      }
    }
  }
}

TEST(InducedSubgraphTest, Reindexes) {
  Graph g = Path(5);
  Graph sub = InducedSubgraph(g, {1, 2, 4});
  EXPECT_EQ(sub.num_nodes(), 3);
  ASSERT_EQ(sub.num_edges(), 1u);
  EXPECT_EQ(sub.edges()[0], (Edge{0, 1}));
}

TEST(PruneOrderTest, RoundTripsNames) {
  EXPECT_EQ(ParsePruneOrder(ToString(PruneOrder::kHigh2Low)), PruneOrder::kHigh2Low);
  EXPECT_EQ(ToString(PruneOrder::kLow2High), "low2high");
  EXPECT_THROW(ParsePruneOrder("sideways"), InputError);
}

}  // namespace
}  // namespace shapgraph
