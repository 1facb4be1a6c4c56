#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <queue>

#include "ggda/bundle.hpp"
#include "ggda/errors.hpp"
#include "ggda/graph.hpp"
#include "support/graphs.hpp"

namespace {

using ggda::AttributedGraph;
using ggda::Edge;
using ggda::Matrix;
using ggda::StructureMode;

Matrix bfs_hops(int n, const std::vector<Edge>& edges) {
  std::vector<std::vector<int>> adj(n);
  for (const Edge& e : edges) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  Matrix d = Matrix::Constant(n, n, -1);
  for (int s = 0; s < n; ++s) {
    std::queue<int> q;
    q.push(s);
    d(s, s) = 0;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj[u])
        if (d(s, v) < 0) {
          d(s, v) = d(s, u) + 1;
          q.push(v);
        }
    }
  }
  const double far = d.maxCoeff() + 1;
  return d.unaryExpr([far](double x) { return x < 0 ? far : x; });
}

TEST(Structure, TriangleAdjacency) {
  Matrix c = ggda::build_structure_matrix(3, std::vector<Edge>{{0, 1}, {1, 2}, {0, 2}},
                                          StructureMode::adjacency);
  EXPECT_EQ(c, Matrix::Ones(3, 3) - Matrix::Identity(3, 3));
}

TEST(Structure, PathHops) {
  Matrix c = ggda::build_structure_matrix(3, std::vector<Edge>{{0, 1}, {1, 2}},
                                          StructureMode::shortest_path);
  EXPECT_EQ(c(0, 2), 2);
  EXPECT_EQ(c(2, 0), 2);
}

TEST(Structure, UnreachablePairs) {
  Matrix c = ggda::build_structure_matrix(2, {}, StructureMode::shortest_path);
  EXPECT_EQ(c(0, 1), 1);
  ggda::Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = testgraphs::random_graph(12, 1, 0.12, rng);
    EXPECT_EQ(ggda::build_structure_matrix(12, g.edges(), StructureMode::shortest_path),
              bfs_hops(12, g.edges()));
  }
}

TEST(Histogram, UniformAndDegree) {
  EXPECT_TRUE(ggda::make_histogram(4, {}, ggda::HistogramMode::uniform)
                  .isApprox(ggda::Vector::Constant(4, 0.25)));
  ggda::Vector deg =
      ggda::make_histogram(3, std::vector<Edge>{{0, 1}, {1, 2}}, ggda::HistogramMode::degree);
  EXPECT_DOUBLE_EQ(deg(0), 0.25);
  EXPECT_DOUBLE_EQ(deg(1), 0.5);
  EXPECT_DOUBLE_EQ(deg(2), 0.25);
  EXPECT_DOUBLE_EQ(ggda::make_histogram(1, {}, ggda::HistogramMode::uniform)(0), 1.0);
  EXPECT_THROW(ggda::make_histogram(3, {}, ggda::HistogramMode::degree), ggda::InvalidArgument);
}

TEST(Pool, OffsetsAndIds) {
  ggda::Rng rng(1);
  auto a = testgraphs::random_graph(3, 2, 0.8, rng, true);
  auto b = testgraphs::random_graph(2, 2, 1.0, rng, true);
  auto pool = ggda::disjoint_union({a, b});
  EXPECT_EQ(pool.total_vertices(), 5);
  EXPECT_EQ(pool.offset(0), 0);
  EXPECT_EQ(pool.offset(1), 3);
  EXPECT_EQ(pool.global_id(1, 1), 4);
  EXPECT_EQ(pool.origin(4), std::make_pair(std::size_t{1}, 1));
  EXPECT_EQ(pool.extract(1).edges(), b.edges());
  EXPECT_EQ(pool.extract(1).features(), b.features());
}

TEST(Pool, SingleGraphIdentity) {
  ggda::Rng rng(2);
  auto g = testgraphs::random_graph(7, 3, 0.4, rng, true);
  auto pool = ggda::disjoint_union({g});
  EXPECT_EQ(pool.union_edges(), g.edges());
  EXPECT_EQ(pool.features(), g.features());
  EXPECT_EQ(pool.labels(), g.labels());
}

TEST(Pool, MismatchedDimension) {
  ggda::Rng rng(2);
  auto a = testgraphs::random_graph(3, 2, 0.5, rng);
  auto b = testgraphs::random_graph(3, 3, 0.5, rng);
  EXPECT_THROW(ggda::disjoint_union({a, b}), ggda::InvalidArgument);
}

TEST(Graph, RejectsBadEdges) {
  Matrix x = Matrix::Zero(3, 1);
  EXPECT_THROW(AttributedGraph(x, {{0, 3}}, {}, 1), ggda::InvalidArgument);
  EXPECT_THROW(AttributedGraph(x, {{1, 1}}, {}, 1), ggda::InvalidArgument);
  EXPECT_THROW(AttributedGraph(x, {}, {0, 5, 0}, 2), ggda::InvalidArgument);
}

class BundleTest : public ::testing::Test {
 protected:
  std::filesystem::path dir =
      std::filesystem::temp_directory_path() /
      ("ggda_bundle_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
       ::testing::UnitTest::GetInstance()->current_test_info()->name());
  void TearDown() override { std::filesystem::remove_all(dir); }
};

TEST_F(BundleTest, RoundTrip) {
  ggda::Rng rng(5);
  auto g = testgraphs::random_graph(9, 3, 0.3, rng, true, 3);
  ggda::save_bundle(g, dir);
  auto back = ggda::load_bundle(dir);
  EXPECT_EQ(back.edges(), g.edges());
  EXPECT_EQ(back.labels(), g.labels());
  EXPECT_EQ(back.n_classes(), 3);
  EXPECT_LT((back.features() - g.features()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST_F(BundleTest, MalformedEdgeLine) {
  ggda::Rng rng(5);
  ggda::save_bundle(testgraphs::random_graph(4, 2, 0.5, rng), dir);
  std::ofstream(dir / "edges.txt") << "0 1\n2 x\n";
  try {
    ggda::load_bundle(dir);
    FAIL() << "expected DataError";
  } catch (const ggda::DataError& e) {
    EXPECT_NE(std::string(e.what()).find("edges.txt:2"), std::string::npos) << e.what();
  }
}

}  // namespace
