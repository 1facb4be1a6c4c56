#include <gtest/gtest.h>

#include "ggda/errors.hpp"
#include "ggda/fgw.hpp"
#include "ggda/rng.hpp"
#include "support/oracles.hpp"

namespace {

using ggda::AttributedGraph;
using ggda::Edge;
using ggda::Matrix;
using ggda::Vector;

AttributedGraph random_graph(int n, int d, double density, ggda::Rng& rng, bool labeled = false) {
  Matrix x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = ggda::standard_normal(rng);
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (ggda::uniform01(rng) < density) edges.push_back({u, v});
  std::vector<int> labels;
  if (labeled)
    for (int i = 0; i < n; ++i) labels.push_back(static_cast<int>(ggda::uniform_index(rng, 2)));
  return AttributedGraph(x, edges, labels, 2);
}

Matrix random_coupling(const Vector& a, const Vector& b, ggda::Rng& rng) {
  // Mixture of the product plan and a random transport plan stays feasible.
  Matrix cost(a.size(), b.size());
  for (int i = 0; i < cost.rows(); ++i)
    for (int j = 0; j < cost.cols(); ++j) cost(i, j) = ggda::uniform01(rng);
  const Matrix vertex = ggda::solve_linear_transport(cost, a, b);
  const double t = ggda::uniform01(rng);
  return t * vertex + (1 - t) * a * b.transpose();
}

TEST(FgwTensor, EnergyMatchesQuadrupleLoop) {
  ggda::Rng rng(5);
  const std::vector<std::pair<double, int>> exps{{1.0, 2}, {1.0, 1}, {2.0, 1}, {2.0, 2}, {1.5, 2}};
  for (auto [p, q] : exps) {
    for (int trial = 0; trial < 5; ++trial) {
      auto g1 = random_graph(3 + trial % 2, 2, 0.5, rng);
      auto g2 = random_graph(3, 2, 0.5, rng);
      ggda::FgwConfig cfg;
      cfg.alpha = ggda::uniform01(rng);
      cfg.p = p;
      cfg.q = q;
      const Matrix pi = random_coupling(g1.hist(), g2.hist(), rng);
      const double naive = oracle::fgw_energy_naive(g1.features(), g1.structure(), g2.features(),
                                                    g2.structure(), pi, cfg.alpha, p, q);
      const double got = ggda::evaluate_fgw_cost(g1, g2, {pi, g1.hist(), g2.hist()}, cfg);
      EXPECT_NEAR(got, std::pow(naive, 1.0 / p), 1e-10) << "p=" << p << " q=" << q;
      // Transpose symmetry of the functional.
      const double swapped =
          ggda::evaluate_fgw_cost(g2, g1, {pi.transpose(), g2.hist(), g1.hist()}, cfg);
      EXPECT_NEAR(got, swapped, 1e-9);
    }
  }
}

TEST(FgwTensor, ApplyTransposeIsAdjoint) {
  ggda::Rng rng(9);
  auto g1 = random_graph(5, 3, 0.4, rng);
  auto g2 = random_graph(4, 3, 0.4, rng);
  for (auto [p, q] : std::vector<std::pair<double, int>>{{1.0, 2}, {2.0, 1}}) {
    ggda::FgwConfig cfg;
    cfg.p = p;
    cfg.q = q;
    ggda::FgwTensor t(ggda::FgwInput::of(g1), ggda::FgwInput::of(g2), cfg);
    const Matrix u = Matrix::Random(5, 4), v = Matrix::Random(5, 4);
    EXPECT_NEAR((u.array() * t.apply(v).array()).sum(),
                (v.array() * t.apply_transpose(u).array()).sum(), 1e-10);
  }
}

TEST(Fgw, IdenticalGraphsDiagonalInit) {
  ggda::Rng rng(1);
  auto g = random_graph(12, 3, 0.3, rng);
  const Matrix diag = Matrix(g.hist().asDiagonal());
  auto res = ggda::fgw_distance(g, g, ggda::FgwConfig{}, ggda::Coupling{diag, g.hist(), g.hist()});
  EXPECT_LE(res.value, 1e-9);
}

TEST(Fgw, SingleNodeClosedForm) {
  Matrix a(1, 2), b(1, 2);
  a << 0, 0;
  b << 3, 4;
  AttributedGraph g1(a, {}, {}, 1), g2(b, {}, {}, 1);
  for (double alpha : {0.0, 0.3, 1.0})
    for (int q : {1, 2})
      for (double p : {1.0, 2.0}) {
        ggda::FgwConfig cfg;
        cfg.alpha = alpha;
        cfg.q = q;
        cfg.p = p;
        auto res = ggda::fgw_distance(g1, g2, cfg);
        // E = [(1-a) d^q]^p on a single pair, so the 1/p root undoes the power.
        EXPECT_NEAR(res.value, (1 - alpha) * std::pow(5.0, q), 1e-12);
      }
}

TEST(Fgw, TwoNodeGraphsMatchGridSearch) {
  ggda::Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    auto g1 = random_graph(2, 2, ggda::uniform01(rng), rng);
    auto g2 = random_graph(2, 2, ggda::uniform01(rng), rng);
    ggda::FgwConfig cfg;
    cfg.alpha = ggda::uniform01(rng);
    cfg.q = trial % 2 == 0 ? 2 : 1;
    cfg.p = trial % 3 == 0 ? 2.0 : 1.0;
    auto res = ggda::fgw_distance(g1, g2, cfg);
    // Pi(u, u) for uniform 2-point marginals is [[t, .5-t], [.5-t, t]].
    double best = 1e300, best_perm = 1e300;
    for (int s = 0; s <= 20000; ++s) {
      const double t = 0.5 * s / 20000.0;
      Matrix pi(2, 2);
      pi << t, 0.5 - t, 0.5 - t, t;
      const double e = std::pow(oracle::fgw_energy_naive(g1.features(), g1.structure(), g2.features(),
                                                         g2.structure(), pi, cfg.alpha, cfg.p, cfg.q),
                                1.0 / cfg.p);
      best = std::min(best, e);
      if (s == 0 || s == 20000) best_perm = std::min(best_perm, e);
    }
    EXPECT_LE(res.value, best_perm + 1e-12);
    EXPECT_NEAR(res.value, best, 1e-4);
  }
}

TEST(Fgw, MonotoneTraceAndConsistentValue) {
  ggda::Rng rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    auto g1 = random_graph(20 + trial, 3, 0.2, rng);
    auto g2 = random_graph(25, 3, 0.2, rng);
    ggda::FgwConfig cfg;
    cfg.alpha = 0.1 * trial;
    auto res = ggda::fgw_distance(g1, g2, cfg);
    for (std::size_t i = 1; i < res.trace.size(); ++i) EXPECT_LE(res.trace[i], res.trace[i - 1]);
    EXPECT_LT(ggda::marginal_error(res.coupling), 1e-8);
    EXPECT_NEAR(ggda::evaluate_fgw_cost(g1, g2, res.coupling, cfg), res.value, 1e-9);
    auto prod = ggda::product_coupling(g1.hist(), g2.hist());
    EXPECT_LE(res.value, ggda::evaluate_fgw_cost(g1, g2, prod, cfg) + 1e-12);
  }
}

TEST(Fgw, RejectsBadInit) {
  ggda::Rng rng(2);
  auto g1 = random_graph(3, 2, 0.5, rng), g2 = random_graph(3, 2, 0.5, rng);
  ggda::Coupling bad{Matrix::Constant(3, 3, 0.2), g1.hist(), g2.hist()};
  EXPECT_THROW(ggda::fgw_distance(g1, g2, ggda::FgwConfig{}, bad), ggda::InvalidArgument);
  EXPECT_THROW(ggda::evaluate_fgw_cost(g1, g2, bad, ggda::FgwConfig{}), ggda::InvalidArgument);
  ggda::FgwConfig cfg;
  cfg.q = 3;
  EXPECT_THROW(ggda::fgw_distance(g1, g2, cfg), ggda::InvalidArgument);
}

TEST(WpBound, RandomSmallInstancesHold) {
  ggda::Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(ggda::uniform_index(rng, 6));
    const int m = 1 + static_cast<int>(ggda::uniform_index(rng, 6));
    auto g1 = random_graph(n, 2, 0.5, rng, true);
    auto g2 = random_graph(m, 2, 0.5, rng, true);
    Matrix z1 = Matrix::Random(n, 2), z2 = Matrix::Random(m, 2);
    ggda::FgwConfig cfg;
    cfg.alpha = ggda::uniform01(rng);
    cfg.p = 1.0 + static_cast<double>(trial % 3);
    auto r = ggda::check_prop2(g1, z1, g2, z2, cfg);
    EXPECT_TRUE(r.holds) << "trial " << trial << " wp=" << r.wp << " fgw=" << r.fgw;
    EXPECT_LE(r.fgw, r.fgw_at_wp_coupling + 1e-12);
  }
}

TEST(WpBound, IdenticalAndSingleNode) {
  ggda::Rng rng(4);
  auto g = random_graph(5, 2, 0.5, rng, true);
  Matrix z = Matrix::Random(5, 2);
  auto same = ggda::check_prop2(g, z, g, z, ggda::FgwConfig{});
  EXPECT_NEAR(same.wp, 0.0, 1e-12);
  EXPECT_NEAR(same.fgw, 0.0, 1e-9);
  EXPECT_TRUE(same.holds);

  Matrix a(1, 1), b(1, 1);
  a << 0;
  b << 2;
  AttributedGraph s1(a, {}, {0}, 2), s2(b, {}, {1}, 2);
  Matrix z1(1, 1), z2(1, 1);
  z1 << 0;
  z2 << 1;
  ggda::FgwConfig cfg;
  cfg.alpha = 0.25;
  auto r = ggda::check_prop2(s1, z1, s2, z2, cfg);
  EXPECT_NEAR(r.wp, 0.75 * 2 + 0.25 * 1 + 1, 1e-12);
  EXPECT_NEAR(r.fgw, 0.75 * 2, 1e-12);
  EXPECT_TRUE(r.holds);
  EXPECT_THROW(ggda::check_prop2(g.without_labels(), z, g, z, cfg), ggda::InvalidArgument);
}

}  // namespace
