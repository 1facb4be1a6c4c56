#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "ggda/errors.hpp"
#include "ggda/harness.hpp"
#include "ggda/rng.hpp"

namespace {

using ggda::Matrix;

// Confusion-matrix metrics computed independently of the library.
struct NaiveMetrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

NaiveMetrics naive_metrics(const std::vector<int>& pred, const std::vector<int>& truth) {
  const int c = 1 + std::max(*std::max_element(pred.begin(), pred.end()), *std::max_element(truth.begin(), truth.end()));
  std::vector<std::vector<int>> cm(c, std::vector<int>(c, 0));
  for (std::size_t i = 0; i < pred.size(); ++i) ++cm[truth[i]][pred[i]];
  NaiveMetrics m;
  int correct = 0, present = 0;
  double f1_sum = 0.0;
  for (int k = 0; k < c; ++k) {
    correct += cm[k][k];
    int row = 0, col = 0;
    for (int j = 0; j < c; ++j) {
      row += cm[k][j];
      col += cm[j][k];
    }
    if (row == 0 && col == 0) continue;
    ++present;
    const double denom = row + col;
    f1_sum += denom > 0 ? 2.0 * cm[k][k] / denom : 0.0;
  }
  m.accuracy = static_cast<double>(correct) / pred.size();
  m.macro_f1 = f1_sum / present;
  return m;
}

TEST(Metrics, PerfectPredictions) {
  std::vector<int> y{0, 1, 2, 2, 1, 0};
  auto r = ggda::classification_metrics(y, y);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(r.micro_f1, 1.0);
  EXPECT_DOUBLE_EQ(r.macro_f1, 1.0);
  ASSERT_EQ(r.per_class.size(), 3u);
  for (const auto& c : r.per_class) EXPECT_EQ(c.support, 2);
}

TEST(Metrics, SingleClassPredictor) {
  std::vector<int> truth{0, 0, 1, 1}, pred{0, 0, 0, 0};
  auto r = ggda::classification_metrics(pred, truth);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.5);
  EXPECT_NEAR(r.macro_f1, (2.0 / 3.0 + 0.0) / 2.0, 1e-12);
}

TEST(Metrics, MatchesConfusionMatrixOracle) {
  ggda::Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 5 + static_cast<int>(ggda::uniform_index(rng, 40));
    std::vector<int> truth(n), pred(n);
    for (int i = 0; i < n; ++i) {
      truth[i] = static_cast<int>(ggda::uniform_index(rng, 4));
      pred[i] = static_cast<int>(ggda::uniform_index(rng, 4));
    }
    auto r = ggda::classification_metrics(pred, truth);
    auto o = naive_metrics(pred, truth);
    EXPECT_NEAR(r.accuracy, o.accuracy, 1e-12);
    EXPECT_NEAR(r.micro_f1, r.accuracy, 1e-12);
    EXPECT_NEAR(r.macro_f1, o.macro_f1, 1e-12);
  }
}

TEST(Metrics, SubsetAndLengthMismatch) {
  std::vector<int> truth{0, 1, 0, 1}, pred{0, 0, 0, 1};
  std::vector<int> subset{0, 3};
  EXPECT_DOUBLE_EQ(ggda::classification_metrics(pred, truth, subset).accuracy, 1.0);
  std::vector<int> shorter{0, 1};
  EXPECT_THROW(ggda::classification_metrics(shorter, truth), ggda::InvalidArgument);
}

TEST(Split, DeterministicDisjointExhaustive) {
  auto a = ggda::make_split(101, 3), b = ggda::make_split(101, 3), c = ggda::make_split(101, 4);
  EXPECT_EQ(a.validation, b.validation);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(a.test, c.test);
  std::set<int> all(a.validation.begin(), a.validation.end());
  for (int i : a.test) EXPECT_TRUE(all.insert(i).second);
  EXPECT_EQ(all.size(), 101u);
  EXPECT_EQ(*all.begin(), 0);
  EXPECT_EQ(*all.rbegin(), 100);
  EXPECT_NEAR(static_cast<double>(a.validation.size()) / 101.0, 0.2, 0.01);
  EXPECT_THROW(ggda::make_split(10, 0, 1.0), ggda::InvalidArgument);
}

TEST(Config, ParseApplyAndResolve) {
  std::istringstream in("# comment\nK = 5\n eta=2.5  # trailing\n\nwarm_start = true\n");
  auto kv = ggda::parse_config(in);
  ASSERT_EQ(kv.size(), 3u);
  ggda::ExperimentConfig cfg;
  ggda::apply_config(kv, cfg);
  EXPECT_EQ(cfg.generation.K, 5);
  EXPECT_DOUBLE_EQ(cfg.progression.eta, 2.5);
  EXPECT_TRUE(cfg.progression.train.warm_start);
  const std::string text = ggda::resolved_config(cfg);
  EXPECT_NE(text.find("K = 5"), std::string::npos);

  ggda::ExperimentConfig round;
  std::istringstream again(text);
  ggda::apply_config(ggda::parse_config(again), round);
  EXPECT_EQ(ggda::resolved_config(round), text);
  EXPECT_EQ(ggda::config_fingerprint(round), ggda::config_fingerprint(cfg));
  EXPECT_NE(ggda::config_fingerprint(cfg), ggda::config_fingerprint(ggda::ExperimentConfig{}));
}

TEST(Config, Errors) {
  ggda::ExperimentConfig cfg;
  EXPECT_THROW(ggda::apply_config({{"no_such_key", "1"}}, cfg), ggda::InvalidArgument);
  EXPECT_THROW(ggda::apply_config({{"K", "five"}}, cfg), ggda::InvalidArgument);
  EXPECT_THROW(ggda::apply_config({{"warm_start", "maybe"}}, cfg), ggda::InvalidArgument);
  std::istringstream bad("K = 3\njust text\n");
  try {
    ggda::parse_config(bad);
    FAIL();
  } catch (const ggda::DataError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("2:", 0), 0u);
  }
}

TEST(Variants, NamesRoundTrip) {
  for (auto v : ggda::all_variants()) EXPECT_EQ(ggda::parse_variant(ggda::variant_name(v)), v);
  EXPECT_EQ(ggda::all_variants().size(), 5u);
  EXPECT_THROW(ggda::parse_variant("ggda_plus"), ggda::InvalidArgument);
}

TEST(Plots, KappaBetaSweepRows) {
  ggda::PlotInput in;
  for (double k : {0.1, 0.2})
    for (double b : {1.0, 5.0}) in.sweep.push_back({{{"kappa", k}, {"beta", b}}, "ggda", 0.5, 0.4, 3});
  auto t = ggda::plot_table(ggda::PlotKind::kappa_beta_sweep, in);
  EXPECT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.header.front(), "kappa");
  in.sweep.push_back({{{"kappa", 0.1}}, "ggda", 0.5, 0.4, 3});
  EXPECT_THROW(ggda::plot_table(ggda::PlotKind::kappa_beta_sweep, in), ggda::InvalidArgument);
}

TEST(Plots, DomainProgressNormalized) {
  std::vector<ggda::StageLog> stages(3);
  const double d[] = {4.0, 2.0, 1.0};
  for (int i = 0; i < 3; ++i) {
    stages[i].stage = i;
    stages[i].target_distance = d[i];
  }
  ggda::PlotInput in;
  in.stages = &stages;
  auto t = ggda::plot_table(ggda::PlotKind::domain_progress, in);
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_DOUBLE_EQ(std::stod(t.rows[0][2]), 1.0);
  EXPECT_DOUBLE_EQ(std::stod(t.rows[1][2]), 0.5);
  EXPECT_DOUBLE_EQ(std::stod(t.rows[3][1]), 0.0);
  EXPECT_DOUBLE_EQ(std::stod(t.rows[3][2]), 0.0);
  stages[1].target_distance = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(ggda::plot_table(ggda::PlotKind::domain_progress, in), ggda::InvalidArgument);
}

TEST(Plots, UnknownKindAndMissingInput) {
  EXPECT_THROW(ggda::parse_plot_kind("scatter"), ggda::InvalidArgument);
  EXPECT_EQ(ggda::parse_plot_kind("decay_heatmap"), ggda::PlotKind::decay_heatmap);
  EXPECT_THROW(ggda::plot_table(ggda::PlotKind::decay_heatmap, {}), ggda::InvalidArgument);
}

ggda::AttributedGraph two_blobs(int per_class, double shift, std::uint64_t seed) {
  ggda::Rng rng(seed);
  Matrix x(2 * per_class, 2);
  std::vector<int> y;
  std::vector<ggda::Edge> edges;
  for (int i = 0; i < 2 * per_class; ++i) {
    const int c = i / per_class;
    y.push_back(c);
    x(i, 0) = shift + 0.3 * ggda::standard_normal(rng);
    x(i, 1) = (c == 0 ? -2.0 : 2.0) + 0.3 * ggda::standard_normal(rng);
    if (i % per_class != 0) edges.push_back({i - 1, i});
  }
  return ggda::AttributedGraph(x, edges, y, 2);
}

TEST(Plots, DecayHeatmapFromRun) {
  auto pool = ggda::build_pool(two_blobs(12, 0.0, 1), {two_blobs(12, 1.0, 2)}, two_blobs(12, 2.0, 3));
  ggda::ProgressionConfig cfg;
  cfg.train.epochs = 40;
  cfg.train.hidden = 8;
  auto res = ggda::run_ggda(pool, cfg);
  ggda::PlotInput in;
  in.pool = &pool;
  in.stages = &res.stages;
  auto t = ggda::plot_table(ggda::PlotKind::decay_heatmap, in);
  EXPECT_EQ(t.rows.size(), res.stages.size() * 3);
  std::map<std::string, double> per_stage;
  for (const auto& row : t.rows) per_stage[row[0]] += std::stod(row[2]);
  for (const auto& [stage, sum] : per_stage) EXPECT_LE(sum, 1.0 + 1e-6) << stage;
  EXPECT_EQ(t.rows[0][1], "source");
  EXPECT_EQ(t.rows[1][1], "intermediate_1");
  EXPECT_EQ(t.rows[2][1], "target");

  const auto dir = std::filesystem::temp_directory_path() / "ggda_plot_test";
  std::filesystem::create_directories(dir);
  const auto path = ggda::emit_plot_data(ggda::PlotKind::decay_heatmap, in, dir);
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  EXPECT_EQ(header, "stage,vertex_set,weight_sum");
  std::filesystem::remove_all(dir);
}

TEST(Pool, TargetLabelsHidden) {
  auto pool = ggda::build_pool(two_blobs(5, 0.0, 1), {}, two_blobs(5, 1.0, 2));
  EXPECT_EQ(pool.graph_count(), 2u);
  EXPECT_FALSE(pool.graph(1).has_label(0));
  EXPECT_TRUE(pool.graph(0).fully_labeled());
}

TEST(Ablation, DirectStConfig) {
  ggda::ProgressionConfig base;
  auto c = ggda::direct_st_config(base, 30, 40);
  EXPECT_DOUBLE_EQ(c.beta, 0.0);
  EXPECT_EQ(c.cap_k, 70);
}

}  // namespace
