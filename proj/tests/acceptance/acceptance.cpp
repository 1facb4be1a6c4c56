// Acceptance suite: one PASS/FAIL line per criterion.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ggda/barycenter.hpp"
#include "ggda/fgw.hpp"
#include "ggda/gcn.hpp"
#include "ggda/generation.hpp"
#include "ggda/harness.hpp"
#include "ggda/ot.hpp"
#include "ggda/progression.hpp"
#include "ggda/rng.hpp"
#include "ggda/synth.hpp"
#include "support/graphs.hpp"
#include "support/oracles.hpp"

namespace {

using ggda::AttributedGraph;
using ggda::Matrix;
using ggda::Vector;
using testgraphs::random_graph;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Matrix random_matrix(int r, int c, ggda::Rng& rng) {
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = ggda::uniform01(rng);
  return m;
}

Vector random_hist(int n, ggda::Rng& rng) {
  Vector h(n);
  for (int i = 0; i < n; ++i) h[i] = 0.1 + ggda::uniform01(rng);
  return h / h.sum();
}

int random_size(ggda::Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(ggda::uniform_index(rng, static_cast<std::size_t>(hi - lo + 1)));
}

// Shared CSBM runs for criteria 1, 8, 9 and 10.
struct CsbmRuns {
  static constexpr int kSeeds = 5;
  std::map<ggda::Variant, std::vector<double>> accuracy;
  std::vector<double> ggda_seconds;
  ggda::AblationResult seed0_ggda;
  ggda::ExperimentConfig cfg;
  bool done = false;

  void ensure() {
    if (done) return;
    const std::vector<ggda::Variant> variants{ggda::Variant::source_only, ggda::Variant::direct_st,
                                              ggda::Variant::ggda, ggda::Variant::ggda_random_match};
    for (int seed = 0; seed < kSeeds; ++seed) {
      const auto sc = ggda::csbm_scenario(static_cast<std::uint64_t>(seed));
      ggda::ExperimentConfig c = cfg;
      c.seed = static_cast<std::uint64_t>(seed);
      for (auto v : variants) {
        auto r = ggda::run_ablation(sc, v, c);
        accuracy[v].push_back(r.report.accuracy);
        std::printf("  csbm seed %d %-18s accuracy %.3f stages %d (%.1fs generation, %.1fs adaptation)\n", seed,
                    ggda::variant_name(v).c_str(), r.report.accuracy, r.run.stage_count(), r.generation_seconds,
                    r.adaptation_seconds);
        std::fflush(stdout);
        if (v == ggda::Variant::ggda) {
          ggda_seconds.push_back(r.generation_seconds + r.adaptation_seconds);
          if (seed == 0) seed0_ggda = std::move(r);
        }
      }
    }
    done = true;
  }

  double med(ggda::Variant v) const { return median(accuracy.at(v)); }
};

CsbmRuns csbm_runs;

Outcome criterion1() {
  csbm_runs.ensure();
  const double g = csbm_runs.med(ggda::Variant::ggda), d = csbm_runs.med(ggda::Variant::direct_st);
  const double worst = *std::max_element(csbm_runs.ggda_seconds.begin(), csbm_runs.ggda_seconds.end());
  const bool pass = g >= 0.90 && g - d >= 0.30 && worst <= 300.0;
  return {pass, fmt("median GGDA %.3f (need >= 0.90), Direct-ST %.3f, gap %.3f (need >= 0.30), slowest run %.0fs "
                    "(need <= 300s)",
                    g, d, g - d, worst)};
}

Outcome criterion2() {
  ggda::Rng rng(2024);
  const double alphas[] = {0.25, 0.5, 0.75};
  int failures = 0;
  double worst_slack = -1e300;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = random_size(rng, 1, 6), m = random_size(rng, 1, 6);
    auto g1 = random_graph(n, 2, 0.5, rng, true, 3), g2 = random_graph(m, 2, 0.5, rng, true, 3);
    Matrix z1(n, 2), z2(m, 2);
    for (int i = 0; i < n; ++i) z1.row(i) << ggda::standard_normal(rng), ggda::standard_normal(rng);
    for (int i = 0; i < m; ++i) z2.row(i) << ggda::standard_normal(rng), ggda::standard_normal(rng);
    ggda::FgwConfig cfg;
    cfg.alpha = alphas[trial % 3];
    cfg.q = 1;
    const auto r = ggda::check_prop2(g1, z1, g2, z2, cfg);
    worst_slack = std::max(worst_slack, r.fgw / 2.0 - r.wp);
    if (!r.holds) ++failures;
  }
  return {failures == 0, fmt("%.0f of 200 instances violate fgw/2 <= wp + 1e-9; max fgw/2 - wp = %.3g", failures,
                             worst_slack)};
}

Outcome criterion3() {
  ggda::Rng rng(3);
  double worst_marginal = 0.0, worst_hungarian = 0.0;
  int uniform_square = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    if (trial % 2 == 0) {
      const int n = random_size(rng, 1, 40);
      const Matrix cost = random_matrix(n, n, rng);
      const Vector h = Vector::Constant(n, 1.0 / n);
      const auto r = ggda::wasserstein_exact(cost, h, h, 1.0);
      worst_marginal = std::max(worst_marginal, ggda::marginal_error(r.coupling));
      worst_hungarian = std::max(worst_hungarian, std::abs(r.value - oracle::assignment_cost(cost) / n));
      ++uniform_square;
    } else {
      const int n = random_size(rng, 1, 40), m = random_size(rng, 1, 40);
      const double p = 1.0 + static_cast<double>(trial % 3);
      const auto r = ggda::wasserstein_exact(random_matrix(n, m, rng), random_hist(n, rng), random_hist(m, rng), p);
      worst_marginal = std::max(worst_marginal, ggda::marginal_error(r.coupling));
    }
  }
  return {worst_marginal <= 1e-8 && worst_hungarian <= 1e-8,
          fmt("1000 solves, max marginal error %.2e; %.0f uniform square instances, max |value - hungarian| %.2e",
              worst_marginal, uniform_square, worst_hungarian)};
}

Outcome criterion4() {
  ggda::Rng rng(4);
  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto g1 = random_graph(random_size(rng, 2, 30), 3, 0.25, rng);
    auto g2 = random_graph(random_size(rng, 2, 30), 3, 0.25, rng);
    ggda::FgwConfig cfg;
    cfg.alpha = ggda::uniform01(rng);
    cfg.q = trial % 2 == 0 ? 2 : 1;
    cfg.p = 1.0 + static_cast<double>(trial % 3) * 0.5;
    const auto r = ggda::fgw_distance(g1, g2, cfg);
    for (std::size_t i = 1; i < r.trace.size(); ++i)
      if (r.trace[i] > r.trace[i - 1] + 1e-9) ++violations;
  }
  double worst_oracle = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    auto g1 = random_graph(random_size(rng, 1, 5), 2, 0.5, rng);
    auto g2 = random_graph(random_size(rng, 1, 5), 2, 0.5, rng);
    ggda::FgwConfig cfg;
    cfg.alpha = ggda::uniform01(rng);
    cfg.q = trial % 2 == 0 ? 2 : 1;
    cfg.p = 1.0 + static_cast<double>(trial % 3) * 0.5;
    const Matrix cost = random_matrix(g1.size(), g2.size(), rng);
    const Matrix vertex = ggda::solve_linear_transport(cost, g1.hist(), g2.hist());
    const double t = ggda::uniform01(rng);
    const Matrix pi = t * vertex + (1.0 - t) * g1.hist() * g2.hist().transpose();
    const double naive = std::pow(oracle::fgw_energy_naive(g1.features(), g1.structure(), g2.features(),
                                                           g2.structure(), pi, cfg.alpha, cfg.p, cfg.q),
                                  1.0 / cfg.p);
    const double got = ggda::evaluate_fgw_cost(g1, g2, {pi, g1.hist(), g2.hist()}, cfg);
    worst_oracle = std::max(worst_oracle, std::abs(got - naive));
  }
  return {violations == 0 && worst_oracle <= 1e-10,
          fmt("%.0f trace increases beyond 1e-9 over 100 solves; max |cost - naive| %.2e on 100 small instances",
              violations, worst_oracle)};
}

Outcome criterion5() {
  ggda::Rng rng(5);
  double worst_ratio = 0.0;
  int trace_violations = 0;
  for (int trial = 0; trial < 20; ++trial) {
    auto g1 = random_graph(random_size(rng, 6, 20), 3, 0.3, rng);
    auto g2 = random_graph(random_size(rng, 6, 20), 3, 0.3, rng);
    ggda::BarycenterConfig cfg;
    cfg.support_size = g1.size();
    cfg.weights = {1.0, 0.0};
    cfg.seed = static_cast<std::uint64_t>(trial);
    const auto res = ggda::frechet_mean(g1, g2, cfg);
    const double base = ggda::fgw_distance(g1, g2, cfg.fgw).value;
    const double got = ggda::fgw_distance(res.graph, g1, cfg.fgw).value;
    worst_ratio = std::max(worst_ratio, base > 0.0 ? got / base : got);
    for (std::size_t i = 1; i < res.trace.size(); ++i)
      if (res.trace[i] > res.trace[i - 1] + 1e-9) ++trace_violations;

    ggda::BarycenterConfig mixed = cfg;
    const double w = ggda::uniform01(rng);
    mixed.weights = {w, 1.0 - w};
    mixed.support_size = (g1.size() + g2.size()) / 2;
    const auto mres = ggda::frechet_mean(g1, g2, mixed);
    for (std::size_t i = 1; i < mres.trace.size(); ++i)
      if (mres.trace[i] > mres.trace[i - 1] + 1e-9) ++trace_violations;
  }
  return {worst_ratio <= 1e-3 && trace_violations == 0,
          fmt("max FGW(output, G1) / FGW(G1, G2) %.2e over 20 pairs (need <= 1e-3); %.0f trace increases over 40 runs",
              worst_ratio, trace_violations)};
}

Outcome criterion6() {
  ggda::Rng rng(6);
  auto a = random_graph(3, 3, 0.7, rng, true, 3), b = random_graph(3, 3, 0.7, rng);
  const ggda::GraphPool pool({a, b});
  const auto in = ggda::GcnInput::of(pool);
  auto params = ggda::ModelParams::glorot(3, 5, 3, 17);
  params.b1.setConstant(0.05);
  params.b2.setConstant(0.05);
  params.bc << 0.1, -0.2, 0.3;
  ggda::WeightedTargets t{{0, 1, 2, 4}, {a.labels()[0], a.labels()[1], a.labels()[2], 1}, Vector(4)};
  t.weights << 0.1, 0.4, 0.3, 0.2;
  const double wd = 1e-2;
  ggda::ModelParams grad;
  ggda::loss_and_gradient(in, params, t, wd, &grad);
  const Vector g = grad.flatten(), theta = params.flatten();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double h = 1e-5;
    ggda::ModelParams plus = params, minus = params;
    Vector tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    plus.assign(tp);
    minus.assign(tm);
    const double fd =
        (ggda::loss_and_gradient(in, plus, t, wd) - ggda::loss_and_gradient(in, minus, t, wd)) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - g[i]) / std::max({1e-6, std::abs(fd), std::abs(g[i])}));
  }
  return {worst <= 1e-4, fmt("max relative error %.2e over %.0f parameters", worst, static_cast<double>(theta.size()))};
}

Outcome criterion7() {
  auto s = ggda::csbm_source_config(7), t = ggda::csbm_target_config(7);
  s.nodes_per_class = t.nodes_per_class = 400;
  s.p_intra = t.p_intra = 0.025;
  s.p_inter = t.p_inter = 0.005;
  const auto gs = ggda::csbm_generate(s), gt = ggda::csbm_generate(t);
  std::map<int, double> secs;
  for (int parts : {8, 1}) {
    ggda::GenerationConfig cfg;
    cfg.K = 2;
    cfg.trials = 1;
    cfg.source_parts = cfg.target_parts = parts;
    cfg.barycenter.bcd_iters = 2;
    cfg.barycenter.fgw.max_iters = 10;
    const auto t0 = Clock::now();
    const auto seq = ggda::generate_sequence(gs, gt, cfg);
    secs[parts] = seconds_since(t0);
    if (seq.intermediates.empty()) return {false, "no intermediate generated"};
  }
  const double speedup = secs[1] / secs[8];
  return {speedup >= 5.0, fmt("n = %.0f, P=1 %.2fs, P=8 %.2fs, speedup %.1fx (need >= 5x)",
                              static_cast<double>(gs.size()), secs[1], secs[8], speedup)};
}

Outcome criterion8() {
  csbm_runs.ensure();
  const auto& res = csbm_runs.seed0_ggda;
  const ggda::GraphPool pool(res.pool_graphs);
  int weight_bad = 0, mask_bad = 0, cap_bad = 0, fraction_bad = 0;
  double prev_fraction = 0.0;
  std::vector<double> last_mask(static_cast<std::size_t>(pool.total_vertices()), 1.0);
  const int c = pool.n_classes();
  for (const auto& s : res.run.stages) {
    if (std::abs(s.next.weights.sum() - 1.0) > 1e-9) ++weight_bad;
    if (s.labeled_target_fraction < prev_fraction) ++fraction_bad;
    prev_fraction = s.labeled_target_fraction;
    std::vector<int> per_class(static_cast<std::size_t>(c), 0);
    for (int y : s.selected_labels) ++per_class[static_cast<std::size_t>(y)];
    for (int k = 0; k < c; ++k)
      if (per_class[static_cast<std::size_t>(k)] > s.caps[static_cast<std::size_t>(k)]) ++cap_bad;
    for (std::size_t i = 0; i < s.decayed_vertices.size(); ++i) {
      double& m = last_mask[static_cast<std::size_t>(s.decayed_vertices[i])];
      if (s.masks[i] > m + 1e-15) ++mask_bad;
      m = s.masks[i];
    }
  }

  // Eta = 0 against margin-only ordering with the trained model.
  const auto fwd = ggda::forward(pool, res.run.params);
  std::vector<int> labeled, unlabeled, predicted;
  std::vector<double> margins;
  for (int v = 0; v < pool.offset(pool.target_index()); ++v)
    if (pool.origin_graph(v) == pool.source_index()) labeled.push_back(v);
  for (int v = pool.offset(pool.target_index()); v < pool.total_vertices(); ++v) {
    const auto [margin, label] = ggda::margin_and_prediction(fwd.logits.row(v).transpose());
    unlabeled.push_back(v);
    margins.push_back(margin);
    predicted.push_back(label);
  }
  const auto scores = ggda::selection_scores(fwd.embeddings, margins, labeled, unlabeled, 0.0);
  auto order_by = [&](const std::vector<double>& key) {
    std::vector<int> idx(key.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int x, int y) { return key[x] > key[y]; });
    return idx;
  };
  bool order_equal = order_by(scores) == order_by(margins);
  std::vector<int> src_counts(static_cast<std::size_t>(c), 0);
  for (int y : pool.graph(pool.source_index()).labels()) ++src_counts[static_cast<std::size_t>(y)];
  for (double kappa : {0.05, 0.1, 0.4}) {
    const auto a = ggda::select_vertices(unlabeled, scores, predicted, kappa, src_counts);
    const auto b = ggda::select_vertices(unlabeled, margins, predicted, kappa, src_counts);
    order_equal = order_equal && a.vertices == b.vertices;
  }

  const bool pass = weight_bad + mask_bad + cap_bad + fraction_bad == 0 && order_equal;
  std::ostringstream os;
  os << res.run.stages.size() << " stages; weight-sum violations " << weight_bad << ", mask increases " << mask_bad
     << ", cap violations " << cap_bad << ", fraction decreases " << fraction_bad << "; eta=0 ordering "
     << (order_equal ? "equals" : "differs from") << " margin ordering";
  return {pass, os.str()};
}

Outcome criterion9() {
  csbm_runs.ensure();
  const ggda::GraphPool pool(csbm_runs.seed0_ggda.pool_graphs);
  ggda::ProgressionConfig cfg = csbm_runs.cfg.progression;
  cfg.train.seed = ggda::derive_seed(0, 2);
  cfg.track_distances = false;
  std::vector<int> stages;
  std::ostringstream os;
  for (double kappa : {0.05, 0.1, 0.2, 0.4}) {
    cfg.kappa = kappa;
    stages.push_back(ggda::run_ggda(pool, cfg).stage_count());
    os << "kappa " << kappa << " T=" << stages.back() << "; ";
  }
  const bool pass = std::is_sorted(stages.rbegin(), stages.rend());
  os << (pass ? "non-increasing" : "not monotone");
  return {pass, os.str()};
}

Outcome criterion10() {
  csbm_runs.ensure();
  using V = ggda::Variant;
  const double g = csbm_runs.med(V::ggda), r = csbm_runs.med(V::ggda_random_match), d = csbm_runs.med(V::direct_st),
               s = csbm_runs.med(V::source_only);
  const bool pass = g >= r && r >= d && d >= s && g - s >= 0.10;
  return {pass, fmt("medians GGDA %.3f, GGDA-R %.3f, Direct-ST %.3f, Source %.3f", g, r, d, s) +
                    fmt(" (GGDA - Source %.3f, need >= 0.10)", g - s)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  bool strict = false;
  app.add_option("--only", only, "criteria to run (default all)")->check(CLI::Range(1, 10));
  app.add_flag("--strict", strict, "exit 1 when any criterion fails");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9, criterion10};
  const std::set<int> selected(only.begin(), only.end());
  std::vector<std::string> lines;
  int failed = 0;
  for (int i = 1; i <= 10; ++i) {
    if (!selected.empty() && !selected.count(i)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(i - 1)]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    char head[64];
    std::snprintf(head, sizeof head, "criterion %2d %s (%.1fs): ", i, o.pass ? "PASS" : "FAIL", seconds_since(t0));
    lines.push_back(head + o.detail);
    std::printf("%s\n", lines.back().c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("\nsummary\n");
  for (const auto& l : lines) std::printf("%s\n", l.c_str());
  std::printf("%d of %zu criteria failed\n", failed, lines.size());
  return strict && failed > 0 ? 1 : 0;
}
