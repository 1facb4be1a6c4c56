#include "ggda/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "ggda/errors.hpp"
#include "ggda/rng.hpp"

namespace ggda {

void CsbmConfig::validate() const {
  if (nodes_per_class < 1 || n_classes < 1) throw InvalidArgument("csbm: empty class layout");
  if (static_cast<int>(class_means.size()) != n_classes) {
    throw InvalidArgument("csbm: need one mean per class");
  }
  for (const auto& m : class_means)
    if (m.size() != class_means.front().size() || m.size() == 0)
      throw InvalidArgument("csbm: class means must share a nonzero dimension");
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(p_intra) || !prob(p_inter) || !prob(dissimilar_rewire_frac)) {
    throw InvalidArgument("csbm: probabilities must lie in [0, 1]");
  }
  if (!(variance >= 0.0)) throw InvalidArgument("csbm: variance must be >= 0");
}

AttributedGraph csbm_generate(const CsbmConfig& cfg, CsbmStats* stats) {
  cfg.validate();
  const int n = cfg.nodes_per_class * cfg.n_classes;
  const int d = static_cast<int>(cfg.class_means.front().size());
  Rng rng(mix_seed(cfg.seed));
  std::vector<int> labels(static_cast<std::size_t>(n));
  Matrix X(n, d);
  const double sd = std::sqrt(cfg.variance);
  for (int v = 0; v < n; ++v) {
    const int c = v / cfg.nodes_per_class;
    labels[static_cast<std::size_t>(v)] = c;
    for (int j = 0; j < d; ++j) X(v, j) = cfg.class_means[static_cast<std::size_t>(c)][j] + sd * standard_normal(rng);
  }

  std::vector<Edge> intra, inter;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      const bool same = labels[static_cast<std::size_t>(u)] == labels[static_cast<std::size_t>(v)];
      if (uniform01(rng) < (same ? cfg.p_intra : cfg.p_inter)) (same ? intra : inter).push_back({u, v});
    }
  }

  CsbmStats st;
  const auto replace = static_cast<long long>(std::lround(cfg.dissimilar_rewire_frac * static_cast<double>(intra.size())));
  if (replace > 0) {
    std::set<std::pair<int, int>> present;
    for (const auto& e : intra) present.insert({e.u, e.v});
    struct Pair {
      double dist;
      int u, v;
    };
    std::vector<Pair> cands;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (labels[static_cast<std::size_t>(u)] == labels[static_cast<std::size_t>(v)] && !present.count({u, v}))
          cands.push_back({(X.row(u) - X.row(v)).squaredNorm(), u, v});
    const long long made = std::min<long long>(replace, static_cast<long long>(cands.size()));
    std::partial_sort(cands.begin(), cands.begin() + made, cands.end(), [](const Pair& a, const Pair& b) {
      if (a.dist != b.dist) return a.dist > b.dist;
      return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    shuffle(intra.begin(), intra.end(), rng);
    intra.resize(intra.size() - static_cast<std::size_t>(made));
    for (long long i = 0; i < made; ++i) intra.push_back({cands[static_cast<std::size_t>(i)].u, cands[static_cast<std::size_t>(i)].v});
    st.rewired = made;
    st.rewire_shortfall = replace - made;
  }
  st.intra_edges = static_cast<long long>(intra.size());
  st.inter_edges = static_cast<long long>(inter.size());
  if (stats != nullptr) *stats = st;

  std::vector<Edge> edges = std::move(intra);
  edges.insert(edges.end(), inter.begin(), inter.end());
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
  return AttributedGraph(std::move(X), std::move(edges), std::move(labels), cfg.n_classes);
}

std::vector<Vector> shift_offsets(const AttributedGraph& graph, const ShiftConfig& cfg) {
  if (cfg.steps < 1) throw InvalidArgument("shift: steps must be >= 1");
  if (!graph.fully_labeled()) throw InvalidArgument("shift: class-wise shifts need a fully labeled graph");
  const int C = graph.n_classes(), d = graph.dim();
  if (!cfg.class_offsets.empty()) {
    if (static_cast<int>(cfg.class_offsets.size()) != C) throw InvalidArgument("shift: need one offset per class");
    for (const auto& o : cfg.class_offsets)
      if (o.size() != d) throw InvalidArgument("shift: offset dimension mismatch");
    return cfg.class_offsets;
  }
  const Matrix& X = graph.features();
  const Vector mean = X.colwise().mean().transpose();
  Vector sd(d);
  for (int j = 0; j < d; ++j) {
    sd[j] = graph.size() > 1 ? std::sqrt((X.col(j).array() - mean[j]).square().sum() / (graph.size() - 1)) : 1.0;
  }
  Rng rng(mix_seed(cfg.seed));
  std::vector<Vector> out;
  for (int c = 0; c < C; ++c) {
    Vector o(d);
    for (int j = 0; j < d; ++j) o[j] = cfg.noise_scale * sd[j] * standard_normal(rng);
    out.push_back(o);
  }
  return out;
}

std::vector<AttributedGraph> multistep_shift(const AttributedGraph& graph, const ShiftConfig& cfg) {
  const auto offsets = shift_offsets(graph, cfg);
  std::vector<AttributedGraph> out{graph};
  for (int s = 1; s <= cfg.steps; ++s) {
    Matrix X = graph.features();
    for (int v = 0; v < graph.size(); ++v) X.row(v) += s * offsets[static_cast<std::size_t>(graph.labels()[static_cast<std::size_t>(v)])].transpose();
    out.push_back(graph.with_features(std::move(X)));
  }
  return out;
}

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

CsbmConfig csbm_source_config(std::uint64_t seed) {
  CsbmConfig c;
  c.class_means = {vec2(0, -3), vec2(0, 0), vec2(0, 3)};
  c.seed = derive_seed(seed, 1);
  return c;
}

CsbmConfig csbm_target_config(std::uint64_t seed) {
  CsbmConfig c;
  c.class_means = {vec2(6, -3), vec2(6, 0), vec2(6, 3)};
  c.dissimilar_rewire_frac = 0.25;
  c.seed = derive_seed(seed, 2);
  return c;
}

Scenario csbm_scenario(std::uint64_t seed) {
  return {csbm_generate(csbm_source_config(seed)), csbm_generate(csbm_target_config(seed))};
}

}  // namespace ggda
