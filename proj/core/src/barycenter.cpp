#include "ggda/barycenter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ggda/errors.hpp"
#include "ggda/rng.hpp"

namespace ggda {

void BarycenterConfig::validate() const {
  if (support_size < 1) throw InvalidArgument("barycenter: support_size must be >= 1");
  if (weights[0] < 0.0 || weights[1] < 0.0 || std::abs(weights[0] + weights[1] - 1.0) > 1e-12) {
    throw InvalidArgument("barycenter: weights must be nonnegative and sum to 1");
  }
  if (bcd_iters < 1) throw InvalidArgument("barycenter: bcd_iters must be >= 1");
  fgw.validate();
  if (fgw.q != 2) throw InvalidArgument("barycenter: closed-form updates need q = 2");
}

namespace {

double offdiag_mean(const Matrix& c) {
  const auto n = c.rows();
  if (n < 2) return 0.0;
  return (c.sum() - c.trace()) / static_cast<double>(n * (n - 1));
}

double edge_density(const AttributedGraph& g) {
  const double n = g.size();
  if (n < 2) return 0.0;
  return 2.0 * static_cast<double>(g.edges().size()) / (n * (n - 1));
}

// `count` indices from [0, n), without repetition as long as possible; indices
// listed in `avoid` are used last.
std::vector<int> draw_indices(int n, int count, const std::vector<int>& avoid, Rng& rng) {
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  for (int v : avoid)
    if (v < n) taken[static_cast<std::size_t>(v)] = 1;
  std::vector<int> fresh, used;
  for (int v = 0; v < n; ++v) (taken[static_cast<std::size_t>(v)] ? used : fresh).push_back(v);
  shuffle(fresh.begin(), fresh.end(), rng);
  shuffle(used.begin(), used.end(), rng);
  std::vector<int> order = fresh;
  order.insert(order.end(), used.begin(), used.end());
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(order[static_cast<std::size_t>(i % n)]);
  return out;
}

}  // namespace

std::vector<Edge> threshold_edges(const Matrix& structure, std::size_t edge_count) {
  const int n = static_cast<int>(structure.rows());
  struct Entry {
    double value;
    int u, v;
  };
  std::vector<Entry> entries;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (structure(u, v) > 0.0) entries.push_back({structure(u, v), u, v});
  edge_count = std::min(edge_count, entries.size());
  auto before = [](const Entry& a, const Entry& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  };
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(edge_count),
                    entries.end(), before);
  std::vector<Edge> edges;
  edges.reserve(edge_count);
  for (std::size_t e = 0; e < edge_count; ++e) edges.push_back({entries[e].u, entries[e].v});
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
  return edges;
}

BarycenterResult frechet_mean(const AttributedGraph& g1, const AttributedGraph& g2,
                              const BarycenterConfig& cfg) {
  cfg.validate();
  if (g1.dim() != g2.dim()) throw InvalidArgument("barycenter: feature dimensions differ");
  const std::array<const AttributedGraph*, 2> in{&g1, &g2};
  const std::array<double, 2> lam = cfg.weights;
  const int S = cfg.support_size;
  Rng rng(mix_seed(cfg.seed));

  // Stratified initialization from the weighted mixture of input vertices.
  const int from1 = std::clamp(static_cast<int>(std::lround(lam[0] * S)), 0, S);
  std::vector<int> pick1 = draw_indices(g1.size(), from1, {}, rng);
  std::vector<int> pick2 = draw_indices(g2.size(), S - from1, pick1, rng);
  std::vector<std::pair<int, int>> origin;
  for (int v : pick1) origin.emplace_back(0, v);
  for (int v : pick2) origin.emplace_back(1, v);

  Matrix X(S, g1.dim());
  Matrix C = Matrix::Zero(S, S);
  const double cross = lam[0] * offdiag_mean(g1.structure()) + lam[1] * offdiag_mean(g2.structure());
  for (int a = 0; a < S; ++a) {
    X.row(a) = in[origin[a].first]->features().row(origin[a].second);
    for (int b = 0; b < S; ++b) {
      if (a == b) continue;
      C(a, b) = origin[a].first == origin[b].first
                    ? in[origin[a].first]->structure()(origin[a].second, origin[b].second)
                    : cross;
    }
  }
  const Vector h = Vector::Constant(S, 1.0 / S);

  std::array<Matrix, 2> pi;
  for (int s = 0; s < 2; ++s) {
    Matrix cost(S, in[s]->size());
    for (int a = 0; a < S; ++a)
      for (int j = 0; j < in[s]->size(); ++j)
        cost(a, j) = (X.row(a) - in[s]->features().row(j)).squaredNorm();
    pi[s] = solve_linear_transport(cost, h, in[s]->hist());
  }

  BarycenterResult out;
  for (int it = 0; it < cfg.bcd_iters; ++it) {
    for (int s = 0; s < 2; ++s) {
      const FgwInput bary{X, C, h};
      pi[s] = fgw_distance(bary, FgwInput::of(*in[s]), cfg.fgw, &pi[s]).coupling.pi;
    }
    Matrix Xn = Matrix::Zero(S, g1.dim());
    Matrix Cn = Matrix::Zero(S, S);
    for (int s = 0; s < 2; ++s) {
      if (lam[s] == 0.0) continue;
      Xn.noalias() += lam[s] * pi[s] * in[s]->features();
      Cn.noalias() += lam[s] * pi[s] * in[s]->structure() * pi[s].transpose();
    }
    X = Xn.array().colwise() / h.array();
    C = Cn.array() / (h * h.transpose()).array();
    C = (0.5 * (C + C.transpose())).eval();
    C.diagonal().setZero();
    C = C.cwiseMax(0.0);

    double obj = 0.0;
    for (int s = 0; s < 2; ++s) {
      if (lam[s] == 0.0) continue;
      FgwTensor t(FgwInput{X, C, h}, FgwInput::of(*in[s]), cfg.fgw);
      obj += lam[s] * t.energy(pi[s]);
    }
    if (!out.trace.empty()) {
      const double prev = out.trace.back();
      if (obj > prev + 1e-7 * std::max(1.0, std::abs(prev))) {
        throw NumericalError("barycenter: objective increased from " + std::to_string(prev) +
                             " to " + std::to_string(obj));
      }
      out.trace.push_back(obj);
      if (prev - obj <= 1e-9 * std::max(1.0, std::abs(prev))) break;
    } else {
      out.trace.push_back(obj);
    }
  }

  for (int s = 0; s < 2; ++s) {
    auto res = fgw_distance(FgwInput{X, C, h}, FgwInput::of(*in[s]), cfg.fgw, &pi[s]);
    out.couplings[s] = std::move(res.coupling.pi);
    out.fgw[s] = res.value;
  }

  const double density = lam[0] * edge_density(g1) + lam[1] * edge_density(g2);
  const auto edge_count =
      static_cast<std::size_t>(std::lround(density * S * (S - 1) / 2.0));
  auto edges = threshold_edges(C, edge_count);
  out.graph = AttributedGraph(std::move(X), std::move(edges), std::move(C), h, {},
                              std::max(g1.n_classes(), g2.n_classes()));
  return out;
}

int interpolated_support_size(int n_src, int n_tgt, int k, int K) {
  const double t = static_cast<double>(k) / K;
  return std::max(1, static_cast<int>(std::lround((1.0 - t) * n_src + t * n_tgt)));
}

Interpolation interpolate_pair(const AttributedGraph& src, const AttributedGraph& tgt, int k, int K,
                               const BarycenterConfig& cfg) {
  if (K < 2 || k < 1 || k > K - 1) {
    throw InvalidArgument("interpolate_pair: need 1 <= k <= K-1, got k=" + std::to_string(k) +
                          " K=" + std::to_string(K));
  }
  BarycenterConfig c = cfg;
  c.weights = {static_cast<double>(K - k) / K, static_cast<double>(k) / K};
  c.support_size = interpolated_support_size(src.size(), tgt.size(), k, K);
  auto bary = frechet_mean(src, tgt, c);
  Interpolation out{std::move(bary.graph), bary.couplings[0].transpose(), bary.fgw[0], bary.fgw[1],
                    std::move(bary.trace)};
  return out;
}

}  // namespace ggda
