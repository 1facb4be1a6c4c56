#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ggda/fgw.hpp"
#include "ggda/graph.hpp"

namespace ggda {

struct BarycenterConfig {
  int support_size = 1;
  std::array<double, 2> weights{0.5, 0.5};
  int bcd_iters = 10;
  FgwConfig fgw;
  std::uint64_t seed = 0;

  void validate() const;
};

struct BarycenterResult {
  /// Unlabeled graph with uniform histogram. Its structure() is the
  /// continuous barycenter C; edges() are the thresholded realization.
  AttributedGraph graph;
  /// couplings[s] is support_size x |G_s|, final plan to input s.
  std::array<Matrix, 2> couplings;
  /// Final FGW value to each input.
  std::array<double, 2> fgw{0.0, 0.0};
  /// Weighted objective sum_s w_s E_s after every outer iteration.
  std::vector<double> trace;
};

/// Weighted FGW Frechet mean of two graphs by block coordinate descent:
/// alternate FGW solves to each input with closed-form feature and structure
/// updates. Requires q = 2.
BarycenterResult frechet_mean(const AttributedGraph& g1, const AttributedGraph& g2,
                              const BarycenterConfig& cfg);

/// round(((K-k)/K) n_src + (k/K) n_tgt), at least 1.
int interpolated_support_size(int n_src, int n_tgt, int k, int K);

struct Interpolation {
  AttributedGraph graph;
  /// |src| x support_size plan between the source part and the intermediate.
  Matrix source_coupling;
  double fgw_source = 0.0;
  double fgw_target = 0.0;
  std::vector<double> trace;
};

/// Intermediate k of K between two graphs: frechet_mean with weights
/// ((K-k)/K, k/K) and the interpolated support size. cfg.support_size and
/// cfg.weights are ignored.
Interpolation interpolate_pair(const AttributedGraph& src, const AttributedGraph& tgt, int k, int K,
                               const BarycenterConfig& cfg);

/// Keeps the `edge_count` largest strictly positive upper-triangular entries
/// of a symmetric matrix as edges (ties by lower index pair).
std::vector<Edge> threshold_edges(const Matrix& structure, std::size_t edge_count);

}  // namespace ggda
