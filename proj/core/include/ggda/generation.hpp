#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ggda/barycenter.hpp"
#include "ggda/fgw.hpp"
#include "ggda/graph.hpp"
#include "ggda/partition.hpp"

namespace ggda {

/// Floor of every normalized loss component.
inline constexpr double kLossFloor = 1e-3;

/// F[j, c] = sum_i 1{y_i = c} pi[i, j] / sum_i pi[i, j]: class distribution
/// each target vertex receives through the column-normalized plan.
Matrix pushforward_class_matrix(const Matrix& coupling, const std::vector<int>& src_labels,
                                int n_classes);

/// Mean natural-log entropy of the rows of F (0 log 0 = 0).
double avg_entropy(const Matrix& F);

/// Natural-log entropy of the class histogram of `labels`.
double label_entropy(const std::vector<int>& labels, int n_classes);

/// Raw ingredients of the information loss of one partition pair.
struct LossComponents {
  double h_pair = 0.0;
  double h_src = 0.0;
  double fgw = 0.0;
};

/// Min-max ranges of the pair entropy and the FGW term over a candidate set.
/// Source entropy is scaled by log(n_classes) instead.
class NormContext {
 public:
  NormContext() = default;
  NormContext(std::span<const LossComponents> candidates, int n_classes);

  bool empty() const { return !fitted_; }
  double scale_entropy(double h) const;
  double scale_source_entropy(double h) const;
  double scale_fgw(double f) const;

 private:
  static double scale(double v, double lo, double hi);

  bool fitted_ = false;
  double h_lo_ = 0.0, h_hi_ = 0.0;
  double f_lo_ = 0.0, f_hi_ = 0.0;
  double log_classes_ = 1.0;
};

/// (H / H^S) * FGW on normalized components; values below the fitted range
/// clamp to kLossFloor. Throws InvalidArgument on an empty context.
double information_loss(const LossComponents& c, const NormContext& ctx);

/// (1/s) / (1/s + 1/other): share of a pair with loss s against a rival loss.
double keep_share(double s_loss, double other_loss);

/// keep_share against the median loss of the other target partitions,
/// clamped to [0.5, 0.99].
double keep_probability(double s_loss, std::span<const double> other_losses);

struct MatchState {
  /// matching[t]: source partition paired with target partition t.
  std::vector<int> matching;
  std::vector<double> s_loss;
  /// Class entropy of every source partition.
  std::vector<double> h_src;
  NormContext norm;
  /// All source x target FGW values from the warm-up, row-major P_S x P_T.
  std::vector<double> pair_fgw;
};

/// Warm-up: FGW between every source and target partition, then per target
/// partition the S_loss argmin over `trials` random source partitions plus
/// the FGW-nearest one. Source partitions must be fully labeled.
MatchState warmup_matching(const std::vector<AttributedGraph>& src_parts,
                           const std::vector<AttributedGraph>& tgt_parts, int trials,
                           const FgwConfig& cfg, std::uint64_t seed);

struct GenerationConfig {
  int K = 8;
  /// 0 selects default_part_count.
  int source_parts = 0;
  int target_parts = 0;
  int trials = 4;
  BarycenterConfig barycenter;
  /// Freeze a random matching instead of the entropy-guided one.
  bool random_matching = false;
  PartitionOptions partition;
  std::uint64_t seed = 0;
};

struct SubgraphProvenance {
  int k = 0;
  int draw = 0;
  int source_part = 0;
  int target_part = 0;
  bool kept_match = false;
  int offset = 0;
  int size = 0;
  double s_loss = 0.0;
  double fgw_source = 0.0;
  double fgw_target = 0.0;
};

struct GeneratedSequence {
  /// K-1 unlabeled intermediate graphs.
  std::vector<AttributedGraph> intermediates;
  std::vector<SubgraphProvenance> provenance;
  Partition source_partition;
  Partition target_partition;
  MatchState state;
  /// best_s_loss[k-1][t]: recorded best loss of target partition t after k.
  std::vector<std::vector<double>> best_s_loss;
};

/// Partitions both graphs, runs the warm-up, then builds each intermediate k
/// from P_T interpolations between sampled target partitions and their
/// matched source partitions, refining the matching as losses improve.
GeneratedSequence generate_sequence(const AttributedGraph& src, const AttributedGraph& tgt,
                                    const GenerationConfig& cfg);

/// Disjoint union of parts as one unlabeled graph with a uniform histogram.
AttributedGraph assemble_union(const std::vector<AttributedGraph>& parts);

}  // namespace ggda
