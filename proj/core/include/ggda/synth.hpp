#pragma once

#include <cstdint>
#include <vector>

#include "ggda/graph.hpp"

namespace ggda {

struct CsbmConfig {
  int nodes_per_class = 100;
  int n_classes = 3;
  std::vector<Vector> class_means;
  /// Per-coordinate variance of the class Gaussians.
  double variance = 0.5;
  double p_intra = 0.1;
  double p_inter = 0.02;
  /// Share of intra-class edges replaced by edges between the most
  /// feature-dissimilar unconnected same-class pairs.
  double dissimilar_rewire_frac = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CsbmStats {
  long long intra_edges = 0;
  long long inter_edges = 0;
  long long rewired = 0;
  /// Replacements that could not be made for lack of unconnected pairs.
  long long rewire_shortfall = 0;
};

/// Labeled contextual SBM graph; vertex v has class v / nodes_per_class.
AttributedGraph csbm_generate(const CsbmConfig& cfg, CsbmStats* stats = nullptr);

struct ShiftConfig {
  int steps = 5;
  /// Offset scale in units of the per-coordinate feature standard deviation.
  double noise_scale = 1.0;
  /// Explicit per-class offsets; drawn from the noise when empty.
  std::vector<Vector> class_offsets;
  std::uint64_t seed = 0;
};

/// steps + 1 graphs; graph s has features x + s * offset[y]. Index 0 is the
/// input itself.
std::vector<AttributedGraph> multistep_shift(const AttributedGraph& graph, const ShiftConfig& cfg);

/// The offsets multistep_shift applies per unit step.
std::vector<Vector> shift_offsets(const AttributedGraph& graph, const ShiftConfig& cfg);

struct Scenario {
  AttributedGraph source;
  AttributedGraph target;
};

/// Three-class CSBM pair: source means (0,-3), (0,0), (0,3); target means
/// shifted by +6 on the first coordinate with 25% dissimilar rewiring.
CsbmConfig csbm_source_config(std::uint64_t seed);
CsbmConfig csbm_target_config(std::uint64_t seed);
Scenario csbm_scenario(std::uint64_t seed);

}  // namespace ggda
