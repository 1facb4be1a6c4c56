#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ggda/graph.hpp"

namespace ggda {

/// Assignment of every vertex to one of `parts` non-empty parts.
struct Partition {
  std::vector<int> assignment;
  int parts = 0;
  std::vector<int> part_sizes;

  /// Vertices of part p in increasing order.
  std::vector<int> members(int p) const;
};

struct PartitionOptions {
  /// Allowed relative deviation of each part size from n / P.
  double imbalance = 0.25;
  int refinement_passes = 8;
  int initial_attempts = 4;
};

/// Diagnostics of one partition() call. Each refinement pass appends the
/// edge cut before and after it (at the level it ran on).
struct PartitionStats {
  int levels = 0;
  std::vector<std::pair<long long, long long>> refinement_cuts;
};

/// Inclusive size window [lo, hi] that every part must respect.
std::pair<int, int> balance_bounds(int n, int parts, double imbalance);

/// Multilevel edge-cut partitioning: heavy-edge-matching coarsening down to
/// max(2P, 64) vertices, greedy region growing for the initial P-way split,
/// then boundary refinement with positive-gain moves while uncoarsening.
/// Deterministic for a given (graph, parts, seed).
Partition partition(const AttributedGraph& graph, int parts, std::uint64_t seed,
                    const PartitionOptions& options = {}, PartitionStats* stats = nullptr);

long long edge_cut(std::span<const Edge> edges, std::span<const int> assignment);
long long edge_cut(const AttributedGraph& graph, const Partition& partition);

/// ceil(n / 500) clamped to [2, 64] and to n.
int default_part_count(int n);

/// Throws InvalidArgument unless every vertex is assigned to a part in
/// [0, parts) and no part is empty.
void validate_partition(const Partition& partition, int n);

}  // namespace ggda
