#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "ggda/types.hpp"

namespace ggda {

struct Edge {
  int u = 0;
  int v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

enum class StructureMode { adjacency, shortest_path };
enum class HistogramMode { uniform, degree };

/// Pairwise intra-graph structure matrix C.
///
/// adjacency: C[i,j] = 1 iff {i,j} is an edge.
/// shortest_path: hop distance; unreachable pairs get (largest finite hop
/// distance + 1) so that C stays finite.
Matrix build_structure_matrix(int n, std::span<const Edge> edges, StructureMode mode);

/// Vertex histogram h in the simplex. Degree mode requires at least one edge.
Vector make_histogram(int n, std::span<const Edge> edges, HistogramMode mode);

/// An undirected attributed graph seen as the discrete measure
/// sum_i h_i delta_(x_i, a_i, y_i).
///
/// Immutable after construction. The structure matrix is materialized on first
/// access (it is O(n^2) and many graphs, e.g. pool members, never need it);
/// copies share the cached matrix.
class AttributedGraph {
 public:
  AttributedGraph();

  /// Builds structure and histogram from the edge list. `labels` may be empty
  /// (all unlabeled); otherwise it must have one entry per vertex, each either
  /// kUnlabeled or a class id in [0, n_classes).
  AttributedGraph(Matrix features, std::vector<Edge> edges, std::vector<int> labels,
                  int n_classes, StructureMode structure_mode = StructureMode::adjacency,
                  HistogramMode hist_mode = HistogramMode::uniform);

  /// Explicit structure and histogram, e.g. the continuous structure of a
  /// generated barycenter that is kept next to its thresholded edge list.
  AttributedGraph(Matrix features, std::vector<Edge> edges, Matrix structure, Vector hist,
                  std::vector<int> labels, int n_classes);

  int size() const { return static_cast<int>(features_.rows()); }
  int dim() const { return static_cast<int>(features_.cols()); }
  int n_classes() const { return n_classes_; }

  const Matrix& features() const { return features_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Vector& hist() const { return hist_; }
  const std::vector<int>& labels() const { return labels_; }
  const Matrix& structure() const;
  StructureMode structure_mode() const { return structure_mode_; }

  bool fully_labeled() const;
  bool has_label(int v) const { return labels_[static_cast<std::size_t>(v)] != kUnlabeled; }
  std::vector<int> degrees() const;
  std::vector<std::vector<int>> adjacency_lists() const;

  AttributedGraph with_features(Matrix features) const;
  AttributedGraph with_labels(std::vector<int> labels, int n_classes) const;
  AttributedGraph with_histogram(HistogramMode mode) const;
  AttributedGraph without_labels() const;

 private:
  struct StructureCache;

  Matrix features_;
  std::vector<Edge> edges_;
  Vector hist_;
  std::vector<int> labels_;
  int n_classes_ = 0;
  StructureMode structure_mode_ = StructureMode::adjacency;
  std::shared_ptr<StructureCache> structure_;
};

/// Subgraph induced by `vertices` (in the given order). Structure is rebuilt
/// with the parent's structure mode; the histogram is uniform over the subset.
AttributedGraph induced_subgraph(const AttributedGraph& graph, std::span<const int> vertices);

/// Disjoint union of graphs under contiguous global vertex ids.
/// Index 0 is the source graph, the last index the target graph, anything in
/// between an intermediate.
class GraphPool {
 public:
  explicit GraphPool(std::vector<AttributedGraph> graphs);

  std::size_t graph_count() const { return graphs_.size(); }
  const AttributedGraph& graph(std::size_t g) const { return graphs_.at(g); }
  std::size_t source_index() const { return 0; }
  std::size_t target_index() const { return graphs_.size() - 1; }

  int total_vertices() const { return offsets_.back(); }
  int offset(std::size_t g) const { return offsets_.at(g); }
  int global_id(std::size_t g, int local) const;
  std::pair<std::size_t, int> origin(int global) const;
  std::size_t origin_graph(int global) const { return origin(global).first; }

  const std::vector<Edge>& union_edges() const { return union_edges_; }
  const Matrix& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }
  int dim() const { return static_cast<int>(features_.cols()); }
  int n_classes() const { return n_classes_; }

  /// Rebuilds graph g from the union arrays (the inverse of the union).
  AttributedGraph extract(std::size_t g) const;

 private:
  std::vector<AttributedGraph> graphs_;
  std::vector<int> offsets_;
  std::vector<Edge> union_edges_;
  Matrix features_;
  Vector hist_;
  std::vector<int> labels_;
  int n_classes_ = 0;
};

/// Validating factory for GraphPool; throws InvalidArgument naming the first
/// graph whose feature dimension differs from graph 0.
GraphPool disjoint_union(std::vector<AttributedGraph> graphs);

}  // namespace ggda
