#include "ggda/graph.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <queue>
#include <set>
#include <string>

#include "ggda/errors.hpp"

namespace ggda {

namespace {

std::vector<Edge> normalize_edges(int n, std::vector<Edge> edges) {
  for (auto& e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n) {
      throw InvalidArgument("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                            ") out of range for " + std::to_string(n) + " vertices");
    }
    if (e.u == e.v) throw InvalidArgument("self-loop at vertex " + std::to_string(e.u));
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::vector<Edge> sorted = edges;
  std::sort(sorted.begin(), sorted.end(), [](const Edge& a, const Edge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] == sorted[i - 1]) {
      throw InvalidArgument("duplicate edge (" + std::to_string(sorted[i].u) + ", " +
                            std::to_string(sorted[i].v) + ")");
    }
  }
  return edges;
}

std::vector<int> normalize_labels(int n, std::vector<int> labels, int n_classes) {
  if (n_classes < 0) throw InvalidArgument("negative class count");
  if (labels.empty()) return std::vector<int>(static_cast<std::size_t>(n), kUnlabeled);
  if (static_cast<int>(labels.size()) != n) {
    throw InvalidArgument("label count " + std::to_string(labels.size()) +
                          " does not match vertex count " + std::to_string(n));
  }
  for (int y : labels) {
    if (y != kUnlabeled && (y < 0 || y >= n_classes)) {
      throw InvalidArgument("label " + std::to_string(y) + " outside [0, " +
                            std::to_string(n_classes) + ")");
    }
  }
  return labels;
}

void check_histogram(const Vector& h, int n) {
  if (h.size() != n) throw InvalidArgument("histogram size does not match vertex count");
  if (n == 0) return;
  if ((h.array() < 0.0).any()) throw InvalidArgument("histogram has negative entries");
  if (std::abs(h.sum() - 1.0) > 1e-9) throw InvalidArgument("histogram does not sum to 1");
}

}  // namespace

Matrix build_structure_matrix(int n, std::span<const Edge> edges, StructureMode mode) {
  Matrix c = Matrix::Zero(n, n);
  if (mode == StructureMode::adjacency) {
    for (const auto& e : edges) {
      c(e.u, e.v) = 1.0;
      c(e.v, e.u) = 1.0;
    }
    return c;
  }
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& e : edges) {
    adj[static_cast<std::size_t>(e.u)].push_back(e.v);
    adj[static_cast<std::size_t>(e.v)].push_back(e.u);
  }
  std::vector<int> dist(static_cast<std::size_t>(n));
  int max_finite = 0;
  std::vector<char> reachable(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
  for (int s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::queue<int> q;
    dist[static_cast<std::size_t>(s)] = 0;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int w : adj[static_cast<std::size_t>(u)]) {
        if (dist[static_cast<std::size_t>(w)] < 0) {
          dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(u)] + 1;
          q.push(w);
        }
      }
    }
    for (int t = 0; t < n; ++t) {
      const int d = dist[static_cast<std::size_t>(t)];
      if (d >= 0) {
        c(s, t) = d;
        reachable[static_cast<std::size_t>(s) * static_cast<std::size_t>(n) +
                  static_cast<std::size_t>(t)] = 1;
        max_finite = std::max(max_finite, d);
      }
    }
  }
  for (int s = 0; s < n; ++s) {
    for (int t = 0; t < n; ++t) {
      if (!reachable[static_cast<std::size_t>(s) * static_cast<std::size_t>(n) +
                     static_cast<std::size_t>(t)]) {
        c(s, t) = max_finite + 1;
      }
    }
  }
  return c;
}

Vector make_histogram(int n, std::span<const Edge> edges, HistogramMode mode) {
  if (n < 1) throw InvalidArgument("histogram needs at least one vertex");
  if (mode == HistogramMode::uniform) {
    return Vector::Constant(n, 1.0 / n);
  }
  if (edges.empty()) throw InvalidArgument("degree histogram on an edgeless graph");
  Vector h = Vector::Zero(n);
  for (const auto& e : edges) {
    h[e.u] += 1.0;
    h[e.v] += 1.0;
  }
  h /= 2.0 * static_cast<double>(edges.size());
  return h;
}

struct AttributedGraph::StructureCache {
  std::once_flag once;
  Matrix value;
};

AttributedGraph::AttributedGraph() : structure_(std::make_shared<StructureCache>()) {}

AttributedGraph::AttributedGraph(Matrix features, std::vector<Edge> edges,
                                 std::vector<int> labels, int n_classes,
                                 StructureMode structure_mode, HistogramMode hist_mode)
    : features_(std::move(features)),
      n_classes_(n_classes),
      structure_mode_(structure_mode),
      structure_(std::make_shared<StructureCache>()) {
  const int n = size();
  edges_ = normalize_edges(n, std::move(edges));
  labels_ = normalize_labels(n, std::move(labels), n_classes);
  hist_ = n == 0 ? Vector() : make_histogram(n, edges_, hist_mode);
}

AttributedGraph::AttributedGraph(Matrix features, std::vector<Edge> edges, Matrix structure,
                                 Vector hist, std::vector<int> labels, int n_classes)
    : features_(std::move(features)),
      hist_(std::move(hist)),
      n_classes_(n_classes),
      structure_(std::make_shared<StructureCache>()) {
  const int n = size();
  edges_ = normalize_edges(n, std::move(edges));
  labels_ = normalize_labels(n, std::move(labels), n_classes);
  check_histogram(hist_, n);
  if (structure.rows() != n || structure.cols() != n) {
    throw InvalidArgument("structure matrix must be n x n");
  }
  for (int i = 0; i < n; ++i) {
    if (structure(i, i) != 0.0) throw InvalidArgument("structure diagonal must be zero");
    for (int j = i + 1; j < n; ++j) {
      if (structure(i, j) != structure(j, i)) {
        throw InvalidArgument("structure matrix must be symmetric");
      }
      if (structure(i, j) < 0.0) throw InvalidArgument("structure entries must be >= 0");
    }
  }
  std::call_once(structure_->once, [&] { structure_->value = std::move(structure); });
}

const Matrix& AttributedGraph::structure() const {
  std::call_once(structure_->once, [this] {
    structure_->value = build_structure_matrix(size(), edges_, structure_mode_);
  });
  return structure_->value;
}

bool AttributedGraph::fully_labeled() const {
  return std::none_of(labels_.begin(), labels_.end(), [](int y) { return y == kUnlabeled; });
}

std::vector<int> AttributedGraph::degrees() const {
  std::vector<int> deg(static_cast<std::size_t>(size()), 0);
  for (const auto& e : edges_) {
    ++deg[static_cast<std::size_t>(e.u)];
    ++deg[static_cast<std::size_t>(e.v)];
  }
  return deg;
}

std::vector<std::vector<int>> AttributedGraph::adjacency_lists() const {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(size()));
  for (const auto& e : edges_) {
    adj[static_cast<std::size_t>(e.u)].push_back(e.v);
    adj[static_cast<std::size_t>(e.v)].push_back(e.u);
  }
  return adj;
}

AttributedGraph AttributedGraph::with_features(Matrix features) const {
  if (features.rows() != features_.rows()) {
    throw InvalidArgument("replacement features must keep the vertex count");
  }
  AttributedGraph g = *this;
  g.features_ = std::move(features);
  return g;
}

AttributedGraph AttributedGraph::with_labels(std::vector<int> labels, int n_classes) const {
  AttributedGraph g = *this;
  g.labels_ = normalize_labels(size(), std::move(labels), n_classes);
  g.n_classes_ = n_classes;
  return g;
}

AttributedGraph AttributedGraph::with_histogram(HistogramMode mode) const {
  AttributedGraph g = *this;
  g.hist_ = make_histogram(size(), edges_, mode);
  return g;
}

AttributedGraph AttributedGraph::without_labels() const {
  return with_labels({}, n_classes_);
}

AttributedGraph induced_subgraph(const AttributedGraph& graph, std::span<const int> vertices) {
  const int n = graph.size();
  std::vector<int> local(static_cast<std::size_t>(n), -1);
  Matrix features(static_cast<Eigen::Index>(vertices.size()), graph.dim());
  std::vector<int> labels;
  labels.reserve(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const int v = vertices[i];
    if (v < 0 || v >= n) throw InvalidArgument("induced_subgraph: vertex out of range");
    if (local[static_cast<std::size_t>(v)] >= 0) {
      throw InvalidArgument("induced_subgraph: repeated vertex");
    }
    local[static_cast<std::size_t>(v)] = static_cast<int>(i);
    features.row(static_cast<Eigen::Index>(i)) = graph.features().row(v);
    labels.push_back(graph.labels()[static_cast<std::size_t>(v)]);
  }
  std::vector<Edge> edges;
  for (const auto& e : graph.edges()) {
    const int a = local[static_cast<std::size_t>(e.u)];
    const int b = local[static_cast<std::size_t>(e.v)];
    if (a >= 0 && b >= 0) edges.push_back({std::min(a, b), std::max(a, b)});
  }
  return AttributedGraph(std::move(features), std::move(edges), std::move(labels),
                         graph.n_classes(), graph.structure_mode(), HistogramMode::uniform);
}

GraphPool::GraphPool(std::vector<AttributedGraph> graphs) : graphs_(std::move(graphs)) {
  if (graphs_.empty()) throw InvalidArgument("disjoint_union of an empty graph list");
  const int d = graphs_.front().dim();
  offsets_.push_back(0);
  for (std::size_t g = 0; g < graphs_.size(); ++g) {
    if (graphs_[g].dim() != d) {
      throw InvalidArgument("graph " + std::to_string(g) + " has feature dimension " +
                            std::to_string(graphs_[g].dim()) + ", expected " +
                            std::to_string(d));
    }
    offsets_.push_back(offsets_.back() + graphs_[g].size());
    n_classes_ = std::max(n_classes_, graphs_[g].n_classes());
  }
  const int total = offsets_.back();
  features_.resize(total, d);
  hist_.resize(total);
  labels_.reserve(static_cast<std::size_t>(total));
  for (std::size_t g = 0; g < graphs_.size(); ++g) {
    const auto& graph = graphs_[g];
    const int off = offsets_[g];
    if (graph.size() > 0) {
      features_.middleRows(off, graph.size()) = graph.features();
      hist_.segment(off, graph.size()) = graph.hist();
    }
    labels_.insert(labels_.end(), graph.labels().begin(), graph.labels().end());
    for (const auto& e : graph.edges()) union_edges_.push_back({e.u + off, e.v + off});
  }
}

int GraphPool::global_id(std::size_t g, int local) const {
  if (g >= graphs_.size() || local < 0 || local >= graphs_[g].size()) {
    throw InvalidArgument("global_id: (graph, vertex) out of range");
  }
  return offsets_[g] + local;
}

std::pair<std::size_t, int> GraphPool::origin(int global) const {
  if (global < 0 || global >= total_vertices()) {
    throw InvalidArgument("origin: global id out of range");
  }
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), global);
  const auto g = static_cast<std::size_t>(it - offsets_.begin()) - 1;
  return {g, global - offsets_[g]};
}

AttributedGraph GraphPool::extract(std::size_t g) const {
  const auto& ref = graphs_.at(g);
  const int off = offsets_[g];
  const int n = ref.size();
  std::vector<Edge> edges;
  for (const auto& e : union_edges_) {
    if (e.u >= off && e.u < off + n) edges.push_back({e.u - off, e.v - off});
  }
  std::vector<int> labels(labels_.begin() + off, labels_.begin() + off + n);
  return AttributedGraph(Matrix(features_.middleRows(off, n)), std::move(edges),
                         ref.structure(), Vector(hist_.segment(off, n)), std::move(labels),
                         ref.n_classes());
}

GraphPool disjoint_union(std::vector<AttributedGraph> graphs) {
  return GraphPool(std::move(graphs));
}

}  // namespace ggda
