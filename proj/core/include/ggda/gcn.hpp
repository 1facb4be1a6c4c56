#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "ggda/graph.hpp"
#include "ggda/types.hpp"

namespace ggda {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Two-layer GCN encoder (W1, b1, W2, b2) and linear classifier (Wc, bc).
struct ModelParams {
  Matrix W1;
  Vector b1;
  Matrix W2;
  Vector b2;
  Matrix Wc;
  Vector bc;

  int input_dim() const { return static_cast<int>(W1.rows()); }
  int hidden() const { return static_cast<int>(W1.cols()); }
  int classes() const { return static_cast<int>(Wc.cols()); }

  /// Glorot-uniform weights, zero biases.
  static ModelParams glorot(int input_dim, int hidden, int classes, std::uint64_t seed);
  static ModelParams zeros_like(const ModelParams& shape);

  /// All entries in the order W1, b1, W2, b2, Wc, bc (matrices row-major).
  Vector flatten() const;
  void assign(const Vector& flat);
  /// 1 for weight-matrix entries, 0 for biases, aligned with flatten().
  Vector weight_mask() const;
};

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  int hidden = 64;
  double dropout = 0.5;
  std::uint64_t seed = 0;
  /// Start from the supplied parameters instead of a fresh initialization.
  bool warm_start = false;

  void validate() const;
};

/// D^-1/2 (A + I) D^-1/2.
SparseMatrix normalized_adjacency(int n, std::span<const Edge> edges);

/// Propagation operator and features of a graph, with the first propagation
/// step (A_hat X) cached.
struct GcnInput {
  SparseMatrix a_hat;
  Matrix x;
  Matrix ax;

  GcnInput(int n, std::span<const Edge> edges, Matrix features);
  static GcnInput of(const GraphPool& pool);
  static GcnInput of(const AttributedGraph& graph);
  int size() const { return static_cast<int>(x.rows()); }
};

struct ForwardResult {
  Matrix embeddings;
  Matrix logits;
};

/// Z = ReLU(A_hat ReLU(A_hat X W1 + b1) W2 + b2), logits = Z Wc + bc, no dropout.
ForwardResult forward(const GcnInput& input, const ModelParams& params);
ForwardResult forward(const GraphPool& pool, const ModelParams& params);

/// Weighted supervision on a subset of vertices.
struct WeightedTargets {
  std::vector<int> vertices;
  std::vector<int> labels;
  Vector weights;
};

/// sum_l w_l CE(logits_l, y_l) + weight_decay / 2 * |weights|^2 without
/// dropout; writes the gradient into `grad` when non-null.
double loss_and_gradient(const GcnInput& input, const ModelParams& params,
                         const WeightedTargets& targets, double weight_decay,
                         ModelParams* grad = nullptr);

/// Full-batch Adam on the weighted cross-entropy. Only the 2-hop frontier of
/// the supervised vertices is evaluated, which gives the same result as
/// propagating over the whole graph.
ModelParams train(const GcnInput& input, const WeightedTargets& targets, int n_classes,
                  const TrainConfig& cfg, const ModelParams* init = nullptr);

/// (top1 - top2 logit, argmax); ties resolve to the lowest class id.
std::pair<double, int> margin_and_prediction(const Eigen::Ref<const Vector>& logits);

/// logit[label] - max over the other classes.
double label_score(const Eigen::Ref<const Vector>& logits, int label);

/// params.f32 (flattened float32) and params.meta (shape header).
void save_params(const ModelParams& params, const std::filesystem::path& dir);
ModelParams load_params(const std::filesystem::path& dir);

}  // namespace ggda
