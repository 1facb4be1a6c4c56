#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ggda/gcn.hpp"
#include "ggda/graph.hpp"

namespace ggda {

struct ProgressionConfig {
  double eta = 1.0;
  double kappa = 0.1;
  double beta = 5.0;
  double ru_target = 0.1;
  /// Domain support cap; 0 selects round((n_source + n_target) / 2).
  int cap_k = 0;
  int max_stages = 100;
  TrainConfig train;
  /// Compute the embedding-space distances logged per stage.
  bool track_distances = true;

  void validate() const;
};

/// Weighted, labeled support of one domain. Entries are aligned.
struct DomainMeasure {
  std::vector<int> vertices;
  std::vector<int> labels;
  Vector weights;
  /// Cumulative decay mask w of each vertex.
  std::vector<double> mask;
  /// Stage at which the vertex entered a domain (0 for the source).
  std::vector<int> added_stage;

  std::size_t size() const { return vertices.size(); }
};

/// c_u = margin_u * exp(-eta * d_u / max d), d_u the distance from u's
/// embedding to the nearest labeled embedding. Also returns d through
/// `distances` when non-null.
std::vector<double> selection_scores(const Matrix& embeddings, std::span<const double> margins,
                                     std::span<const int> labeled, std::span<const int> unlabeled,
                                     double eta, std::vector<double>* distances = nullptr);

/// Per-class caps max(1, round(kappa * source_count_c)).
std::vector<int> class_caps(double kappa, std::span<const int> source_class_counts);

struct Selection {
  std::vector<int> vertices;
  std::vector<int> labels;
  /// Index into the candidate list of every selected vertex.
  std::vector<int> candidate_index;
};

/// Top-scoring candidates per predicted class up to the class caps; ties go to
/// the lower vertex id. Pseudo-labels are the predicted classes.
Selection select_vertices(std::span<const int> candidates, std::span<const double> scores,
                          std::span<const int> predicted, double kappa,
                          std::span<const int> source_class_counts);

/// exp(-(1 - min(new/prev, 1)) * beta); for prev <= 0 the ratio is 1 when
/// new >= prev and 0 otherwise.
double mass_decay(double prev_score, double new_score, double beta);

/// Next domain: old vertices keep mass mask * lambda (target vertices are
/// exempt from decay), selected vertices get mass 1, then the cap_k heaviest
/// survive and the weights are normalized. Ties prefer target vertices, then
/// newer, then lower id. `lambda` is aligned with current.vertices.
/// `pre_truncation` receives the normalized weights of all candidates
/// (current vertices then selected) before truncation.
DomainMeasure advance_domain(const DomainMeasure& current, const Selection& selected,
                             std::span<const double> lambda, int cap_k,
                             std::span<const char> is_target, int stage,
                             std::vector<double>* pre_truncation = nullptr);

struct StageLog {
  int stage = 0;
  std::vector<int> selected;
  std::vector<int> selected_labels;
  std::vector<double> selected_scores;
  std::vector<double> selected_distances;
  std::vector<double> selected_margins;
  std::vector<int> caps;
  /// lambda and updated mask of each vertex of the stage's domain.
  std::vector<int> decayed_vertices;
  std::vector<double> lambdas;
  std::vector<double> masks;
  /// All candidates of the next domain with their normalized weights before
  /// truncation, and the summed weight per pool graph.
  std::vector<int> candidate_vertices;
  std::vector<double> pre_truncation_weights;
  std::vector<double> graph_weight;
  DomainMeasure next;
  double labeled_target_fraction = 0.0;
  /// W1 between the embedding distributions of this domain and the next.
  double delta_proxy = std::numeric_limits<double>::quiet_NaN();
  /// W1 between this domain and the uniform target, in embedding space.
  double target_distance = std::numeric_limits<double>::quiet_NaN();
  double source_target_distance = std::numeric_limits<double>::quiet_NaN();
  bool exhausted = false;
};

struct GgdaResult {
  ModelParams params;
  /// Argmax class of every target vertex, in target-local order.
  std::vector<int> target_predictions;
  std::vector<StageLog> stages;
  int stage_count() const { return static_cast<int>(stages.size()); }
};

/// Domain progression over a pool whose first graph is the labeled source
/// and whose last graph is the target. Stops once the unlabeled share of the
/// target drops to ru_target, candidates run out or max_stages is reached,
/// then trains once more on the final domain.
GgdaResult run_ggda(const GraphPool& pool, const ProgressionConfig& cfg);

/// Classic gradual self-training: every pool graph after the source is one
/// whole domain, pseudo-labeled by the model of the previous one.
GgdaResult run_isolated(const GraphPool& pool, const ProgressionConfig& cfg);

/// Train on the source graph only and predict the target.
GgdaResult run_source_only(const GraphPool& pool, const ProgressionConfig& cfg);

/// Fraction of target vertices not in the domain support.
double unlabeled_target_fraction(const GraphPool& pool, const DomainMeasure& domain);

}  // namespace ggda
