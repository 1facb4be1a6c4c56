#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ggda/generation.hpp"
#include "ggda/progression.hpp"
#include "ggda/synth.hpp"

namespace ggda {

struct ClassMetrics {
  int label = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int support = 0;
};

struct EvalReport {
  double accuracy = 0.0;
  double micro_f1 = 0.0;
  /// Mean F1 over the union of true and predicted classes.
  double macro_f1 = 0.0;
  std::vector<ClassMetrics> per_class;
  int validation_size = 0;
  int test_size = 0;
  std::uint64_t seed = 0;
  std::string config_fingerprint;
};

/// Disjoint validation/test index sets covering [0, n).
struct EvalSplit {
  std::vector<int> validation;
  std::vector<int> test;
};

/// Seeded shuffle of [0, n) cut 2:8 into validation and test.
EvalSplit make_split(int n, std::uint64_t seed, double validation_share = 0.2);

/// Metrics on the listed indices only (all indices when `subset` is empty).
EvalReport classification_metrics(std::span<const int> predictions, std::span<const int> truth,
                                  std::span<const int> subset = {});

/// Metrics on the test part of `split`.
EvalReport evaluate(std::span<const int> predictions, std::span<const int> truth,
                    const EvalSplit& split);

enum class Variant { source_only, direct_st, ggda, ggda_isolated, ggda_random_match };

Variant parse_variant(const std::string& name);
std::string variant_name(Variant v);
std::vector<Variant> all_variants();

struct ExperimentConfig {
  GenerationConfig generation;
  ProgressionConfig progression;
  /// Seeds generation, training and the evaluation split.
  std::uint64_t seed = 0;
  double validation_share = 0.2;
};

/// Every effective parameter as sorted `key = value` lines.
std::string resolved_config(const ExperimentConfig& cfg);
/// FNV-1a 64 hex digest of resolved_config.
std::string config_fingerprint(const ExperimentConfig& cfg);

/// Parses `key = value` lines; `#` starts a comment. Throws DataError with
/// "<line>: <reason>" on malformed lines.
std::map<std::string, std::string> parse_config(std::istream& in);
std::map<std::string, std::string> load_config(const std::filesystem::path& path);

/// Applies known keys; throws InvalidArgument naming the first unknown key or
/// unparsable value.
void apply_config(const std::map<std::string, std::string>& kv, ExperimentConfig& cfg);

/// Writes resolved_config(cfg) to dir/config.resolved.txt.
void write_resolved_config(const std::filesystem::path& dir, const ExperimentConfig& cfg);

/// Source first, intermediates in order, then the target with labels removed.
GraphPool build_pool(const AttributedGraph& source, const std::vector<AttributedGraph>& intermediates,
                     const AttributedGraph& target);

/// Progression settings of the direct self-training ablation: a single
/// {source, target} pool, every candidate selected, no decay.
ProgressionConfig direct_st_config(const ProgressionConfig& base, int n_source, int n_target);

struct AblationResult {
  Variant variant = Variant::ggda;
  EvalReport report;
  GgdaResult run;
  /// Pool the progression ran on.
  std::vector<AttributedGraph> pool_graphs;
  double generation_seconds = 0.0;
  double adaptation_seconds = 0.0;
};

/// Runs one variant on a labeled source/target pair and evaluates on the
/// target test split.
AblationResult run_ablation(const Scenario& scenario, Variant variant, const ExperimentConfig& cfg);

/// A tidy CSV table.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);

enum class PlotKind { discrepancy_sweep, decay_heatmap, kappa_beta_sweep, domain_progress };

PlotKind parse_plot_kind(const std::string& name);

/// One run of a sweep: named parameters and its outcome.
struct SweepRow {
  std::map<std::string, double> params;
  std::string variant;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  int stages = 0;
};

struct PlotInput {
  const GraphPool* pool = nullptr;
  const std::vector<StageLog>* stages = nullptr;
  std::vector<SweepRow> sweep;
};

/// Columns per kind:
///   discrepancy_sweep  level, variant, accuracy, macro_f1
///   decay_heatmap      stage, vertex_set, weight_sum
///   kappa_beta_sweep   kappa, beta, accuracy, macro_f1, stages
///   domain_progress    stage, distance, normalized
/// domain_progress appends a final target row with distance 0 and divides by
/// the largest distance. Throws InvalidArgument when the input lacks what the
/// kind needs.
CsvTable plot_table(PlotKind kind, const PlotInput& input);

/// plot_table written to dir/<kind>.csv; returns the path.
std::filesystem::path emit_plot_data(PlotKind kind, const PlotInput& input,
                                     const std::filesystem::path& dir);

/// One row per stage with the flattened StageLog scalars.
CsvTable stages_table(const GraphPool& pool, const std::vector<StageLog>& stages);

}  // namespace ggda
