#include "ggda/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include "ggda/errors.hpp"
#include "ggda/rng.hpp"

namespace ggda {

namespace fs = std::filesystem;

EvalSplit make_split(int n, std::uint64_t seed, double validation_share) {
  if (n < 0) throw InvalidArgument("split: negative size");
  if (!(validation_share >= 0.0 && validation_share < 1.0)) {
    throw InvalidArgument("split: validation share must lie in [0, 1)");
  }
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, 0x5b11));
  shuffle(idx.begin(), idx.end(), rng);
  const auto n_val = static_cast<std::size_t>(std::lround(validation_share * n));
  EvalSplit s;
  s.validation.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
  s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
  std::sort(s.validation.begin(), s.validation.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

EvalReport classification_metrics(std::span<const int> pred, std::span<const int> truth,
                                  std::span<const int> subset) {
  if (pred.size() != truth.size()) {
    throw InvalidArgument("evaluate: " + std::to_string(pred.size()) + " predictions for " +
                          std::to_string(truth.size()) + " labels");
  }
  std::vector<int> idx(subset.begin(), subset.end());
  if (idx.empty()) {
    idx.resize(pred.size());
    std::iota(idx.begin(), idx.end(), 0);
  }
  std::set<int> classes;
  std::map<int, int> tp, fp, fn;
  int correct = 0;
  for (int i : idx) {
    if (i < 0 || static_cast<std::size_t>(i) >= pred.size()) throw InvalidArgument("evaluate: index out of range");
    const int p = pred[static_cast<std::size_t>(i)], y = truth[static_cast<std::size_t>(i)];
    classes.insert(p);
    classes.insert(y);
    if (p == y) {
      ++correct;
      ++tp[y];
    } else {
      ++fp[p];
      ++fn[y];
    }
  }
  EvalReport r;
  r.test_size = static_cast<int>(idx.size());
  if (idx.empty()) return r;
  r.accuracy = static_cast<double>(correct) / static_cast<double>(idx.size());
  long long stp = 0, sfp = 0, sfn = 0;
  double f1_sum = 0.0;
  for (int c : classes) {
    ClassMetrics m;
    m.label = c;
    const int a = tp[c], b = fp[c], d = fn[c];
    stp += a;
    sfp += b;
    sfn += d;
    m.support = a + d;
    m.precision = a + b > 0 ? static_cast<double>(a) / (a + b) : 0.0;
    m.recall = a + d > 0 ? static_cast<double>(a) / (a + d) : 0.0;
    m.f1 = 2 * a + b + d > 0 ? 2.0 * a / (2 * a + b + d) : 0.0;
    f1_sum += m.f1;
    r.per_class.push_back(m);
  }
  r.micro_f1 = 2.0 * static_cast<double>(stp) / static_cast<double>(2 * stp + sfp + sfn);
  r.macro_f1 = f1_sum / static_cast<double>(classes.size());
  return r;
}

EvalReport evaluate(std::span<const int> pred, std::span<const int> truth, const EvalSplit& split) {
  if (pred.size() != truth.size()) {
    throw InvalidArgument("evaluate: " + std::to_string(pred.size()) + " predictions for " +
                          std::to_string(truth.size()) + " labels");
  }
  if (split.validation.size() + split.test.size() != pred.size()) {
    throw InvalidArgument("evaluate: split does not cover the predictions");
  }
  EvalReport r = classification_metrics(pred, truth, split.test);
  r.validation_size = static_cast<int>(split.validation.size());
  return r;
}

namespace {

const std::vector<std::pair<Variant, std::string>>& variant_names() {
  static const std::vector<std::pair<Variant, std::string>> names{
      {Variant::source_only, "source_only"},
      {Variant::direct_st, "direct_st"},
      {Variant::ggda, "ggda"},
      {Variant::ggda_isolated, "ggda_isolated"},
      {Variant::ggda_random_match, "ggda_random_match"}};
  return names;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw InvalidArgument("config: " + key + " expects a number, got '" + v + "'");
  }
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw InvalidArgument("config: " + key + " expects an integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidArgument("config: " + key + " expects true/false, got '" + v + "'");
}

struct Field {
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
};

Field real(std::function<double&(ExperimentConfig&)> ref) {
  return {[ref](ExperimentConfig copy) { return fmt(ref(copy)); },
          [ref](ExperimentConfig& c, const std::string& k, const std::string& v) { ref(c) = to_double(k, v); }};
}

Field integer(std::function<int&(ExperimentConfig&)> ref) {
  return {[ref](ExperimentConfig copy) { return std::to_string(ref(copy)); },
          [ref](ExperimentConfig& c, const std::string& k, const std::string& v) {
            ref(c) = static_cast<int>(to_int(k, v));
          }};
}

Field flag(std::function<bool&(ExperimentConfig&)> ref) {
  return {[ref](ExperimentConfig copy) { return std::string(ref(copy) ? "true" : "false"); },
          [ref](ExperimentConfig& c, const std::string& k, const std::string& v) { ref(c) = to_bool(k, v); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> f{
      {"seed",
       {[](const ExperimentConfig& c) { return std::to_string(c.seed); },
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          const long long s = to_int(k, v);
          if (s < 0) throw InvalidArgument("config: seed must be >= 0");
          c.seed = static_cast<std::uint64_t>(s);
        }}},
      {"validation_share", real([](ExperimentConfig& c) -> double& { return c.validation_share; })},
      {"K", integer([](ExperimentConfig& c) -> int& { return c.generation.K; })},
      {"source_parts", integer([](ExperimentConfig& c) -> int& { return c.generation.source_parts; })},
      {"target_parts", integer([](ExperimentConfig& c) -> int& { return c.generation.target_parts; })},
      {"trials", integer([](ExperimentConfig& c) -> int& { return c.generation.trials; })},
      {"random_matching", flag([](ExperimentConfig& c) -> bool& { return c.generation.random_matching; })},
      {"bcd_iters", integer([](ExperimentConfig& c) -> int& { return c.generation.barycenter.bcd_iters; })},
      {"alpha", real([](ExperimentConfig& c) -> double& { return c.generation.barycenter.fgw.alpha; })},
      {"p", real([](ExperimentConfig& c) -> double& { return c.generation.barycenter.fgw.p; })},
      {"q", integer([](ExperimentConfig& c) -> int& { return c.generation.barycenter.fgw.q; })},
      {"fgw_max_iters", integer([](ExperimentConfig& c) -> int& { return c.generation.barycenter.fgw.max_iters; })},
      {"fgw_tol", real([](ExperimentConfig& c) -> double& { return c.generation.barycenter.fgw.tol; })},
      {"imbalance", real([](ExperimentConfig& c) -> double& { return c.generation.partition.imbalance; })},
      {"refinement_passes", integer([](ExperimentConfig& c) -> int& { return c.generation.partition.refinement_passes; })},
      {"eta", real([](ExperimentConfig& c) -> double& { return c.progression.eta; })},
      {"kappa", real([](ExperimentConfig& c) -> double& { return c.progression.kappa; })},
      {"beta", real([](ExperimentConfig& c) -> double& { return c.progression.beta; })},
      {"ru_target", real([](ExperimentConfig& c) -> double& { return c.progression.ru_target; })},
      {"cap_k", integer([](ExperimentConfig& c) -> int& { return c.progression.cap_k; })},
      {"max_stages", integer([](ExperimentConfig& c) -> int& { return c.progression.max_stages; })},
      {"track_distances", flag([](ExperimentConfig& c) -> bool& { return c.progression.track_distances; })},
      {"epochs", integer([](ExperimentConfig& c) -> int& { return c.progression.train.epochs; })},
      {"learning_rate", real([](ExperimentConfig& c) -> double& { return c.progression.train.learning_rate; })},
      {"weight_decay", real([](ExperimentConfig& c) -> double& { return c.progression.train.weight_decay; })},
      {"hidden", integer([](ExperimentConfig& c) -> int& { return c.progression.train.hidden; })},
      {"dropout", real([](ExperimentConfig& c) -> double& { return c.progression.train.dropout; })},
      {"warm_start", flag([](ExperimentConfig& c) -> bool& { return c.progression.train.warm_start; })},
  };
  return f;
}

ExperimentConfig seeded(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.generation.seed = derive_seed(cfg.seed, 1);
  c.progression.train.seed = derive_seed(cfg.seed, 2);
  return c;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Variant parse_variant(const std::string& name) {
  for (const auto& [v, n] : variant_names())
    if (n == name) return v;
  throw InvalidArgument("unknown variant '" + name + "'");
}

std::string variant_name(Variant v) {
  for (const auto& [x, n] : variant_names())
    if (x == v) return n;
  return "unknown";
}

std::vector<Variant> all_variants() {
  std::vector<Variant> out;
  for (const auto& entry : variant_names()) out.push_back(entry.first);
  return out;
}

std::string resolved_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  for (const auto& [key, field] : fields()) os << key << " = " << field.get(cfg) << '\n';
  return os.str();
}

std::string config_fingerprint(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : resolved_config(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::map<std::string, std::string> parse_config(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError(std::to_string(no) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw DataError(std::to_string(no) + ": empty key");
    if (value.empty()) throw DataError(std::to_string(no) + ": empty value for " + key);
    kv[key] = value;
  }
  return kv;
}

std::map<std::string, std::string> load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  try {
    return parse_config(in);
  } catch (const DataError& e) {
    throw DataError(path.filename().string() + ":" + e.what());
  }
}

void apply_config(const std::map<std::string, std::string>& kv, ExperimentConfig& cfg) {
  const auto& f = fields();
  for (const auto& [key, value] : kv) {
    const auto it = f.find(key);
    if (it == f.end()) throw InvalidArgument("config: unknown key '" + key + "'");
    it->second.set(cfg, key, value);
  }
}

void write_resolved_config(const fs::path& dir, const ExperimentConfig& cfg) {
  fs::create_directories(dir);
  std::ofstream out(dir / "config.resolved.txt");
  if (!out) throw DataError("cannot write " + (dir / "config.resolved.txt").string());
  out << resolved_config(cfg);
}

GraphPool build_pool(const AttributedGraph& source, const std::vector<AttributedGraph>& intermediates,
                     const AttributedGraph& target) {
  std::vector<AttributedGraph> graphs{source};
  graphs.insert(graphs.end(), intermediates.begin(), intermediates.end());
  graphs.push_back(target.without_labels());
  return disjoint_union(std::move(graphs));
}

ProgressionConfig direct_st_config(const ProgressionConfig& base, int n_source, int n_target) {
  ProgressionConfig c = base;
  c.kappa = 1e9;
  c.beta = 0.0;
  c.cap_k = n_source + n_target;
  return c;
}

AblationResult run_ablation(const Scenario& sc, Variant variant, const ExperimentConfig& raw) {
  if (!sc.target.fully_labeled()) throw InvalidArgument("ablation: target needs ground-truth labels");
  const ExperimentConfig cfg = seeded(raw);
  AblationResult res;
  res.variant = variant;
  std::vector<AttributedGraph> intermediates;
  auto t0 = std::chrono::steady_clock::now();
  if (variant == Variant::ggda || variant == Variant::ggda_isolated || variant == Variant::ggda_random_match) {
    GenerationConfig gc = cfg.generation;
    gc.random_matching = gc.random_matching || variant == Variant::ggda_random_match;
    intermediates = generate_sequence(sc.source, sc.target.without_labels(), gc).intermediates;
  }
  res.generation_seconds = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const GraphPool pool = build_pool(sc.source, intermediates, sc.target);
  switch (variant) {
    case Variant::source_only:
      res.run = run_source_only(pool, cfg.progression);
      break;
    case Variant::direct_st:
      res.run = run_ggda(pool, direct_st_config(cfg.progression, sc.source.size(), sc.target.size()));
      break;
    case Variant::ggda:
    case Variant::ggda_random_match:
      res.run = run_ggda(pool, cfg.progression);
      break;
    case Variant::ggda_isolated:
      res.run = run_isolated(pool, cfg.progression);
      break;
  }
  res.adaptation_seconds = seconds_since(t0);
  for (std::size_t g = 0; g < pool.graph_count(); ++g) res.pool_graphs.push_back(pool.graph(g));

  const EvalSplit split = make_split(sc.target.size(), cfg.seed, cfg.validation_share);
  res.report = evaluate(res.run.target_predictions, sc.target.labels(), split);
  res.report.seed = raw.seed;
  res.report.config_fingerprint = config_fingerprint(raw);
  return res;
}

void write_csv(const fs::path& path, const CsvTable& table) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
}

PlotKind parse_plot_kind(const std::string& name) {
  if (name == "discrepancy_sweep") return PlotKind::discrepancy_sweep;
  if (name == "decay_heatmap") return PlotKind::decay_heatmap;
  if (name == "kappa_beta_sweep") return PlotKind::kappa_beta_sweep;
  if (name == "domain_progress") return PlotKind::domain_progress;
  throw InvalidArgument("unknown plot kind '" + name + "'");
}

namespace {

std::string plot_kind_name(PlotKind k) {
  switch (k) {
    case PlotKind::discrepancy_sweep: return "discrepancy_sweep";
    case PlotKind::decay_heatmap: return "decay_heatmap";
    case PlotKind::kappa_beta_sweep: return "kappa_beta_sweep";
    case PlotKind::domain_progress: return "domain_progress";
  }
  return "unknown";
}

std::string vertex_set_name(const GraphPool& pool, std::size_t g) {
  if (g == pool.source_index()) return "source";
  if (g == pool.target_index()) return "target";
  return "intermediate_" + std::to_string(g);
}

double param(const SweepRow& r, const std::string& key) {
  const auto it = r.params.find(key);
  if (it == r.params.end()) throw InvalidArgument("sweep row lacks parameter '" + key + "'");
  return it->second;
}

}  // namespace

CsvTable plot_table(PlotKind kind, const PlotInput& in) {
  CsvTable t;
  switch (kind) {
    case PlotKind::discrepancy_sweep:
      t.header = {"level", "variant", "accuracy", "macro_f1"};
      for (const auto& r : in.sweep) t.rows.push_back({fmt(param(r, "level")), r.variant, fmt(r.accuracy), fmt(r.macro_f1)});
      break;
    case PlotKind::kappa_beta_sweep:
      t.header = {"kappa", "beta", "accuracy", "macro_f1", "stages"};
      for (const auto& r : in.sweep) {
        t.rows.push_back({fmt(param(r, "kappa")), fmt(param(r, "beta")), fmt(r.accuracy), fmt(r.macro_f1),
                          std::to_string(r.stages)});
      }
      break;
    case PlotKind::decay_heatmap: {
      if (in.pool == nullptr || in.stages == nullptr) throw InvalidArgument("decay_heatmap needs a pool and stage logs");
      t.header = {"stage", "vertex_set", "weight_sum"};
      for (const auto& s : *in.stages) {
        for (std::size_t g = 0; g < s.graph_weight.size(); ++g) {
          t.rows.push_back({std::to_string(s.stage), vertex_set_name(*in.pool, g), fmt(s.graph_weight[g])});
        }
      }
      break;
    }
    case PlotKind::domain_progress: {
      if (in.stages == nullptr) throw InvalidArgument("domain_progress needs stage logs");
      t.header = {"stage", "distance", "normalized"};
      std::vector<double> d;
      for (const auto& s : *in.stages) {
        if (!std::isfinite(s.target_distance)) throw InvalidArgument("domain_progress needs tracked distances");
        d.push_back(s.target_distance);
      }
      d.push_back(0.0);
      const double hi = *std::max_element(d.begin(), d.end());
      for (std::size_t i = 0; i < d.size(); ++i) {
        t.rows.push_back({std::to_string(i), fmt(d[i]), fmt(hi > 0.0 ? d[i] / hi : 0.0)});
      }
      break;
    }
  }
  return t;
}

fs::path emit_plot_data(PlotKind kind, const PlotInput& input, const fs::path& dir) {
  const fs::path path = dir / (plot_kind_name(kind) + ".csv");
  write_csv(path, plot_table(kind, input));
  return path;
}

CsvTable stages_table(const GraphPool& pool, const std::vector<StageLog>& stages) {
  CsvTable t;
  t.header = {"stage", "selected", "domain_size", "labeled_target_fraction", "delta_proxy",
              "target_distance", "mean_lambda", "min_mask", "exhausted"};
  for (std::size_t g = 0; g < pool.graph_count(); ++g) t.header.push_back("weight_" + vertex_set_name(pool, g));
  for (const auto& s : stages) {
    const double mean_lambda =
        s.lambdas.empty() ? 1.0 : std::accumulate(s.lambdas.begin(), s.lambdas.end(), 0.0) / s.lambdas.size();
    const double min_mask = s.masks.empty() ? 1.0 : *std::min_element(s.masks.begin(), s.masks.end());
    std::vector<std::string> row{std::to_string(s.stage),      std::to_string(s.selected.size()),
                                 std::to_string(s.next.size()), fmt(s.labeled_target_fraction),
                                 fmt(s.delta_proxy),            fmt(s.target_distance),
                                 fmt(mean_lambda),              fmt(min_mask),
                                 s.exhausted ? "1" : "0"};
    for (std::size_t g = 0; g < pool.graph_count(); ++g) {
      row.push_back(fmt(g < s.graph_weight.size() ? s.graph_weight[g] : 0.0));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace ggda
