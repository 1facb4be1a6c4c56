#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ggda/bundle.hpp"
#include "ggda/errors.hpp"
#include "ggda/fgw.hpp"
#include "ggda/gcn.hpp"
#include "ggda/generation.hpp"
#include "ggda/harness.hpp"
#include "ggda/partition.hpp"
#include "ggda/progression.hpp"
#include "ggda/synth.hpp"

namespace fs = std::filesystem;
using namespace ggda;

namespace {

struct GraphFlags {
  std::string structure = "adjacency";
  std::string histogram = "uniform";

  BundleOptions options() const {
    BundleOptions o;
    if (structure == "shortest_path") o.structure = StructureMode::shortest_path;
    else if (structure != "adjacency") throw InvalidArgument("--structure must be adjacency or shortest_path");
    if (histogram == "degree") o.histogram = HistogramMode::degree;
    else if (histogram != "uniform") throw InvalidArgument("--histogram must be uniform or degree");
    return o;
  }
};

void add_graph_flags(CLI::App* cmd, GraphFlags& g) {
  cmd->add_option("--structure", g.structure, "adjacency | shortest_path");
  cmd->add_option("--histogram", g.histogram, "uniform | degree");
}

// Config file values first, explicit flags on top.
struct Overrides {
  std::string config_file;
  std::vector<std::string> sets;
};

void add_config_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_file, "key = value file")->check(CLI::ExistingFile);
  cmd->add_option("--set", o.sets, "key=value override (repeatable)");
}

ExperimentConfig resolve(const Overrides& o, const std::map<std::string, std::string>& flags) {
  ExperimentConfig cfg;
  if (!o.config_file.empty()) apply_config(load_config(o.config_file), cfg);
  std::map<std::string, std::string> kv = flags;
  for (const auto& s : o.sets) {
    std::istringstream in(s);
    for (const auto& [k, v] : parse_config(in)) kv[k] = v;
  }
  apply_config(kv, cfg);
  return cfg;
}

template <typename T>
void put(std::map<std::string, std::string>& kv, const std::string& key, const std::optional<T>& v) {
  if (!v) return;
  std::ostringstream os;
  os << std::boolalpha << *v;
  kv[key] = os.str();
}

std::vector<int> read_ints(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<int> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(line, &used));
      if (line.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw DataError(path.filename().string() + ":" + std::to_string(no) + ": expected an integer");
    }
  }
  return out;
}

void write_ints(const fs::path& path, const std::vector<int>& values) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (int v : values) out << v << '\n';
}

// Pool directory: source/, intermediate_<k>/ for k = 1..K-1, target/.
std::vector<AttributedGraph> load_pool_dir(const fs::path& dir, const BundleOptions& opts) {
  if (!fs::is_directory(dir)) throw DataError("pool directory not found: " + dir.string());
  std::vector<AttributedGraph> graphs{load_bundle(dir / "source", opts)};
  for (int k = 1; fs::is_directory(dir / ("intermediate_" + std::to_string(k))); ++k) {
    graphs.push_back(load_bundle(dir / ("intermediate_" + std::to_string(k)), opts));
  }
  graphs.push_back(load_bundle(dir / "target", opts));
  return graphs;
}

void write_provenance(const fs::path& path, const GeneratedSequence& seq) {
  CsvTable t;
  t.header = {"k", "draw", "source_part", "target_part", "kept_match", "offset", "size", "s_loss", "fgw_source", "fgw_target"};
  for (const auto& p : seq.provenance) {
    t.rows.push_back({std::to_string(p.k), std::to_string(p.draw), std::to_string(p.source_part),
                      std::to_string(p.target_part), p.kept_match ? "1" : "0", std::to_string(p.offset),
                      std::to_string(p.size), std::to_string(p.s_loss), std::to_string(p.fgw_source),
                      std::to_string(p.fgw_target)});
  }
  write_csv(path, t);
}

void print_report(const EvalReport& r, std::ostream& os) {
  os << "accuracy " << r.accuracy << "\nmicro_f1 " << r.micro_f1 << "\nmacro_f1 " << r.macro_f1 << "\ntest_size "
     << r.test_size << "\nvalidation_size " << r.validation_size << '\n';
  for (const auto& c : r.per_class) {
    os << "class " << c.label << " precision " << c.precision << " recall " << c.recall << " support " << c.support
       << '\n';
  }
}

CsvTable report_table(const std::vector<std::pair<std::string, EvalReport>>& rows) {
  CsvTable t;
  t.header = {"name", "seed", "accuracy", "micro_f1", "macro_f1", "test_size", "config_fingerprint"};
  for (const auto& [name, r] : rows) {
    t.rows.push_back({name, std::to_string(r.seed), std::to_string(r.accuracy), std::to_string(r.micro_f1),
                      std::to_string(r.macro_f1), std::to_string(r.test_size), r.config_fingerprint});
  }
  return t;
}

GeneratedSequence run_generate(const AttributedGraph& src, const AttributedGraph& tgt, const ExperimentConfig& cfg,
                               const fs::path& out) {
  GenerationConfig gc = cfg.generation;
  gc.seed = cfg.seed;
  GeneratedSequence seq = generate_sequence(src, tgt, gc);
  fs::create_directories(out);
  save_bundle(src, out / "source");
  save_bundle(tgt, out / "target");
  for (std::size_t k = 0; k < seq.intermediates.size(); ++k) {
    save_bundle(seq.intermediates[k], out / ("intermediate_" + std::to_string(k + 1)));
  }
  write_provenance(out / "provenance.csv", seq);
  write_resolved_config(out, cfg);
  return seq;
}

GgdaResult run_adapt(const std::vector<AttributedGraph>& graphs, const ExperimentConfig& cfg, const fs::path& out) {
  std::vector<AttributedGraph> mids(graphs.begin() + 1, graphs.end() - 1);
  const GraphPool pool = build_pool(graphs.front(), mids, graphs.back());
  ProgressionConfig pc = cfg.progression;
  pc.train.seed = cfg.seed;
  GgdaResult res = run_ggda(pool, pc);
  fs::create_directories(out);
  write_ints(out / "predictions.txt", res.target_predictions);
  write_csv(out / "stages.csv", stages_table(pool, res.stages));
  PlotInput in;
  in.pool = &pool;
  in.stages = &res.stages;
  emit_plot_data(PlotKind::decay_heatmap, in, out);
  if (pc.track_distances && !res.stages.empty()) emit_plot_data(PlotKind::domain_progress, in, out);
  save_params(res.params, out);
  write_resolved_config(out, cfg);
  return res;
}

int run(int argc, char** argv) {
  CLI::App app{"Graph gradual domain adaptation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ggda 0.1.0");

  // partition
  auto* part = app.add_subcommand("partition", "Edge-cut partition of a graph bundle");
  std::string part_graph, part_out;
  int part_p = 2;
  std::uint64_t part_seed = 0;
  GraphFlags part_gf;
  part->add_option("--graph", part_graph, "graph bundle directory")->required();
  part->add_option("--parts", part_p, "number of parts")->required();
  part->add_option("--seed", part_seed);
  part->add_option("--out", part_out, "assignment file (one part id per line)")->required();
  add_graph_flags(part, part_gf);

  // fgw
  auto* fgw = app.add_subcommand("fgw", "FGW distance between two graph bundles");
  std::string fgw_g1, fgw_g2, fgw_coupling;
  FgwConfig fgw_cfg;
  GraphFlags fgw_gf;
  fgw->add_option("--g1", fgw_g1)->required();
  fgw->add_option("--g2", fgw_g2)->required();
  fgw->add_option("--alpha", fgw_cfg.alpha);
  fgw->add_option("--p", fgw_cfg.p);
  fgw->add_option("--q", fgw_cfg.q);
  fgw->add_option("--max-iters", fgw_cfg.max_iters);
  fgw->add_option("--coupling", fgw_coupling, "write the coupling as float32");
  add_graph_flags(fgw, fgw_gf);

  // synth
  auto* synth = app.add_subcommand("synth", "Synthetic graph bundles");
  synth->require_subcommand(1);
  auto* csbm = synth->add_subcommand("csbm", "CSBM source/target pair");
  std::string csbm_out;
  std::uint64_t csbm_seed = 0;
  int csbm_nodes = 100;
  double csbm_intra = 0.1, csbm_inter = 0.02, csbm_rewire = 0.25;
  csbm->add_option("--out", csbm_out, "writes OUT/source and OUT/target")->required();
  csbm->add_option("--seed", csbm_seed);
  csbm->add_option("--nodes-per-class", csbm_nodes);
  csbm->add_option("--p-intra", csbm_intra);
  csbm->add_option("--p-inter", csbm_inter);
  csbm->add_option("--rewire", csbm_rewire, "target dissimilar rewiring share");
  auto* shift = synth->add_subcommand("shift", "Multi-step class-wise feature shift");
  std::string shift_graph, shift_out;
  ShiftConfig shift_cfg;
  shift->add_option("--graph", shift_graph)->required();
  shift->add_option("--steps", shift_cfg.steps);
  shift->add_option("--noise-scale", shift_cfg.noise_scale);
  shift->add_option("--seed", shift_cfg.seed);
  shift->add_option("--out", shift_out, "writes OUT<s> for s = 0..steps")->required();

  // generate
  auto* gen = app.add_subcommand("generate", "Generate intermediate graphs into a pool directory");
  std::string gen_src, gen_tgt, gen_out;
  std::optional<int> gen_k, gen_ps, gen_pt, gen_trials;
  std::optional<double> gen_alpha;
  std::optional<std::uint64_t> gen_seed;
  std::optional<bool> gen_random;
  Overrides gen_ov;
  GraphFlags gen_gf;
  gen->add_option("--source", gen_src)->required();
  gen->add_option("--target", gen_tgt)->required();
  gen->add_option("--k", gen_k, "number of steps K (K-1 intermediates)");
  gen->add_option("--ps", gen_ps);
  gen->add_option("--pt", gen_pt);
  gen->add_option("--alpha", gen_alpha);
  gen->add_option("--trials", gen_trials);
  gen->add_option("--seed", gen_seed);
  gen->add_flag("--random-matching", gen_random);
  gen->add_option("--out", gen_out, "pool directory")->required();
  add_config_flags(gen, gen_ov);
  add_graph_flags(gen, gen_gf);

  // adapt
  auto* adapt = app.add_subcommand("adapt", "Domain progression over a pool directory");
  std::string adapt_pool, adapt_out;
  std::optional<double> ad_eta, ad_kappa, ad_beta, ad_ru;
  std::optional<std::uint64_t> ad_seed;
  Overrides ad_ov;
  GraphFlags ad_gf;
  adapt->add_option("--pool", adapt_pool)->required();
  adapt->add_option("--eta", ad_eta);
  adapt->add_option("--kappa", ad_kappa);
  adapt->add_option("--beta", ad_beta);
  adapt->add_option("--ru", ad_ru);
  adapt->add_option("--seed", ad_seed);
  adapt->add_option("--out", adapt_out, "run directory")->required();
  add_config_flags(adapt, ad_ov);
  add_graph_flags(adapt, ad_gf);

  // eval
  auto* ev = app.add_subcommand("eval", "Score predictions against a labeled graph");
  std::string ev_pred, ev_graph, ev_out;
  std::uint64_t ev_seed = 0;
  double ev_share = 0.2;
  ev->add_option("--predictions", ev_pred)->required();
  ev->add_option("--graph", ev_graph, "labeled target bundle")->required();
  ev->add_option("--seed", ev_seed, "split seed");
  ev->add_option("--validation-share", ev_share);
  ev->add_option("--out", ev_out, "report csv");

  // ablate
  auto* abl = app.add_subcommand("ablate", "Run ablation variants over seeds");
  std::string abl_src, abl_tgt, abl_out;
  std::vector<std::string> abl_variants{"source_only", "direct_st", "ggda", "ggda_isolated", "ggda_random_match"};
  std::vector<std::uint64_t> abl_seeds{0};
  Overrides abl_ov;
  GraphFlags abl_gf;
  abl->add_option("--source", abl_src, "source bundle (CSBM scenario when omitted)");
  abl->add_option("--target", abl_tgt, "labeled target bundle");
  abl->add_option("--variants", abl_variants);
  abl->add_option("--seeds", abl_seeds);
  abl->add_option("--out", abl_out, "output directory")->required();
  add_config_flags(abl, abl_ov);
  add_graph_flags(abl, abl_gf);

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "generate, adapt and eval in one run");
  std::string pipe_src, pipe_tgt, pipe_out;
  std::optional<std::uint64_t> pipe_seed;
  Overrides pipe_ov;
  GraphFlags pipe_gf;
  pipe->add_option("--source", pipe_src)->required();
  pipe->add_option("--target", pipe_tgt, "target bundle; labels are used for evaluation only")->required();
  pipe->add_option("--seed", pipe_seed);
  pipe->add_option("--out", pipe_out)->required();
  add_config_flags(pipe, pipe_ov);
  add_graph_flags(pipe, pipe_gf);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (part->parsed()) {
    const auto g = load_bundle(part_graph, part_gf.options());
    const auto p = partition(g, part_p, part_seed);
    write_ints(part_out, p.assignment);
    std::cout << "edge_cut " << edge_cut(g, p) << '\n';
  } else if (fgw->parsed()) {
    const auto g1 = load_bundle(fgw_g1, fgw_gf.options()), g2 = load_bundle(fgw_g2, fgw_gf.options());
    const auto r = fgw_distance(g1, g2, fgw_cfg);
    std::cout << "value " << r.value << "\niterations " << r.iters << "\nconverged " << (r.converged ? 1 : 0) << '\n';
    if (!fgw_coupling.empty()) write_f32(fgw_coupling, r.coupling.pi);
  } else if (csbm->parsed()) {
    auto s = csbm_source_config(csbm_seed), t = csbm_target_config(csbm_seed);
    for (auto* c : {&s, &t}) {
      c->nodes_per_class = csbm_nodes;
      c->p_intra = csbm_intra;
      c->p_inter = csbm_inter;
    }
    t.dissimilar_rewire_frac = csbm_rewire;
    CsbmStats stats;
    save_bundle(csbm_generate(s), fs::path(csbm_out) / "source");
    save_bundle(csbm_generate(t, &stats), fs::path(csbm_out) / "target");
    std::cout << "rewired " << stats.rewired << " shortfall " << stats.rewire_shortfall << '\n';
  } else if (shift->parsed()) {
    const auto steps = multistep_shift(load_bundle(shift_graph), shift_cfg);
    for (std::size_t s = 0; s < steps.size(); ++s) save_bundle(steps[s], shift_out + std::to_string(s));
  } else if (gen->parsed()) {
    std::map<std::string, std::string> kv;
    put(kv, "K", gen_k);
    put(kv, "source_parts", gen_ps);
    put(kv, "target_parts", gen_pt);
    put(kv, "alpha", gen_alpha);
    put(kv, "trials", gen_trials);
    put(kv, "seed", gen_seed);
    put(kv, "random_matching", gen_random);
    const auto cfg = resolve(gen_ov, kv);
    const auto seq = run_generate(load_bundle(gen_src, gen_gf.options()), load_bundle(gen_tgt, gen_gf.options()),
                                  cfg, gen_out);
    std::cout << "intermediates " << seq.intermediates.size() << '\n';
  } else if (adapt->parsed()) {
    std::map<std::string, std::string> kv;
    put(kv, "eta", ad_eta);
    put(kv, "kappa", ad_kappa);
    put(kv, "beta", ad_beta);
    put(kv, "ru_target", ad_ru);
    put(kv, "seed", ad_seed);
    const auto cfg = resolve(ad_ov, kv);
    const auto res = run_adapt(load_pool_dir(adapt_pool, ad_gf.options()), cfg, adapt_out);
    std::cout << "stages " << res.stages.size() << '\n';
  } else if (ev->parsed()) {
    const auto truth = load_bundle(ev_graph);
    if (!truth.fully_labeled()) throw DataError(ev_graph + ": evaluation graph must be fully labeled");
    const auto pred = read_ints(ev_pred);
    if (pred.size() != static_cast<std::size_t>(truth.size())) {
      throw DataError(ev_pred + ": " + std::to_string(pred.size()) + " predictions for " +
                      std::to_string(truth.size()) + " vertices");
    }
    auto r = evaluate(pred, truth.labels(), make_split(truth.size(), ev_seed, ev_share));
    r.seed = ev_seed;
    print_report(r, std::cout);
    if (!ev_out.empty()) write_csv(ev_out, report_table({{"eval", r}}));
  } else if (abl->parsed()) {
    const auto base = resolve(abl_ov, {});
    std::vector<std::pair<std::string, EvalReport>> rows;
    for (auto seed : abl_seeds) {
      Scenario sc = abl_src.empty() ? csbm_scenario(seed)
                                    : Scenario{load_bundle(abl_src, abl_gf.options()), load_bundle(abl_tgt, abl_gf.options())};
      ExperimentConfig cfg = base;
      cfg.seed = seed;
      for (const auto& name : abl_variants) {
        const auto res = run_ablation(sc, parse_variant(name), cfg);
        std::cout << name << " seed " << seed << " accuracy " << res.report.accuracy << '\n';
        rows.emplace_back(name, res.report);
      }
    }
    fs::create_directories(abl_out);
    write_csv(fs::path(abl_out) / "ablation.csv", report_table(rows));
    write_resolved_config(abl_out, base);
  } else if (pipe->parsed()) {
    std::map<std::string, std::string> kv;
    put(kv, "seed", pipe_seed);
    const auto cfg = resolve(pipe_ov, kv);
    const fs::path out(pipe_out);
    const auto src = load_bundle(pipe_src, pipe_gf.options());
    const auto tgt = load_bundle(pipe_tgt, pipe_gf.options());
    run_generate(src, tgt.without_labels(), cfg, out / "pool");
    const auto res = run_adapt(load_pool_dir(out / "pool", pipe_gf.options()), cfg, out / "run");
    write_resolved_config(out, cfg);
    if (tgt.fully_labeled()) {
      auto r = evaluate(res.target_predictions, tgt.labels(), make_split(tgt.size(), cfg.seed, cfg.validation_share));
      r.seed = cfg.seed;
      r.config_fingerprint = config_fingerprint(cfg);
      print_report(r, std::cout);
      write_csv(out / "report.csv", report_table({{"ggda", r}}));
    } else {
      std::cout << "target unlabeled; predictions in " << (out / "run" / "predictions.txt").string() << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  }
}
