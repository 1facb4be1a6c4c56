#include "ggda/progression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ggda/errors.hpp"
#include "ggda/ot.hpp"
#include "ggda/rng.hpp"

namespace ggda {

void ProgressionConfig::validate() const {
  if (eta < 0.0) throw InvalidArgument("progression: eta must be >= 0");
  if (!(kappa > 0.0)) throw InvalidArgument("progression: kappa must be > 0");
  if (beta < 0.0) throw InvalidArgument("progression: beta must be >= 0");
  if (!(ru_target >= 0.0 && ru_target < 1.0)) throw InvalidArgument("progression: ru_target must lie in [0, 1)");
  if (cap_k < 0) throw InvalidArgument("progression: cap_k must be >= 0");
  if (max_stages < 1) throw InvalidArgument("progression: max_stages must be >= 1");
  train.validate();
}

std::vector<double> selection_scores(const Matrix& Z, std::span<const double> margins,
                                     std::span<const int> labeled, std::span<const int> unlabeled,
                                     double eta, std::vector<double>* distances) {
  if (margins.size() != unlabeled.size()) throw InvalidArgument("selection_scores: margin count mismatch");
  if (unlabeled.empty()) {
    if (distances != nullptr) distances->clear();
    return {};
  }
  if (labeled.empty()) throw InvalidArgument("selection_scores: empty labeled set");
  Matrix L(static_cast<Eigen::Index>(labeled.size()), Z.cols());
  for (std::size_t i = 0; i < labeled.size(); ++i) L.row(static_cast<Eigen::Index>(i)) = Z.row(labeled[i]);
  const Vector l_sq = L.rowwise().squaredNorm();
  std::vector<double> d(unlabeled.size());
  for (std::size_t u = 0; u < unlabeled.size(); ++u) {
    const Vector z = Z.row(unlabeled[u]).transpose();
    const double best = (l_sq - 2.0 * (L * z)).minCoeff() + z.squaredNorm();
    d[u] = std::sqrt(std::max(0.0, best));
  }
  const double dmax = *std::max_element(d.begin(), d.end());
  std::vector<double> c(unlabeled.size());
  for (std::size_t u = 0; u < unlabeled.size(); ++u) {
    c[u] = dmax > 0.0 ? margins[u] * std::exp(-d[u] / dmax * eta) : margins[u];
  }
  if (distances != nullptr) *distances = std::move(d);
  return c;
}

std::vector<int> class_caps(double kappa, std::span<const int> counts) {
  std::vector<int> caps;
  for (int n : counts) {
    const double want = std::round(kappa * n);
    caps.push_back(want >= 1.0 ? static_cast<int>(std::min(want, 1e9)) : 1);
  }
  return caps;
}

Selection select_vertices(std::span<const int> candidates, std::span<const double> scores,
                          std::span<const int> predicted, double kappa,
                          std::span<const int> source_class_counts) {
  if (scores.size() != candidates.size() || predicted.size() != candidates.size()) {
    throw InvalidArgument("select_vertices: length mismatch");
  }
  const auto caps = class_caps(kappa, source_class_counts);
  std::vector<int> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return candidates[a] < candidates[b];
  });
  std::vector<int> taken(caps.size(), 0);
  Selection sel;
  for (int i : order) {
    const int c = predicted[i];
    if (c < 0 || c >= static_cast<int>(caps.size())) continue;
    if (taken[c] >= caps[c]) continue;
    ++taken[c];
    sel.vertices.push_back(candidates[i]);
    sel.labels.push_back(c);
    sel.candidate_index.push_back(i);
  }
  return sel;
}

double mass_decay(double prev, double next, double beta) {
  double ratio;
  if (prev > 0.0) {
    ratio = next / prev;
  } else {
    ratio = next >= prev ? 1.0 : 0.0;
  }
  return std::exp(-(1.0 - std::min(ratio, 1.0)) * beta);
}

DomainMeasure advance_domain(const DomainMeasure& cur, const Selection& sel,
                             std::span<const double> lambda, int cap_k,
                             std::span<const char> is_target, int stage,
                             std::vector<double>* pre_truncation) {
  if (lambda.size() != cur.size()) throw InvalidArgument("advance_domain: lambda size mismatch");
  if (cap_k < 1) throw InvalidArgument("advance_domain: cap_k must be >= 1");
  std::vector<int> in_cur;
  for (int v : cur.vertices) in_cur.push_back(v);
  std::sort(in_cur.begin(), in_cur.end());
  for (int v : sel.vertices) {
    if (std::binary_search(in_cur.begin(), in_cur.end(), v)) {
      throw InvalidArgument("advance_domain: selected vertex " + std::to_string(v) + " already in the domain");
    }
  }
  DomainMeasure all;
  for (std::size_t i = 0; i < cur.size(); ++i) {
    const int v = cur.vertices[i];
    const bool tgt = is_target[static_cast<std::size_t>(v)] != 0;
    all.vertices.push_back(v);
    all.labels.push_back(cur.labels[i]);
    all.mask.push_back(tgt ? cur.mask[i] : cur.mask[i] * lambda[i]);
    all.added_stage.push_back(cur.added_stage[i]);
  }
  for (std::size_t i = 0; i < sel.vertices.size(); ++i) {
    all.vertices.push_back(sel.vertices[i]);
    all.labels.push_back(sel.labels[i]);
    all.mask.push_back(1.0);
    all.added_stage.push_back(stage);
  }
  const double total = std::accumulate(all.mask.begin(), all.mask.end(), 0.0);
  if (!(total > 0.0)) throw NumericalError("advance_domain: all domain mass decayed to zero");
  if (pre_truncation != nullptr) {
    pre_truncation->clear();
    for (double m : all.mask) pre_truncation->push_back(m / total);
  }

  std::vector<int> order(all.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (all.mask[a] != all.mask[b]) return all.mask[a] > all.mask[b];
    const bool ta = is_target[static_cast<std::size_t>(all.vertices[a])] != 0;
    const bool tb = is_target[static_cast<std::size_t>(all.vertices[b])] != 0;
    if (ta != tb) return ta;
    if (all.added_stage[a] != all.added_stage[b]) return all.added_stage[a] > all.added_stage[b];
    return all.vertices[a] < all.vertices[b];
  });
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(cap_k)));
  std::sort(order.begin(), order.end());

  DomainMeasure next;
  double kept = 0.0;
  for (int i : order) kept += all.mask[i];
  next.weights.resize(static_cast<Eigen::Index>(order.size()));
  for (std::size_t j = 0; j < order.size(); ++j) {
    const int i = order[j];
    next.vertices.push_back(all.vertices[i]);
    next.labels.push_back(all.labels[i]);
    next.mask.push_back(all.mask[i]);
    next.added_stage.push_back(all.added_stage[i]);
    next.weights[static_cast<Eigen::Index>(j)] = all.mask[i] / kept;
  }
  return next;
}

double unlabeled_target_fraction(const GraphPool& pool, const DomainMeasure& d) {
  const std::size_t t = pool.target_index();
  const int lo = pool.offset(t), n = pool.graph(t).size();
  int inside = 0;
  for (int v : d.vertices)
    if (v >= lo && v < lo + n) ++inside;
  return 1.0 - static_cast<double>(inside) / n;
}

namespace {

WeightedTargets targets_of(const DomainMeasure& d) {
  return {d.vertices, d.labels, d.weights};
}

std::vector<int> predict_target(const GraphPool& pool, const Matrix& logits) {
  const std::size_t t = pool.target_index();
  std::vector<int> out;
  for (int i = 0; i < pool.graph(t).size(); ++i) {
    out.push_back(margin_and_prediction(logits.row(pool.offset(t) + i).transpose()).second);
  }
  return out;
}

DomainMeasure uniform_domain(const GraphPool& pool, std::size_t g, std::vector<int> labels, int stage) {
  DomainMeasure d;
  const int n = pool.graph(g).size();
  for (int i = 0; i < n; ++i) d.vertices.push_back(pool.offset(g) + i);
  d.labels = std::move(labels);
  d.weights = Vector::Constant(n, 1.0 / n);
  d.mask.assign(static_cast<std::size_t>(n), 1.0);
  d.added_stage.assign(static_cast<std::size_t>(n), stage);
  return d;
}

DomainMeasure source_domain(const GraphPool& pool) {
  const auto& src = pool.graph(pool.source_index());
  if (!src.fully_labeled()) throw InvalidArgument("progression: source graph must be fully labeled");
  return uniform_domain(pool, pool.source_index(), src.labels(), 0);
}

// W1 between two weighted point clouds of embedding rows.
double embedding_w1(const Matrix& Z, std::span<const int> a, const Vector& wa, std::span<const int> b,
                    const Vector& wb) {
  Matrix za(static_cast<Eigen::Index>(a.size()), Z.cols()), zb(static_cast<Eigen::Index>(b.size()), Z.cols());
  for (std::size_t i = 0; i < a.size(); ++i) za.row(static_cast<Eigen::Index>(i)) = Z.row(a[i]);
  for (std::size_t i = 0; i < b.size(); ++i) zb.row(static_cast<Eigen::Index>(i)) = Z.row(b[i]);
  const Matrix cost = euclidean_distances(za, zb);
  return solve_linear_transport_value(cost, wa / wa.sum(), wb / wb.sum());
}

TrainConfig stage_train(const ProgressionConfig& cfg, int stage) {
  TrainConfig tc = cfg.train;
  tc.seed = derive_seed(cfg.train.seed, static_cast<std::uint64_t>(stage));
  return tc;
}

}  // namespace

GgdaResult run_ggda(const GraphPool& pool, const ProgressionConfig& cfg) {
  cfg.validate();
  const GcnInput in = GcnInput::of(pool);
  const int N = pool.total_vertices();
  const int n_classes = pool.n_classes();
  const auto& src = pool.graph(pool.source_index());
  const std::size_t tgt_index = pool.target_index();
  const int n_tgt = pool.graph(tgt_index).size();
  const int cap = cfg.cap_k > 0 ? cfg.cap_k : static_cast<int>(std::lround((src.size() + n_tgt) / 2.0));

  std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
  for (int y : src.labels()) ++counts[static_cast<std::size_t>(y)];
  std::vector<char> is_target(static_cast<std::size_t>(N), 0), visited(static_cast<std::size_t>(N), 0);
  for (int i = 0; i < n_tgt; ++i) is_target[static_cast<std::size_t>(pool.offset(tgt_index) + i)] = 1;

  DomainMeasure domain = source_domain(pool);
  for (int v : domain.vertices) visited[static_cast<std::size_t>(v)] = 1;
  std::vector<int> target_ids;
  for (int i = 0; i < n_tgt; ++i) target_ids.push_back(pool.offset(tgt_index) + i);
  const Vector target_w = Vector::Constant(n_tgt, 1.0 / n_tgt);
  const Vector source_w = Vector::Constant(src.size(), 1.0 / src.size());
  std::vector<int> source_ids(domain.vertices);

  std::vector<double> stored(static_cast<std::size_t>(N), 0.0);
  GgdaResult out;
  ModelParams previous;
  int t = 0;
  while (unlabeled_target_fraction(pool, domain) > cfg.ru_target && t < cfg.max_stages) {
    const ModelParams params =
        train(in, targets_of(domain), n_classes, stage_train(cfg, t), t > 0 ? &previous : nullptr);
    previous = params;
    const ForwardResult fw = forward(in, params);
    StageLog log;
    log.stage = t;

    std::vector<double> lambda(domain.size(), 1.0);
    std::vector<double> now(domain.size());
    for (std::size_t i = 0; i < domain.size(); ++i) {
      const int v = domain.vertices[i];
      now[i] = label_score(fw.logits.row(v).transpose(), domain.labels[i]);
      if (t >= 1 && !is_target[static_cast<std::size_t>(v)]) {
        lambda[i] = mass_decay(stored[static_cast<std::size_t>(v)], now[i], cfg.beta);
      }
      log.decayed_vertices.push_back(v);
      log.lambdas.push_back(lambda[i]);
      log.masks.push_back(is_target[static_cast<std::size_t>(v)] ? domain.mask[i] : domain.mask[i] * lambda[i]);
    }

    std::vector<int> cand;
    for (int v = 0; v < N; ++v)
      if (!visited[static_cast<std::size_t>(v)]) cand.push_back(v);
    std::vector<double> margins;
    std::vector<int> preds;
    for (int v : cand) {
      const auto [m, c] = margin_and_prediction(fw.logits.row(v).transpose());
      margins.push_back(m);
      preds.push_back(c);
    }
    std::vector<double> dist;
    const auto scores = selection_scores(fw.embeddings, margins, domain.vertices, cand, cfg.eta, &dist);
    const Selection sel = select_vertices(cand, scores, preds, cfg.kappa, counts);
    log.caps = class_caps(cfg.kappa, counts);
    if (sel.vertices.empty()) {
      log.exhausted = true;
      log.next = domain;
      log.labeled_target_fraction = 1.0 - unlabeled_target_fraction(pool, domain);
      out.stages.push_back(std::move(log));
      break;
    }
    for (std::size_t i = 0; i < sel.vertices.size(); ++i) {
      const int ci = sel.candidate_index[i];
      log.selected.push_back(sel.vertices[i]);
      log.selected_labels.push_back(sel.labels[i]);
      log.selected_scores.push_back(scores[static_cast<std::size_t>(ci)]);
      log.selected_distances.push_back(dist[static_cast<std::size_t>(ci)]);
      log.selected_margins.push_back(margins[static_cast<std::size_t>(ci)]);
    }

    for (std::size_t i = 0; i < domain.size(); ++i) stored[static_cast<std::size_t>(domain.vertices[i])] = now[i];
    for (std::size_t i = 0; i < sel.vertices.size(); ++i) {
      const int v = sel.vertices[i];
      stored[static_cast<std::size_t>(v)] = label_score(fw.logits.row(v).transpose(), sel.labels[i]);
      visited[static_cast<std::size_t>(v)] = 1;
    }

    DomainMeasure next = advance_domain(domain, sel, lambda, cap, is_target, t + 1, &log.pre_truncation_weights);
    log.candidate_vertices = domain.vertices;
    log.candidate_vertices.insert(log.candidate_vertices.end(), sel.vertices.begin(), sel.vertices.end());
    log.graph_weight.assign(pool.graph_count(), 0.0);
    for (std::size_t i = 0; i < log.candidate_vertices.size(); ++i) {
      log.graph_weight[pool.origin_graph(log.candidate_vertices[i])] += log.pre_truncation_weights[i];
    }
    if (cfg.track_distances) {
      log.target_distance = embedding_w1(fw.embeddings, domain.vertices, domain.weights, target_ids, target_w);
      log.source_target_distance = embedding_w1(fw.embeddings, source_ids, source_w, target_ids, target_w);
      log.delta_proxy = embedding_w1(fw.embeddings, domain.vertices, domain.weights, next.vertices, next.weights);
    }
    log.labeled_target_fraction = 1.0 - unlabeled_target_fraction(pool, next);
    log.next = next;
    out.stages.push_back(std::move(log));
    domain = std::move(next);
    ++t;
  }

  out.params = train(in, targets_of(domain), n_classes, stage_train(cfg, t), t > 0 ? &previous : nullptr);
  out.target_predictions = predict_target(pool, forward(in, out.params).logits);
  return out;
}

GgdaResult run_isolated(const GraphPool& pool, const ProgressionConfig& cfg) {
  cfg.validate();
  const GcnInput in = GcnInput::of(pool);
  const int n_classes = pool.n_classes();
  DomainMeasure domain = source_domain(pool);
  GgdaResult out;
  ModelParams params = train(in, targets_of(domain), n_classes, stage_train(cfg, 0));
  for (std::size_t g = 1; g < pool.graph_count(); ++g) {
    const Matrix logits = forward(in, params).logits;
    std::vector<int> labels;
    for (int i = 0; i < pool.graph(g).size(); ++i) {
      labels.push_back(margin_and_prediction(logits.row(pool.offset(g) + i).transpose()).second);
    }
    domain = uniform_domain(pool, g, std::move(labels), static_cast<int>(g));
    StageLog log;
    log.stage = static_cast<int>(g) - 1;
    log.selected = domain.vertices;
    log.selected_labels = domain.labels;
    log.next = domain;
    log.labeled_target_fraction = 1.0 - unlabeled_target_fraction(pool, domain);
    out.stages.push_back(std::move(log));
    params = train(in, targets_of(domain), n_classes, stage_train(cfg, static_cast<int>(g)), &params);
  }
  out.params = params;
  out.target_predictions = predict_target(pool, forward(in, params).logits);
  return out;
}

GgdaResult run_source_only(const GraphPool& pool, const ProgressionConfig& cfg) {
  cfg.validate();
  const GcnInput in = GcnInput::of(pool);
  GgdaResult out;
  out.params = train(in, targets_of(source_domain(pool)), pool.n_classes(), stage_train(cfg, 0));
  out.target_predictions = predict_target(pool, forward(in, out.params).logits);
  return out;
}

}  // namespace ggda
