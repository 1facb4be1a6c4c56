#include "ggda/generation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ggda/errors.hpp"
#include "ggda/parallel.hpp"
#include "ggda/rng.hpp"

namespace ggda {

Matrix pushforward_class_matrix(const Matrix& coupling, const std::vector<int>& src_labels,
                                int n_classes) {
  if (static_cast<Eigen::Index>(src_labels.size()) != coupling.rows()) {
    throw InvalidArgument("pushforward: label count does not match coupling rows");
  }
  Matrix F = Matrix::Zero(coupling.cols(), n_classes);
  for (Eigen::Index i = 0; i < coupling.rows(); ++i) {
    const int y = src_labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= n_classes) throw InvalidArgument("pushforward: unlabeled source vertex");
    F.col(y) += coupling.row(i).transpose();
  }
  for (Eigen::Index j = 0; j < F.rows(); ++j) {
    const double mass = F.row(j).sum();
    if (!(mass > 0.0)) throw InvalidArgument("pushforward: coupling column without mass");
    F.row(j) /= mass;
  }
  return F;
}

double avg_entropy(const Matrix& F) {
  if (F.rows() == 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index j = 0; j < F.rows(); ++j) {
    if (std::abs(F.row(j).sum() - 1.0) > 1e-6) {
      throw InvalidArgument("avg_entropy: row " + std::to_string(j) + " is not a distribution");
    }
    for (Eigen::Index c = 0; c < F.cols(); ++c) {
      const double f = F(j, c);
      if (f > 0.0) total -= f * std::log(f);
    }
  }
  return total / static_cast<double>(F.rows());
}

double label_entropy(const std::vector<int>& labels, int n_classes) {
  std::vector<double> counts(static_cast<std::size_t>(n_classes), 0.0);
  double n = 0.0;
  for (int y : labels) {
    if (y < 0 || y >= n_classes) continue;
    counts[static_cast<std::size_t>(y)] += 1.0;
    n += 1.0;
  }
  double h = 0.0;
  for (double c : counts)
    if (c > 0.0) h -= c / n * std::log(c / n);
  return h;
}

NormContext::NormContext(std::span<const LossComponents> candidates, int n_classes)
    : fitted_(!candidates.empty()),
      log_classes_(n_classes > 1 ? std::log(static_cast<double>(n_classes)) : 1.0) {
  if (!fitted_) return;
  h_lo_ = f_lo_ = std::numeric_limits<double>::infinity();
  h_hi_ = f_hi_ = -std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    h_lo_ = std::min(h_lo_, c.h_pair);
    h_hi_ = std::max(h_hi_, c.h_pair);
    f_lo_ = std::min(f_lo_, c.fgw);
    f_hi_ = std::max(f_hi_, c.fgw);
  }
}

double NormContext::scale(double v, double lo, double hi) {
  if (!(hi > lo)) return v < lo ? kLossFloor : 1.0;
  const double t = (v - lo) / (hi - lo);
  return std::max(kLossFloor, kLossFloor + (1.0 - kLossFloor) * t);
}

double NormContext::scale_entropy(double h) const { return scale(h, h_lo_, h_hi_); }
double NormContext::scale_fgw(double f) const { return scale(f, f_lo_, f_hi_); }
double NormContext::scale_source_entropy(double h) const {
  return std::max(kLossFloor, h / log_classes_);
}

double information_loss(const LossComponents& c, const NormContext& ctx) {
  if (ctx.empty()) throw InvalidArgument("information_loss: empty normalization context");
  return ctx.scale_entropy(c.h_pair) / ctx.scale_source_entropy(c.h_src) * ctx.scale_fgw(c.fgw);
}

double keep_share(double s_loss, double other_loss) {
  const double a = 1.0 / std::max(s_loss, 1e-300);
  const double b = 1.0 / std::max(other_loss, 1e-300);
  return a / (a + b);
}

double keep_probability(double s_loss, std::span<const double> other_losses) {
  if (other_losses.empty()) return 0.5;
  std::vector<double> sorted(other_losses.begin(), other_losses.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  const double median = m % 2 == 1 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  return std::clamp(keep_share(s_loss, median), 0.5, 0.99);
}

namespace {

int class_count(const std::vector<AttributedGraph>& parts) {
  int c = 1;
  for (const auto& g : parts) c = std::max(c, g.n_classes());
  return c;
}

}  // namespace

MatchState warmup_matching(const std::vector<AttributedGraph>& src_parts,
                           const std::vector<AttributedGraph>& tgt_parts, int trials,
                           const FgwConfig& cfg, std::uint64_t seed) {
  if (trials < 1) throw InvalidArgument("warmup: trials must be >= 1");
  if (src_parts.empty() || tgt_parts.empty()) throw InvalidArgument("warmup: no partitions");
  for (const auto& g : src_parts) {
    if (!g.fully_labeled()) throw InvalidArgument("warmup: source partition has unlabeled vertices");
  }
  const std::size_t ps = src_parts.size(), pt = tgt_parts.size();
  const int n_classes = class_count(src_parts);

  MatchState st;
  for (const auto& g : src_parts) st.h_src.push_back(label_entropy(g.labels(), n_classes));

  std::vector<LossComponents> comp(ps * pt);
  st.pair_fgw.assign(ps * pt, 0.0);
  parallel_for(ps * pt, [&](std::size_t job) {
    const std::size_t s = job / pt, t = job % pt;
    auto res = fgw_distance(src_parts[s], tgt_parts[t], cfg);
    const Matrix F = pushforward_class_matrix(res.coupling.pi, src_parts[s].labels(), n_classes);
    comp[job] = {avg_entropy(F), st.h_src[s], res.value};
    st.pair_fgw[job] = res.value;
  });
  st.norm = NormContext(comp, n_classes);

  Rng rng(mix_seed(seed));
  st.matching.assign(pt, 0);
  st.s_loss.assign(pt, 0.0);
  for (std::size_t t = 0; t < pt; ++t) {
    std::vector<std::size_t> cands;
    for (int r = 0; r < trials; ++r) cands.push_back(uniform_index(rng, ps));
    std::size_t nearest = 0;
    for (std::size_t s = 1; s < ps; ++s)
      if (st.pair_fgw[s * pt + t] < st.pair_fgw[nearest * pt + t]) nearest = s;
    cands.push_back(nearest);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s : cands) {
      const double loss = information_loss(comp[s * pt + t], st.norm);
      if (loss < best || (loss == best && static_cast<int>(s) < st.matching[t])) {
        best = loss;
        st.matching[t] = static_cast<int>(s);
      }
    }
    st.s_loss[t] = best;
  }
  return st;
}

AttributedGraph assemble_union(const std::vector<AttributedGraph>& parts) {
  int n = 0;
  const int d = parts.empty() ? 0 : parts.front().dim();
  int n_classes = 0;
  for (const auto& g : parts) {
    if (g.dim() != d) throw InvalidArgument("assemble_union: feature dimensions differ");
    n += g.size();
    n_classes = std::max(n_classes, g.n_classes());
  }
  if (n == 0) throw InvalidArgument("assemble_union: no vertices");
  Matrix X(n, d);
  std::vector<Edge> edges;
  int off = 0;
  for (const auto& g : parts) {
    X.middleRows(off, g.size()) = g.features();
    for (const auto& e : g.edges()) edges.push_back({e.u + off, e.v + off});
    off += g.size();
  }
  return AttributedGraph(std::move(X), std::move(edges), {}, n_classes);
}

GeneratedSequence generate_sequence(const AttributedGraph& src, const AttributedGraph& tgt,
                                    const GenerationConfig& cfg) {
  if (cfg.K < 2) throw InvalidArgument("generate: K must be >= 2");
  if (!src.fully_labeled()) throw InvalidArgument("generate: source graph must be fully labeled");
  if (src.dim() != tgt.dim()) throw InvalidArgument("generate: feature dimensions differ");
  cfg.barycenter.fgw.validate();

  const int ps = cfg.source_parts > 0 ? cfg.source_parts : default_part_count(src.size());
  const int pt = cfg.target_parts > 0 ? cfg.target_parts : default_part_count(tgt.size());

  GeneratedSequence out;
  out.source_partition = partition(src, ps, derive_seed(cfg.seed, 1), cfg.partition);
  out.target_partition = partition(tgt, pt, derive_seed(cfg.seed, 2), cfg.partition);
  std::vector<AttributedGraph> sparts, tparts;
  for (int p = 0; p < ps; ++p) sparts.push_back(induced_subgraph(src, out.source_partition.members(p)));
  for (int p = 0; p < pt; ++p) {
    tparts.push_back(induced_subgraph(tgt, out.target_partition.members(p)).without_labels());
  }

  Rng rng(derive_seed(cfg.seed, 3));
  MatchState& st = out.state;
  if (cfg.random_matching) {
    st.matching.resize(static_cast<std::size_t>(pt));
    for (auto& m : st.matching) m = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(ps)));
    st.s_loss.assign(static_cast<std::size_t>(pt), 0.0);
  } else {
    st = warmup_matching(sparts, tparts, cfg.trials, cfg.barycenter.fgw, derive_seed(cfg.seed, 4));
  }
  const int n_classes = std::max(1, src.n_classes());

  for (int k = 1; k < cfg.K; ++k) {
    struct Job {
      int t, s;
      bool kept;
    };
    std::vector<Job> jobs;
    for (int i = 0; i < pt; ++i) {
      const int t = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(pt)));
      int s = st.matching[static_cast<std::size_t>(t)];
      bool kept = true;
      if (!cfg.random_matching) {
        std::vector<double> others;
        for (int u = 0; u < pt; ++u)
          if (u != t) others.push_back(st.s_loss[static_cast<std::size_t>(u)]);
        const double p_keep = keep_probability(st.s_loss[static_cast<std::size_t>(t)], others);
        if (uniform01(rng) >= p_keep) {
          s = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(ps)));
          kept = s == st.matching[static_cast<std::size_t>(t)];
        }
      }
      jobs.push_back({t, s, kept});
    }

    std::vector<Interpolation> made(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t i) {
      BarycenterConfig bc = cfg.barycenter;
      bc.seed = derive_seed(cfg.seed, 100 + static_cast<std::uint64_t>(k), i);
      try {
        made[i] = interpolate_pair(sparts[static_cast<std::size_t>(jobs[i].s)],
                                   tparts[static_cast<std::size_t>(jobs[i].t)], k, cfg.K, bc);
      } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " (k=" + std::to_string(k) +
                             ", source part " + std::to_string(jobs[i].s) + ", target part " +
                             std::to_string(jobs[i].t) + ")");
      }
    });

    std::vector<AttributedGraph> pieces;
    int offset = 0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      const auto& job = jobs[i];
      const auto& sp = sparts[static_cast<std::size_t>(job.s)];
      SubgraphProvenance pv;
      pv.k = k;
      pv.draw = static_cast<int>(i);
      pv.source_part = job.s;
      pv.target_part = job.t;
      pv.kept_match = job.kept;
      pv.offset = offset;
      pv.size = made[i].graph.size();
      pv.fgw_source = made[i].fgw_source;
      pv.fgw_target = made[i].fgw_target;
      if (!cfg.random_matching) {
        const Matrix F = pushforward_class_matrix(made[i].source_coupling, sp.labels(), n_classes);
        const LossComponents c{avg_entropy(F), st.h_src[static_cast<std::size_t>(job.s)],
                               pv.fgw_source + pv.fgw_target};
        pv.s_loss = information_loss(c, st.norm);
        auto& best = st.s_loss[static_cast<std::size_t>(job.t)];
        if (pv.s_loss < best) {
          best = pv.s_loss;
          st.matching[static_cast<std::size_t>(job.t)] = job.s;
        }
      }
      offset += pv.size;
      out.provenance.push_back(pv);
      pieces.push_back(std::move(made[i].graph));
    }
    out.intermediates.push_back(assemble_union(pieces));
    out.best_s_loss.push_back(st.s_loss);
  }
  return out;
}

}  // namespace ggda
