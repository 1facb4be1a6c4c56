#include "ggda/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "ggda/errors.hpp"
#include "ggda/rng.hpp"

namespace ggda {

namespace {

// Weighted graph in compressed adjacency form.
struct WGraph {
  std::vector<int> xadj{0};
  std::vector<int> adjncy;
  std::vector<long long> adjwgt;
  std::vector<int> vwgt;

  int size() const { return static_cast<int>(vwgt.size()); }
  long long total_weight() const {
    return std::accumulate(vwgt.begin(), vwgt.end(), 0LL);
  }
};

WGraph from_edges(int n, std::span<const Edge> edges) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& e : edges) {
    adj[static_cast<std::size_t>(e.u)].push_back(e.v);
    adj[static_cast<std::size_t>(e.v)].push_back(e.u);
  }
  WGraph g;
  g.vwgt.assign(static_cast<std::size_t>(n), 1);
  for (int u = 0; u < n; ++u) {
    for (int v : adj[static_cast<std::size_t>(u)]) {
      g.adjncy.push_back(v);
      g.adjwgt.push_back(1);
    }
    g.xadj.push_back(static_cast<int>(g.adjncy.size()));
  }
  return g;
}

long long cut_of(const WGraph& g, const std::vector<int>& part) {
  long long cut = 0;
  for (int u = 0; u < g.size(); ++u) {
    for (int k = g.xadj[u]; k < g.xadj[u + 1]; ++k) {
      if (part[static_cast<std::size_t>(u)] != part[static_cast<std::size_t>(g.adjncy[k])]) {
        cut += g.adjwgt[k];
      }
    }
  }
  return cut / 2;
}

// Heavy-edge matching; returns the coarse graph and fills `cmap`.
WGraph coarsen(const WGraph& g, int max_vwgt, Rng& rng, std::vector<int>& cmap) {
  const int n = g.size();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  shuffle(order.begin(), order.end(), rng);
  std::vector<int> match(static_cast<std::size_t>(n), -1);
  for (int u : order) {
    if (match[static_cast<std::size_t>(u)] >= 0) continue;
    int best = u;
    long long best_w = -1;
    for (int k = g.xadj[u]; k < g.xadj[u + 1]; ++k) {
      const int v = g.adjncy[k];
      if (match[static_cast<std::size_t>(v)] >= 0 || v == u) continue;
      if (g.vwgt[static_cast<std::size_t>(u)] + g.vwgt[static_cast<std::size_t>(v)] > max_vwgt) {
        continue;
      }
      if (g.adjwgt[k] > best_w) {
        best_w = g.adjwgt[k];
        best = v;
      }
    }
    match[static_cast<std::size_t>(u)] = best;
    match[static_cast<std::size_t>(best)] = u;
  }
  cmap.assign(static_cast<std::size_t>(n), -1);
  int cn = 0;
  for (int u = 0; u < n; ++u) {
    if (cmap[static_cast<std::size_t>(u)] >= 0) continue;
    cmap[static_cast<std::size_t>(u)] = cn;
    cmap[static_cast<std::size_t>(match[static_cast<std::size_t>(u)])] = cn;
    ++cn;
  }
  WGraph c;
  c.vwgt.assign(static_cast<std::size_t>(cn), 0);
  std::vector<std::vector<int>> members(static_cast<std::size_t>(cn));
  for (int u = 0; u < n; ++u) {
    c.vwgt[static_cast<std::size_t>(cmap[static_cast<std::size_t>(u)])] +=
        g.vwgt[static_cast<std::size_t>(u)];
    members[static_cast<std::size_t>(cmap[static_cast<std::size_t>(u)])].push_back(u);
  }
  std::vector<long long> acc(static_cast<std::size_t>(cn), 0);
  std::vector<int> touched;
  for (int cu = 0; cu < cn; ++cu) {
    touched.clear();
    for (int u : members[static_cast<std::size_t>(cu)]) {
      for (int k = g.xadj[u]; k < g.xadj[u + 1]; ++k) {
        const int cv = cmap[static_cast<std::size_t>(g.adjncy[k])];
        if (cv == cu) continue;
        if (acc[static_cast<std::size_t>(cv)] == 0) touched.push_back(cv);
        acc[static_cast<std::size_t>(cv)] += g.adjwgt[k];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (int cv : touched) {
      c.adjncy.push_back(cv);
      c.adjwgt.push_back(acc[static_cast<std::size_t>(cv)]);
      acc[static_cast<std::size_t>(cv)] = 0;
    }
    c.xadj.push_back(static_cast<int>(c.adjncy.size()));
  }
  return c;
}

struct Bounds {
  long long lo;
  long long hi;
};

// Greedy graph growing: parts are grown one after another from a seed by
// repeatedly absorbing the frontier vertex with the largest gain.
std::vector<int> grow_regions(const WGraph& g, int parts, Rng& rng) {
  const int n = g.size();
  const long long total = g.total_weight();
  std::vector<int> part(static_cast<std::size_t>(n), -1);
  std::vector<long long> weight(static_cast<std::size_t>(parts), 0);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  shuffle(order.begin(), order.end(), rng);
  auto is_isolated = [&](int u) { return g.xadj[u] == g.xadj[u + 1]; };

  long long assigned = 0;
  for (int p = 0; p + 1 < parts; ++p) {
    const long long target = (total - assigned) / (parts - p);
    // gain[u] = weight of edges into the part minus edges into unassigned
    std::vector<long long> gain(static_cast<std::size_t>(n), 0);
    std::vector<char> in_frontier(static_cast<std::size_t>(n), 0);
    std::vector<int> frontier;
    auto absorb = [&](int u) {
      part[static_cast<std::size_t>(u)] = p;
      weight[static_cast<std::size_t>(p)] += g.vwgt[static_cast<std::size_t>(u)];
      assigned += g.vwgt[static_cast<std::size_t>(u)];
      for (int k = g.xadj[u]; k < g.xadj[u + 1]; ++k) {
        const int v = g.adjncy[k];
        if (part[static_cast<std::size_t>(v)] >= 0) continue;
        gain[static_cast<std::size_t>(v)] += 2 * g.adjwgt[k];
        if (!in_frontier[static_cast<std::size_t>(v)]) {
          in_frontier[static_cast<std::size_t>(v)] = 1;
          frontier.push_back(v);
        }
      }
    };
    while (weight[static_cast<std::size_t>(p)] < target) {
      // drop stale frontier entries
      frontier.erase(std::remove_if(frontier.begin(), frontier.end(),
                                    [&](int v) { return part[static_cast<std::size_t>(v)] >= 0; }),
                     frontier.end());
      int pick = -1;
      if (!frontier.empty()) {
        long long best = 0;
        for (int v : frontier) {
          long long ext = 0;
          for (int k = g.xadj[v]; k < g.xadj[v + 1]; ++k) {
            if (part[static_cast<std::size_t>(g.adjncy[k])] < 0) ext += g.adjwgt[k];
          }
          const long long score = gain[static_cast<std::size_t>(v)] - ext;
          if (pick < 0 || score > best) {
            best = score;
            pick = v;
          }
        }
      } else {
        for (int u : order) {
          if (part[static_cast<std::size_t>(u)] < 0 && !is_isolated(u)) {
            pick = u;
            break;
          }
        }
      }
      if (pick < 0) break;  // only isolated vertices remain
      if (weight[static_cast<std::size_t>(p)] + g.vwgt[static_cast<std::size_t>(pick)] >
              target + target / 4 &&
          weight[static_cast<std::size_t>(p)] > 0) {
        break;
      }
      absorb(pick);
    }
  }
  // Remaining connected vertices join the last part; isolated vertices go to
  // whichever part is currently smallest.
  for (int u : order) {
    if (part[static_cast<std::size_t>(u)] < 0 && !is_isolated(u)) {
      part[static_cast<std::size_t>(u)] = parts - 1;
      weight[static_cast<std::size_t>(parts - 1)] += g.vwgt[static_cast<std::size_t>(u)];
    }
  }
  for (int u : order) {
    if (part[static_cast<std::size_t>(u)] < 0) {
      const auto smallest = static_cast<int>(
          std::min_element(weight.begin(), weight.end()) - weight.begin());
      part[static_cast<std::size_t>(u)] = smallest;
      weight[static_cast<std::size_t>(smallest)] += g.vwgt[static_cast<std::size_t>(u)];
    }
  }
  return part;
}

std::vector<long long> part_weights(const WGraph& g, const std::vector<int>& part, int parts) {
  std::vector<long long> w(static_cast<std::size_t>(parts), 0);
  for (int u = 0; u < g.size(); ++u) {
    w[static_cast<std::size_t>(part[static_cast<std::size_t>(u)])] +=
        g.vwgt[static_cast<std::size_t>(u)];
  }
  return w;
}

// Connectivity of u to every part it touches (sparse).
void connectivity(const WGraph& g, const std::vector<int>& part, int u,
                  std::vector<long long>& conn, std::vector<int>& touched) {
  touched.clear();
  for (int k = g.xadj[u]; k < g.xadj[u + 1]; ++k) {
    const int p = part[static_cast<std::size_t>(g.adjncy[k])];
    if (conn[static_cast<std::size_t>(p)] == 0) touched.push_back(p);
    conn[static_cast<std::size_t>(p)] += g.adjwgt[k];
  }
}

// Forces every part into [lo, hi]. May increase the cut.
void rebalance(const WGraph& g, std::vector<int>& part, int parts, Bounds b) {
  auto w = part_weights(g, part, parts);
  std::vector<long long> conn(static_cast<std::size_t>(parts), 0);
  std::vector<int> touched;
  for (int guard = 0; guard < 4 * g.size() + 8; ++guard) {
    int from = -1;
    int to = -1;
    for (int p = 0; p < parts; ++p) {
      if (w[static_cast<std::size_t>(p)] > b.hi) from = p;
    }
    if (from < 0) {
      for (int p = 0; p < parts; ++p) {
        if (w[static_cast<std::size_t>(p)] < b.lo) to = p;
      }
      if (to < 0) return;
    }
    // Choose the best (vertex, destination) move for the violating part.
    long long best_gain = 0;
    int best_u = -1;
    int best_to = -1;
    for (int u = 0; u < g.size(); ++u) {
      const int own = part[static_cast<std::size_t>(u)];
      if (from >= 0 && own != from) continue;
      if (to >= 0 && (own == to || w[static_cast<std::size_t>(own)] -
                                           g.vwgt[static_cast<std::size_t>(u)] <
                                       b.lo)) {
        continue;
      }
      connectivity(g, part, u, conn, touched);
      const long long internal = conn[static_cast<std::size_t>(own)];
      auto consider = [&](int dest) {
        if (dest == own) return;
        if (from >= 0 &&
            w[static_cast<std::size_t>(dest)] + g.vwgt[static_cast<std::size_t>(u)] > b.hi) {
          return;
        }
        const long long gain = conn[static_cast<std::size_t>(dest)] - internal;
        if (best_u < 0 || gain > best_gain) {
          best_gain = gain;
          best_u = u;
          best_to = dest;
        }
      };
      if (to >= 0) {
        consider(to);
      } else {
        for (int p = 0; p < parts; ++p) consider(p);
      }
      for (int p : touched) conn[static_cast<std::size_t>(p)] = 0;
    }
    if (best_u < 0) return;  // no admissible move (coarse weights too lumpy)
    const int own = part[static_cast<std::size_t>(best_u)];
    w[static_cast<std::size_t>(own)] -= g.vwgt[static_cast<std::size_t>(best_u)];
    w[static_cast<std::size_t>(best_to)] += g.vwgt[static_cast<std::size_t>(best_u)];
    part[static_cast<std::size_t>(best_u)] = best_to;
  }
}

// Boundary refinement: moves with positive gain, or zero gain moves that
// improve balance. Never increases the cut.
void refine(const WGraph& g, std::vector<int>& part, int parts, Bounds b, int passes, Rng& rng,
            PartitionStats* stats) {
  auto w = part_weights(g, part, parts);
  std::vector<long long> conn(static_cast<std::size_t>(parts), 0);
  std::vector<int> touched;
  std::vector<int> order(static_cast<std::size_t>(g.size()));
  std::iota(order.begin(), order.end(), 0);
  for (int pass = 0; pass < passes; ++pass) {
    const long long before = cut_of(g, part);
    shuffle(order.begin(), order.end(), rng);
    int moves = 0;
    for (int u : order) {
      const int own = part[static_cast<std::size_t>(u)];
      const long long wu = g.vwgt[static_cast<std::size_t>(u)];
      connectivity(g, part, u, conn, touched);
      const long long internal = conn[static_cast<std::size_t>(own)];
      int best = -1;
      long long best_gain = 0;
      for (int p : touched) {
        if (p == own) continue;
        if (w[static_cast<std::size_t>(p)] + wu > b.hi) continue;
        if (w[static_cast<std::size_t>(own)] - wu < b.lo) continue;
        const long long gain = conn[static_cast<std::size_t>(p)] - internal;
        const bool balances =
            w[static_cast<std::size_t>(p)] + wu < w[static_cast<std::size_t>(own)];
        if (gain > best_gain || (gain == 0 && best < 0 && balances)) {
          best_gain = gain;
          best = p;
        }
      }
      for (int p : touched) conn[static_cast<std::size_t>(p)] = 0;
      if (best >= 0) {
        part[static_cast<std::size_t>(u)] = best;
        w[static_cast<std::size_t>(own)] -= wu;
        w[static_cast<std::size_t>(best)] += wu;
        if (best_gain > 0) ++moves;
      }
    }
    const long long after = cut_of(g, part);
    if (stats) stats->refinement_cuts.emplace_back(before, after);
    if (after > before) throw NumericalError("partition refinement increased the edge cut");
    if (moves == 0) break;
  }
}

}  // namespace

std::vector<int> Partition::members(int p) const {
  std::vector<int> out;
  for (std::size_t v = 0; v < assignment.size(); ++v) {
    if (assignment[v] == p) out.push_back(static_cast<int>(v));
  }
  return out;
}

std::pair<int, int> balance_bounds(int n, int parts, double imbalance) {
  const double ideal = static_cast<double>(n) / parts;
  const int lo = std::max(1, static_cast<int>(std::floor((1.0 - imbalance) * ideal)));
  const int hi = std::max(lo, static_cast<int>(std::ceil((1.0 + imbalance) * ideal)));
  return {lo, hi};
}

long long edge_cut(std::span<const Edge> edges, std::span<const int> assignment) {
  long long cut = 0;
  for (const auto& e : edges) {
    if (assignment[static_cast<std::size_t>(e.u)] != assignment[static_cast<std::size_t>(e.v)]) {
      ++cut;
    }
  }
  return cut;
}

long long edge_cut(const AttributedGraph& graph, const Partition& partition) {
  return edge_cut(graph.edges(), partition.assignment);
}

int default_part_count(int n) {
  const int p = std::clamp((n + 499) / 500, 2, 64);
  return std::max(1, std::min(p, n));
}

void validate_partition(const Partition& partition, int n) {
  if (static_cast<int>(partition.assignment.size()) != n) {
    throw InvalidArgument("partition does not cover every vertex");
  }
  std::vector<int> sizes(static_cast<std::size_t>(partition.parts), 0);
  for (int p : partition.assignment) {
    if (p < 0 || p >= partition.parts) throw InvalidArgument("part id out of range");
    ++sizes[static_cast<std::size_t>(p)];
  }
  for (int s : sizes) {
    if (s == 0) throw InvalidArgument("partition has an empty part");
  }
  if (sizes != partition.part_sizes) throw InvalidArgument("part_sizes disagree with assignment");
}

Partition partition(const AttributedGraph& graph, int parts, std::uint64_t seed,
                    const PartitionOptions& options, PartitionStats* stats) {
  const int n = graph.size();
  if (parts < 1) throw InvalidArgument("part count must be >= 1");
  if (parts > n) {
    throw InvalidArgument("part count " + std::to_string(parts) + " exceeds vertex count " +
                          std::to_string(n));
  }
  Partition result;
  result.parts = parts;
  if (parts == 1) {
    result.assignment.assign(static_cast<std::size_t>(n), 0);
    result.part_sizes = {n};
    return result;
  }

  Rng rng(seed);
  const auto [lo, hi] = balance_bounds(n, parts, options.imbalance);
  const Bounds fine{lo, hi};

  // Coarsening.
  std::vector<WGraph> levels{from_edges(n, graph.edges())};
  std::vector<std::vector<int>> cmaps;
  const int coarsest_target = std::max(2 * parts, 64);
  const int max_vwgt = std::max(1, static_cast<int>(1.5 * n / coarsest_target));
  while (levels.back().size() > coarsest_target) {
    std::vector<int> cmap;
    WGraph next = coarsen(levels.back(), max_vwgt, rng, cmap);
    if (next.size() > 0.95 * levels.back().size()) break;
    cmaps.push_back(std::move(cmap));
    levels.push_back(std::move(next));
  }
  if (stats) stats->levels = static_cast<int>(levels.size());

  // Initial partition on the coarsest graph: best of a few growth attempts.
  const WGraph& coarsest = levels.back();
  std::vector<int> part;
  long long best_cut = -1;
  for (int attempt = 0; attempt < std::max(1, options.initial_attempts); ++attempt) {
    std::vector<int> candidate = grow_regions(coarsest, parts, rng);
    rebalance(coarsest, candidate, parts, fine);
    refine(coarsest, candidate, parts, fine, options.refinement_passes, rng, stats);
    const long long c = cut_of(coarsest, candidate);
    if (best_cut < 0 || c < best_cut) {
      best_cut = c;
      part = std::move(candidate);
    }
  }

  // Uncoarsening with refinement at every level.
  for (std::size_t lvl = cmaps.size(); lvl-- > 0;) {
    const auto& cmap = cmaps[lvl];
    std::vector<int> finer(cmap.size());
    for (std::size_t u = 0; u < cmap.size(); ++u) {
      finer[u] = part[static_cast<std::size_t>(cmap[u])];
    }
    part = std::move(finer);
    if (lvl == 0) rebalance(levels[lvl], part, parts, fine);
    refine(levels[lvl], part, parts, fine, options.refinement_passes, rng, stats);
  }
  if (cmaps.empty()) rebalance(levels.front(), part, parts, fine);

  // Guarantee non-empty parts.
  std::vector<int> sizes(static_cast<std::size_t>(parts), 0);
  for (int p : part) ++sizes[static_cast<std::size_t>(p)];
  for (int p = 0; p < parts; ++p) {
    if (sizes[static_cast<std::size_t>(p)] > 0) continue;
    const auto largest =
        static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    for (int u = 0; u < n; ++u) {
      if (part[static_cast<std::size_t>(u)] == largest) {
        part[static_cast<std::size_t>(u)] = p;
        --sizes[static_cast<std::size_t>(largest)];
        ++sizes[static_cast<std::size_t>(p)];
        break;
      }
    }
  }
  result.assignment = std::move(part);
  result.part_sizes = std::move(sizes);
  return result;
}

}  // namespace ggda
