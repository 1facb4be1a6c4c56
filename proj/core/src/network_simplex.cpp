#include "ggda/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ggda/errors.hpp"

namespace ggda {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TransportSimplex::TransportSimplex(const Matrix& cost, const Vector& supply,
                                   const Vector& demand)
    : rows_(static_cast<int>(cost.rows())),
      cols_(static_cast<int>(cost.cols())),
      node_count_(rows_ + cols_),
      real_arcs_(static_cast<std::int64_t>(rows_) * cols_),
      all_arcs_(real_arcs_ + node_count_),
      root_(node_count_) {
  if (supply.size() != rows_ || demand.size() != cols_) {
    throw InvalidArgument("transport marginals do not match the cost matrix shape");
  }
  cost_.resize(static_cast<std::size_t>(real_arcs_));
  double max_abs = 0.0;
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) {
      const double c = cost(i, j);
      if (!std::isfinite(c)) throw InvalidArgument("non-finite transport cost");
      cost_[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) +
            static_cast<std::size_t>(j)] = c;
      max_abs = std::max(max_abs, std::abs(c));
    }
  }

  const auto nodes = static_cast<std::size_t>(node_count_ + 1);
  supply_.assign(nodes, 0.0);
  for (int i = 0; i < rows_; ++i) supply_[static_cast<std::size_t>(i)] = supply[i];
  for (int j = 0; j < cols_; ++j) supply_[static_cast<std::size_t>(rows_ + j)] = -demand[j];

  flow_.assign(static_cast<std::size_t>(all_arcs_), 0.0);
  state_.assign(static_cast<std::size_t>(all_arcs_), kStateLower);
  art_source_.assign(static_cast<std::size_t>(node_count_), 0);
  art_target_.assign(static_cast<std::size_t>(node_count_), 0);
  art_cost_.assign(static_cast<std::size_t>(node_count_), 0.0);

  pi_.assign(nodes, 0.0);
  parent_.assign(nodes, -1);
  pred_.assign(nodes, -1);
  thread_.assign(nodes, 0);
  rev_thread_.assign(nodes, 0);
  succ_num_.assign(nodes, 0);
  last_succ_.assign(nodes, 0);
  pred_dir_.assign(nodes, kDirUp);

  // Artificial arcs are priced high enough that any real path is preferred.
  const double art_cost = (max_abs + 1.0) * (node_count_ + 1);
  // Potentials grow to the order of art_cost, so the pricing tolerance has
  // to scale with it rather than with the raw costs.
  epsilon_ = 1e-13 * art_cost;

  parent_[static_cast<std::size_t>(root_)] = -1;
  pred_[static_cast<std::size_t>(root_)] = -1;
  thread_[static_cast<std::size_t>(root_)] = 0;
  rev_thread_[0] = root_;
  succ_num_[static_cast<std::size_t>(root_)] = node_count_ + 1;
  last_succ_[static_cast<std::size_t>(root_)] = root_ - 1;
  pi_[static_cast<std::size_t>(root_)] = 0.0;

  for (int u = 0; u < node_count_; ++u) {
    const auto su = static_cast<std::size_t>(u);
    const std::int64_t e = real_arcs_ + u;
    const auto se = static_cast<std::size_t>(e);
    const auto a = static_cast<std::size_t>(u);
    parent_[su] = root_;
    pred_[su] = e;
    thread_[su] = u + 1;
    rev_thread_[su + 1] = u;
    succ_num_[su] = 1;
    last_succ_[su] = u;
    state_[se] = kStateTree;
    if (supply_[su] >= 0) {
      pred_dir_[su] = kDirUp;
      pi_[su] = 0.0;
      art_source_[a] = u;
      art_target_[a] = root_;
      flow_[se] = supply_[su];
      art_cost_[a] = 0.0;
    } else {
      pred_dir_[su] = kDirDown;
      pi_[su] = art_cost;
      art_source_[a] = root_;
      art_target_[a] = u;
      flow_[se] = -supply_[su];
      art_cost_[a] = art_cost;
    }
  }

  block_size_ = std::max<std::int64_t>(
      10, static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(real_arcs_)))));
}

int TransportSimplex::source(std::int64_t arc) const {
  if (arc < real_arcs_) return static_cast<int>(arc / cols_);
  return art_source_[static_cast<std::size_t>(arc - real_arcs_)];
}

int TransportSimplex::target(std::int64_t arc) const {
  if (arc < real_arcs_) return rows_ + static_cast<int>(arc % cols_);
  return art_target_[static_cast<std::size_t>(arc - real_arcs_)];
}

double TransportSimplex::reduced_cost(std::int64_t arc) const {
  const double c = arc < real_arcs_ ? cost_[static_cast<std::size_t>(arc)]
                                    : art_cost_[static_cast<std::size_t>(arc - real_arcs_)];
  return c + pi_[static_cast<std::size_t>(source(arc))] -
         pi_[static_cast<std::size_t>(target(arc))];
}

bool TransportSimplex::find_entering_arc() {
  // Only real arcs are priced; artificial arcs never re-enter.
  double best = -epsilon_;
  std::int64_t count = block_size_;
  std::int64_t e = next_arc_;
  bool found = false;
  for (std::int64_t scanned = 0; scanned < real_arcs_; ++scanned) {
    const auto se = static_cast<std::size_t>(e);
    if (state_[se] == kStateLower) {
      const std::size_t i = static_cast<std::size_t>(e / cols_);
      const std::size_t j = static_cast<std::size_t>(rows_) + static_cast<std::size_t>(e % cols_);
      const double c = cost_[se] + pi_[i] - pi_[j];
      if (c < best) {
        best = c;
        in_arc_ = e;
        found = true;
      }
    }
    if (++e == real_arcs_) e = 0;
    if (--count == 0) {
      if (found) break;
      count = block_size_;
    }
  }
  if (!found) return false;
  next_arc_ = e;
  return true;
}

void TransportSimplex::find_join_node() {
  int u = source(in_arc_);
  int v = target(in_arc_);
  while (u != v) {
    if (succ_num_[static_cast<std::size_t>(u)] < succ_num_[static_cast<std::size_t>(v)]) {
      u = parent_[static_cast<std::size_t>(u)];
    } else {
      v = parent_[static_cast<std::size_t>(v)];
    }
  }
  join_ = u;
}

bool TransportSimplex::find_leaving_arc() {
  // Entering arcs are always at their lower bound (zero flow); every arc is
  // uncapacitated, so only arcs whose flow decreases can block.
  const int first = source(in_arc_);
  const int second = target(in_arc_);
  delta_ = kInf;
  int result = 0;
  for (int u = first; u != join_; u = parent_[static_cast<std::size_t>(u)]) {
    const auto su = static_cast<std::size_t>(u);
    if (pred_dir_[su] == kDirUp) {
      const double d = flow_[static_cast<std::size_t>(pred_[su])];
      if (d < delta_) {
        delta_ = d;
        u_out_ = u;
        result = 1;
      }
    }
  }
  for (int u = second; u != join_; u = parent_[static_cast<std::size_t>(u)]) {
    const auto su = static_cast<std::size_t>(u);
    if (pred_dir_[su] == kDirDown) {
      const double d = flow_[static_cast<std::size_t>(pred_[su])];
      if (d <= delta_) {
        delta_ = d;
        u_out_ = u;
        result = 2;
      }
    }
  }
  if (result == 1) {
    u_in_ = first;
    v_in_ = second;
  } else {
    u_in_ = second;
    v_in_ = first;
  }
  return result != 0;
}

void TransportSimplex::change_flow() {
  if (delta_ > 0) {
    const double val = delta_;
    flow_[static_cast<std::size_t>(in_arc_)] += val;
    for (int u = source(in_arc_); u != join_; u = parent_[static_cast<std::size_t>(u)]) {
      const auto su = static_cast<std::size_t>(u);
      flow_[static_cast<std::size_t>(pred_[su])] -= pred_dir_[su] * val;
    }
    for (int u = target(in_arc_); u != join_; u = parent_[static_cast<std::size_t>(u)]) {
      const auto su = static_cast<std::size_t>(u);
      flow_[static_cast<std::size_t>(pred_[su])] += pred_dir_[su] * val;
    }
  }
  state_[static_cast<std::size_t>(in_arc_)] = kStateTree;
  const auto out_arc = static_cast<std::size_t>(pred_[static_cast<std::size_t>(u_out_)]);
  flow_[out_arc] = 0.0;
  state_[out_arc] = kStateLower;
}

void TransportSimplex::update_tree_structure() {
  auto& parent = parent_;
  auto& thread = thread_;
  auto& rev_thread = rev_thread_;
  auto& succ_num = succ_num_;
  auto& last_succ = last_succ_;
  auto at = [](int x) { return static_cast<std::size_t>(x); };

  const int old_rev_thread = rev_thread[at(u_out_)];
  const int old_succ_num = succ_num[at(u_out_)];
  const int old_last_succ = last_succ[at(u_out_)];
  v_out_ = parent[at(u_out_)];

  if (u_in_ == u_out_) {
    parent[at(u_in_)] = v_in_;
    pred_[at(u_in_)] = in_arc_;
    pred_dir_[at(u_in_)] = u_in_ == source(in_arc_) ? kDirUp : kDirDown;

    if (thread[at(v_in_)] != u_out_) {
      int after = thread[at(old_last_succ)];
      thread[at(old_rev_thread)] = after;
      rev_thread[at(after)] = old_rev_thread;
      after = thread[at(v_in_)];
      thread[at(v_in_)] = u_out_;
      rev_thread[at(u_out_)] = v_in_;
      thread[at(old_last_succ)] = after;
      rev_thread[at(after)] = old_last_succ;
    }
  } else {
    // When old_rev_thread == v_in, join and v_out coincide.
    const int thread_continue =
        old_rev_thread == v_in_ ? thread[at(old_last_succ)] : thread[at(v_in_)];

    // Re-hang the stem (nodes from u_in up to u_out) below v_in.
    int stem = u_in_;
    int par_stem = v_in_;
    int last = last_succ[at(u_in_)];
    int after = thread[at(last)];
    thread[at(v_in_)] = u_in_;
    dirty_revs_.clear();
    dirty_revs_.push_back(v_in_);
    while (stem != u_out_) {
      const int next_stem = parent[at(stem)];
      thread[at(last)] = next_stem;
      dirty_revs_.push_back(last);

      const int before = rev_thread[at(stem)];
      thread[at(before)] = after;
      rev_thread[at(after)] = before;

      parent[at(stem)] = par_stem;
      par_stem = stem;
      stem = next_stem;

      last = last_succ[at(stem)] == last_succ[at(par_stem)] ? rev_thread[at(par_stem)]
                                                              : last_succ[at(stem)];
      after = thread[at(last)];
    }
    parent[at(u_out_)] = par_stem;
    thread[at(last)] = thread_continue;
    rev_thread[at(thread_continue)] = last;
    last_succ[at(u_out_)] = last;

    if (old_rev_thread != v_in_) {
      thread[at(old_rev_thread)] = after;
      rev_thread[at(after)] = old_rev_thread;
    }

    for (int u : dirty_revs_) rev_thread[at(thread[at(u)])] = u;

    int tmp_sc = 0;
    const int tmp_ls = last_succ[at(u_out_)];
    for (int u = u_out_, p = parent[at(u)]; u != u_in_; u = p, p = parent[at(u)]) {
      pred_[at(u)] = pred_[at(p)];
      pred_dir_[at(u)] = static_cast<signed char>(-pred_dir_[at(p)]);
      tmp_sc += succ_num[at(u)] - succ_num[at(p)];
      succ_num[at(u)] = tmp_sc;
      last_succ[at(p)] = tmp_ls;
    }
    pred_[at(u_in_)] = in_arc_;
    pred_dir_[at(u_in_)] = u_in_ == source(in_arc_) ? kDirUp : kDirDown;
    succ_num[at(u_in_)] = old_succ_num;
  }

  const int up_limit_out = last_succ[at(join_)] == v_in_ ? join_ : -1;
  const int last_succ_out = last_succ[at(u_out_)];
  for (int u = v_in_; u != -1 && last_succ[at(u)] == v_in_; u = parent[at(u)]) {
    last_succ[at(u)] = last_succ_out;
  }

  if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
    for (int u = v_out_; u != up_limit_out && last_succ[at(u)] == old_last_succ;
         u = parent[at(u)]) {
      last_succ[at(u)] = old_rev_thread;
    }
  } else if (last_succ_out != old_last_succ) {
    for (int u = v_out_; u != up_limit_out && last_succ[at(u)] == old_last_succ;
         u = parent[at(u)]) {
      last_succ[at(u)] = last_succ_out;
    }
  }

  for (int u = v_in_; u != join_; u = parent[at(u)]) succ_num[at(u)] += old_succ_num;
  for (int u = v_out_; u != join_; u = parent[at(u)]) succ_num[at(u)] -= old_succ_num;
}

void TransportSimplex::update_potential() {
  const double c = in_arc_ < real_arcs_
                       ? cost_[static_cast<std::size_t>(in_arc_)]
                       : art_cost_[static_cast<std::size_t>(in_arc_ - real_arcs_)];
  const double sigma = pi_[static_cast<std::size_t>(v_in_)] -
                       pi_[static_cast<std::size_t>(u_in_)] -
                       pred_dir_[static_cast<std::size_t>(u_in_)] * c;
  const int end = thread_[static_cast<std::size_t>(last_succ_[static_cast<std::size_t>(u_in_)])];
  for (int u = u_in_; u != end; u = thread_[static_cast<std::size_t>(u)]) {
    pi_[static_cast<std::size_t>(u)] += sigma;
  }
}

TransportSimplex::Result TransportSimplex::solve(std::int64_t max_pivots) {
  Result result;
  while (find_entering_arc()) {
    find_join_node();
    if (!find_leaving_arc()) throw NumericalError("network simplex: unbounded pivot");
    change_flow();
    update_tree_structure();
    update_potential();
    ++result.pivots;
    if (max_pivots >= 0 && result.pivots >= max_pivots) {
      throw NumericalError("network simplex: pivot limit reached");
    }
  }
  result.plan.resize(rows_, cols_);
  double objective = 0.0;
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) {
      const auto a = static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) +
                     static_cast<std::size_t>(j);
      const double f = std::max(0.0, flow_[a]);
      result.plan(i, j) = f;
      objective += f * cost_[a];
    }
  }
  result.objective = objective;
  return result;
}

}  // namespace ggda
