#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// O(n^3) Hungarian method (potentials form) for a square cost matrix.
/// Returns the column assigned to each row.
inline std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n);
  for (int j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

inline double assignment_cost(const Eigen::MatrixXd& cost) {
  const auto match = hungarian(cost);
  double total = 0.0;
  for (int i = 0; i < static_cast<int>(match.size()); ++i) total += cost(i, match[i]);
  return total;
}

/// E(pi) = sum_ijkl [(1-a) M_ij + a |C1_ik - C2_jl|^q]^p pi_ij pi_kl by direct
/// quadruple loop, with M_ij = ||x_i - x'_j||^q.
inline double fgw_energy_naive(const Eigen::MatrixXd& x1, const Eigen::MatrixXd& c1,
                               const Eigen::MatrixXd& x2, const Eigen::MatrixXd& c2,
                               const Eigen::MatrixXd& pi, double alpha, double p, double q) {
  double e = 0.0;
  for (int i = 0; i < pi.rows(); ++i)
    for (int j = 0; j < pi.cols(); ++j)
      for (int k = 0; k < pi.rows(); ++k)
        for (int l = 0; l < pi.cols(); ++l) {
          const double m = std::pow((x1.row(i) - x2.row(j)).norm(), q);
          const double s = std::pow(std::abs(c1(i, k) - c2(j, l)), q);
          e += std::pow((1 - alpha) * m + alpha * s, p) * pi(i, j) * pi(k, l);
        }
  return e;
}

/// Optimality certificate for a transport plan: Bellman-Ford on the residual
/// bipartite graph (row->col with cost c, col->row with cost -c where the plan
/// carries flow). A negative cycle means the plan can be improved.
inline bool residual_has_negative_cycle(const Eigen::MatrixXd& cost, const Eigen::MatrixXd& plan,
                                        double flow_tol, double cost_tol) {
  const int n = static_cast<int>(cost.rows()), m = static_cast<int>(cost.cols());
  std::vector<double> dist(n + m, 0.0);
  for (int round = 0; round <= n + m; ++round) {
    bool changed = false;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) {
        if (dist[i] + cost(i, j) < dist[n + j] - cost_tol) {
          dist[n + j] = dist[i] + cost(i, j);
          changed = true;
        }
        if (plan(i, j) > flow_tol && dist[n + j] - cost(i, j) < dist[i] - cost_tol) {
          dist[i] = dist[n + j] - cost(i, j);
          changed = true;
        }
      }
    if (!changed) return false;
  }
  return true;
}

}  // namespace oracle
