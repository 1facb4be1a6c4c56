#pragma once

#include <cstdint>
#include <vector>

#include "ggda/types.hpp"

namespace ggda {

/// Primal network simplex for the dense transportation problem
///
///   min sum_ij cost(i,j) * flow(i,j)  s.t.  rows sum to `supply`,
///                                           columns sum to `demand`.
///
/// The spanning tree is kept in parent/thread/successor-count form with an
/// artificial root and one artificial arc per node; entering arcs are chosen
/// with block search pricing. Costs may be negative.
class TransportSimplex {
 public:
  struct Result {
    Matrix plan;
    double objective = 0.0;
    std::int64_t pivots = 0;
  };

  TransportSimplex(const Matrix& cost, const Vector& supply, const Vector& demand);

  Result solve(std::int64_t max_pivots = -1);

 private:
  enum : signed char { kStateTree = 0, kStateLower = 1 };
  enum : signed char { kDirUp = 1, kDirDown = -1 };

  int source(std::int64_t arc) const;
  int target(std::int64_t arc) const;
  double reduced_cost(std::int64_t arc) const;

  bool find_entering_arc();
  void find_join_node();
  bool find_leaving_arc();
  void change_flow();
  void update_tree_structure();
  void update_potential();

  int rows_;
  int cols_;
  int node_count_;
  std::int64_t real_arcs_;
  std::int64_t all_arcs_;
  int root_;

  std::vector<double> cost_;
  std::vector<double> flow_;
  std::vector<signed char> state_;
  std::vector<int> art_source_;
  std::vector<int> art_target_;
  std::vector<double> art_cost_;

  std::vector<double> supply_;
  std::vector<double> pi_;
  std::vector<int> parent_;
  std::vector<std::int64_t> pred_;
  std::vector<int> thread_;
  std::vector<int> rev_thread_;
  std::vector<int> succ_num_;
  std::vector<int> last_succ_;
  std::vector<signed char> pred_dir_;
  std::vector<int> dirty_revs_;

  std::int64_t block_size_;
  std::int64_t next_arc_ = 0;
  double epsilon_;

  std::int64_t in_arc_ = -1;
  int join_ = -1;
  int u_in_ = -1;
  int v_in_ = -1;
  int u_out_ = -1;
  int v_out_ = -1;
  double delta_ = 0.0;
};

}  // namespace ggda
