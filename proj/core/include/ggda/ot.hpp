#pragma once

#include <vector>

#include "ggda/types.hpp"

namespace ggda {

/// A transport plan together with the marginals it is meant to satisfy.
struct Coupling {
  Matrix pi;
  Vector row_marginal;
  Vector col_marginal;
};

struct OtResult {
  /// Minimized cost raised to the 1/p power.
  double value = 0.0;
  Coupling coupling;
  int iters = 0;
  bool converged = false;
  /// Objective (before the 1/p power) after every iteration, starting with
  /// the initial plan. Empty for solvers without iterations.
  std::vector<double> trace;
};

/// Throws InvalidArgument unless h is a fully supported histogram
/// (entries > 0, sum 1 within 1e-9).
void validate_histogram(const Vector& h, const char* what);

/// Max absolute deviation of the plan's row/column sums from its marginals.
double marginal_error(const Coupling& coupling);

/// Throws InvalidArgument if the plan has negative entries or marginal_error
/// exceeds `tol`.
void validate_coupling(const Coupling& coupling, double tol = 1e-8);

/// Independent coupling h h'^T.
Coupling product_coupling(const Vector& h, const Vector& h2);

/// Exact discrete p-Wasserstein transport over an explicit ground cost:
/// minimizes sum cost[i,j]^p pi[i,j] with network simplex and reports the
/// optimum to the 1/p power.
OtResult wasserstein_exact(const Matrix& cost, const Vector& h, const Vector& h2, double p = 1.0);

/// Minimizer of <cost, pi> over Pi(h, h2); costs may be negative.
Matrix solve_linear_transport(const Matrix& cost, const Vector& h, const Vector& h2);

/// Optimal value of the same problem.
double solve_linear_transport_value(const Matrix& cost, const Vector& h, const Vector& h2);

/// Pairwise Euclidean distances between the rows of a and b.
Matrix euclidean_distances(const Matrix& a, const Matrix& b);

}  // namespace ggda
