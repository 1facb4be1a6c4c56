#include "ggda/ot.hpp"

#include <cmath>
#include <string>

#include "ggda/errors.hpp"
#include "ggda/network_simplex.hpp"

namespace ggda {

void validate_histogram(const Vector& h, const char* what) {
  if (h.size() == 0) throw InvalidArgument(std::string(what) + ": empty histogram");
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0)) {
      throw InvalidArgument(std::string(what) + ": histogram entry " + std::to_string(i) +
                            " is not strictly positive");
    }
  }
  if (std::abs(h.sum() - 1.0) > 1e-9) {
    throw InvalidArgument(std::string(what) + ": histogram does not sum to 1");
  }
}

double marginal_error(const Coupling& c) {
  if (c.pi.rows() != c.row_marginal.size() || c.pi.cols() != c.col_marginal.size()) {
    return INFINITY;
  }
  const double rows = (c.pi.rowwise().sum() - c.row_marginal).cwiseAbs().maxCoeff();
  const double cols = (c.pi.colwise().sum().transpose() - c.col_marginal).cwiseAbs().maxCoeff();
  return std::max(rows, cols);
}

void validate_coupling(const Coupling& c, double tol) {
  if (c.pi.rows() != c.row_marginal.size() || c.pi.cols() != c.col_marginal.size()) {
    throw InvalidArgument("coupling shape does not match its marginals");
  }
  if ((c.pi.array() < 0.0).any()) throw InvalidArgument("coupling has negative entries");
  const double err = marginal_error(c);
  if (err > tol) {
    throw InvalidArgument("coupling marginals off by " + std::to_string(err));
  }
}

Coupling product_coupling(const Vector& h, const Vector& h2) {
  return Coupling{h * h2.transpose(), h, h2};
}

Matrix solve_linear_transport(const Matrix& cost, const Vector& h, const Vector& h2) {
  TransportSimplex simplex(cost, h, h2);
  return simplex.solve().plan;
}

double solve_linear_transport_value(const Matrix& cost, const Vector& h, const Vector& h2) {
  TransportSimplex simplex(cost, h, h2);
  return simplex.solve().objective;
}

OtResult wasserstein_exact(const Matrix& cost, const Vector& h, const Vector& h2, double p) {
  if (!(p >= 1.0)) throw InvalidArgument("wasserstein_exact: p must be >= 1");
  if (cost.rows() != h.size() || cost.cols() != h2.size()) {
    throw InvalidArgument("wasserstein_exact: cost shape does not match histograms");
  }
  if ((cost.array() < 0.0).any()) throw InvalidArgument("wasserstein_exact: negative cost entry");
  validate_histogram(h, "wasserstein_exact");
  validate_histogram(h2, "wasserstein_exact");
  const Matrix powered = p == 1.0 ? cost : Matrix(cost.array().pow(p));
  TransportSimplex simplex(powered, h, h2);
  auto solved = simplex.solve();
  OtResult out;
  out.value = std::pow(std::max(0.0, solved.objective), 1.0 / p);
  out.coupling = Coupling{std::move(solved.plan), h, h2};
  out.iters = static_cast<int>(solved.pivots);
  out.converged = true;
  return out;
}

Matrix euclidean_distances(const Matrix& a, const Matrix& b) {
  Matrix d(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      d(i, j) = (a.row(i) - b.row(j)).norm();
    }
  }
  return d;
}

}  // namespace ggda
