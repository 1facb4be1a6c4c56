#include "ggda/fgw.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ggda/errors.hpp"

namespace ggda {

void FgwConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("fgw: alpha must lie in [0, 1]");
  if (!(p >= 1.0)) throw InvalidArgument("fgw: p must be >= 1");
  if (q != 1 && q != 2) throw InvalidArgument("fgw: q must be 1 or 2");
  if (max_iters < 1) throw InvalidArgument("fgw: max_iters must be >= 1");
  if (!(tol > 0.0)) throw InvalidArgument("fgw: tol must be > 0");
}

namespace {

void check_input(const FgwInput& g, const char* side) {
  const auto n = g.features.rows();
  if (n == 0) throw InvalidArgument(std::string("fgw: empty graph ") + side);
  if (g.structure.rows() != n || g.structure.cols() != n || g.hist.size() != n) {
    throw InvalidArgument(std::string("fgw: inconsistent sizes for graph ") + side);
  }
  validate_histogram(g.hist, "fgw");
}

double dot(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

}  // namespace

FgwTensor::FgwTensor(const FgwInput& a, const FgwInput& b, const FgwConfig& cfg)
    : factored_(cfg.p == 1.0 && cfg.q == 2), alpha_(cfg.alpha), p_(cfg.p), q_(cfg.q) {
  if (a.features.cols() != b.features.cols()) {
    throw InvalidArgument("fgw: feature dimensions differ");
  }
  const Matrix d = euclidean_distances(a.features, b.features);
  m_ = q_ == 2 ? Matrix(d.array().square()) : d;
  c1_ = a.structure;
  c2_ = b.structure;
  if (factored_) {
    c1_sq_ = c1_.array().square();
    c2_sq_ = c2_.array().square();
  }
}

Matrix FgwTensor::apply(const Matrix& pi) const {
  const auto n = m_.rows(), m = m_.cols();
  if (factored_) {
    const Vector r = pi.rowwise().sum();
    const Vector c = pi.colwise().sum().transpose();
    Matrix out = (1.0 - alpha_) * pi.sum() * m_;
    if (alpha_ > 0.0) {
      const Vector cr = c1_sq_ * r;
      const Vector cc = c2_sq_ * c;
      Matrix cross = c1_ * pi * c2_.transpose();
      out.noalias() += alpha_ * (cr.replicate(1, m) + cc.transpose().replicate(n, 1) - 2.0 * cross);
    }
    return out;
  }
  Matrix out = Matrix::Zero(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double feat = (1.0 - alpha_) * m_(i, j);
      double acc = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        const double cik = c1_(i, k);
        for (Eigen::Index l = 0; l < m; ++l) {
          const double w = pi(k, l);
          if (w == 0.0) continue;
          const double diff = std::abs(cik - c2_(j, l));
          const double s = q_ == 2 ? diff * diff : diff;
          const double t = feat + alpha_ * s;
          acc += (p_ == 1.0 ? t : std::pow(t, p_)) * w;
        }
      }
      out(i, j) = acc;
    }
  }
  return out;
}

Matrix FgwTensor::apply_transpose(const Matrix& pi) const {
  if (factored_) {
    // Only the feature term is asymmetric under (ij) <-> (kl).
    Matrix out = apply(pi);
    out.array() += (1.0 - alpha_) * (dot(m_, pi) - pi.sum() * m_.array());
    return out;
  }
  const auto n = m_.rows(), m = m_.cols();
  Matrix out = Matrix::Zero(n, m);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = 0; l < m; ++l) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
          const double w = pi(i, j);
          if (w == 0.0) continue;
          const double diff = std::abs(c1_(i, k) - c2_(j, l));
          const double s = q_ == 2 ? diff * diff : diff;
          const double t = (1.0 - alpha_) * m_(i, j) + alpha_ * s;
          acc += (p_ == 1.0 ? t : std::pow(t, p_)) * w;
        }
      }
      out(k, l) = acc;
    }
  }
  return out;
}

OtResult fgw_distance(const FgwInput& a, const FgwInput& b, const FgwConfig& cfg,
                      const Matrix* init) {
  cfg.validate();
  check_input(a, "1");
  check_input(b, "2");
  Coupling coupling{a.hist * b.hist.transpose(), a.hist, b.hist};
  if (init != nullptr) {
    validate_coupling(Coupling{*init, a.hist, b.hist}, 1e-8);
    coupling.pi = *init;
  }
  const FgwTensor tensor(a, b, cfg);
  Matrix& pi = coupling.pi;

  Matrix t_pi = tensor.apply(pi);
  Matrix tt_pi = tensor.apply_transpose(pi);
  double energy = dot(pi, t_pi);

  OtResult out;
  out.trace.push_back(energy);
  for (int it = 0; it < cfg.max_iters; ++it) {
    const Matrix grad = t_pi + tt_pi;
    const Matrix target = solve_linear_transport(grad, a.hist, b.hist);
    const Matrix dir = target - pi;
    const double slope = dot(dir, grad);
    out.iters = it + 1;
    if (slope >= -1e-15 * std::max(1.0, std::abs(energy))) {
      out.converged = true;
      break;
    }
    const Matrix t_dir = tensor.apply(dir);
    const double curv = dot(dir, t_dir);
    double step = 1.0;
    if (curv > 0.0) step = std::clamp(-slope / (2.0 * curv), 0.0, 1.0);
    if (step <= 0.0) {
      out.converged = true;
      break;
    }
    pi += step * dir;
    t_pi += step * t_dir;
    tt_pi += step * tensor.apply_transpose(dir);
    const double next = dot(pi, t_pi);
    if (next > energy + 1e-9 * std::max(1.0, std::abs(energy))) {
      throw NumericalError("fgw: objective increased from " + std::to_string(energy) + " to " +
                           std::to_string(next));
    }
    const double decrease = energy - next;
    energy = std::min(energy, next);
    out.trace.push_back(energy);
    if (decrease <= cfg.tol * std::max(std::abs(energy), 1e-300)) {
      out.converged = true;
      break;
    }
  }
  // Incremental updates drift slightly; report the energy of the final plan.
  pi = pi.cwiseMax(0.0);
  energy = tensor.energy(pi);
  out.value = std::pow(std::max(0.0, energy), 1.0 / cfg.p);
  out.coupling = std::move(coupling);
  return out;
}

OtResult fgw_distance(const AttributedGraph& g1, const AttributedGraph& g2, const FgwConfig& cfg,
                      const std::optional<Coupling>& init) {
  const Matrix* start = init ? &init->pi : nullptr;
  return fgw_distance(FgwInput::of(g1), FgwInput::of(g2), cfg, start);
}

double evaluate_fgw_cost(const FgwInput& a, const FgwInput& b, const Matrix& pi,
                         const FgwConfig& cfg) {
  cfg.validate();
  check_input(a, "1");
  check_input(b, "2");
  validate_coupling(Coupling{pi, a.hist, b.hist}, 1e-8);
  const FgwTensor tensor(a, b, cfg);
  return std::pow(std::max(0.0, tensor.energy(pi)), 1.0 / cfg.p);
}

double evaluate_fgw_cost(const AttributedGraph& g1, const AttributedGraph& g2,
                         const Coupling& coupling, const FgwConfig& cfg) {
  return evaluate_fgw_cost(FgwInput::of(g1), FgwInput::of(g2), coupling.pi, cfg);
}

Prop2Check check_prop2(const AttributedGraph& g1, const Matrix& coords1,
                       const AttributedGraph& g2, const Matrix& coords2, const FgwConfig& cfg) {
  if (!g1.fully_labeled() || !g2.fully_labeled()) {
    throw InvalidArgument("check_prop2: both graphs must be fully labeled");
  }
  if (coords1.rows() != g1.size() || coords2.rows() != g2.size() || coords1.cols() == 0 ||
      coords1.cols() != coords2.cols()) {
    throw InvalidArgument("check_prop2: missing or mismatched structure coordinates");
  }
  FgwConfig fcfg = cfg;
  fcfg.q = 1;
  fcfg.validate();

  const Matrix s1 = euclidean_distances(coords1, coords1);
  const Matrix s2 = euclidean_distances(coords2, coords2);
  const Matrix dx = euclidean_distances(g1.features(), g2.features());
  const Matrix dz = euclidean_distances(coords1, coords2);
  Matrix ground = (1.0 - fcfg.alpha) * dx + fcfg.alpha * dz;
  for (int i = 0; i < g1.size(); ++i) {
    for (int j = 0; j < g2.size(); ++j) {
      ground(i, j) += std::abs(static_cast<double>(g1.labels()[i] - g2.labels()[j]));
    }
  }
  const OtResult w = wasserstein_exact(ground, g1.hist(), g2.hist(), fcfg.p);

  const FgwInput a{g1.features(), s1, g1.hist()};
  const FgwInput b{g2.features(), s2, g2.hist()};
  Prop2Check out;
  out.wp = w.value;
  out.fgw_at_wp_coupling = evaluate_fgw_cost(a, b, w.coupling.pi, fcfg);
  out.fgw = fgw_distance(a, b, fcfg, &w.coupling.pi).value;
  out.holds = out.fgw / 2.0 <= out.wp + 1e-9;
  return out;
}

}  // namespace ggda
