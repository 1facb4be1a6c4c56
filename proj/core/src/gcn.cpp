#include "ggda/gcn.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <string>

#include "ggda/bundle.hpp"
#include "ggda/errors.hpp"
#include "ggda/rng.hpp"

namespace ggda {

namespace {

Matrix glorot_matrix(int rows, int cols, Rng& rng) {
  const double lim = std::sqrt(6.0 / (rows + cols));
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = (2.0 * uniform01(rng) - 1.0) * lim;
  return m;
}

template <typename F>
void for_each_block(ModelParams& p, F&& f) {
  f(p.W1, true);
  f(p.b1, false);
  f(p.W2, true);
  f(p.b2, false);
  f(p.Wc, true);
  f(p.bc, false);
}

template <typename F>
void for_each_block(const ModelParams& p, F&& f) {
  for_each_block(const_cast<ModelParams&>(p), [&](auto& block, bool w) { f(std::as_const(block), w); });
}

template <typename Block>
void copy_out(const Block& b, Vector& flat, Eigen::Index& pos) {
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) flat[pos++] = b(i, j);
}

template <typename Block>
void copy_in(Block& b, const Vector& flat, Eigen::Index& pos) {
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) b(i, j) = flat[pos++];
}

Eigen::Index param_count(const ModelParams& p) {
  Eigen::Index n = 0;
  for_each_block(p, [&](const auto& b, bool) { n += b.size(); });
  return n;
}

// Rows of the supervised set, their 1-hop neighbourhood and the propagation
// block between the two.
struct Frontier {
  std::vector<int> hop1;
  SparseMatrix block;
  Matrix p;
};

Frontier make_frontier(const GcnInput& in, std::span<const int> rows) {
  Frontier f;
  std::vector<int> local(static_cast<std::size_t>(in.size()), -1);
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int v = rows[r];
    if (v < 0 || v >= in.size()) throw InvalidArgument("gcn: vertex id out of range");
    for (SparseMatrix::InnerIterator it(in.a_hat, v); it; ++it) {
      auto& slot = local[static_cast<std::size_t>(it.col())];
      if (slot < 0) {
        slot = static_cast<int>(f.hop1.size());
        f.hop1.push_back(static_cast<int>(it.col()));
      }
      trip.emplace_back(static_cast<int>(r), slot, it.value());
    }
  }
  f.block.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(f.hop1.size()));
  f.block.setFromTriplets(trip.begin(), trip.end());
  f.p.resize(static_cast<Eigen::Index>(f.hop1.size()), in.ax.cols());
  for (std::size_t i = 0; i < f.hop1.size(); ++i) f.p.row(static_cast<Eigen::Index>(i)) = in.ax.row(f.hop1[i]);
  return f;
}

void check_shapes(const ModelParams& p, int dim) {
  const int h = p.hidden();
  if (p.input_dim() != dim) throw InvalidArgument("gcn: feature dimension does not match model");
  if (p.b1.size() != h || p.W2.rows() != h || p.W2.cols() != h || p.b2.size() != h ||
      p.Wc.rows() != h || p.bc.size() != p.Wc.cols()) {
    throw InvalidArgument("gcn: inconsistent parameter shapes");
  }
}

void check_targets(const WeightedTargets& t, int n_classes) {
  if (t.labels.size() != t.vertices.size() ||
      t.weights.size() != static_cast<Eigen::Index>(t.vertices.size())) {
    throw InvalidArgument("gcn: targets have mismatched lengths");
  }
  if (t.vertices.empty() || !(t.weights.sum() > 0.0) || (t.weights.array() < 0.0).any()) {
    throw InvalidArgument("gcn: zero-weight domain");
  }
  for (int y : t.labels)
    if (y < 0 || y >= n_classes) throw InvalidArgument("gcn: supervised vertex without a valid label");
}

double frontier_loss(const Frontier& f, const ModelParams& p, const WeightedTargets& t,
                     double weight_decay, const Matrix* mask, ModelParams* grad) {
  Matrix h1_pre = f.p * p.W1;
  h1_pre.rowwise() += p.b1.transpose();
  Matrix h1 = h1_pre.cwiseMax(0.0);
  if (mask != nullptr) h1.array() *= mask->array();
  const Matrix q = f.block * h1;
  Matrix z_pre = q * p.W2;
  z_pre.rowwise() += p.b2.transpose();
  const Matrix z = z_pre.cwiseMax(0.0);
  Matrix logits = z * p.Wc;
  logits.rowwise() += p.bc.transpose();

  double loss = 0.0;
  Matrix g_logits(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(r).array() - mx).exp();
    const double s = e.sum();
    const int y = t.labels[static_cast<std::size_t>(r)];
    const double w = t.weights[r];
    loss += w * (std::log(s) + mx - logits(r, y));
    g_logits.row(r) = w * e / s;
    g_logits(r, y) -= w;
  }
  loss += 0.5 * weight_decay * (p.W1.squaredNorm() + p.W2.squaredNorm() + p.Wc.squaredNorm());
  if (grad == nullptr) return loss;

  grad->Wc = z.transpose() * g_logits + weight_decay * p.Wc;
  grad->bc = g_logits.colwise().sum().transpose();
  Matrix dz = (g_logits * p.Wc.transpose()).array() * (z_pre.array() > 0.0).cast<double>();
  grad->W2 = q.transpose() * dz + weight_decay * p.W2;
  grad->b2 = dz.colwise().sum().transpose();
  Matrix dh1 = f.block.transpose() * (dz * p.W2.transpose());
  if (mask != nullptr) dh1.array() *= mask->array();
  dh1.array() *= (h1_pre.array() > 0.0).cast<double>();
  grad->W1 = f.p.transpose() * dh1 + weight_decay * p.W1;
  grad->b1 = dh1.colwise().sum().transpose();
  return loss;
}

}  // namespace

ModelParams ModelParams::glorot(int input_dim, int hidden, int classes, std::uint64_t seed) {
  if (input_dim < 1 || hidden < 1 || classes < 1) throw InvalidArgument("gcn: empty model shape");
  Rng rng(mix_seed(seed));
  ModelParams p;
  p.W1 = glorot_matrix(input_dim, hidden, rng);
  p.b1 = Vector::Zero(hidden);
  p.W2 = glorot_matrix(hidden, hidden, rng);
  p.b2 = Vector::Zero(hidden);
  p.Wc = glorot_matrix(hidden, classes, rng);
  p.bc = Vector::Zero(classes);
  return p;
}

ModelParams ModelParams::zeros_like(const ModelParams& s) {
  ModelParams p = s;
  for_each_block(p, [](auto& b, bool) { b.setZero(); });
  return p;
}

Vector ModelParams::flatten() const {
  Vector flat(param_count(*this));
  Eigen::Index pos = 0;
  for_each_block(*this, [&](const auto& b, bool) { copy_out(b, flat, pos); });
  return flat;
}

void ModelParams::assign(const Vector& flat) {
  if (flat.size() != param_count(*this)) throw InvalidArgument("gcn: flat parameter size mismatch");
  Eigen::Index pos = 0;
  for_each_block(*this, [&](auto& b, bool) { copy_in(b, flat, pos); });
}

Vector ModelParams::weight_mask() const {
  Vector mask(param_count(*this));
  Eigen::Index pos = 0;
  for_each_block(*this, [&](const auto& b, bool is_weight) {
    mask.segment(pos, b.size()).setConstant(is_weight ? 1.0 : 0.0);
    pos += b.size();
  });
  return mask;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidArgument("train: epochs must be positive");
  if (!(learning_rate > 0.0)) throw InvalidArgument("train: learning_rate must be positive");
  if (weight_decay < 0.0) throw InvalidArgument("train: weight_decay must be >= 0");
  if (hidden < 1) throw InvalidArgument("train: hidden must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument("train: dropout must lie in [0, 1)");
}

SparseMatrix normalized_adjacency(int n, std::span<const Edge> edges) {
  std::vector<double> deg(static_cast<std::size_t>(n), 1.0);
  for (const auto& e : edges) {
    deg[static_cast<std::size_t>(e.u)] += 1.0;
    deg[static_cast<std::size_t>(e.v)] += 1.0;
  }
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) + 2 * edges.size());
  for (int i = 0; i < n; ++i) trip.emplace_back(i, i, 1.0 / deg[static_cast<std::size_t>(i)]);
  for (const auto& e : edges) {
    const double w = 1.0 / std::sqrt(deg[static_cast<std::size_t>(e.u)] * deg[static_cast<std::size_t>(e.v)]);
    trip.emplace_back(e.u, e.v, w);
    trip.emplace_back(e.v, e.u, w);
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

GcnInput::GcnInput(int n, std::span<const Edge> edges, Matrix features)
    : a_hat(normalized_adjacency(n, edges)), x(std::move(features)) {
  if (x.rows() != n) throw InvalidArgument("gcn: feature rows do not match vertex count");
  ax = a_hat * x;
}

GcnInput GcnInput::of(const GraphPool& pool) {
  return GcnInput(pool.total_vertices(), pool.union_edges(), pool.features());
}

GcnInput GcnInput::of(const AttributedGraph& g) { return GcnInput(g.size(), g.edges(), g.features()); }

ForwardResult forward(const GcnInput& in, const ModelParams& p) {
  check_shapes(p, static_cast<int>(in.x.cols()));
  Matrix h1 = in.ax * p.W1;
  h1.rowwise() += p.b1.transpose();
  h1 = h1.cwiseMax(0.0);
  Matrix z = in.a_hat * h1 * p.W2;
  z.rowwise() += p.b2.transpose();
  ForwardResult out;
  out.embeddings = z.cwiseMax(0.0);
  out.logits = out.embeddings * p.Wc;
  out.logits.rowwise() += p.bc.transpose();
  return out;
}

ForwardResult forward(const GraphPool& pool, const ModelParams& p) {
  return forward(GcnInput::of(pool), p);
}

double loss_and_gradient(const GcnInput& in, const ModelParams& p, const WeightedTargets& t,
                         double weight_decay, ModelParams* grad) {
  check_shapes(p, static_cast<int>(in.x.cols()));
  check_targets(t, p.classes());
  const Frontier f = make_frontier(in, t.vertices);
  if (grad != nullptr) *grad = ModelParams::zeros_like(p);
  return frontier_loss(f, p, t, weight_decay, nullptr, grad);
}

ModelParams train(const GcnInput& in, const WeightedTargets& t, int n_classes,
                  const TrainConfig& cfg, const ModelParams* init) {
  cfg.validate();
  ModelParams p = cfg.warm_start && init != nullptr
                      ? *init
                      : ModelParams::glorot(static_cast<int>(in.x.cols()), cfg.hidden, n_classes, cfg.seed);
  check_shapes(p, static_cast<int>(in.x.cols()));
  check_targets(t, p.classes());
  WeightedTargets norm = t;
  norm.weights /= t.weights.sum();
  const Frontier f = make_frontier(in, norm.vertices);

  Vector theta = p.flatten();
  Vector m = Vector::Zero(theta.size()), v = Vector::Zero(theta.size());
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  Rng rng(derive_seed(cfg.seed, 0x5eed));
  ModelParams grad = ModelParams::zeros_like(p);
  Matrix mask(static_cast<Eigen::Index>(f.hop1.size()), p.hidden());
  const double keep_scale = 1.0 / (1.0 - cfg.dropout);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const Matrix* mp = nullptr;
    if (cfg.dropout > 0.0) {
      for (Eigen::Index i = 0; i < mask.size(); ++i)
        mask.data()[i] = uniform01(rng) < cfg.dropout ? 0.0 : keep_scale;
      mp = &mask;
    }
    frontier_loss(f, p, norm, cfg.weight_decay, mp, &grad);
    const Vector g = grad.flatten();
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(b1, epoch), c2 = 1.0 - std::pow(b2, epoch);
    theta.array() -= cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    p.assign(theta);
  }
  if (!theta.allFinite()) throw NumericalError("train: parameters diverged");
  return p;
}

std::pair<double, int> margin_and_prediction(const Eigen::Ref<const Vector>& logits) {
  if (logits.size() == 0) throw InvalidArgument("margin: empty logits");
  int best = 0;
  for (Eigen::Index c = 1; c < logits.size(); ++c)
    if (logits[c] > logits[best]) best = static_cast<int>(c);
  if (logits.size() == 1) return {0.0, best};
  double second = -INFINITY;
  for (Eigen::Index c = 0; c < logits.size(); ++c)
    if (c != best) second = std::max(second, logits[c]);
  return {logits[best] - second, best};
}

double label_score(const Eigen::Ref<const Vector>& logits, int label) {
  if (label < 0 || label >= logits.size()) throw InvalidArgument("label_score: invalid class id");
  double rival = -INFINITY;
  for (Eigen::Index c = 0; c < logits.size(); ++c)
    if (c != label) rival = std::max(rival, logits[c]);
  if (logits.size() == 1) return 0.0;
  return logits[label] - rival;
}

void save_params(const ModelParams& p, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const Vector flat = p.flatten();
  write_f32(dir / "params.f32", Matrix(flat));
  std::ofstream meta(dir / "params.meta");
  meta << "input_dim=" << p.input_dim() << "\nhidden=" << p.hidden() << "\nclasses=" << p.classes()
       << "\ncount=" << flat.size() << "\n";
  if (!meta) throw DataError((dir / "params.meta").string() + ": write failed");
}

ModelParams load_params(const std::filesystem::path& dir) {
  const auto meta_path = dir / "params.meta";
  std::ifstream meta(meta_path);
  if (!meta) throw DataError(meta_path.string() + ":0: cannot open");
  std::map<std::string, long long> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(meta, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError(meta_path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    try {
      kv[line.substr(0, eq)] = std::stoll(line.substr(eq + 1));
    } catch (const std::exception&) {
      throw DataError(meta_path.string() + ":" + std::to_string(lineno) + ": bad integer");
    }
  }
  for (const char* key : {"input_dim", "hidden", "classes"})
    if (!kv.count(key)) throw DataError(meta_path.string() + ":0: missing " + key);
  ModelParams p = ModelParams::glorot(static_cast<int>(kv["input_dim"]), static_cast<int>(kv["hidden"]),
                                      static_cast<int>(kv["classes"]), 0);
  const Matrix flat = read_f32(dir / "params.f32", p.flatten().size(), 1);
  p.assign(flat.col(0));
  return p;
}

}  // namespace ggda
