#include "omd/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace omd {

namespace {

void check_block_shapes(const std::vector<Index>& sizes,
                        const std::vector<Vecd>& values, const char* what) {
  if (values.size() != sizes.size()) {
    throw std::invalid_argument(std::string(what) + ": expected " +
                                std::to_string(sizes.size()) +
                                " blocks, got " +
                                std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (values[i].size() != sizes[i]) {
      throw std::invalid_argument(
          std::string(what) + ": block " + std::to_string(i) + " has size " +
          std::to_string(values[i].size()) + ", expected " +
          std::to_string(sizes[i]));
    }
    if (!values[i].allFinite()) {
      throw std::domain_error(std::string(what) + ": block " +
                              std::to_string(i) + " has non-finite entries");
    }
  }
}

}  // namespace

std::vector<Vecd> BlockOracle::evaluate(const ProductDistribution& x) const {
  if (!eval) throw std::invalid_argument("oracle has no evaluator");
  if (x.blocks() != static_cast<Index>(block_sizes.size())) {
    throw std::invalid_argument("oracle: point has " +
                                std::to_string(x.blocks()) +
                                " blocks, expected " +
                                std::to_string(block_sizes.size()));
  }
  std::vector<Vecd> out = eval(x);
  check_block_shapes(block_sizes, out, "oracle output");
  if (bound) {
    for (const Vecd& v : out) {
      (void)v;
      assert(v.lpNorm<Eigen::Infinity>() <= *bound + 1e-12);
    }
  }
  return out;
}

double qtensor_linf(const QTensor& q) {
  double m = 0.0;
  for (const Matd& b : q) {
    if (b.size() > 0) m = std::max(m, b.cwiseAbs().maxCoeff());
  }
  return m;
}

double qtensor_linf_diff(const QTensor& a, const QTensor& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("qtensor_linf_diff: block count mismatch");
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols()) {
      throw std::invalid_argument("qtensor_linf_diff: block " +
                                  std::to_string(i) + " shape mismatch");
    }
    if (a[i].size() > 0) m = std::max(m, (a[i] - b[i]).cwiseAbs().maxCoeff());
  }
  return m;
}

SaddleValues SaddleOracle::evaluate(const QTensor& q,
                                    const JointDistribution& z) const {
  if (!eval) throw std::invalid_argument("saddle oracle has no evaluator");
  if (z.x.blocks() != static_cast<Index>(x_sizes.size()) ||
      z.y.blocks() != static_cast<Index>(y_sizes.size())) {
    throw std::invalid_argument("saddle oracle: block count mismatch");
  }
  SaddleValues out = eval(q, z);
  check_block_shapes(x_sizes, out.x, "saddle oracle x output");
  check_block_shapes(y_sizes, out.y, "saddle oracle y output");
  return out;
}

namespace {

void check_q_shapes(const std::vector<Index>& x_sizes,
                    const std::vector<Index>& y_sizes, const QTensor& q,
                    const char* what) {
  if (q.size() != x_sizes.size()) {
    throw std::invalid_argument(std::string(what) + ": block count mismatch");
  }
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i].rows() != x_sizes[i] || q[i].cols() != y_sizes[i]) {
      throw std::invalid_argument(std::string(what) + ": block " +
                                  std::to_string(i) + " shape mismatch");
    }
    if (!q[i].allFinite()) {
      throw std::domain_error(std::string(what) + ": block " +
                              std::to_string(i) + " has non-finite entries");
    }
  }
}

}  // namespace

QTensor PTensorMap::evaluate(const QTensor& q,
                             const JointDistribution& z) const {
  if (!eval) throw std::invalid_argument("p-tensor map has no evaluator");
  check_q_shapes(x_sizes, y_sizes, q, "p-tensor input");
  if (z.x.blocks() != static_cast<Index>(x_sizes.size()) ||
      z.y.blocks() != static_cast<Index>(y_sizes.size())) {
    throw std::invalid_argument("p-tensor map: block count mismatch");
  }
  QTensor out = eval(q, z);
  check_q_shapes(x_sizes, y_sizes, out, "p-tensor output");
  assert(qtensor_linf(out) <= bound + 1e-9);
  return out;
}

QTensor PTensorMap::zero() const {
  QTensor q;
  q.reserve(x_sizes.size());
  for (std::size_t i = 0; i < x_sizes.size(); ++i) {
    q.push_back(Matd::Zero(x_sizes[i], y_sizes[i]));
  }
  return q;
}

double duality_gap(const Matd& cost, const ProbVector& x,
                   const ProbVector& y) {
  if (x.size() != cost.rows() || y.size() != cost.cols()) {
    throw std::invalid_argument("duality_gap: strategy sizes do not match");
  }
  const Vecd row_payoffs = cost.transpose() * x.weights();
  const Vecd col_payoffs = cost * y.weights();
  return row_payoffs.maxCoeff() - col_payoffs.minCoeff();
}

MatrixGameSolution solve_matrix_game(const MatrixGame& game, double tol,
                                     long long max_iters, const ProbVector* x0,
                                     const ProbVector* y0) {
  const Matd& a = game.cost;
  const Index n = a.rows();
  const Index m = a.cols();
  if (n < 1 || m < 1) throw std::invalid_argument("matrix game is empty");
  if (!a.allFinite()) throw std::domain_error("matrix game has non-finite payoffs");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (max_iters < 1) throw std::invalid_argument("iteration budget must be positive");

  const double scale = a.cwiseAbs().maxCoeff();
  const double eta = std::min(0.5, scale > 0.0 ? 1.0 / (4.0 * scale) : 0.5);

  Vecd log_x = Vecd::Zero(n);
  Vecd log_y = Vecd::Zero(m);
  if (x0) log_x = x0->weights().array().max(1e-300).log();
  if (y0) log_y = y0->weights().array().max(1e-300).log();

  auto to_dist = [](const Vecd& logw) {
    Vecd w = (logw.array() - logw.maxCoeff()).exp();
    w /= w.sum();
    return w;
  };

  Vecd x = to_dist(log_x);
  Vecd y = to_dist(log_y);
  Vecd loss_prev = a * y;
  Vecd gain_prev = a.transpose() * x;

  double best_gap = std::numeric_limits<double>::infinity();
  long long window_cap = 64;
  Vecd x_acc = Vecd::Zero(n);
  Vecd y_acc = Vecd::Zero(m);
  long long window_len = 0;

  for (long long t = 1; t <= max_iters; ++t) {
    const Vecd loss = a * y;
    const Vecd gain = a.transpose() * x;
    log_x -= eta * (2.0 * loss - loss_prev);
    log_y += eta * (2.0 * gain - gain_prev);
    log_x.array() -= log_x.maxCoeff();
    log_y.array() -= log_y.maxCoeff();
    loss_prev = loss;
    gain_prev = gain;
    x = to_dist(log_x);
    y = to_dist(log_y);

    x_acc += x;
    y_acc += y;
    ++window_len;

    const Vecd x_avg = x_acc / static_cast<double>(window_len);
    const Vecd y_avg = y_acc / static_cast<double>(window_len);
    ProbVector px(x_avg);
    ProbVector py(y_avg);
    const double gap = duality_gap(a, px, py);
    best_gap = std::min(best_gap, gap);
    if (gap <= tol) {
      const double value = px.weights().dot(a * py.weights());
      return MatrixGameSolution{std::move(px), std::move(py), value, gap, t};
    }
    if (window_len >= window_cap) {
      window_cap *= 2;
      x_acc.setZero();
      y_acc.setZero();
      window_len = 0;
    }
  }
  throw NonConvergence("matrix game solver exhausted " +
                           std::to_string(max_iters) +
                           " iterations; best duality gap " +
                           std::to_string(best_gap),
                       best_gap);
}

GqcReport check_gqc(const GqcCertificate& cert,
                    const std::vector<ProductDistribution>& samples,
                    double tol, std::uint64_t seed_tag) {
  if (!cert.objective) throw std::invalid_argument("check_gqc: missing objective");
  if (cert.weights.size() !=
      static_cast<Index>(cert.oracle.block_sizes.size())) {
    throw std::invalid_argument("check_gqc: one weight per block required");
  }
  if (cert.weights.minCoeff() < 0.0) {
    throw std::invalid_argument("check_gqc: weights must be nonnegative");
  }
  const double f_star = cert.objective(cert.minimizer);
  double worst = std::numeric_limits<double>::infinity();
  for (const ProductDistribution& x : samples) {
    const std::vector<Vecd> fx = cert.oracle.evaluate(x);
    double linear = 0.0;
    for (Index i = 0; i < x.blocks(); ++i) {
      linear += cert.weights[i] *
                fx[i].dot(cert.minimizer[i].weights() - x[i].weights());
    }
    worst = std::min(worst, f_star - cert.objective(x) - linear);
  }
  GqcReport report;
  report.worst_slack = worst;
  report.holds = worst >= -tol;
  report.sample_count = static_cast<int>(samples.size());
  report.seed = seed_tag;
  return report;
}

GqccReport check_gqcc(
    const std::function<double(const JointDistribution&)>& gap_eval,
    const std::function<Vecd(const JointDistribution&)>& psi_weights,
    const QTensor& q_star, const std::vector<JointDistribution>& samples,
    double tol, std::uint64_t seed_tag) {
  if (!gap_eval || !psi_weights) {
    throw std::invalid_argument("check_gqcc: missing evaluator");
  }
  double worst = std::numeric_limits<double>::infinity();
  double psi_max = 0.0;
  for (const JointDistribution& z : samples) {
    if (z.x.blocks() != static_cast<Index>(q_star.size()) ||
        z.y.blocks() != static_cast<Index>(q_star.size())) {
      throw std::invalid_argument("check_gqcc: sample block count mismatch");
    }
    const Vecd psi = psi_weights(z);
    if (psi.size() != static_cast<Index>(q_star.size())) {
      throw std::invalid_argument("check_gqcc: psi size mismatch");
    }
    psi_max = std::max(psi_max, psi.sum());
    double rhs = 0.0;
    for (std::size_t i = 0; i < q_star.size(); ++i) {
      rhs += psi[static_cast<Index>(i)] *
             duality_gap(q_star[i], z.x[static_cast<Index>(i)],
                         z.y[static_cast<Index>(i)]);
    }
    worst = std::min(worst, rhs - gap_eval(z));
  }
  GqccReport report;
  report.worst_slack = worst;
  report.holds = worst >= -tol;
  report.psi_sum_max = psi_max;
  report.sample_count = static_cast<int>(samples.size());
  report.seed = seed_tag;
  return report;
}

}  // namespace omd
