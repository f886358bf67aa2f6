#pragma once

#include <cassert>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "omd/simplex.hpp"

namespace omd {

/// Thrown when an iterative solver exhausts its budget; carries the best
/// certificate value reached so callers can report or retry.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double best_gap)
      : std::runtime_error(what), best_gap_(best_gap) {}
  double best_gap() const { return best_gap_; }

 private:
  double best_gap_;
};

/// Recurrence constants of a first-order oracle, consumed by the adaptive
/// step-size schedule: (Theta1, Theta2, K0) and the discount theta.
struct RecurrenceConstants {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double k0 = 1.0;
  double theta = 0.0;
};

/// First-order oracle for block-structured minimization. Maps a product
/// distribution to one real vector per block; generalizes the gradient.
struct BlockOracle {
  std::vector<Index> block_sizes;
  std::function<std::vector<Vecd>(const ProductDistribution&)> eval;
  /// Optional sup-norm bound on every output block, asserted in debug runs.
  std::optional<double> bound;
  std::optional<RecurrenceConstants> constants;

  std::vector<Vecd> evaluate(const ProductDistribution& x) const;
};

/// Pair of product distributions z = (x, y), the joint minimax variable.
struct JointDistribution {
  ProductDistribution x;
  ProductDistribution y;
};

/// Collection of per-block matrices Q = (Q_1, ..., Q_d).
using QTensor = std::vector<Matd>;

double qtensor_linf(const QTensor& q);
double qtensor_linf_diff(const QTensor& a, const QTensor& b);

/// Per-block operator values (cost vectors) for the two sides of a saddle
/// problem. Both components are consumed as costs: any maximization sign is
/// already folded into the y component by the adapter.
struct SaddleValues {
  std::vector<Vecd> x;
  std::vector<Vecd> y;
};

/// First-order oracle for block-structured saddle problems: maps a tracked
/// matrix collection and a joint point to per-block operator values.
struct SaddleOracle {
  std::vector<Index> x_sizes;
  std::vector<Index> y_sizes;
  std::function<SaddleValues(const QTensor&, const JointDistribution&)> eval;

  SaddleValues evaluate(const QTensor& q, const JointDistribution& z) const;
};

/// Tracked-matrix update map P(Q, z) with its declared contraction factor
/// and sup-norm bound; the optional Lipschitz constants feed the minimax
/// step-size cap when the adapter knows them.
struct PTensorMap {
  std::vector<Index> x_sizes;
  std::vector<Index> y_sizes;
  std::function<QTensor(const QTensor&, const JointDistribution&)> eval;
  double contraction = 0.0;
  double bound = 1.0;
  std::optional<double> l1;
  std::optional<double> l2;
  std::optional<double> gamma;

  QTensor evaluate(const QTensor& q, const JointDistribution& z) const;
  QTensor zero() const;
};

/// Two-player zero-sum matrix game; `cost` is paid by the row player (the
/// minimizer) to the column player (the maximizer).
struct MatrixGame {
  Matd cost;
};

struct MatrixGameSolution {
  ProbVector x;
  ProbVector y;
  double value = 0.0;
  double gap = 0.0;
  long long iters = 0;
};

/// Exact duality gap max_j (x^T A)_j - min_k (A y)_k at mixed strategies
/// (x, y); a solver-independent equilibrium certificate.
double duality_gap(const Matd& cost, const ProbVector& x, const ProbVector& y);

/// Solves the game by optimistic multiplicative-weights self-play with
/// uniform averaging over gap-triggered restart windows. The returned
/// strategies are the uniform average of the final window and their duality
/// gap is computed exactly from the matrix, so the certificate does not
/// depend on solver quality. Optional warm-start strategies speed up nearly
/// converged instances. Throws NonConvergence with the best gap reached if
/// `max_iters` is exhausted.
MatrixGameSolution solve_matrix_game(const MatrixGame& game, double tol,
                                     long long max_iters,
                                     const ProbVector* x0 = nullptr,
                                     const ProbVector* y0 = nullptr);

/// Witness data for the per-block quasar-convexity inequality
///   f(x*) >= f(x) + sum_i w_i <F_i(x), x*_i - x_i>,
/// with caller-supplied weights w_i = 1/gamma_i.
struct GqcCertificate {
  std::function<double(const ProductDistribution&)> objective;
  BlockOracle oracle;
  ProductDistribution minimizer;
  Vecd weights;
};

struct GqcReport {
  bool holds = false;
  /// Most negative slack f(x*) - f(x) - sum_i w_i <F_i(x), x*_i - x_i>.
  double worst_slack = 0.0;
  int sample_count = 0;
  std::uint64_t seed = 0;
};

GqcReport check_gqc(const GqcCertificate& cert,
                    const std::vector<ProductDistribution>& samples, double tol,
                    std::uint64_t seed_tag = 0);

struct GqccReport {
  bool holds = false;
  /// Most negative slack sum_i psi_i(z) gap_i(z_i) - gap(z).
  double worst_slack = 0.0;
  double psi_sum_max = 0.0;
  int sample_count = 0;
  std::uint64_t seed = 0;
};

/// Checks the saddle counterpart: the max-min gap of the full problem is
/// bounded by the psi-weighted sum of per-block bilinear gaps taken at
/// q_star. Block gaps are exact best-response values of x_i^T [q_star]_i y_i.
GqccReport check_gqcc(
    const std::function<double(const JointDistribution&)>& gap_eval,
    const std::function<Vecd(const JointDistribution&)>& psi_weights,
    const QTensor& q_star, const std::vector<JointDistribution>& samples,
    double tol, std::uint64_t seed_tag = 0);

}  // namespace omd
