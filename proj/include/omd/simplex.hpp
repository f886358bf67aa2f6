#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace omd {

template <class Scalar>
using Vec = Eigen::Vector<Scalar, Eigen::Dynamic>;
template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vecd = Vec<double>;
using Matd = Mat<double>;
using Index = Eigen::Index;

/// Point on the probability simplex: nonnegative entries summing to one.
///
/// Construction accepts weights whose sum deviates from one by at most 1e-9
/// (floating drift) and renormalizes; larger deviations are rejected as
/// caller bugs. After construction the sum is one within 1e-12.
template <class Scalar>
class ProbVec {
 public:
  explicit ProbVec(Vec<Scalar> weights) : w_(std::move(weights)) {
    if (w_.size() < 1) throw std::invalid_argument("ProbVec: empty weights");
    Scalar sum = 0;
    for (Index j = 0; j < w_.size(); ++j) {
      if (!std::isfinite(w_[j]))
        throw std::domain_error("ProbVec: non-finite entry");
      if (w_[j] < Scalar(0))
        throw std::domain_error("ProbVec: negative entry " +
                                std::to_string(static_cast<double>(w_[j])));
      sum += w_[j];
    }
    if (std::abs(sum - Scalar(1)) > Scalar(1e-9))
      throw std::invalid_argument("ProbVec: weights sum to " +
                                  std::to_string(static_cast<double>(sum)) +
                                  ", expected 1");
    w_ /= sum;
  }

  static ProbVec uniform(Index n) {
    return ProbVec(Vec<Scalar>::Constant(n, Scalar(1) / Scalar(n)));
  }

  static ProbVec point_mass(Index n, Index j) {
    Vec<Scalar> w = Vec<Scalar>::Zero(n);
    w[j] = Scalar(1);
    return ProbVec(std::move(w));
  }

  const Vec<Scalar>& weights() const { return w_; }
  Scalar operator[](Index j) const { return w_[j]; }
  Index size() const { return w_.size(); }

 private:
  Vec<Scalar> w_;
};

using ProbVector = ProbVec<double>;

/// Ordered list of probability vectors; the joint variable x = (x_1,...,x_d).
template <class Scalar>
class ProductDist {
 public:
  ProductDist() = default;
  explicit ProductDist(std::vector<ProbVec<Scalar>> blocks)
      : blocks_(std::move(blocks)) {
    if (blocks_.empty())
      throw std::invalid_argument("ProductDist: needs at least one block");
  }

  static ProductDist uniform(const std::vector<Index>& sizes) {
    std::vector<ProbVec<Scalar>> b;
    b.reserve(sizes.size());
    for (Index n : sizes) b.push_back(ProbVec<Scalar>::uniform(n));
    return ProductDist(std::move(b));
  }

  Index blocks() const { return static_cast<Index>(blocks_.size()); }
  const ProbVec<Scalar>& operator[](Index i) const {
    return blocks_[static_cast<size_t>(i)];
  }
  ProbVec<Scalar>& operator[](Index i) {
    return blocks_[static_cast<size_t>(i)];
  }

  std::vector<Index> sizes() const {
    std::vector<Index> s;
    s.reserve(blocks_.size());
    for (const auto& b : blocks_) s.push_back(b.size());
    return s;
  }

  auto begin() const { return blocks_.begin(); }
  auto end() const { return blocks_.end(); }

 private:
  std::vector<ProbVec<Scalar>> blocks_;
};

using ProductDistribution = ProductDist<double>;

/// KL(p||q) = sum_j p(j) log(p(j)/q(j)), with 0 log(0/.) = 0.
/// Requires q(j) > 0 wherever p(j) > 0.
template <class Scalar>
Scalar kl_divergence(const ProbVec<Scalar>& p, const ProbVec<Scalar>& q) {
  if (p.size() != q.size())
    throw std::invalid_argument("kl_divergence: length mismatch");
  Scalar kl = 0;
  for (Index j = 0; j < p.size(); ++j) {
    if (p[j] == Scalar(0)) continue;
    if (q[j] == Scalar(0))
      throw std::domain_error("kl_divergence: q has a zero where p > 0");
    kl += p[j] * std::log(p[j] / q[j]);
  }
  return kl < Scalar(0) ? Scalar(0) : kl;
}

/// Chi-squared divergence sum_j (p(j)-q(j))^2 / q(j); q must be positive.
template <class Scalar>
Scalar chi_squared(const ProbVec<Scalar>& p, const ProbVec<Scalar>& q) {
  if (p.size() != q.size())
    throw std::invalid_argument("chi_squared: length mismatch");
  Scalar acc = 0;
  for (Index j = 0; j < q.size(); ++j) {
    if (q[j] == Scalar(0))
      throw std::domain_error("chi_squared: q has a zero entry");
    Scalar diff = p[j] - q[j];
    acc += diff * diff / q[j];
  }
  return acc;
}

/// Var_p(v) = sum_j p(j) (v(j) - E_p[v])^2.
template <class Scalar, class Derived>
Scalar variance_under(const ProbVec<Scalar>& p,
                      const Eigen::MatrixBase<Derived>& v) {
  if (p.size() != v.size())
    throw std::invalid_argument("variance_under: length mismatch");
  const Scalar mean = p.weights().dot(v);
  Scalar acc = 0;
  for (Index j = 0; j < p.size(); ++j) {
    Scalar dev = v[j] - mean;
    acc += p[j] * dev * dev;
  }
  return acc;
}

/// Negative entropy v(p) = sum_j p(j) log p(j), with 0 log 0 = 0.
template <class Scalar>
Scalar entropy_v(const ProbVec<Scalar>& p) {
  Scalar acc = 0;
  for (Index j = 0; j < p.size(); ++j)
    if (p[j] > Scalar(0)) acc += p[j] * std::log(p[j]);
  return acc;
}

/// Mirror (proximal) step argmin_p eta <f, p> + KL(p||g).
///
/// Closed form p(j) proportional to g(j) exp(-eta f(j)), evaluated in the
/// log domain with a running-max subtraction so large eta ||f|| cannot
/// overflow.
template <class Scalar, class Derived>
ProbVec<Scalar> kl_prox(const ProbVec<Scalar>& g,
                        const Eigen::MatrixBase<Derived>& f, Scalar eta) {
  if (g.size() != f.size())
    throw std::invalid_argument("kl_prox: length mismatch");
  if (!(eta > Scalar(0)))
    throw std::invalid_argument("kl_prox: eta must be positive");
  Vec<Scalar> logw(g.size());
  Scalar top = -std::numeric_limits<Scalar>::infinity();
  for (Index j = 0; j < g.size(); ++j) {
    if (!std::isfinite(static_cast<double>(f[j])))
      throw std::domain_error("kl_prox: non-finite cost entry");
    logw[j] = std::log(g[j]) - eta * f[j];
    top = std::max(top, logw[j]);
  }
  Vec<Scalar> w = (logw.array() - top).exp().matrix();
  return ProbVec<Scalar>(w / w.sum());
}

/// Regularized mirror step argmin_p eta <f, p> + gamma KL(p||g) + lambda v(p),
/// with v the negative entropy. Closed form
/// p(j) proportional to g(j)^(gamma/(gamma+lambda)) exp(-eta f(j)/(gamma+lambda)).
template <class Scalar, class Derived>
ProbVec<Scalar> regularized_kl_prox(const ProbVec<Scalar>& g,
                                    const Eigen::MatrixBase<Derived>& f,
                                    Scalar eta, Scalar gamma, Scalar lambda) {
  if (g.size() != f.size())
    throw std::invalid_argument("regularized_kl_prox: length mismatch");
  if (gamma < Scalar(0) || lambda < Scalar(0) || gamma + lambda <= Scalar(0))
    throw std::invalid_argument(
        "regularized_kl_prox: invalid schedule, gamma + lambda must be "
        "positive");
  const Scalar denom = gamma + lambda;
  Vec<Scalar> logw(g.size());
  Scalar top = -std::numeric_limits<Scalar>::infinity();
  for (Index j = 0; j < g.size(); ++j) {
    if (!std::isfinite(static_cast<double>(f[j])))
      throw std::domain_error("regularized_kl_prox: non-finite cost entry");
    logw[j] = (gamma * std::log(g[j]) - eta * f[j]) / denom;
    top = std::max(top, logw[j]);
  }
  Vec<Scalar> w = (logw.array() - top).exp().matrix();
  return ProbVec<Scalar>(w / w.sum());
}

/// Largest entrywise ratio max_j p(j)/q(j); both must be strictly positive.
template <class Scalar>
Scalar max_ratio(const ProbVec<Scalar>& p, const ProbVec<Scalar>& q) {
  if (p.size() != q.size())
    throw std::invalid_argument("max_ratio: length mismatch");
  Scalar top = 0;
  for (Index j = 0; j < p.size(); ++j) {
    if (q[j] <= Scalar(0))
      throw std::domain_error("max_ratio: zero entry in denominator");
    top = std::max(top, p[j] / q[j]);
  }
  return top;
}

}  // namespace omd
