#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "omd/simplex.hpp"

namespace omd {

/// Ordered list L^0, ..., L^T of equal-length real vectors.
template <class Scalar>
using VecSequence = std::vector<Vec<Scalar>>;

using VectorSequence = VecSequence<double>;

namespace detail {

template <class Scalar>
void check_uniform(const VecSequence<Scalar>& seq) {
  if (seq.empty()) throw std::invalid_argument("sequence is empty");
  for (const auto& v : seq)
    if (v.size() != seq.front().size())
      throw std::invalid_argument("sequence vectors have mixed lengths");
}

// Binomial closed form with Neumaier-compensated accumulation; used for
// deep differences where alternating binomial weights amplify cancellation.
template <class Scalar>
VecSequence<Scalar> finite_difference_compensated(
    const VecSequence<Scalar>& seq, int h) {
  const Index T = static_cast<Index>(seq.size()) - 1;
  const Index n = seq.front().size();
  std::vector<double> coef(static_cast<size_t>(h) + 1);
  coef[0] = 1.0;
  for (int s = 1; s <= h; ++s)
    coef[static_cast<size_t>(s)] =
        coef[static_cast<size_t>(s - 1)] * double(h - s + 1) / double(s);
  VecSequence<Scalar> out(static_cast<size_t>(T - h + 1));
  for (Index t = 0; t + h <= T; ++t) {
    Vec<Scalar> row(n);
    for (Index j = 0; j < n; ++j) {
      double sum = 0.0, comp = 0.0;
      for (int s = 0; s <= h; ++s) {
        double sign = ((h - s) % 2 == 0) ? 1.0 : -1.0;
        double term = sign * coef[static_cast<size_t>(s)] *
                      static_cast<double>(seq[static_cast<size_t>(t + s)][j]);
        double added = sum + term;
        if (std::abs(sum) >= std::abs(term))
          comp += (sum - added) + term;
        else
          comp += (term - added) + sum;
        sum = added;
      }
      row[j] = static_cast<Scalar>(sum + comp);
    }
    out[static_cast<size_t>(t)] = std::move(row);
  }
  return out;
}

}  // namespace detail

/// Order-h finite difference (D_h L)^t = (D_{h-1} L)^{t+1} - (D_{h-1} L)^t.
/// Output has length T - h + 1 for input length T + 1; h = 0 is the identity.
template <class Scalar>
VecSequence<Scalar> finite_difference(const VecSequence<Scalar>& seq, int h) {
  detail::check_uniform(seq);
  if (h < 0) throw std::invalid_argument("finite_difference: negative order");
  const Index T = static_cast<Index>(seq.size()) - 1;
  if (h > T)
    throw std::invalid_argument("finite_difference: order exceeds sequence");
  if (h >= 4) return detail::finite_difference_compensated(seq, h);
  VecSequence<Scalar> cur = seq;
  for (int level = 0; level < h; ++level) {
    VecSequence<Scalar> next(cur.size() - 1);
    for (size_t t = 0; t + 1 < cur.size(); ++t) next[t] = cur[t + 1] - cur[t];
    cur = std::move(next);
  }
  return cur;
}

/// s-shift (E_s L)^t = L^{t+s}; output has length T - s + 1.
template <class Scalar>
VecSequence<Scalar> shift(const VecSequence<Scalar>& seq, int s) {
  detail::check_uniform(seq);
  if (s < 0) throw std::invalid_argument("shift: negative shift");
  const Index T = static_cast<Index>(seq.size()) - 1;
  if (s > T) throw std::invalid_argument("shift: shift exceeds sequence");
  return VecSequence<Scalar>(seq.begin() + s, seq.end());
}

/// Smallest zeta such that consecutive entrywise ratios stay within 1 + zeta:
/// max_t max{ ||p^t / p^{t+1}||_inf, ||p^{t+1} / p^t||_inf } - 1.
template <class Scalar>
Scalar consecutive_closeness(const std::vector<ProbVec<Scalar>>& seq) {
  if (seq.empty())
    throw std::invalid_argument("consecutive_closeness: empty sequence");
  Scalar worst = 1;
  for (size_t t = 0; t + 1 < seq.size(); ++t) {
    worst = std::max(worst, max_ratio(seq[t], seq[t + 1]));
    worst = std::max(worst, max_ratio(seq[t + 1], seq[t]));
  }
  return worst - Scalar(1);
}

}  // namespace omd
