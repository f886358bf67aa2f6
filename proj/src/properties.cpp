#include "omd/properties.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>

#include "omd/rng.hpp"
#include "omd/sequences.hpp"
#include "omd/simplex.hpp"

namespace omd {

namespace {

ProbVector random_point(Rng& rng, Index n) {
  Vecd w(n);
  for (Index j = 0; j < n; ++j) w[j] = rng.next_exp() + 0.02;
  return ProbVector(w / w.sum());
}

Vecd random_vector(Rng& rng, Index n, double lo, double hi) {
  Vecd v(n);
  for (Index j = 0; j < n; ++j) v[j] = rng.next_range(lo, hi);
  return v;
}

VectorSequence random_sequence(Rng& rng, std::size_t length, Index dim) {
  VectorSequence seq(length);
  for (Vecd& v : seq) v = random_vector(rng, dim, -1.0, 1.0);
  return seq;
}

// Plain binomial evaluation sum_s C(h,s) (-1)^(h-s) L^(t+s); shares no
// arithmetic path with either branch of the library implementation.
VectorSequence binomial_difference(const VectorSequence& seq, int h) {
  std::vector<double> coef(static_cast<std::size_t>(h) + 1, 1.0);
  for (int s = 1; s <= h; ++s) {
    coef[static_cast<std::size_t>(s)] =
        coef[static_cast<std::size_t>(s - 1)] *
        static_cast<double>(h - s + 1) / static_cast<double>(s);
  }
  const std::size_t out_len = seq.size() - static_cast<std::size_t>(h);
  VectorSequence out(out_len);
  const Index dim = seq.front().size();
  for (std::size_t t = 0; t < out_len; ++t) {
    Vecd row = Vecd::Zero(dim);
    for (int s = 0; s <= h; ++s) {
      const double sign = ((h - s) % 2 == 0) ? 1.0 : -1.0;
      row += sign * coef[static_cast<std::size_t>(s)] *
             seq[t + static_cast<std::size_t>(s)];
    }
    out[t] = row;
  }
  return out;
}

double max_sequence_diff(const VectorSequence& a, const VectorSequence& b) {
  double worst = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    worst = std::max(worst, (a[t] - b[t]).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

class Recorder {
 public:
  explicit Recorder(std::string name) { check_.name = std::move(name); }

  void record(double slack) {
    ++check_.cases;
    if (std::isnan(slack) || slack < 0.0) ++check_.failures;
    if (!std::isnan(slack) && slack < check_.worst_slack) {
      check_.worst_slack = slack;
    }
  }

  PropertyCheck take() { return std::move(check_); }

 private:
  PropertyCheck check_;
};

}  // namespace

bool PropertyReport::all_passed() const {
  for (const PropertyCheck& check : checks) {
    if (!check.passed()) return false;
  }
  return true;
}

std::int64_t PropertyReport::total_failures() const {
  std::int64_t total = 0;
  for (const PropertyCheck& check : checks) total += check.failures;
  return total;
}

PropertyReport run_property_suite(std::int64_t cases, std::uint64_t seed) {
  if (cases < 1) {
    throw std::invalid_argument(
        "run_property_suite: case count must be positive");
  }
  PropertyReport report;
  const Rng root(seed);

  {
    Recorder rec("pinsker");
    Rng rng = root.split(1);
    for (std::int64_t i = 0; i < cases; ++i) {
      const Index n = 2 + rng.next_index(7);
      const ProbVector p = random_point(rng, n);
      const ProbVector q = random_point(rng, n);
      const double l1 = (p.weights() - q.weights()).lpNorm<1>();
      rec.record(kl_divergence(p, q) - 0.5 * l1 * l1 + 1e-12);
    }
    report.checks.push_back(rec.take());
  }

  {
    Recorder rec("kl-prox-identity");
    Rng rng = root.split(2);
    for (std::int64_t i = 0; i < cases; ++i) {
      const Index n = 2 + rng.next_index(7);
      const ProbVector q = random_point(rng, n);
      const ProbVector p = random_point(rng, n);
      const Vecd f = random_vector(rng, n, -1.0, 1.0);
      const double eta = rng.next_range(0.1, 2.0);
      const ProbVector star = kl_prox(q, f, eta);
      const double lhs = f.dot(star.weights() - p.weights());
      const double rhs = (kl_divergence(p, q) - kl_divergence(p, star) -
                          kl_divergence(star, q)) /
                         eta;
      rec.record(1e-9 - std::abs(lhs - rhs));
    }
    report.checks.push_back(rec.take());
  }

  {
    Recorder rec("chi2-kl-sandwich");
    Rng rng = root.split(3);
    for (std::int64_t i = 0; i < cases; ++i) {
      const Index n = 2 + rng.next_index(7);
      const ProbVector q = random_point(rng, n);
      const double spread = rng.next_range(0.01, 0.12);
      Vecd w(n);
      for (Index j = 0; j < n; ++j) {
        w[j] = q[j] * (1.0 + rng.next_range(-spread, spread));
      }
      const ProbVector p(w / w.sum());
      double tau = 0.0;
      for (Index j = 0; j < n; ++j) tau = std::max(tau, p[j] / q[j] - 1.0);
      const double coeff =
          (1.0 - tau) / 2.0 - 2.0 * tau / (3.0 * (1.0 - tau));
      rec.record(kl_divergence(p, q) - coeff * chi_squared(p, q) + 1e-12);
    }
    report.checks.push_back(rec.take());
  }

  {
    Recorder rec("variance-chi2-sandwich");
    Rng rng = root.split(4);
    for (std::int64_t i = 0; i < cases; ++i) {
      const Index n = 2 + rng.next_index(7);
      const ProbVector p = random_point(rng, n);
      const double tau = rng.next_range(0.02, 0.3);
      const Vecd r = random_vector(rng, n, -tau / 2.0, tau / 2.0);
      Vecd w(n);
      for (Index j = 0; j < n; ++j) w[j] = p[j] * std::exp(r[j]);
      const ProbVector tilted(w / w.sum());
      const double kappa = (2.0 / (3.0 * (1.0 - tau)) + 4.0) * tau;
      const double variance = variance_under(p, r);
      const double x2 = chi_squared(tilted, p);
      const double slack = std::min((1.0 + kappa) * variance - x2,
                                    x2 - (1.0 - kappa) * variance);
      rec.record(slack + 1e-12);
    }
    report.checks.push_back(rec.take());
  }

  {
    Recorder rec("prox-shift-invariance");
    Rng rng = root.split(5);
    for (std::int64_t i = 0; i < cases; ++i) {
      const Index n = 2 + rng.next_index(7);
      const ProbVector q = random_point(rng, n);
      const Vecd f = random_vector(rng, n, -1.0, 1.0);
      const double eta = rng.next_range(0.1, 2.0);
      const double shift_by = rng.next_range(-5.0, 5.0);
      const ProbVector a = kl_prox(q, f, eta);
      const ProbVector b =
          kl_prox(q, (f.array() + shift_by).matrix(), eta);
      rec.record(1e-14 -
                 (a.weights() - b.weights()).lpNorm<Eigen::Infinity>());
    }
    report.checks.push_back(rec.take());
  }

  {
    Recorder rec("gamma-series-bound");
    for (const double big_gamma : {17.0, 32.0, 100.0}) {
      double partial = 0.0;
      for (int k = 1; k <= 60; ++k) {
        const double kd = static_cast<double>(k);
        partial += std::pow(big_gamma, -kd) *
                   (std::pow(kd, 7.0) + (kd + 1.0) * std::exp(2.0 * kd));
      }
      const double bound = 80640.0 / (big_gamma - 1.0) +
                           2.0 / (big_gamma * std::exp(-2.0) - 1.0);
      rec.record(bound - partial);
    }
    report.checks.push_back(rec.take());
  }

  {
    Recorder rec("finite-difference-closed-form");
    Rng rng = root.split(6);
    for (std::int64_t i = 0; i < cases; ++i) {
      const int h = 1 + rng.next_index(6);
      const std::size_t length =
          static_cast<std::size_t>(h) + 1 +
          static_cast<std::size_t>(rng.next_index(10));
      const Index dim = 1 + rng.next_index(4);
      const VectorSequence seq = random_sequence(rng, length, dim);
      const VectorSequence lib = finite_difference(seq, h);
      const VectorSequence ref = binomial_difference(seq, h);
      rec.record(1e-12 - max_sequence_diff(lib, ref));
    }
    report.checks.push_back(rec.take());
  }

  {
    Recorder rec("finite-difference-linearity");
    Rng rng = root.split(7);
    for (std::int64_t i = 0; i < cases; ++i) {
      const int h = 1 + rng.next_index(3);
      const std::size_t length =
          static_cast<std::size_t>(h) + 1 +
          static_cast<std::size_t>(rng.next_index(10));
      const Index dim = 1 + rng.next_index(4);
      const VectorSequence left = random_sequence(rng, length, dim);
      const VectorSequence right = random_sequence(rng, length, dim);
      const double a = rng.next_range(-2.0, 2.0);
      const double b = rng.next_range(-2.0, 2.0);
      VectorSequence combo(length);
      for (std::size_t t = 0; t < length; ++t) {
        combo[t] = a * left[t] + b * right[t];
      }
      const VectorSequence lhs = finite_difference(combo, h);
      const VectorSequence dl = finite_difference(left, h);
      const VectorSequence dr = finite_difference(right, h);
      VectorSequence rhs(lhs.size());
      for (std::size_t t = 0; t < rhs.size(); ++t) {
        rhs[t] = a * dl[t] + b * dr[t];
      }
      rec.record(1e-12 - max_sequence_diff(lhs, rhs));
    }
    report.checks.push_back(rec.take());
  }

  {
    Recorder rec("finite-difference-composition");
    Rng rng = root.split(8);
    for (std::int64_t i = 0; i < cases; ++i) {
      const int h1 = 1 + rng.next_index(3);
      const int h2 = 1 + rng.next_index(3);
      const std::size_t length =
          static_cast<std::size_t>(h1 + h2) + 1 +
          static_cast<std::size_t>(rng.next_index(10));
      const Index dim = 1 + rng.next_index(4);
      const VectorSequence seq = random_sequence(rng, length, dim);
      const VectorSequence lhs =
          finite_difference(finite_difference(seq, h2), h1);
      const VectorSequence rhs = finite_difference(seq, h1 + h2);
      rec.record(1e-12 - max_sequence_diff(lhs, rhs));
    }
    report.checks.push_back(rec.take());
  }

  return report;
}

}  // namespace omd
