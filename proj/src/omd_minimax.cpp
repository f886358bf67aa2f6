#include "omd/omd_minimax.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace omd {

namespace {

void check_eta(double eta, const char* what) {
  if (!std::isfinite(eta) || eta <= 0.0) {
    throw std::invalid_argument(std::string(what) +
                                ": eta must be finite and positive");
  }
}

void check_schedule_shape(const MinimaxSchedule& schedule, const char* what) {
  const auto n = static_cast<std::size_t>(schedule.iters) + 1;
  if (schedule.iters < 1 || schedule.beta.size() != n ||
      schedule.alpha.size() != n || schedule.gamma_seq.size() != n ||
      schedule.lambda_seq.size() != n) {
    throw std::invalid_argument(std::string(what) +
                                ": schedule sequences are inconsistent with "
                                "the iteration count");
  }
}

JointDistribution prox_both_sides(const JointDistribution& anchor,
                                  const SaddleValues& values, double eta,
                                  double gamma, double lambda) {
  std::vector<ProbVector> x_blocks;
  x_blocks.reserve(anchor.x.blocks());
  for (Index i = 0; i < anchor.x.blocks(); ++i) {
    x_blocks.push_back(
        regularized_kl_prox(anchor.x[i], values.x[i], eta, gamma, lambda));
  }
  std::vector<ProbVector> y_blocks;
  y_blocks.reserve(anchor.y.blocks());
  for (Index i = 0; i < anchor.y.blocks(); ++i) {
    y_blocks.push_back(
        regularized_kl_prox(anchor.y[i], values.y[i], eta, gamma, lambda));
  }
  return JointDistribution{ProductDistribution(std::move(x_blocks)),
                           ProductDistribution(std::move(y_blocks))};
}

}  // namespace

MinimaxSchedule minimax_schedule(std::int64_t iters, double theta,
                                 std::optional<double> l1,
                                 std::optional<double> l2,
                                 std::optional<double> gamma_const) {
  if (iters < 1) {
    throw std::invalid_argument(
        "minimax_schedule: iteration count must be at least 1");
  }
  if (!std::isfinite(theta) || theta < 0.0 || theta >= 1.0) {
    throw std::invalid_argument(
        "minimax_schedule: theta must lie in [0, 1)");
  }
  const bool have_l1 = l1.has_value();
  const bool have_l2 = l2.has_value();
  const bool have_gamma = gamma_const.has_value();
  if (have_l1 != have_l2 || have_l1 != have_gamma) {
    throw std::invalid_argument(
        "minimax_schedule: supply all of l1, l2, gamma or none of them");
  }

  MinimaxSchedule schedule;
  schedule.iters = iters;
  schedule.theta = theta;
  schedule.c = 2.0 / (1.0 - theta);
  schedule.l1 = l1;
  schedule.l2 = l2;
  schedule.gamma_const = gamma_const;

  const double c = schedule.c;
  const auto n = static_cast<std::size_t>(iters) + 1;
  schedule.beta.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    schedule.beta[t] = c / (c + static_cast<double>(t));
  }

  // alpha_t = beta_t * prod_{j=t+1..T} (1 - beta_j), accumulated in log
  // space via a suffix sum, then normalized to sum exactly to 1.
  std::vector<double> log_tail(n + 1, 0.0);
  for (std::size_t t = n - 1; t >= 1; --t) {
    log_tail[t] = log_tail[t + 1] + std::log1p(-schedule.beta[t]);
  }
  schedule.alpha.assign(n, 0.0);
  double raw_sum = 0.0;
  for (std::size_t t = 1; t < n; ++t) {
    schedule.alpha[t] = std::exp(std::log(schedule.beta[t]) + log_tail[t + 1]);
    raw_sum += schedule.alpha[t];
  }
  schedule.alpha_raw_sum = raw_sum;
  for (std::size_t t = 1; t < n; ++t) {
    schedule.alpha[t] /= raw_sum;
  }

  schedule.gamma_seq.assign(n, 0.0);
  schedule.lambda_seq.assign(n, 0.0);
  for (std::size_t t = 1; t < n; ++t) {
    schedule.gamma_seq[t] = static_cast<double>(t) /
                            (c + static_cast<double>(t) - 1.0);
    schedule.lambda_seq[t] = 1.0 - schedule.gamma_seq[t];
  }

  if (have_l1) {
    if (!std::isfinite(*l1) || *l1 < 0.0 || !std::isfinite(*l2) ||
        *l2 <= 0.0 || !std::isfinite(*gamma_const) || *gamma_const < 0.0) {
      throw std::invalid_argument(
          "minimax_schedule: operator constants must be finite, with l1 >= "
          "0, l2 > 0, gamma >= 0");
    }
    schedule.eta = std::sqrt(1.0 - theta) /
                   (16.0 * (*l2) * (std::sqrt((*gamma_const) * (*l1)) + 1.0));
    schedule.theory_mode = true;
  } else {
    schedule.eta = std::sqrt(1.0 - theta) / 32.0;
    schedule.theory_mode = false;
  }
  return schedule;
}

MinimaxSchedule minimax_schedule_override(MinimaxSchedule schedule,
                                          double eta) {
  check_eta(eta, "minimax_schedule_override");
  schedule.eta = eta;
  schedule.theory_mode = false;
  return schedule;
}

OmdMinimaxState minimax_start(const SaddleOracle& oracle,
                              const PTensorMap& p) {
  if (oracle.x_sizes != p.x_sizes || oracle.y_sizes != p.y_sizes) {
    throw std::invalid_argument(
        "minimax_start: operator and value-map block sizes disagree");
  }
  OmdMinimaxState state;
  state.z = JointDistribution{ProductDistribution::uniform(oracle.x_sizes),
                              ProductDistribution::uniform(oracle.y_sizes)};
  state.g = state.z;
  state.q = p.zero();
  state.last_values = oracle.evaluate(state.q, state.z);
  state.t = 0;
  state.operator_evals = 1;
  state.p_evals = 0;
  return state;
}

QTensor q_update(const QTensor& q_prev, const JointDistribution& z_prev,
                 const PTensorMap& p, double beta_prev) {
  if (!std::isfinite(beta_prev) || beta_prev < 0.0 || beta_prev > 1.0) {
    throw std::invalid_argument(
        "q_update: averaging weight must lie in [0, 1]");
  }
  QTensor mapped = p.evaluate(q_prev, z_prev);
  QTensor out(q_prev.size());
  for (std::size_t i = 0; i < q_prev.size(); ++i) {
    out[i] = (1.0 - beta_prev) * q_prev[i] + beta_prev * mapped[i];
  }
  return out;
}

OmdMinimaxState minimax_step(const OmdMinimaxState& state,
                             const SaddleOracle& oracle, const PTensorMap& p,
                             const MinimaxSchedule& schedule, std::int64_t t) {
  check_schedule_shape(schedule, "minimax_step");
  check_eta(schedule.eta, "minimax_step");
  if (t < 1 || t > schedule.iters) {
    throw std::invalid_argument("minimax_step: step index out of range");
  }
  if (t != state.t + 1) {
    throw std::invalid_argument(
        "minimax_step: state does not correspond to the previous step");
  }

  const double beta_prev = schedule.beta[static_cast<std::size_t>(t) - 1];
  const double gamma_t = schedule.gamma_seq[static_cast<std::size_t>(t)];
  const double lambda_t = schedule.lambda_seq[static_cast<std::size_t>(t)];
  const double eta = schedule.eta;

  OmdMinimaxState next;
  next.q = q_update(state.q, state.z, p, beta_prev);
  next.z = prox_both_sides(state.g, state.last_values, eta, gamma_t, lambda_t);
  next.last_values = oracle.evaluate(next.q, next.z);
  next.g = prox_both_sides(state.g, next.last_values, eta, gamma_t, lambda_t);
  next.t = t;
  next.operator_evals = state.operator_evals + 1;
  next.p_evals = state.p_evals + 1;
  assert(qtensor_linf(next.q) <= p.bound + 1e-9);
  return next;
}

MinimaxRunResult run_minimax(const SaddleOracle& oracle, const PTensorMap& p,
                             const MinimaxSchedule& schedule,
                             const GapEval& gap_eval) {
  check_schedule_shape(schedule, "run_minimax");
  check_eta(schedule.eta, "run_minimax");

  MinimaxRunResult result;
  OmdMinimaxState state = minimax_start(oracle, p);

  std::vector<Vecd> acc_x;
  acc_x.reserve(oracle.x_sizes.size());
  for (Index size : oracle.x_sizes) acc_x.push_back(Vecd::Zero(size));
  std::vector<Vecd> acc_y;
  acc_y.reserve(oracle.y_sizes.size());
  for (Index size : oracle.y_sizes) acc_y.push_back(Vecd::Zero(size));

  const std::int64_t checkpoint_every = std::max<std::int64_t>(
      1, schedule.iters / 100);

  auto partial_average = [&](const std::vector<Vecd>& acc) {
    std::vector<ProbVector> blocks;
    blocks.reserve(acc.size());
    for (const Vecd& block : acc) blocks.emplace_back(block / block.sum());
    return ProductDistribution(std::move(blocks));
  };

  for (std::int64_t t = 1; t <= schedule.iters; ++t) {
    const QTensor prev_q = state.q;
    state = minimax_step(state, oracle, p, schedule, t);

    const double alpha_t = schedule.alpha[static_cast<std::size_t>(t)];
    for (std::size_t i = 0; i < acc_x.size(); ++i) {
      acc_x[i] += alpha_t * state.z.x[static_cast<Index>(i)].weights();
    }
    for (std::size_t i = 0; i < acc_y.size(); ++i) {
      acc_y[i] += alpha_t * state.z.y[static_cast<Index>(i)].weights();
    }

    TraceRow row;
    row.t = t;
    row.q_step = qtensor_linf_diff(state.q, prev_q);
    if (!schedule.theory_mode) row.flags = "outside-theory";
    if (t % checkpoint_every == 0 || t == schedule.iters) {
      double gap = std::numeric_limits<double>::quiet_NaN();
      if (gap_eval) {
        const JointDistribution partial{partial_average(acc_x),
                                        partial_average(acc_y)};
        gap = gap_eval(partial);
        row.gap = gap;
      }
      result.checkpoints.push_back(MinimaxCheckpoint{t, state.q, gap});
    }
    result.trace.add_row(row);
  }

  for (Vecd& block : acc_x) {
    assert(std::abs(block.sum() - 1.0) <= 1e-12);
    block /= block.sum();
  }
  for (Vecd& block : acc_y) {
    assert(std::abs(block.sum() - 1.0) <= 1e-12);
    block /= block.sum();
  }
  std::vector<ProbVector> x_blocks(acc_x.begin(), acc_x.end());
  std::vector<ProbVector> y_blocks(acc_y.begin(), acc_y.end());
  result.z_bar = JointDistribution{ProductDistribution(std::move(x_blocks)),
                                   ProductDistribution(std::move(y_blocks))};

  result.trace.set_meta("algorithm", "omd-minimax");
  result.trace.set_meta("iters", schedule.iters);
  result.trace.set_meta("theta", schedule.theta);
  result.trace.set_meta("c", schedule.c);
  result.trace.set_meta("eta", schedule.eta);
  result.trace.set_meta("theory_mode", schedule.theory_mode);
  result.trace.set_meta("checkpoint_every", checkpoint_every);
  result.trace.set_meta("operator_evals", state.operator_evals);
  result.trace.set_meta("p_evals", state.p_evals);
  return result;
}

}  // namespace omd
