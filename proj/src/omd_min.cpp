#include "omd/omd_min.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "omd/rng.hpp"

namespace omd {

MinSchedule min_schedule_adaptive(std::int64_t iters, double theta1,
                                  double theta2, double k0, double theta) {
  if (iters < 4) {
    throw std::invalid_argument(
        "min_schedule_adaptive: iteration budget must be at least 4");
  }
  if (!std::isfinite(theta1) || theta1 < 0.0) {
    throw std::invalid_argument(
        "min_schedule_adaptive: theta1 must be finite and nonnegative");
  }
  if (!std::isfinite(theta2) || theta2 < 0.0) {
    throw std::invalid_argument(
        "min_schedule_adaptive: theta2 must be finite and nonnegative");
  }
  if (!std::isfinite(k0) || k0 < 1.0) {
    throw std::invalid_argument("min_schedule_adaptive: k0 must be at least 1");
  }
  if (theta == 1.0 && theta1 > 0.0) {
    throw std::invalid_argument(
        "min_schedule_adaptive: k_hat undefined when theta = 1 and theta1 > "
        "0");
  }
  if (!std::isfinite(theta) || theta < 0.0 || theta >= 1.0) {
    throw std::invalid_argument(
        "min_schedule_adaptive: theta must lie in [0, 1)");
  }

  MinSchedule s;
  s.iters = iters;
  s.theta1 = theta1;
  s.theta2 = theta2;
  s.k0 = k0;
  s.theta = theta;
  s.theta_total = theta1 + theta2 + 1.0;
  s.log_iters =
      static_cast<int>(std::ceil(std::log(static_cast<double>(iters))));
  const double h = static_cast<double>(s.log_iters);
  s.beta0 = 1.0 / (4.0 * h);
  s.beta = std::min(std::sqrt(s.beta0 / 8.0) / (h * h * h),
                    1.0 / (2.0 * s.theta_total * (h + 3.0)));
  s.gamma = std::exp(2.0) + 322560.0 * theta2;
  if (theta1 == 0.0 || theta == 0.0) {
    s.k_hat = k0;
  } else {
    s.k_hat = std::max(
        (h * std::log(4.0 / s.beta) + std::log(theta1)) / std::log(1.0 / theta),
        k0);
  }
  s.eta = std::min(s.beta / (6.0 * std::exp(3.0) * s.k_hat * s.gamma *
                             std::max(s.theta_total, 1.0)),
                   std::pow(s.beta0, 4) / (57792.0 * s.theta_total));
  s.theory_mode = true;
  return s;
}

MinSchedule min_schedule_override(MinSchedule schedule, double eta) {
  if (!std::isfinite(eta) || eta <= 0.0) {
    throw std::invalid_argument(
        "min_schedule_override: eta must be finite and positive");
  }
  schedule.eta = eta;
  schedule.theory_mode = false;
  return schedule;
}

double min_schedule_lipschitz(double lipschitz, std::size_t blocks,
                              const std::vector<double>& gammas) {
  if (gammas.empty()) {
    throw std::invalid_argument(
        "min_schedule_lipschitz: gammas must be nonempty");
  }
  if (gammas.size() != blocks) {
    throw std::invalid_argument(
        "min_schedule_lipschitz: block count must match the number of gamma "
        "weights");
  }
  if (!std::isfinite(lipschitz) || lipschitz <= 0.0) {
    throw std::invalid_argument(
        "min_schedule_lipschitz: lipschitz constant must be positive");
  }
  double gamma_max = 0.0;
  double inverse_sum = 0.0;
  for (double g : gammas) {
    if (!std::isfinite(g) || g <= 0.0) {
      throw std::invalid_argument(
          "min_schedule_lipschitz: every gamma must be positive");
    }
    gamma_max = std::max(gamma_max, g);
    inverse_sum += 1.0 / g;
  }
  return 0.5 / std::sqrt(lipschitz * lipschitz *
                         static_cast<double>(blocks) * gamma_max * inverse_sum);
}

OmdMinState min_start(const BlockOracle& oracle) {
  OmdMinState state;
  state.x = ProductDistribution::uniform(oracle.block_sizes);
  state.g = state.x;
  state.last_values = oracle.evaluate(state.x);
  state.t = 0;
  state.oracle_evals = 1;
  return state;
}

OmdMinState min_step(const OmdMinState& state, const BlockOracle& oracle,
                     double eta) {
  const auto d = static_cast<std::size_t>(state.x.blocks());
  std::vector<ProbVector> x_blocks;
  x_blocks.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    x_blocks.push_back(kl_prox(state.g[static_cast<Index>(i)],
                               state.last_values[i], eta));
  }
  OmdMinState next;
  next.x = ProductDistribution(std::move(x_blocks));
  next.last_values = oracle.evaluate(next.x);
  std::vector<ProbVector> g_blocks;
  g_blocks.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    g_blocks.push_back(
        kl_prox(state.g[static_cast<Index>(i)], next.last_values[i], eta));
  }
  next.g = ProductDistribution(std::move(g_blocks));
  next.t = state.t + 1;
  next.oracle_evals = state.oracle_evals + 1;
  return next;
}

MinRunResult run_min(const BlockOracle& oracle, const ObjectiveEval& objective,
                     const MinSchedule& schedule, std::uint64_t rng_seed) {
  if (schedule.iters < 1 || !(schedule.eta > 0.0)) {
    throw std::invalid_argument("run_min: schedule is not valid");
  }

  Rng rng(rng_seed);
  const std::int64_t chosen_index =
      static_cast<std::int64_t>(
          rng.next_index(static_cast<std::size_t>(schedule.iters))) +
      1;

  RunTrace trace;
  trace.set_meta("algorithm", "omd-min");
  trace.set_meta("seed", rng_seed);
  trace.set_meta("iters", schedule.iters);
  trace.set_meta("theta1", schedule.theta1);
  trace.set_meta("theta2", schedule.theta2);
  trace.set_meta("k0", schedule.k0);
  trace.set_meta("theta", schedule.theta);
  trace.set_meta("theta_total", schedule.theta_total);
  trace.set_meta("log_iters", static_cast<std::int64_t>(schedule.log_iters));
  trace.set_meta("beta0", schedule.beta0);
  trace.set_meta("beta", schedule.beta);
  trace.set_meta("gamma", schedule.gamma);
  trace.set_meta("k_hat", schedule.k_hat);
  trace.set_meta("eta", schedule.eta);
  trace.set_meta("theory_mode", schedule.theory_mode);
  trace.set_meta("chosen_t", chosen_index);

  const char* row_flags = schedule.theory_mode ? "" : "outside-theory";

#ifndef NDEBUG
  const double closeness_cap =
      1.0 + 7.0 * schedule.eta * (schedule.theta1 + schedule.theta2);
#endif

  MinRunResult result;
  OmdMinState state = min_start(oracle);
  for (std::int64_t t = 1; t <= schedule.iters; ++t) {
    OmdMinState next = min_step(state, oracle, schedule.eta);
#ifndef NDEBUG
    if (schedule.theory_mode && state.t >= 1) {
      for (Index i = 0; i < next.x.blocks(); ++i) {
        assert(max_ratio(state.x[i], next.x[i]) <= closeness_cap + 1e-12);
      }
    }
#endif
    state = std::move(next);
    TraceRow row;
    row.t = t;
    if (objective) row.value = objective(state.x);
    row.flags = row_flags;
    trace.add_row(std::move(row));
    if (t == chosen_index) result.chosen = state.x;
  }
  trace.set_meta("oracle_evals", state.oracle_evals);
  result.trace = std::move(trace);
  return result;
}

}  // namespace omd
