#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "omd/oracles.hpp"
#include "omd/simplex.hpp"
#include "omd/trace.hpp"

namespace omd {

struct MinSchedule {
  std::int64_t iters = 0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double k0 = 1.0;
  double theta = 0.0;

  double theta_total = 1.0;
  int log_iters = 1;
  double beta0 = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double k_hat = 1.0;
  double eta = 0.0;
  bool theory_mode = true;
};

MinSchedule min_schedule_adaptive(std::int64_t iters, double theta1,
                                  double theta2, double k0, double theta);

MinSchedule min_schedule_override(MinSchedule schedule, double eta);

double min_schedule_lipschitz(double lipschitz, std::size_t blocks,
                              const std::vector<double>& gammas);

struct OmdMinState {
  ProductDistribution x;
  ProductDistribution g;
  std::vector<Vecd> last_values;
  std::int64_t t = 0;
  std::int64_t oracle_evals = 0;
};

OmdMinState min_start(const BlockOracle& oracle);

OmdMinState min_step(const OmdMinState& state, const BlockOracle& oracle,
                     double eta);

using ObjectiveEval = std::function<double(const ProductDistribution&)>;

struct MinRunResult {
  ProductDistribution chosen;
  RunTrace trace;
};

MinRunResult run_min(const BlockOracle& oracle, const ObjectiveEval& objective,
                     const MinSchedule& schedule, std::uint64_t rng_seed);

}  // namespace omd
