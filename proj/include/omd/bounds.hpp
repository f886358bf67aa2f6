#pragma once

#include <cstdint>

#include "omd/omd_min.hpp"
#include "omd/omd_minimax.hpp"

namespace omd {

/// Certified average-suboptimality ceiling for a minimization run: the
/// schedule's step size and horizon are combined with the alphabet size n
/// (per-block support) and the sum of the inverse quasar weights.
double bound_min(const MinSchedule& schedule, std::int64_t n,
                 double weight_sum);

/// Duality-gap ceiling for a minimax run, reported together with both
/// published forms of the tracking term Y; `value` uses `y_appendix`.
struct MinimaxBoundReport {
  double value = 0.0;
  double y_appendix = 0.0;
  double y_main_text = 0.0;
};

MinimaxBoundReport bound_minimax(const MinimaxSchedule& schedule,
                                 std::int64_t m, double psi_sum_max,
                                 double c_bound);

/// Ceiling on the tracked-matrix error at step t: (c/(c+t)) times the
/// tracking term evaluated at horizon t.
double q_tracking_envelope(const MinimaxSchedule& schedule, std::int64_t t,
                           std::int64_t m, double c_bound);

/// Ceiling on order-h finite differences of operator values along a
/// theory-mode minimization run: beta^h * h^(3h+1).
double finite_difference_bound(double beta, int order);

}  // namespace omd
