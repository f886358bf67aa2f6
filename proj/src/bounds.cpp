#include "omd/bounds.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace omd {

namespace {

void check_min_schedule(const MinSchedule& schedule, const char* what) {
  if (schedule.iters < 1 || !std::isfinite(schedule.eta) ||
      schedule.eta <= 0.0 || schedule.log_iters < 1) {
    throw std::invalid_argument(std::string(what) +
                                ": schedule is not valid");
  }
}

void check_minimax_schedule(const MinimaxSchedule& schedule,
                            const char* what) {
  if (schedule.iters < 1 || !std::isfinite(schedule.eta) ||
      schedule.eta <= 0.0) {
    throw std::invalid_argument(std::string(what) +
                                ": schedule is not valid");
  }
  if (!schedule.l1 || !schedule.l2 || !schedule.gamma_const) {
    throw std::invalid_argument(
        std::string(what) +
        ": schedule is missing the operator Lipschitz constants");
  }
}

double check_support(std::int64_t n, const char* what) {
  if (n < 1) {
    throw std::invalid_argument(std::string(what) +
                                ": support size must be positive");
  }
  return static_cast<double>(n);
}

// Tracking term, appendix form, at horizon `t`: the bracket collects the
// per-step drift contributions and the trailing factor is log(c + t) + 1.
double y_tracking_appendix(const MinimaxSchedule& schedule, std::int64_t m,
                           double c_bound, std::int64_t horizon) {
  const double c = schedule.c;
  const double eta = schedule.eta;
  const double l1 = *schedule.l1;
  const double l2 = *schedule.l2;
  const double gamma = *schedule.gamma_const;
  const double d_const = 2.0 * std::log(static_cast<double>(m));
  const double a_const = 2.0;
  const double bracket =
      gamma * d_const * (1.0 / eta + 16.0 * eta * l2) +
      40.0 * eta * eta * eta * gamma * a_const * a_const * l2 * l2 * l2 * l2 +
      2.0 * eta * gamma * l1 * l1 *
          (1.0 + 64.0 * eta * eta * l2 * l2 * c_bound * c_bound);
  return 8.0 * (c + 1.0) * bracket *
         (std::log(c + static_cast<double>(horizon)) + 1.0);
}

double y_tracking_main_text(const MinimaxSchedule& schedule, std::int64_t m,
                            double c_bound, std::int64_t horizon) {
  const double c = schedule.c;
  const double eta = schedule.eta;
  const double l1 = *schedule.l1;
  const double l2 = *schedule.l2;
  const double gamma = *schedule.gamma_const;
  const double bracket =
      4.0 * gamma / eta * std::log(static_cast<double>(m)) +
      160.0 * gamma * l2 +
      2.0 * eta * gamma * l1 * l1 * (1.0 + 64.0 * c_bound * c_bound);
  return 8.0 * (c + 1.0) * bracket *
         (std::log(c + static_cast<double>(horizon)) + 1.0);
}

}  // namespace

double bound_min(const MinSchedule& schedule, std::int64_t n,
                 double weight_sum) {
  check_min_schedule(schedule, "bound_min");
  const double support = check_support(n, "bound_min");
  if (!std::isfinite(weight_sum) || weight_sum < 0.0) {
    throw std::invalid_argument(
        "bound_min: weight sum must be finite and nonnegative");
  }
  const double theta_total = schedule.theta_total;
  const double h = static_cast<double>(schedule.log_iters);
  const double h5 = h * h * h * h * h;
  const double inner =
      std::log(support) / schedule.eta +
      schedule.eta * theta_total * theta_total * theta_total *
          (6.0 + 330240.0 * theta_total * h5);
  return weight_sum * inner / static_cast<double>(schedule.iters);
}

MinimaxBoundReport bound_minimax(const MinimaxSchedule& schedule,
                                 std::int64_t m, double psi_sum_max,
                                 double c_bound) {
  check_minimax_schedule(schedule, "bound_minimax");
  const double support = check_support(m, "bound_minimax");
  if (!std::isfinite(psi_sum_max) || psi_sum_max < 0.0 ||
      !std::isfinite(c_bound) || c_bound < 0.0) {
    throw std::invalid_argument(
        "bound_minimax: weights and the value ceiling must be finite and "
        "nonnegative");
  }
  MinimaxBoundReport report;
  report.y_appendix =
      y_tracking_appendix(schedule, m, c_bound, schedule.iters);
  report.y_main_text =
      y_tracking_main_text(schedule, m, c_bound, schedule.iters);
  const double eta = schedule.eta;
  const double l1 = *schedule.l1;
  report.value = 60.0 * psi_sum_max / (1.0 - schedule.theta) *
                 (2.0 / eta * std::log(support) + eta * l1 * l1 +
                  l1 * report.y_appendix) /
                 static_cast<double>(schedule.iters);
  return report;
}

double q_tracking_envelope(const MinimaxSchedule& schedule, std::int64_t t,
                           std::int64_t m, double c_bound) {
  check_minimax_schedule(schedule, "q_tracking_envelope");
  check_support(m, "q_tracking_envelope");
  if (t < 1) {
    throw std::invalid_argument(
        "q_tracking_envelope: step index must be positive");
  }
  if (!std::isfinite(c_bound) || c_bound < 0.0) {
    throw std::invalid_argument(
        "q_tracking_envelope: the value ceiling must be finite and "
        "nonnegative");
  }
  const double c = schedule.c;
  return c / (c + static_cast<double>(t)) *
         y_tracking_appendix(schedule, m, c_bound, t);
}

double finite_difference_bound(double beta, int order) {
  if (!std::isfinite(beta) || beta <= 0.0) {
    throw std::invalid_argument(
        "finite_difference_bound: beta must be finite and positive");
  }
  if (order < 1) {
    throw std::invalid_argument(
        "finite_difference_bound: order must be at least 1");
  }
  const double h = static_cast<double>(order);
  return std::pow(beta, h) * std::pow(h, 3.0 * h + 1.0);
}

}  // namespace omd
