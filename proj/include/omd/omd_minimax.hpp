#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "omd/oracles.hpp"
#include "omd/simplex.hpp"
#include "omd/trace.hpp"

namespace omd {

/// Step-size and averaging schedule for the regularized saddle-point
/// recursion. Sequences are stored 1-indexed by step (index 0 unused except
/// for beta, whose index 0 holds the warm-up weight beta_0 = 1); `alpha` is
/// renormalized to sum exactly to 1 and `alpha_raw_sum` restores the
/// pre-normalization values.
struct MinimaxSchedule {
  std::int64_t iters = 0;
  double theta = 0.0;
  double c = 0.0;
  double eta = 0.0;
  bool theory_mode = true;
  std::optional<double> l1;
  std::optional<double> l2;
  std::optional<double> gamma_const;
  double alpha_raw_sum = 1.0;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> gamma_seq;
  std::vector<double> lambda_seq;
};

MinimaxSchedule minimax_schedule(
    std::int64_t iters, double theta, std::optional<double> l1 = std::nullopt,
    std::optional<double> l2 = std::nullopt,
    std::optional<double> gamma_const = std::nullopt);

MinimaxSchedule minimax_schedule_override(MinimaxSchedule schedule,
                                          double eta);

struct OmdMinimaxState {
  JointDistribution z;
  JointDistribution g;
  QTensor q;
  SaddleValues last_values;
  std::int64_t t = 0;
  std::int64_t operator_evals = 0;
  std::int64_t p_evals = 0;
};

OmdMinimaxState minimax_start(const SaddleOracle& oracle, const PTensorMap& p);

QTensor q_update(const QTensor& q_prev, const JointDistribution& z_prev,
                 const PTensorMap& p, double beta_prev);

OmdMinimaxState minimax_step(const OmdMinimaxState& state,
                             const SaddleOracle& oracle, const PTensorMap& p,
                             const MinimaxSchedule& schedule, std::int64_t t);

struct MinimaxCheckpoint {
  std::int64_t t = 0;
  QTensor q;
  double gap = 0.0;
};

using GapEval = std::function<double(const JointDistribution&)>;

struct MinimaxRunResult {
  JointDistribution z_bar;
  RunTrace trace;
  std::vector<MinimaxCheckpoint> checkpoints;
};

MinimaxRunResult run_minimax(const SaddleOracle& oracle, const PTensorMap& p,
                             const MinimaxSchedule& schedule,
                             const GapEval& gap_eval = nullptr);

}  // namespace omd
