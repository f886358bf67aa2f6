#pragma once

#include <vector>

#include "omd/mdp.hpp"
#include "omd/oracles.hpp"
#include "omd/rng.hpp"
#include "omd/simplex.hpp"

namespace omd {

using JointPolicy = JointDistribution;

/// Two-player zero-sum stochastic game. The row player (x, over actions
/// a) minimizes the normalized discounted cost; the column player (y, over
/// actions b) maximizes it. Transition rows are indexed by (s*n_a + a)*n_b
/// + b; costs are stored as one n_a x n_b matrix per state.
struct ZeroSumMarkovGame {
  Index n_states = 0;
  Index n_a = 0;
  Index n_b = 0;
  Matd transition;
  std::vector<Matd> cost;
  double discount = 0.0;
  ProbVector rho0;

  ZeroSumMarkovGame() = default;
  ZeroSumMarkovGame(Index n_states, Index n_a, Index n_b, Matd transition,
                    std::vector<Matd> cost, double discount, ProbVector rho0);

  Index row(Index s, Index a, Index b) const {
    return (s * n_a + a) * n_b + b;
  }
  std::vector<Index> x_sizes() const {
    return std::vector<Index>(static_cast<std::size_t>(n_states), n_a);
  }
  std::vector<Index> y_sizes() const {
    return std::vector<Index>(static_cast<std::size_t>(n_states), n_b);
  }
};

struct JointEvaluation {
  Vecd v;
  QTensor q;
};

/// Exact evaluation of a joint policy: v solves the linear system of the
/// jointly mixed chain and q is assembled from v. Both carry the (1 -
/// discount) normalization, so costs in [0, 1] give values in [0, 1].
JointEvaluation joint_evaluation(const ZeroSumMarkovGame& game,
                                 const JointPolicy& z);

/// Normalized objective <rho0, v> of the joint policy.
double joint_objective(const ZeroSumMarkovGame& game, const JointPolicy& z);

/// Tracked-matrix update map of the game:
///   [P_i(Q, z)](a, b) = (1-theta) cost_i(a, b)
///                       + theta * E_{s'}[x_{s'}^T Q_{s'} y_{s'}].
/// Exports contraction theta, bound 1, and Lipschitz constants L1 = 2,
/// L2 = 1, gamma = 2*theta.
PTensorMap p_tensor(const ZeroSumMarkovGame& game);

/// Per-state saddle operator F_i(Q, z) = (Q_i y_i, -Q_i^T x_i); both
/// components are costs for their respective prox steps.
SaddleOracle game_internal_operator(const ZeroSumMarkovGame& game);

struct ShapleySolution {
  QTensor q;
  JointPolicy z;
  Vecd v;
  long long sweeps = 0;
  std::vector<double> value_changes;
};

/// Fixed-point oracle: iterates per-state matrix-game solves on the
/// one-step value backup until the value vector settles. Per-state games
/// and the outer loop both run at tolerance tol*(1-theta)/4, so the
/// returned q is within tol of the exact fixed point.
ShapleySolution shapley_fixed_point(const ZeroSumMarkovGame& game, double tol,
                                    long long max_sweeps = 100000);

/// Exact max-min gap max_{y'} J(x, y') - min_{x'} J(x', y), each side
/// solved as a best-response single-player problem.
double nash_gap(const ZeroSumMarkovGame& game, const JointPolicy& z);

/// Best-response single-player reductions: fixing the opponent block mixes
/// the kernel and cost into a TabularMDP. The y-fixed reduction keeps costs
/// as they are (x minimizes); the x-fixed reduction flips costs to 1 - cost
/// so the maximizing player is solved as a minimizer.
TabularMDP best_response_mdp_for_x(const ZeroSumMarkovGame& game,
                                   const ProductDistribution& y);
TabularMDP best_response_mdp_for_y(const ZeroSumMarkovGame& game,
                                   const ProductDistribution& x);

/// Per-state weights psi_i(z) = max of the two best-response visitation
/// probabilities at s_i; their sum is at most 2.
Vecd psi_weights(const ZeroSumMarkovGame& game, const JointPolicy& z,
                 double tol = 1e-10);

ZeroSumMarkovGame random_game(Rng& rng, Index n_states, Index n_a, Index n_b,
                              double discount);
JointPolicy random_joint_policy(Rng& rng, const ZeroSumMarkovGame& game);

}  // namespace omd
