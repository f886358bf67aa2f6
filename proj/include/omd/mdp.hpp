#pragma once

#include <vector>

#include "omd/oracles.hpp"
#include "omd/rng.hpp"
#include "omd/simplex.hpp"

namespace omd {

/// One action distribution per state.
using Policy = ProductDistribution;

/// Tabular discounted MDP. Values follow the normalized convention
/// V^pi(s) = (1-theta) E[sum theta^t sigma(s_t,a_t)], which keeps V, Q and
/// the advantage inside [0,1] for costs in [0,1].
struct TabularMDP {
  Index n_states = 0;
  Index n_actions = 0;
  /// Row (s * n_actions + a) holds the distribution of the next state.
  Matd transition;
  /// cost(s, a) in [0,1].
  Matd cost;
  double discount = 0.0;
  ProbVector rho0;

  TabularMDP(Index n_states_in, Index n_actions_in, Matd transition_in,
             Matd cost_in, double discount_in, ProbVector rho0_in);

  Index row(Index s, Index a) const { return s * n_actions + a; }
};

struct PolicyEvaluation {
  Vecd v;
  Matd q;
  Matd advantage;
};

/// Exact evaluation: V solves (I - theta P^pi) V = (1-theta) sigma^pi by a
/// dense LU factorization; Q(s,a) = (1-theta) sigma(s,a) + theta P(s,a)V.
PolicyEvaluation policy_evaluation(const TabularMDP& mdp, const Policy& pi);

/// J^pi(rho0) = <rho0, V^pi>.
double policy_objective(const TabularMDP& mdp, const Policy& pi);

/// Discounted state visitation distribution: the solution of
/// d = (1-theta) start + theta (P^pi)^T d, a probability vector.
ProbVector visitation_distribution(const TabularMDP& mdp, const Policy& pi,
                                   const ProbVector& start);

struct ValueIteration {
  Vecd v;
  Policy greedy;
  double objective;
  long long sweeps;
};

/// Bellman-optimality iteration on the normalized system, run until the
/// sup-norm sweep change is at most tol*(1-theta)/theta, so the returned
/// value is within tol of V*. Greedy ties break toward the lowest action.
ValueIteration value_iteration(const TabularMDP& mdp, double tol);

/// Natural-policy-gradient view of the MDP: block i is the action simplex
/// at state s_i and the oracle value is the Q-vector Q^pi(s_i, .). Exports
/// sup bound 1 and recurrence constants (theta1=theta, theta2=1, k0=1).
BlockOracle npg_internal_function(const TabularMDP& mdp);

struct PerformanceDifference {
  double lhs;
  double rhs;
};

/// Both sides of the performance-difference identity
///   J^{pi*} - J^{pi} = (1/(1-theta)) E_{s~d^{pi*}} <A^pi(s,.), pi*-pi>,
/// computed from independent exact solves. The 1/(1-theta) factor undoes
/// the normalization of the advantage; without it the right side shrinks by
/// exactly (1-theta).
PerformanceDifference performance_difference(const TabularMDP& mdp,
                                             const Policy& pi_star,
                                             const Policy& pi);

/// Finite-horizon MDP with per-level state and action spaces. Level h
/// (0-based, h < horizon) has cost(s,a) in [0,1]; transitions lead from
/// level h to level h+1. Values are plain undiscounted sums, so
/// Q_h in [0, horizon - h].
struct FiniteHorizonMDP {
  int horizon = 0;
  std::vector<Index> n_states;
  std::vector<Index> n_actions;
  /// transition[h] has rows (s * n_actions[h] + a) over n_states[h+1]
  /// columns; size horizon-1.
  std::vector<Matd> transition;
  /// cost[h] is n_states[h] x n_actions[h]; size horizon.
  std::vector<Matd> cost;
  ProbVector rho1;

  FiniteHorizonMDP(int horizon_in, std::vector<Index> n_states_in,
                   std::vector<Index> n_actions_in,
                   std::vector<Matd> transition_in, std::vector<Matd> cost_in,
                   ProbVector rho1_in);

  /// Flat block index of (level h, state s) in level-major order.
  Index block(int h, Index s) const;
  /// Block sizes of a policy over this MDP, level-major.
  std::vector<Index> policy_sizes() const;
};

struct FiniteHorizonEvaluation {
  /// q[h] is n_states[h] x n_actions[h].
  std::vector<Matd> q;
  /// v[h] has length n_states[h].
  std::vector<Vecd> v;
  double objective;
};

/// Backward induction under the level-major policy layout of block().
FiniteHorizonEvaluation finite_horizon_evaluation(const FiniteHorizonMDP& fh,
                                                  const Policy& pi);

/// Blocks indexed by (level, state); the value at block (h, s) is
/// Q_h(s, .) under the policy's later levels (earlier levels are ignored
/// by backward induction). Exports bound `horizon` and recurrence
/// constants (theta1=0, theta2=horizon, k0=horizon, theta=0).
BlockOracle finite_horizon_internal_function(const FiniteHorizonMDP& fh);

/// Dirichlet(1) draw on the simplex.
ProbVector random_simplex_point(Rng& rng, Index n);

/// Dirichlet(1) transition rows, uniform costs in [0,1], Dirichlet(1) rho0.
TabularMDP random_mdp(Rng& rng, Index n_states, Index n_actions,
                      double discount);

Policy random_policy(Rng& rng, const std::vector<Index>& block_sizes);

FiniteHorizonMDP random_finite_horizon(Rng& rng, int horizon, Index n_states,
                                       Index n_actions);

}  // namespace omd
