#include "omd/mdp.hpp"

#include <Eigen/LU>
#include <cmath>
#include <string>
#include <utility>

namespace omd {

namespace {

void check_policy_shape(const Policy& pi, Index n_states, Index n_actions) {
  if (pi.blocks() != n_states) {
    throw std::invalid_argument("policy has " + std::to_string(pi.blocks()) +
                                " state blocks, expected " +
                                std::to_string(n_states));
  }
  for (Index s = 0; s < n_states; ++s) {
    if (pi[s].size() != n_actions) {
      throw std::invalid_argument("policy block at state " +
                                  std::to_string(s) + " has size " +
                                  std::to_string(pi[s].size()) +
                                  ", expected " + std::to_string(n_actions));
    }
  }
}

// State-to-state kernel and per-state cost under a fixed policy.
std::pair<Matd, Vecd> mix_policy(const TabularMDP& mdp, const Policy& pi) {
  Matd kernel = Matd::Zero(mdp.n_states, mdp.n_states);
  Vecd mixed_cost = Vecd::Zero(mdp.n_states);
  for (Index s = 0; s < mdp.n_states; ++s) {
    for (Index a = 0; a < mdp.n_actions; ++a) {
      const double w = pi[s][a];
      if (w == 0.0) continue;
      kernel.row(s) += w * mdp.transition.row(mdp.row(s, a));
      mixed_cost[s] += w * mdp.cost(s, a);
    }
  }
  return {std::move(kernel), std::move(mixed_cost)};
}

}  // namespace

TabularMDP::TabularMDP(Index n_states_in, Index n_actions_in,
                       Matd transition_in, Matd cost_in, double discount_in,
                       ProbVector rho0_in)
    : n_states(n_states_in),
      n_actions(n_actions_in),
      transition(std::move(transition_in)),
      cost(std::move(cost_in)),
      discount(discount_in),
      rho0(std::move(rho0_in)) {
  if (n_states < 1 || n_actions < 1) {
    throw std::invalid_argument("MDP needs at least one state and action");
  }
  if (!(discount >= 0.0) || discount >= 1.0) {
    throw std::invalid_argument("discount must lie in [0,1)");
  }
  if (transition.rows() != n_states * n_actions ||
      transition.cols() != n_states) {
    throw std::invalid_argument("transition kernel must be (nS*nA) x nS");
  }
  if (cost.rows() != n_states || cost.cols() != n_actions) {
    throw std::invalid_argument("cost matrix must be nS x nA");
  }
  if (rho0.size() != n_states) {
    throw std::invalid_argument("initial distribution must have nS entries");
  }
  for (Index s = 0; s < n_states; ++s) {
    for (Index a = 0; a < n_actions; ++a) {
      const auto r = transition.row(row(s, a));
      if (!r.allFinite() || r.minCoeff() < 0.0 ||
          std::abs(r.sum() - 1.0) > 1e-10) {
        throw std::invalid_argument(
            "transition row (s=" + std::to_string(s) +
            ",a=" + std::to_string(a) + ") is not a distribution");
      }
      const double c = cost(s, a);
      if (!std::isfinite(c) || c < 0.0 || c > 1.0) {
        throw std::invalid_argument("cost (s=" + std::to_string(s) +
                                    ",a=" + std::to_string(a) +
                                    ") outside [0,1]");
      }
    }
  }
}

PolicyEvaluation policy_evaluation(const TabularMDP& mdp, const Policy& pi) {
  check_policy_shape(pi, mdp.n_states, mdp.n_actions);
  auto [kernel, mixed_cost] = mix_policy(mdp, pi);
  const Matd system = Matd::Identity(mdp.n_states, mdp.n_states) -
                      mdp.discount * kernel;
  PolicyEvaluation out;
  out.v = system.partialPivLu().solve((1.0 - mdp.discount) * mixed_cost);
  out.q = Matd(mdp.n_states, mdp.n_actions);
  for (Index s = 0; s < mdp.n_states; ++s) {
    for (Index a = 0; a < mdp.n_actions; ++a) {
      out.q(s, a) = (1.0 - mdp.discount) * mdp.cost(s, a) +
                    mdp.discount * mdp.transition.row(mdp.row(s, a)).dot(out.v);
    }
  }
  out.advantage = out.q.colwise() - out.v;
  return out;
}

double policy_objective(const TabularMDP& mdp, const Policy& pi) {
  return mdp.rho0.weights().dot(policy_evaluation(mdp, pi).v);
}

ProbVector visitation_distribution(const TabularMDP& mdp, const Policy& pi,
                                   const ProbVector& start) {
  check_policy_shape(pi, mdp.n_states, mdp.n_actions);
  if (start.size() != mdp.n_states) {
    throw std::invalid_argument("start distribution must have nS entries");
  }
  auto [kernel, mixed_cost] = mix_policy(mdp, pi);
  (void)mixed_cost;
  const Matd system = Matd::Identity(mdp.n_states, mdp.n_states) -
                      mdp.discount * kernel.transpose();
  Vecd d = system.partialPivLu().solve(
      (1.0 - mdp.discount) * start.weights());
  assert(d.minCoeff() >= -1e-12);
  d = d.cwiseMax(0.0);
  return ProbVector(d);
}

ValueIteration value_iteration(const TabularMDP& mdp, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const double stop = mdp.discount > 0.0
                          ? tol * (1.0 - mdp.discount) / mdp.discount
                          : 0.0;
  Vecd v = Vecd::Zero(mdp.n_states);
  Matd q(mdp.n_states, mdp.n_actions);
  long long sweeps = 0;
  double change;
  do {
    for (Index s = 0; s < mdp.n_states; ++s) {
      for (Index a = 0; a < mdp.n_actions; ++a) {
        q(s, a) = (1.0 - mdp.discount) * mdp.cost(s, a) +
                  mdp.discount * mdp.transition.row(mdp.row(s, a)).dot(v);
      }
    }
    const Vecd next = q.rowwise().minCoeff();
    change = (next - v).lpNorm<Eigen::Infinity>();
    v = next;
    ++sweeps;
  } while (change > stop);

  Policy greedy = ProductDistribution::uniform(
      std::vector<Index>(static_cast<std::size_t>(mdp.n_states),
                         mdp.n_actions));
  for (Index s = 0; s < mdp.n_states; ++s) {
    Index best = 0;
    q.row(s).minCoeff(&best);
    greedy[s] = ProbVector::point_mass(mdp.n_actions, best);
  }
  const double objective = mdp.rho0.weights().dot(v);
  return ValueIteration{std::move(v), std::move(greedy), objective, sweeps};
}

BlockOracle npg_internal_function(const TabularMDP& mdp) {
  BlockOracle oracle;
  oracle.block_sizes.assign(static_cast<std::size_t>(mdp.n_states),
                            mdp.n_actions);
  oracle.eval = [mdp](const ProductDistribution& pi) {
    const PolicyEvaluation pe = policy_evaluation(mdp, pi);
    std::vector<Vecd> out;
    out.reserve(static_cast<std::size_t>(mdp.n_states));
    for (Index s = 0; s < mdp.n_states; ++s) {
      out.push_back(pe.q.row(s).transpose());
    }
    return out;
  };
  oracle.bound = 1.0;
  oracle.constants =
      RecurrenceConstants{mdp.discount, 1.0, 1.0, mdp.discount};
  return oracle;
}

PerformanceDifference performance_difference(const TabularMDP& mdp,
                                             const Policy& pi_star,
                                             const Policy& pi) {
  const PolicyEvaluation star = policy_evaluation(mdp, pi_star);
  const PolicyEvaluation base = policy_evaluation(mdp, pi);
  const ProbVector d_star = visitation_distribution(mdp, pi_star, mdp.rho0);
  PerformanceDifference out;
  out.lhs = mdp.rho0.weights().dot(star.v) - mdp.rho0.weights().dot(base.v);
  double inner = 0.0;
  for (Index s = 0; s < mdp.n_states; ++s) {
    inner += d_star[s] * base.advantage.row(s).dot(
                             (pi_star[s].weights() - pi[s].weights()));
  }
  out.rhs = inner / (1.0 - mdp.discount);
  return out;
}

FiniteHorizonMDP::FiniteHorizonMDP(int horizon_in,
                                   std::vector<Index> n_states_in,
                                   std::vector<Index> n_actions_in,
                                   std::vector<Matd> transition_in,
                                   std::vector<Matd> cost_in,
                                   ProbVector rho1_in)
    : horizon(horizon_in),
      n_states(std::move(n_states_in)),
      n_actions(std::move(n_actions_in)),
      transition(std::move(transition_in)),
      cost(std::move(cost_in)),
      rho1(std::move(rho1_in)) {
  if (horizon < 1) throw std::invalid_argument("horizon must be positive");
  const auto levels = static_cast<std::size_t>(horizon);
  if (n_states.size() != levels || n_actions.size() != levels ||
      cost.size() != levels || transition.size() != levels - 1) {
    throw std::invalid_argument("per-level field counts do not match horizon");
  }
  if (rho1.size() != n_states[0]) {
    throw std::invalid_argument("initial distribution size mismatch");
  }
  for (std::size_t h = 0; h < levels; ++h) {
    if (n_states[h] < 1 || n_actions[h] < 1) {
      throw std::invalid_argument("empty level " + std::to_string(h));
    }
    if (cost[h].rows() != n_states[h] || cost[h].cols() != n_actions[h]) {
      throw std::invalid_argument("cost shape mismatch at level " +
                                  std::to_string(h));
    }
    if (cost[h].minCoeff() < 0.0 || cost[h].maxCoeff() > 1.0 ||
        !cost[h].allFinite()) {
      throw std::invalid_argument("costs outside [0,1] at level " +
                                  std::to_string(h));
    }
    if (h + 1 < levels) {
      const Matd& p = transition[h];
      if (p.rows() != n_states[h] * n_actions[h] ||
          p.cols() != n_states[h + 1]) {
        throw std::invalid_argument("transition shape mismatch at level " +
                                    std::to_string(h));
      }
      for (Index r = 0; r < p.rows(); ++r) {
        if (!p.row(r).allFinite() || p.row(r).minCoeff() < 0.0 ||
            std::abs(p.row(r).sum() - 1.0) > 1e-10) {
          throw std::invalid_argument(
              "transition row (h=" + std::to_string(h) + ",s=" +
              std::to_string(r / n_actions[h]) + ",a=" +
              std::to_string(r % n_actions[h]) + ") is not a distribution");
        }
      }
    }
  }
}

Index FiniteHorizonMDP::block(int h, Index s) const {
  Index offset = 0;
  for (int k = 0; k < h; ++k) offset += n_states[static_cast<std::size_t>(k)];
  return offset + s;
}

std::vector<Index> FiniteHorizonMDP::policy_sizes() const {
  std::vector<Index> sizes;
  for (int h = 0; h < horizon; ++h) {
    const auto hs = static_cast<std::size_t>(h);
    for (Index s = 0; s < n_states[hs]; ++s) sizes.push_back(n_actions[hs]);
  }
  return sizes;
}

FiniteHorizonEvaluation finite_horizon_evaluation(const FiniteHorizonMDP& fh,
                                                  const Policy& pi) {
  const std::vector<Index> sizes = fh.policy_sizes();
  if (pi.blocks() != static_cast<Index>(sizes.size())) {
    throw std::invalid_argument("policy block count mismatch");
  }
  FiniteHorizonEvaluation out;
  out.q.resize(static_cast<std::size_t>(fh.horizon));
  out.v.resize(static_cast<std::size_t>(fh.horizon));
  for (int h = fh.horizon - 1; h >= 0; --h) {
    const auto hs = static_cast<std::size_t>(h);
    Matd q = fh.cost[hs];
    if (h + 1 < fh.horizon) {
      const Vecd& v_next = out.v[hs + 1];
      for (Index s = 0; s < fh.n_states[hs]; ++s) {
        for (Index a = 0; a < fh.n_actions[hs]; ++a) {
          q(s, a) += fh.transition[hs]
                         .row(s * fh.n_actions[hs] + a)
                         .dot(v_next);
        }
      }
    }
    Vecd v(fh.n_states[hs]);
    for (Index s = 0; s < fh.n_states[hs]; ++s) {
      v[s] = q.row(s).dot(pi[fh.block(h, s)].weights());
    }
    out.q[hs] = std::move(q);
    out.v[hs] = std::move(v);
  }
  out.objective = fh.rho1.weights().dot(out.v[0]);
  return out;
}

BlockOracle finite_horizon_internal_function(const FiniteHorizonMDP& fh) {
  BlockOracle oracle;
  oracle.block_sizes = fh.policy_sizes();
  oracle.eval = [fh](const ProductDistribution& pi) {
    const FiniteHorizonEvaluation ev = finite_horizon_evaluation(fh, pi);
    std::vector<Vecd> out;
    for (int h = 0; h < fh.horizon; ++h) {
      const auto hs = static_cast<std::size_t>(h);
      for (Index s = 0; s < fh.n_states[hs]; ++s) {
        out.push_back(ev.q[hs].row(s).transpose());
      }
    }
    return out;
  };
  oracle.bound = static_cast<double>(fh.horizon);
  oracle.constants = RecurrenceConstants{
      0.0, static_cast<double>(fh.horizon), static_cast<double>(fh.horizon),
      0.0};
  return oracle;
}

ProbVector random_simplex_point(Rng& rng, Index n) {
  Vecd w(n);
  for (Index j = 0; j < n; ++j) w[j] = rng.next_exp();
  return ProbVector(Vecd(w / w.sum()));
}

TabularMDP random_mdp(Rng& rng, Index n_states, Index n_actions,
                      double discount) {
  Matd transition(n_states * n_actions, n_states);
  Matd cost(n_states, n_actions);
  for (Index s = 0; s < n_states; ++s) {
    for (Index a = 0; a < n_actions; ++a) {
      transition.row(s * n_actions + a) =
          random_simplex_point(rng, n_states).weights().transpose();
      cost(s, a) = rng.next_double();
    }
  }
  ProbVector rho0 = random_simplex_point(rng, n_states);
  return TabularMDP(n_states, n_actions, std::move(transition),
                    std::move(cost), discount, std::move(rho0));
}

Policy random_policy(Rng& rng, const std::vector<Index>& block_sizes) {
  Policy pi = ProductDistribution::uniform(block_sizes);
  for (Index i = 0; i < pi.blocks(); ++i) {
    pi[i] = random_simplex_point(rng, pi[i].size());
  }
  return pi;
}

FiniteHorizonMDP random_finite_horizon(Rng& rng, int horizon, Index n_states,
                                       Index n_actions) {
  const auto levels = static_cast<std::size_t>(horizon);
  std::vector<Index> ns(levels, n_states);
  std::vector<Index> na(levels, n_actions);
  std::vector<Matd> transition;
  std::vector<Matd> cost;
  for (int h = 0; h < horizon; ++h) {
    Matd c(n_states, n_actions);
    for (Index s = 0; s < n_states; ++s) {
      for (Index a = 0; a < n_actions; ++a) c(s, a) = rng.next_double();
    }
    cost.push_back(std::move(c));
    if (h + 1 < horizon) {
      Matd p(n_states * n_actions, n_states);
      for (Index r = 0; r < p.rows(); ++r) {
        p.row(r) = random_simplex_point(rng, n_states).weights().transpose();
      }
      transition.push_back(std::move(p));
    }
  }
  ProbVector rho1 = random_simplex_point(rng, n_states);
  return FiniteHorizonMDP(horizon, std::move(ns), std::move(na),
                          std::move(transition), std::move(cost),
                          std::move(rho1));
}

}  // namespace omd
