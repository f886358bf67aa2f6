#include "omd/markov_game.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace omd {

namespace {

void check_joint_shape(const ZeroSumMarkovGame& game, const JointPolicy& z,
                       const char* what) {
  if (z.x.blocks() != game.n_states || z.y.blocks() != game.n_states) {
    throw std::invalid_argument(std::string(what) +
                                ": joint policy block count mismatch");
  }
  for (Index s = 0; s < game.n_states; ++s) {
    if (z.x[s].size() != game.n_a || z.y[s].size() != game.n_b) {
      throw std::invalid_argument(std::string(what) + ": joint policy state " +
                                  std::to_string(s) + " size mismatch");
    }
  }
}

// One-step backup matrix (1-theta)*cost_s + theta * E_{s'}[v] per (a, b).
Matd state_backup(const ZeroSumMarkovGame& game, Index s, const Vecd& v) {
  Matd out(game.n_a, game.n_b);
  for (Index a = 0; a < game.n_a; ++a) {
    for (Index b = 0; b < game.n_b; ++b) {
      out(a, b) =
          (1.0 - game.discount) * game.cost[static_cast<std::size_t>(s)](a, b) +
          game.discount * game.transition.row(game.row(s, a, b)).dot(v);
    }
  }
  return out;
}

}  // namespace

ZeroSumMarkovGame::ZeroSumMarkovGame(Index n_states_in, Index n_a_in,
                                     Index n_b_in, Matd transition_in,
                                     std::vector<Matd> cost_in,
                                     double discount_in, ProbVector rho0_in)
    : n_states(n_states_in),
      n_a(n_a_in),
      n_b(n_b_in),
      transition(std::move(transition_in)),
      cost(std::move(cost_in)),
      discount(discount_in),
      rho0(std::move(rho0_in)) {
  if (n_states < 1 || n_a < 1 || n_b < 1) {
    throw std::invalid_argument(
        "ZeroSumMarkovGame: all dimensions must be at least 1");
  }
  if (!(discount >= 0.0) || !(discount < 1.0)) {
    throw std::invalid_argument(
        "ZeroSumMarkovGame: discount must lie in [0, 1)");
  }
  if (transition.rows() != n_states * n_a * n_b ||
      transition.cols() != n_states) {
    throw std::invalid_argument("ZeroSumMarkovGame: transition shape mismatch");
  }
  if (static_cast<Index>(cost.size()) != n_states) {
    throw std::invalid_argument("ZeroSumMarkovGame: cost block count mismatch");
  }
  for (Index s = 0; s < n_states; ++s) {
    const Matd& c = cost[static_cast<std::size_t>(s)];
    if (c.rows() != n_a || c.cols() != n_b) {
      throw std::invalid_argument("ZeroSumMarkovGame: cost block " +
                                  std::to_string(s) + " shape mismatch");
    }
    if (!c.allFinite() || c.minCoeff() < 0.0 || c.maxCoeff() > 1.0) {
      throw std::invalid_argument("ZeroSumMarkovGame: cost block " +
                                  std::to_string(s) +
                                  " must lie in [0, 1]");
    }
    for (Index a = 0; a < n_a; ++a) {
      for (Index b = 0; b < n_b; ++b) {
        const auto r = transition.row(row(s, a, b));
        if (!r.allFinite() || r.minCoeff() < 0.0 ||
            std::abs(r.sum() - 1.0) > 1e-10) {
          throw std::invalid_argument(
              "ZeroSumMarkovGame: transition row (s=" + std::to_string(s) +
              ",a=" + std::to_string(a) + ",b=" + std::to_string(b) +
              ") is not a probability distribution");
        }
      }
    }
  }
  if (rho0.size() != n_states) {
    throw std::invalid_argument(
        "ZeroSumMarkovGame: start distribution size mismatch");
  }
}

JointEvaluation joint_evaluation(const ZeroSumMarkovGame& game,
                                 const JointPolicy& z) {
  check_joint_shape(game, z, "joint_evaluation");
  const Index n = game.n_states;
  Matd kernel = Matd::Zero(n, n);
  Vecd mixed_cost = Vecd::Zero(n);
  for (Index s = 0; s < n; ++s) {
    const Vecd& xs = z.x[s].weights();
    const Vecd& ys = z.y[s].weights();
    mixed_cost[s] = xs.dot(game.cost[static_cast<std::size_t>(s)] * ys);
    for (Index a = 0; a < game.n_a; ++a) {
      for (Index b = 0; b < game.n_b; ++b) {
        kernel.row(s) += xs[a] * ys[b] * game.transition.row(game.row(s, a, b));
      }
    }
  }
  Matd system = Matd::Identity(n, n) - game.discount * kernel;
  JointEvaluation out;
  out.v = system.partialPivLu().solve((1.0 - game.discount) * mixed_cost);
  out.q.reserve(static_cast<std::size_t>(n));
  for (Index s = 0; s < n; ++s) {
    out.q.push_back(state_backup(game, s, out.v));
  }
  return out;
}

double joint_objective(const ZeroSumMarkovGame& game, const JointPolicy& z) {
  return game.rho0.weights().dot(joint_evaluation(game, z).v);
}

PTensorMap p_tensor(const ZeroSumMarkovGame& game) {
  PTensorMap map;
  map.x_sizes = game.x_sizes();
  map.y_sizes = game.y_sizes();
  map.contraction = game.discount;
  map.bound = 1.0;
  map.l1 = 2.0;
  map.l2 = 1.0;
  map.gamma = 2.0 * game.discount;
  map.eval = [game](const QTensor& q, const JointDistribution& z) {
    Vecd values(game.n_states);
    for (Index s = 0; s < game.n_states; ++s) {
      values[s] = z.x[s].weights().dot(q[static_cast<std::size_t>(s)] *
                                       z.y[s].weights());
    }
    const Vecd continuation = game.transition * values;
    QTensor out;
    out.reserve(static_cast<std::size_t>(game.n_states));
    for (Index s = 0; s < game.n_states; ++s) {
      Matd block(game.n_a, game.n_b);
      for (Index a = 0; a < game.n_a; ++a) {
        for (Index b = 0; b < game.n_b; ++b) {
          block(a, b) = (1.0 - game.discount) *
                            game.cost[static_cast<std::size_t>(s)](a, b) +
                        game.discount * continuation[game.row(s, a, b)];
        }
      }
      out.push_back(std::move(block));
    }
    return out;
  };
  return map;
}

SaddleOracle game_internal_operator(const ZeroSumMarkovGame& game) {
  SaddleOracle oracle;
  oracle.x_sizes = game.x_sizes();
  oracle.y_sizes = game.y_sizes();
  const Index n = game.n_states;
  oracle.eval = [n](const QTensor& q, const JointDistribution& z) {
    SaddleValues out;
    out.x.reserve(static_cast<std::size_t>(n));
    out.y.reserve(static_cast<std::size_t>(n));
    for (Index s = 0; s < n; ++s) {
      const Matd& qs = q[static_cast<std::size_t>(s)];
      out.x.push_back(qs * z.y[s].weights());
      out.y.push_back(-(qs.transpose() * z.x[s].weights()));
    }
    return out;
  };
  return oracle;
}

ShapleySolution shapley_fixed_point(const ZeroSumMarkovGame& game, double tol,
                                    long long max_sweeps) {
  if (!(tol > 0.0)) {
    throw std::invalid_argument("shapley_fixed_point: tol must be positive");
  }
  const Index n = game.n_states;
  const double budget = tol * (1.0 - game.discount) / 4.0;

  Vecd v = Vecd::Zero(n);
  std::vector<ProbVector> x_blocks;
  std::vector<ProbVector> y_blocks;
  for (Index s = 0; s < n; ++s) {
    x_blocks.push_back(ProbVector::uniform(game.n_a));
    y_blocks.push_back(ProbVector::uniform(game.n_b));
  }

  double change = 0.0;
  long long sweeps = 0;
  std::vector<double> value_changes;
  while (true) {
    if (sweeps >= max_sweeps) {
      throw NonConvergence(
          "shapley_fixed_point: sweep budget exhausted", change);
    }
    ++sweeps;
    Vecd next(n);
    for (Index s = 0; s < n; ++s) {
      const auto si = static_cast<std::size_t>(s);
      Matd backup = state_backup(game, s, v);
      MatrixGameSolution sol = solve_matrix_game(
          MatrixGame{backup}, budget, 4000000, &x_blocks[si], &y_blocks[si]);
      next[s] = sol.value;
      x_blocks[si] = sol.x;
      y_blocks[si] = sol.y;
    }
    change = (next - v).lpNorm<Eigen::Infinity>();
    value_changes.push_back(change);
    v = next;
    if (change <= budget) break;
  }

  ShapleySolution out;
  out.v = v;
  out.z = JointPolicy{ProductDistribution(x_blocks),
                      ProductDistribution(y_blocks)};
  out.q.reserve(static_cast<std::size_t>(n));
  for (Index s = 0; s < n; ++s) out.q.push_back(state_backup(game, s, v));
  out.sweeps = sweeps;
  out.value_changes = std::move(value_changes);
  return out;
}

TabularMDP best_response_mdp_for_x(const ZeroSumMarkovGame& game,
                                   const ProductDistribution& y) {
  Matd kernel(game.n_states * game.n_a, game.n_states);
  Matd cost(game.n_states, game.n_a);
  for (Index s = 0; s < game.n_states; ++s) {
    const Vecd& ys = y[s].weights();
    cost.row(s) =
        (game.cost[static_cast<std::size_t>(s)] * ys).transpose();
    for (Index a = 0; a < game.n_a; ++a) {
      auto out_row = kernel.row(s * game.n_a + a);
      out_row.setZero();
      for (Index b = 0; b < game.n_b; ++b) {
        out_row += ys[b] * game.transition.row(game.row(s, a, b));
      }
    }
  }
  return TabularMDP(game.n_states, game.n_a, kernel, cost, game.discount,
                    game.rho0);
}

TabularMDP best_response_mdp_for_y(const ZeroSumMarkovGame& game,
                                   const ProductDistribution& x) {
  Matd kernel(game.n_states * game.n_b, game.n_states);
  Matd cost(game.n_states, game.n_b);
  for (Index s = 0; s < game.n_states; ++s) {
    const Vecd& xs = x[s].weights();
    cost.row(s) =
        Vecd::Ones(game.n_b).transpose() -
        (game.cost[static_cast<std::size_t>(s)].transpose() * xs).transpose();
    for (Index b = 0; b < game.n_b; ++b) {
      auto out_row = kernel.row(s * game.n_b + b);
      out_row.setZero();
      for (Index a = 0; a < game.n_a; ++a) {
        out_row += xs[a] * game.transition.row(game.row(s, a, b));
      }
    }
  }
  return TabularMDP(game.n_states, game.n_b, kernel, cost, game.discount,
                    game.rho0);
}

double nash_gap(const ZeroSumMarkovGame& game, const JointPolicy& z) {
  check_joint_shape(game, z, "nash_gap");
  const double inner_tol = 1e-12;
  const double lower =
      value_iteration(best_response_mdp_for_x(game, z.y), inner_tol).objective;
  const double upper =
      1.0 -
      value_iteration(best_response_mdp_for_y(game, z.x), inner_tol).objective;
  return upper - lower;
}

Vecd psi_weights(const ZeroSumMarkovGame& game, const JointPolicy& z,
                 double tol) {
  check_joint_shape(game, z, "psi_weights");
  TabularMDP for_y = best_response_mdp_for_y(game, z.x);
  TabularMDP for_x = best_response_mdp_for_x(game, z.y);
  Policy y_star = value_iteration(for_y, tol).greedy;
  Policy x_star = value_iteration(for_x, tol).greedy;
  Vecd d_with_y_star =
      visitation_distribution(for_y, y_star, game.rho0).weights();
  Vecd d_with_x_star =
      visitation_distribution(for_x, x_star, game.rho0).weights();
  return d_with_y_star.cwiseMax(d_with_x_star);
}

ZeroSumMarkovGame random_game(Rng& rng, Index n_states, Index n_a, Index n_b,
                              double discount) {
  const Index rows = n_states * n_a * n_b;
  Matd transition(rows, n_states);
  for (Index r = 0; r < rows; ++r) {
    transition.row(r) = random_simplex_point(rng, n_states).weights().transpose();
  }
  std::vector<Matd> cost;
  cost.reserve(static_cast<std::size_t>(n_states));
  for (Index s = 0; s < n_states; ++s) {
    Matd c(n_a, n_b);
    for (Index a = 0; a < n_a; ++a) {
      for (Index b = 0; b < n_b; ++b) c(a, b) = rng.next_double();
    }
    cost.push_back(std::move(c));
  }
  ProbVector rho0 = random_simplex_point(rng, n_states);
  return ZeroSumMarkovGame(n_states, n_a, n_b, std::move(transition),
                           std::move(cost), discount, std::move(rho0));
}

JointPolicy random_joint_policy(Rng& rng, const ZeroSumMarkovGame& game) {
  return JointPolicy{random_policy(rng, game.x_sizes()),
                     random_policy(rng, game.y_sizes())};
}

}  // namespace omd
