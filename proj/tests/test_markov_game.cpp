#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <doctest.h>

#include "omd/markov_game.hpp"
#include "omd/rng.hpp"

using omd::Index;
using omd::JointPolicy;
using omd::Matd;
using omd::ProbVector;
using omd::ProductDistribution;
using omd::QTensor;
using omd::Vecd;
using omd::ZeroSumMarkovGame;

namespace {

ZeroSumMarkovGame constant_cost_game(double c, double discount) {
  const Index n_states = 2, n_a = 2, n_b = 2;
  Matd transition =
      Matd::Constant(n_states * n_a * n_b, n_states, 1.0 / n_states);
  std::vector<Matd> cost(2, Matd::Constant(n_a, n_b, c));
  return ZeroSumMarkovGame(n_states, n_a, n_b, transition, cost, discount,
                           ProbVector::uniform(n_states));
}

QTensor random_qtensor(omd::Rng& rng, const ZeroSumMarkovGame& game,
                       double scale) {
  QTensor q;
  for (Index s = 0; s < game.n_states; ++s) {
    Matd block(game.n_a, game.n_b);
    for (Index a = 0; a < game.n_a; ++a) {
      for (Index b = 0; b < game.n_b; ++b) {
        block(a, b) = rng.next_range(-scale, scale);
      }
    }
    q.push_back(block);
  }
  return q;
}

}  // namespace

TEST_CASE("game construction validation") {
  omd::Rng rng(10u);
  ZeroSumMarkovGame game = omd::random_game(rng, 3, 2, 2, 0.5);

  SUBCASE("rejects broken transition rows") {
    Matd bad = game.transition;
    bad(game.row(1, 0, 1), 0) += 0.3;
    CHECK_THROWS_WITH_AS(
        ZeroSumMarkovGame(3, 2, 2, bad, game.cost, 0.5, game.rho0),
        doctest::Contains("(s=1,a=0,b=1)"), std::invalid_argument);
  }
  SUBCASE("rejects out-of-range costs") {
    auto bad = game.cost;
    bad[2](1, 1) = 1.4;
    CHECK_THROWS_AS(
        ZeroSumMarkovGame(3, 2, 2, game.transition, bad, 0.5, game.rho0),
        std::invalid_argument);
  }
  SUBCASE("rejects discount outside [0,1)") {
    CHECK_THROWS_AS(ZeroSumMarkovGame(3, 2, 2, game.transition, game.cost,
                                      1.0, game.rho0),
                    std::invalid_argument);
  }
}

TEST_CASE("joint evaluation") {
  omd::Rng rng(20u);

  SUBCASE("constant costs give constant values") {
    ZeroSumMarkovGame game = constant_cost_game(0.4, 0.7);
    JointPolicy z = omd::random_joint_policy(rng, game);
    auto ev = omd::joint_evaluation(game, z);
    for (Index s = 0; s < game.n_states; ++s) {
      CHECK(ev.v[s] == doctest::Approx(0.4).epsilon(1e-12));
      CHECK(ev.q[static_cast<std::size_t>(s)].minCoeff() ==
            doctest::Approx(0.4).epsilon(1e-12));
      CHECK(ev.q[static_cast<std::size_t>(s)].maxCoeff() ==
            doctest::Approx(0.4).epsilon(1e-12));
    }
  }
  SUBCASE("single-column games reduce to policy evaluation") {
    ZeroSumMarkovGame game = omd::random_game(rng, 4, 3, 1, 0.8);
    JointPolicy z = omd::random_joint_policy(rng, game);
    auto ev = omd::joint_evaluation(game, z);
    omd::TabularMDP mdp = omd::best_response_mdp_for_x(game, z.y);
    auto pe = omd::policy_evaluation(mdp, z.x);
    CHECK((ev.v - pe.v).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK(std::abs(omd::joint_objective(game, z) -
                   omd::policy_objective(mdp, z.x)) <= 1e-12);
  }
  SUBCASE("defining equation residual and value range") {
    for (int k = 0; k < 5; ++k) {
      ZeroSumMarkovGame game = omd::random_game(rng, 5, 3, 3, 0.9);
      JointPolicy z = omd::random_joint_policy(rng, game);
      auto ev = omd::joint_evaluation(game, z);
      for (Index s = 0; s < game.n_states; ++s) {
        const auto si = static_cast<std::size_t>(s);
        const double mixed =
            z.x[s].weights().dot(ev.q[si] * z.y[s].weights());
        CHECK(std::abs(ev.v[s] - mixed) <= 1e-10);
        CHECK(ev.q[si].minCoeff() >= 0.0);
        CHECK(ev.q[si].maxCoeff() <= 1.0);
      }
    }
  }
}

TEST_CASE("p tensor") {
  omd::Rng rng(30u);

  SUBCASE("no discount returns the cost tensor") {
    ZeroSumMarkovGame game = omd::random_game(rng, 3, 2, 3, 0.0);
    omd::PTensorMap p = omd::p_tensor(game);
    JointPolicy z = omd::random_joint_policy(rng, game);
    QTensor q = random_qtensor(rng, game, 1.0);
    QTensor out = p.evaluate(q, z);
    for (Index s = 0; s < game.n_states; ++s) {
      CHECK((out[static_cast<std::size_t>(s)] -
             game.cost[static_cast<std::size_t>(s)])
                .cwiseAbs()
                .maxCoeff() <= 1e-14);
    }
  }
  SUBCASE("declared constants") {
    ZeroSumMarkovGame game = omd::random_game(rng, 3, 2, 2, 0.6);
    omd::PTensorMap p = omd::p_tensor(game);
    CHECK(p.contraction == doctest::Approx(0.6));
    CHECK(p.bound == doctest::Approx(1.0));
    REQUIRE(p.l1.has_value());
    REQUIRE(p.l2.has_value());
    REQUIRE(p.gamma.has_value());
    CHECK(*p.l1 == doctest::Approx(2.0));
    CHECK(*p.l2 == doctest::Approx(1.0));
    CHECK(*p.gamma == doctest::Approx(1.2));
  }
  SUBCASE("contraction in the tracked matrix") {
    ZeroSumMarkovGame game = omd::random_game(rng, 4, 3, 2, 0.8);
    omd::PTensorMap p = omd::p_tensor(game);
    for (int k = 0; k < 100; ++k) {
      JointPolicy z = omd::random_joint_policy(rng, game);
      QTensor q1 = random_qtensor(rng, game, 1.0);
      QTensor q2 = random_qtensor(rng, game, 1.0);
      const double lhs =
          omd::qtensor_linf_diff(p.eval(q1, z), p.eval(q2, z));
      const double rhs = 0.8 * omd::qtensor_linf_diff(q1, q2);
      CHECK(lhs <= rhs + 1e-12);
    }
  }
  SUBCASE("joint evaluation is a fixed point") {
    ZeroSumMarkovGame game = omd::random_game(rng, 4, 2, 3, 0.7);
    omd::PTensorMap p = omd::p_tensor(game);
    JointPolicy z = omd::random_joint_policy(rng, game);
    auto ev = omd::joint_evaluation(game, z);
    QTensor mapped = p.evaluate(ev.q, z);
    CHECK(omd::qtensor_linf_diff(mapped, ev.q) <= 1e-9);
  }
  SUBCASE("directional difference matches the kernel-mixed inner product") {
    ZeroSumMarkovGame game = omd::random_game(rng, 3, 3, 2, 0.85);
    omd::PTensorMap p = omd::p_tensor(game);
    for (int k = 0; k < 20; ++k) {
      QTensor q = random_qtensor(rng, game, 1.0);
      ProductDistribution y = omd::random_policy(rng, game.y_sizes());
      ProductDistribution x1 = omd::random_policy(rng, game.x_sizes());
      ProductDistribution x2 = omd::random_policy(rng, game.x_sizes());
      QTensor p1 = p.eval(q, JointPolicy{x1, y});
      QTensor p2 = p.eval(q, JointPolicy{x2, y});
      Vecd inner(game.n_states);
      for (Index s = 0; s < game.n_states; ++s) {
        inner[s] = (q[static_cast<std::size_t>(s)] * y[s].weights())
                       .dot(x1[s].weights() - x2[s].weights());
      }
      for (Index s = 0; s < game.n_states; ++s) {
        for (Index a = 0; a < game.n_a; ++a) {
          for (Index b = 0; b < game.n_b; ++b) {
            const double expected =
                game.discount *
                game.transition.row(game.row(s, a, b)).dot(inner);
            const double got = p1[static_cast<std::size_t>(s)](a, b) -
                               p2[static_cast<std::size_t>(s)](a, b);
            CHECK(std::abs(got - expected) <= 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("internal operator") {
  omd::Rng rng(40u);
  ZeroSumMarkovGame game = omd::random_game(rng, 3, 3, 2, 0.6);
  omd::SaddleOracle oracle = omd::game_internal_operator(game);

  SUBCASE("zero tracked matrix gives zero operator values") {
    JointPolicy z = omd::random_joint_policy(rng, game);
    QTensor zero = omd::p_tensor(game).zero();
    auto values = oracle.evaluate(zero, z);
    for (Index s = 0; s < game.n_states; ++s) {
      CHECK(values.x[static_cast<std::size_t>(s)].cwiseAbs().maxCoeff() ==
            0.0);
      CHECK(values.y[static_cast<std::size_t>(s)].cwiseAbs().maxCoeff() ==
            0.0);
    }
  }
  SUBCASE("linear in the tracked matrix") {
    JointPolicy z = omd::random_joint_policy(rng, game);
    QTensor q1 = random_qtensor(rng, game, 1.0);
    QTensor q2 = random_qtensor(rng, game, 1.0);
    const double a = 0.3, b = -1.7;
    QTensor mix;
    for (std::size_t i = 0; i < q1.size(); ++i) {
      mix.push_back(a * q1[i] + b * q2[i]);
    }
    auto v1 = oracle.evaluate(q1, z);
    auto v2 = oracle.evaluate(q2, z);
    auto vm = oracle.evaluate(mix, z);
    for (std::size_t i = 0; i < q1.size(); ++i) {
      CHECK((vm.x[i] - (a * v1.x[i] + b * v2.x[i]))
                .lpNorm<Eigen::Infinity>() <= 1e-12);
      CHECK((vm.y[i] - (a * v1.y[i] + b * v2.y[i]))
                .lpNorm<Eigen::Infinity>() <= 1e-12);
    }
  }
  SUBCASE("operator change is at most twice the tracked-matrix change") {
    for (int k = 0; k < 50; ++k) {
      JointPolicy z = omd::random_joint_policy(rng, game);
      QTensor q1 = random_qtensor(rng, game, 1.0);
      QTensor q2 = random_qtensor(rng, game, 1.0);
      auto v1 = oracle.evaluate(q1, z);
      auto v2 = oracle.evaluate(q2, z);
      double worst = 0.0;
      for (std::size_t i = 0; i < q1.size(); ++i) {
        worst = std::max(worst,
                         (v1.x[i] - v2.x[i]).lpNorm<Eigen::Infinity>());
        worst = std::max(worst,
                         (v1.y[i] - v2.y[i]).lpNorm<Eigen::Infinity>());
      }
      CHECK(worst <= 2.0 * omd::qtensor_linf_diff(q1, q2) + 1e-12);
    }
  }
}

TEST_CASE("shapley fixed point") {
  omd::Rng rng(50u);

  SUBCASE("single joint action reduces to joint evaluation") {
    ZeroSumMarkovGame game = omd::random_game(rng, 4, 1, 1, 0.7);
    auto sol = omd::shapley_fixed_point(game, 1e-8);
    JointPolicy only{ProductDistribution::uniform(game.x_sizes()),
                     ProductDistribution::uniform(game.y_sizes())};
    auto ev = omd::joint_evaluation(game, only);
    CHECK(omd::qtensor_linf_diff(sol.q, ev.q) <= 1e-7);
  }
  SUBCASE("single-column games match value iteration") {
    ZeroSumMarkovGame game = omd::random_game(rng, 4, 3, 1, 0.8);
    auto sol = omd::shapley_fixed_point(game, 1e-9);
    omd::TabularMDP mdp = omd::best_response_mdp_for_x(
        game, ProductDistribution::uniform(game.y_sizes()));
    auto vi = omd::value_iteration(mdp, 1e-12);
    CHECK((sol.v - vi.v).lpNorm<Eigen::Infinity>() <= 1e-8);
  }
  SUBCASE("saddle inequalities at the fixed point") {
    const double tol = 1e-7;
    ZeroSumMarkovGame game = omd::random_game(rng, 4, 3, 3, 0.5);
    auto sol = omd::shapley_fixed_point(game, tol);
    omd::PTensorMap p = omd::p_tensor(game);

    QTensor at_fixed = p.evaluate(sol.q, sol.z);
    CHECK(omd::qtensor_linf_diff(at_fixed, sol.q) <= 4.0 * tol);

    for (int k = 0; k < 50; ++k) {
      ProductDistribution x = omd::random_policy(rng, game.x_sizes());
      ProductDistribution y = omd::random_policy(rng, game.y_sizes());
      QTensor upper = p.evaluate(sol.q, JointPolicy{x, sol.z.y});
      QTensor lower = p.evaluate(sol.q, JointPolicy{sol.z.x, y});
      for (Index s = 0; s < game.n_states; ++s) {
        const auto si = static_cast<std::size_t>(s);
        CHECK((upper[si] - sol.q[si]).minCoeff() >= -4.0 * tol);
        CHECK((sol.q[si] - lower[si]).minCoeff() >= -4.0 * tol);
      }
    }
  }
  SUBCASE("value changes contract geometrically") {
    ZeroSumMarkovGame game = omd::random_game(rng, 4, 2, 2, 0.6);
    auto sol = omd::shapley_fixed_point(game, 1e-8);
    const double budget = 1e-8 * (1.0 - game.discount) / 4.0;
    for (std::size_t k = 0; k + 1 < sol.value_changes.size(); ++k) {
      if (sol.value_changes[k] < 100.0 * budget) continue;
      CHECK(sol.value_changes[k + 1] <=
            game.discount * sol.value_changes[k] + 2.0 * budget);
    }
  }
  SUBCASE("rejects nonpositive tolerance") {
    ZeroSumMarkovGame game = omd::random_game(rng, 2, 2, 2, 0.5);
    CHECK_THROWS_AS(omd::shapley_fixed_point(game, 0.0),
                    std::invalid_argument);
  }
}

TEST_CASE("nash gap") {
  omd::Rng rng(60u);

  SUBCASE("no strategy freedom means zero gap") {
    ZeroSumMarkovGame game = omd::random_game(rng, 3, 1, 1, 0.7);
    JointPolicy z{ProductDistribution::uniform(game.x_sizes()),
                  ProductDistribution::uniform(game.y_sizes())};
    CHECK(std::abs(omd::nash_gap(game, z)) <= 1e-10);
  }
  SUBCASE("never meaningfully negative and zero at the fixed point") {
    ZeroSumMarkovGame game = omd::random_game(rng, 4, 3, 3, 0.6);
    const double tol = 1e-7;
    auto sol = omd::shapley_fixed_point(game, tol);
    const double at_star = omd::nash_gap(game, sol.z);
    CHECK(at_star >= -1e-9);
    CHECK(at_star <= 2.0 * tol);
    for (int k = 0; k < 10; ++k) {
      JointPolicy z = omd::random_joint_policy(rng, game);
      CHECK(omd::nash_gap(game, z) >= -1e-9);
    }
  }
  SUBCASE("invariant under state relabeling") {
    ZeroSumMarkovGame game = omd::random_game(rng, 4, 2, 2, 0.8);
    JointPolicy z = omd::random_joint_policy(rng, game);

    const std::vector<Index> perm = {2, 0, 3, 1};
    const Index n = game.n_states;
    Matd transition(game.transition.rows(), n);
    std::vector<Matd> cost(static_cast<std::size_t>(n));
    Vecd rho(n);
    std::vector<ProbVector> xb(static_cast<std::size_t>(n),
                               ProbVector::uniform(game.n_a));
    std::vector<ProbVector> yb(static_cast<std::size_t>(n),
                               ProbVector::uniform(game.n_b));
    for (Index s = 0; s < n; ++s) {
      const auto ps = perm[static_cast<std::size_t>(s)];
      cost[static_cast<std::size_t>(ps)] =
          game.cost[static_cast<std::size_t>(s)];
      rho[ps] = game.rho0[s];
      xb[static_cast<std::size_t>(ps)] = z.x[s];
      yb[static_cast<std::size_t>(ps)] = z.y[s];
      for (Index a = 0; a < game.n_a; ++a) {
        for (Index b = 0; b < game.n_b; ++b) {
          for (Index sp = 0; sp < n; ++sp) {
            transition(game.row(ps, a, b), perm[static_cast<std::size_t>(sp)]) =
                game.transition(game.row(s, a, b), sp);
          }
        }
      }
    }
    ZeroSumMarkovGame permuted(n, game.n_a, game.n_b, transition, cost,
                               game.discount, ProbVector(rho));
    JointPolicy pz{ProductDistribution(xb), ProductDistribution(yb)};
    CHECK(std::abs(omd::nash_gap(game, z) - omd::nash_gap(permuted, pz)) <=
          1e-10);
  }
}

TEST_CASE("psi weights") {
  omd::Rng rng(70u);
  ZeroSumMarkovGame game = omd::random_game(rng, 5, 3, 3, 0.8);

  SUBCASE("nonnegative with total mass at most two") {
    for (int k = 0; k < 20; ++k) {
      JointPolicy z = omd::random_joint_policy(rng, game);
      Vecd psi = omd::psi_weights(game, z);
      CHECK(psi.minCoeff() >= 0.0);
      CHECK(psi.sum() <= 2.0 + 1e-9);
    }
  }
  SUBCASE("certifies the gap decomposition") {
    auto sol = omd::shapley_fixed_point(game, 1e-8);
    QTensor rescaled = sol.q;
    for (Matd& block : rescaled) block /= 1.0 - game.discount;
    std::vector<omd::JointDistribution> samples;
    for (int k = 0; k < 25; ++k) {
      samples.push_back(omd::random_joint_policy(rng, game));
    }
    auto gap_eval = [&game](const omd::JointDistribution& z) {
      return omd::nash_gap(game, z);
    };
    auto psi = [&game](const omd::JointDistribution& z) {
      return omd::psi_weights(game, z);
    };
    auto report = omd::check_gqcc(gap_eval, psi, rescaled, samples, 1e-6);
    CHECK(report.holds);
    CHECK(report.psi_sum_max <= 2.0 + 1e-9);
  }
}
