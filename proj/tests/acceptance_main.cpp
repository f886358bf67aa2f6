// Acceptance gate: one pass/fail line per criterion, exit 0 only if all
// pass. Thresholds are pinned here and printed with the measurements that
// were checked against them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "omd/bounds.hpp"
#include "omd/instance_io.hpp"
#include "omd/markov_game.hpp"
#include "omd/mdp.hpp"
#include "omd/omd_min.hpp"
#include "omd/omd_minimax.hpp"
#include "omd/oracles.hpp"
#include "omd/properties.hpp"
#include "omd/rng.hpp"
#include "omd/sequences.hpp"
#include "omd/simplex.hpp"
#include "support/numeric_prox.hpp"

using namespace omd;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

void report(int id, const std::string& name, const Outcome& outcome) {
  std::cout << "criterion " << id << " " << name << ": "
            << (outcome.pass ? "PASS" : "FAIL") << " (" << outcome.detail
            << ")" << std::endl;
}

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(3) << std::scientific << v;
  return out.str();
}

std::vector<Index> action_sizes(const TabularMDP& mdp) {
  return std::vector<Index>(static_cast<std::size_t>(mdp.n_states),
                            mdp.n_actions);
}

// Mixes the transition kernel and cost through a policy: row s of the
// result is the state-to-state kernel and expected cost under pi.
void policy_mix(const TabularMDP& mdp, const Policy& pi, Matd& kernel,
                Vecd& mixed_cost) {
  kernel.resize(mdp.n_states, mdp.n_states);
  mixed_cost.resize(mdp.n_states);
  for (Index s = 0; s < mdp.n_states; ++s) {
    const Vecd& w = pi[s].weights();
    mixed_cost[s] = mdp.cost.row(s).dot(w);
    kernel.row(s).setZero();
    for (Index a = 0; a < mdp.n_actions; ++a) {
      kernel.row(s) += w[a] * mdp.transition.row(mdp.row(s, a));
    }
  }
}

// ---------------------------------------------------------------------------
// Criterion 1: exact identities and closed-form prox maps.

Outcome criterion1() {
  constexpr double kIdentityTol = 1e-10;
  constexpr double kResidualTol = 1e-10;
  constexpr double kProxTol = 1e-8;
  constexpr double kBudgetSeconds = 10.0;
  const auto start = std::chrono::steady_clock::now();

  double worst_identity = 0.0;
  double worst_eval_residual = 0.0;
  double worst_visit_residual = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double theta = (k % 2 == 0) ? 0.5 : 0.9;
    Rng rng(1000u + static_cast<std::uint64_t>(k));
    const TabularMDP mdp = random_mdp(rng, 8, 4, theta);
    const auto sizes = action_sizes(mdp);
    const Policy reference = random_policy(rng, sizes);
    const Policy probe = random_policy(rng, sizes);

    const PerformanceDifference pd =
        performance_difference(mdp, reference, probe);
    worst_identity = std::max(worst_identity, std::abs(pd.lhs - pd.rhs));

    Matd kernel;
    Vecd mixed_cost;
    policy_mix(mdp, probe, kernel, mixed_cost);
    const PolicyEvaluation eval = policy_evaluation(mdp, probe);
    const Vecd eval_residual =
        eval.v - (1.0 - theta) * mixed_cost - theta * kernel * eval.v;
    worst_eval_residual = std::max(
        worst_eval_residual, eval_residual.lpNorm<Eigen::Infinity>());

    const ProbVector d = visitation_distribution(mdp, probe, mdp.rho0);
    const Vecd visit_residual = d.weights() -
                                (1.0 - theta) * mdp.rho0.weights() -
                                theta * kernel.transpose() * d.weights();
    worst_visit_residual = std::max(
        worst_visit_residual, visit_residual.lpNorm<Eigen::Infinity>());
  }

  double worst_kl = 0.0;
  double worst_reg = 0.0;
  Rng prng(77u);
  for (int k = 0; k < 50; ++k) {
    const Index n = 2 + static_cast<Index>(prng.next_index(6));
    Vecd g(n), f(n);
    for (Index j = 0; j < n; ++j) {
      g[j] = prng.next_range(0.05, 1.0);
      f[j] = prng.next_range(-1.0, 1.0);
    }
    g /= g.sum();
    g = (g + Vecd::Constant(n, 1.0 / static_cast<double>(n))) / 2.0;
    g /= g.sum();
    const double eta = prng.next_range(0.05, 0.5);

    const ProbVector closed_kl = kl_prox(ProbVector(g), f, eta);
    const Vecd numeric_kl = testsupport::numeric_kl_prox(g, f, eta);
    worst_kl = std::max(
        worst_kl,
        (closed_kl.weights() - numeric_kl).lpNorm<Eigen::Infinity>());

    const double gamma = prng.next_range(0.2, 1.0);
    const double lambda = prng.next_range(0.0, 0.8);
    const ProbVector closed_reg =
        regularized_kl_prox(ProbVector(g), f, eta, gamma, lambda);
    const Vecd numeric_reg =
        testsupport::numeric_regularized_prox(g, f, eta, gamma, lambda);
    worst_reg = std::max(
        worst_reg,
        (closed_reg.weights() - numeric_reg).lpNorm<Eigen::Infinity>());
  }

  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = worst_identity <= kIdentityTol &&
             worst_eval_residual <= kResidualTol &&
             worst_visit_residual <= kResidualTol && worst_kl <= kProxTol &&
             worst_reg <= kProxTol && elapsed < kBudgetSeconds;
  out.detail = "identity " + fmt(worst_identity) + ", eval residual " +
               fmt(worst_eval_residual) + ", visitation residual " +
               fmt(worst_visit_residual) + ", kl prox " + fmt(worst_kl) +
               ", regularized prox " + fmt(worst_reg) + ", " +
               fmt(elapsed) + " s";
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 2: the per-block inequality certificate is an equality on MDPs.

Outcome criterion2() {
  constexpr double kSlackTol = 1e-9;
  constexpr double kWeightSumTol = 1e-9;

  double worst_abs_slack = 0.0;
  double worst_weight_sum = 0.0;
  for (int inst = 0; inst < 10; ++inst) {
    const double theta = inst < 5 ? 0.5 : 0.9;
    Rng rng(2000u + static_cast<std::uint64_t>(inst));
    const TabularMDP mdp = random_mdp(rng, 8, 4, theta);
    const ValueIteration vi = value_iteration(mdp, 1e-12);
    const ProbVector d = visitation_distribution(mdp, vi.greedy, mdp.rho0);
    worst_weight_sum =
        std::max(worst_weight_sum, std::abs(d.weights().sum() - 1.0));

    const BlockOracle base = npg_internal_function(mdp);
    const double scale = 1.0 / (1.0 - theta);
    BlockOracle scaled;
    scaled.block_sizes = base.block_sizes;
    scaled.eval = [base, scale](const ProductDistribution& x) {
      std::vector<Vecd> values = base.evaluate(x);
      for (Vecd& v : values) v *= scale;
      return values;
    };

    GqcCertificate cert;
    cert.objective = [mdp](const ProductDistribution& x) {
      return policy_objective(mdp, x);
    };
    cert.oracle = scaled;
    cert.minimizer = vi.greedy;
    cert.weights = d.weights();

    const auto sizes = action_sizes(mdp);
    for (int s = 0; s < 100; ++s) {
      const Policy probe = random_policy(rng, sizes);
      const GqcReport rep = check_gqc(cert, {probe}, kSlackTol,
                                      static_cast<std::uint64_t>(s));
      worst_abs_slack = std::max(worst_abs_slack, std::abs(rep.worst_slack));
    }
  }

  Outcome out;
  out.pass =
      worst_abs_slack <= kSlackTol && worst_weight_sum <= kWeightSumTol;
  out.detail = "max |slack| " + fmt(worst_abs_slack) +
               ", max |sum(1/gamma)-1| " + fmt(worst_weight_sum);
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 3: minimization runs with the fixed practical step size.

Outcome criterion3() {
  constexpr double kTarget = 1e-3;
  constexpr double kPerInstanceSeconds = 30.0;

  double worst_suboptimality = 0.0;
  double worst_seconds = 0.0;
  for (int inst = 1; inst <= 20; ++inst) {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(static_cast<std::uint64_t>(inst));
    const TabularMDP mdp = random_mdp(rng, 8, 4, 0.9);
    const ValueIteration vi = value_iteration(mdp, 1e-10);
    const BlockOracle oracle = npg_internal_function(mdp);
    const RecurrenceConstants c = *oracle.constants;
    MinSchedule schedule =
        min_schedule_adaptive(10000, c.theta1, c.theta2, c.k0, c.theta);
    schedule = min_schedule_override(schedule, 0.5);

    const MinRunResult run = run_min(
        oracle,
        [&mdp](const ProductDistribution& x) {
          return policy_objective(mdp, x);
        },
        schedule, static_cast<std::uint64_t>(inst));

    double best = std::numeric_limits<double>::infinity();
    for (const TraceRow& row : run.trace.rows()) {
      best = std::min(best, row.value);
    }
    worst_suboptimality =
        std::max(worst_suboptimality, best - vi.objective);
    worst_seconds = std::max(worst_seconds, seconds_since(start));
  }

  Outcome out;
  out.pass =
      worst_suboptimality <= kTarget && worst_seconds <= kPerInstanceSeconds;
  out.detail = "max best-iterate suboptimality " + fmt(worst_suboptimality) +
               " vs " + fmt(kTarget) + ", slowest instance " +
               fmt(worst_seconds) + " s";
  return out;
}

// ---------------------------------------------------------------------------
// Criteria 4 and 5 share one instrumented theory-mode drive.

struct MinDrive {
  std::vector<double> values;
  std::vector<std::vector<ProbVector>> iterates;
  std::vector<VectorSequence> operator_values;
};

MinDrive drive_min(const TabularMDP& mdp, const BlockOracle& oracle,
                   const MinSchedule& schedule, std::int64_t collect_limit) {
  MinDrive drive;
  const auto blocks = static_cast<std::size_t>(oracle.block_sizes.size());
  drive.iterates.resize(blocks);
  drive.operator_values.resize(blocks);

  OmdMinState state = min_start(oracle);
  auto record = [&](const OmdMinState& s, std::int64_t t) {
    for (std::size_t i = 0; i < blocks; ++i) {
      drive.iterates[i].push_back(s.x[static_cast<Index>(i)]);
    }
    if (t <= collect_limit) {
      const std::vector<Vecd> vals = oracle.evaluate(s.x);
      for (std::size_t i = 0; i < blocks; ++i) {
        drive.operator_values[i].push_back(vals[i]);
      }
    }
  };
  record(state, 0);
  for (std::int64_t t = 1; t <= schedule.iters; ++t) {
    state = min_step(state, oracle, schedule.eta);
    drive.values.push_back(policy_objective(mdp, state.x));
    record(state, t);
  }
  return drive;
}

Outcome criterion4(MinDrive& first_drive, MinSchedule& first_schedule) {
  bool pass = true;
  double worst_ratio = 0.0;
  double worst_zeta_ratio = 0.0;
  for (int inst = 1; inst <= 5; ++inst) {
    Rng rng(400u + static_cast<std::uint64_t>(inst));
    const TabularMDP mdp = random_mdp(rng, 8, 4, 0.9);
    const ValueIteration vi = value_iteration(mdp, 1e-10);
    const BlockOracle oracle = npg_internal_function(mdp);
    const RecurrenceConstants c = *oracle.constants;
    const MinSchedule schedule =
        min_schedule_adaptive(1000, c.theta1, c.theta2, c.k0, c.theta);

    const MinDrive drive = drive_min(mdp, oracle, schedule,
                                     inst == 1 ? 203 : -1);

    double sum = 0.0;
    for (const double v : drive.values) sum += v - vi.objective;
    const double average = sum / static_cast<double>(drive.values.size());
    const double ceiling = bound_min(schedule, mdp.n_actions, 1.0);
    pass = pass && average <= ceiling;
    worst_ratio = std::max(worst_ratio, average / ceiling);

    double zeta = 0.0;
    for (const auto& series : drive.iterates) {
      zeta = std::max(zeta, consecutive_closeness(series));
    }
    const double zeta_cap = 7.0 * schedule.eta * (c.theta1 + c.theta2);
    pass = pass && zeta <= zeta_cap;
    worst_zeta_ratio = std::max(worst_zeta_ratio, zeta / zeta_cap);

    if (inst == 1) {
      first_drive = drive;
      first_schedule = schedule;
    }
  }

  Outcome out;
  out.pass = pass;
  out.detail = "max average-suboptimality/bound " + fmt(worst_ratio) +
               ", max zeta/cap " + fmt(worst_zeta_ratio);
  return out;
}

Outcome criterion5(const MinDrive& drive, const MinSchedule& schedule) {
  Outcome out;
  out.pass = true;
  std::string detail;
  for (int h = 1; h <= 3; ++h) {
    const double cap = finite_difference_bound(schedule.beta, h);
    double worst = 0.0;
    for (const VectorSequence& seq : drive.operator_values) {
      const VectorSequence diff = finite_difference(seq, h);
      const std::size_t scan =
          std::min<std::size_t>(200, diff.size());
      for (std::size_t t0 = 0; t0 < scan; ++t0) {
        worst = std::max(worst, diff[t0].lpNorm<Eigen::Infinity>());
      }
    }
    out.pass = out.pass && worst <= cap;
    if (h > 1) detail += ", ";
    detail += "order " + std::to_string(h) + ": " + fmt(worst) + " vs " +
              fmt(cap);
  }
  out.detail = detail;
  return out;
}

// ---------------------------------------------------------------------------
// Criteria 6, 7, 8 share the same twenty games.

struct GameCriteria {
  Outcome c6;
  Outcome c7;
  Outcome c8;
};

GameCriteria run_game_criteria() {
  constexpr double kNashGapCap = 2e-6;
  constexpr double kSaddleTol = 4e-6;
  constexpr double kReductionTol = 1e-8;
  constexpr double kGapCap = 5e-2;
  constexpr double kRatioCap = 0.75;
  constexpr double kPerInstanceSeconds = 120.0;
  constexpr double kGqccViolationTol = 1e-6;
  constexpr double kPsiSumCap = 2.0 + 1e-9;
  constexpr std::int64_t kHorizon = 20000;

  GameCriteria result;
  result.c6.pass = true;
  result.c7.pass = true;
  result.c8.pass = true;

  double worst_nash_gap = 0.0;
  double worst_fixed_point = 0.0;
  double worst_saddle = 0.0;

  double worst_gap = 0.0;
  double worst_ratio = 0.0;
  int gap_failures = 0;
  int ratio_failures = 0;
  int envelope_failures = 0;
  double worst_game_seconds = 0.0;

  double worst_gqcc_slack = std::numeric_limits<double>::infinity();
  double worst_psi_sum = 0.0;

  int game_index = 0;
  for (const double theta : {0.5, 0.8}) {
    for (int seed = 1; seed <= 10; ++seed) {
      ++game_index;
      Rng rng(static_cast<std::uint64_t>(seed));
      const ZeroSumMarkovGame game = random_game(rng, 5, 3, 3, theta);
      const PTensorMap p = p_tensor(game);

      const ShapleySolution sol = shapley_fixed_point(game, 1e-6);
      worst_nash_gap = std::max(worst_nash_gap, nash_gap(game, sol.z));
      worst_fixed_point = std::max(
          worst_fixed_point,
          qtensor_linf_diff(p.evaluate(sol.q, sol.z), sol.q));

      Rng saddle_rng(0x600u + static_cast<std::uint64_t>(game_index));
      for (int k = 0; k < 50; ++k) {
        const JointDistribution x_probe{
            random_policy(saddle_rng, game.x_sizes()), sol.z.y};
        const QTensor lifted = p.evaluate(sol.q, x_probe);
        const JointDistribution y_probe{
            sol.z.x, random_policy(saddle_rng, game.y_sizes())};
        const QTensor lowered = p.evaluate(sol.q, y_probe);
        for (std::size_t i = 0; i < lifted.size(); ++i) {
          worst_saddle = std::max(
              worst_saddle,
              (sol.q[i] - lifted[i]).maxCoeff());
          worst_saddle = std::max(
              worst_saddle,
              (lowered[i] - sol.q[i]).maxCoeff());
        }
      }

      const auto game_start = std::chrono::steady_clock::now();
      const ShapleySolution reference = shapley_fixed_point(game, 5e-8);
      const SaddleOracle oracle = game_internal_operator(game);
      const MinimaxSchedule schedule =
          minimax_schedule(kHorizon, theta, p.l1, p.l2, p.gamma);
      const GapEval gap_eval = [&game](const JointDistribution& z) {
        return nash_gap(game, z);
      };
      const MinimaxRunResult run = run_minimax(oracle, p, schedule, gap_eval);

      double gap_full = std::numeric_limits<double>::quiet_NaN();
      double gap_half = std::numeric_limits<double>::quiet_NaN();
      bool envelope_ok = true;
      for (const MinimaxCheckpoint& cp : run.checkpoints) {
        if (cp.t == kHorizon) gap_full = cp.gap;
        if (cp.t == kHorizon / 2) gap_half = cp.gap;
        const double envelope =
            q_tracking_envelope(schedule, cp.t, 3, 1.0);
        if (qtensor_linf_diff(cp.q, reference.q) > envelope) {
          envelope_ok = false;
        }
      }
      const double ratio = gap_full / gap_half;
      const double game_seconds = seconds_since(game_start);
      worst_game_seconds = std::max(worst_game_seconds, game_seconds);
      worst_gap = std::max(worst_gap, gap_full);
      worst_ratio = std::max(worst_ratio, ratio);
      if (!(gap_full <= kGapCap)) ++gap_failures;
      if (!(ratio <= kRatioCap)) ++ratio_failures;
      if (!envelope_ok) ++envelope_failures;
      result.c7.pass = result.c7.pass && gap_full <= kGapCap &&
                       ratio <= kRatioCap && envelope_ok &&
                       game_seconds <= kPerInstanceSeconds;

      QTensor q_star = reference.q;
      const double scale = 1.0 / (1.0 - theta);
      for (Matd& block : q_star) block *= scale;
      const auto psi_fn = [&game](const JointDistribution& z) {
        return psi_weights(game, z);
      };
      std::vector<JointDistribution> samples;
      samples.reserve(100);
      Rng sample_rng(0x800u + static_cast<std::uint64_t>(game_index));
      for (int k = 0; k < 100; ++k) {
        samples.push_back(random_joint_policy(sample_rng, game));
      }
      const GqccReport rep =
          check_gqcc(gap_eval, psi_fn, q_star, samples, kGqccViolationTol,
                     static_cast<std::uint64_t>(game_index));
      worst_gqcc_slack = std::min(worst_gqcc_slack, rep.worst_slack);
      worst_psi_sum = std::max(worst_psi_sum, rep.psi_sum_max);

      std::cerr << "  game " << game_index << "/20 (theta " << theta
                << ", seed " << seed << "): gap " << fmt(gap_full)
                << ", ratio " << fmt(ratio) << ", gqcc slack "
                << fmt(rep.worst_slack) << ", " << fmt(game_seconds)
                << " s" << std::endl;
    }
  }

  result.c6.pass = worst_nash_gap <= kNashGapCap &&
                   worst_fixed_point <= kSaddleTol &&
                   worst_saddle <= kSaddleTol;

  double worst_reduction = 0.0;
  for (const double theta : {0.5, 0.8}) {
    for (int seed = 1; seed <= 3; ++seed) {
      Rng rng(0x700u + static_cast<std::uint64_t>(seed));
      const ZeroSumMarkovGame game = random_game(rng, 5, 3, 1, theta);
      const ProductDistribution trivial_y =
          ProductDistribution::uniform(game.y_sizes());
      const TabularMDP reduced = best_response_mdp_for_x(game, trivial_y);
      const ValueIteration vi = value_iteration(reduced, 1e-10);
      const ShapleySolution sol = shapley_fixed_point(game, 1e-9);
      worst_reduction = std::max(
          worst_reduction, (sol.v - vi.v).lpNorm<Eigen::Infinity>());
    }
  }
  result.c6.pass = result.c6.pass && worst_reduction <= kReductionTol;
  result.c6.detail = "max nash gap " + fmt(worst_nash_gap) +
                     ", fixed-point residual " + fmt(worst_fixed_point) +
                     ", saddle violation " + fmt(worst_saddle) +
                     ", single-column reduction " + fmt(worst_reduction);

  result.c7.detail =
      "max gap " + fmt(worst_gap) + " vs " + fmt(kGapCap) + " (" +
      std::to_string(gap_failures) + "/20 over), max ratio " +
      fmt(worst_ratio) + " vs " + fmt(kRatioCap) + " (" +
      std::to_string(ratio_failures) + "/20 over), envelope failures " +
      std::to_string(envelope_failures) + "/20, slowest game " +
      fmt(worst_game_seconds) + " s";

  result.c8.pass = worst_gqcc_slack >= -kGqccViolationTol &&
                   worst_psi_sum <= kPsiSumCap;
  result.c8.detail = "min slack " + fmt(worst_gqcc_slack) +
                     " vs -" + fmt(kGqccViolationTol) + ", max psi sum " +
                     fmt(worst_psi_sum);

  return result;
}

// ---------------------------------------------------------------------------
// Criterion 9: randomized invariant suites.

Outcome criterion9() {
  const PropertyReport report = run_property_suite(1000, 99u);
  Outcome out;
  out.pass = report.all_passed();
  double worst = std::numeric_limits<double>::infinity();
  for (const PropertyCheck& check : report.checks) {
    worst = std::min(worst, check.worst_slack);
  }
  out.detail = std::to_string(report.checks.size()) + " checks, " +
               std::to_string(report.total_failures()) +
               " failures, min slack " + fmt(worst);
  return out;
}

}  // namespace

int main() {
  std::cout << std::setprecision(17);
  int passed = 0;
  int total = 0;
  auto tally = [&](int id, const std::string& name, const Outcome& o) {
    report(id, name, o);
    ++total;
    if (o.pass) ++passed;
  };

  tally(1, "exactness-suite", criterion1());
  tally(2, "mdp-certificate-equality", criterion2());
  tally(3, "min-practical-convergence", criterion3());

  MinDrive first_drive;
  MinSchedule first_schedule;
  tally(4, "min-theory-bound", criterion4(first_drive, first_schedule));
  tally(5, "finite-difference-bound",
        criterion5(first_drive, first_schedule));

  const GameCriteria games = run_game_criteria();
  tally(6, "shapley-oracle", games.c6);
  tally(7, "minimax-convergence", games.c7);
  tally(8, "game-certificate", games.c8);

  tally(9, "property-suites", criterion9());

  std::cout << "acceptance: " << passed << "/" << total
            << " criteria passed" << std::endl;
  return passed == total ? 0 : 1;
}
