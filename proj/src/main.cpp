#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "omd/bounds.hpp"
#include "omd/instance_io.hpp"
#include "omd/markov_game.hpp"
#include "omd/mdp.hpp"
#include "omd/omd_min.hpp"
#include "omd/omd_minimax.hpp"
#include "omd/oracles.hpp"
#include "omd/properties.hpp"
#include "omd/rng.hpp"
#include "omd/trace.hpp"

namespace {

using namespace omd;

struct Config {
  std::string mode;
  std::string instance_path;
  std::string generate;
  std::optional<std::int64_t> iters;
  double tol = 1e-8;
  std::optional<double> eta;
  std::uint64_t seed = 1;
  std::string out;
  bool assert_thresholds = false;
};

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t hash = 1469598103934665603ull;
  for (const unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

template <typename Model>
std::string digest_of(const Model& model) {
  std::ostringstream buffer;
  save_instance(buffer, model);
  return hex64(fnv1a(buffer.str()));
}

std::vector<double> parse_generate_fields(const std::string& text,
                                          std::size_t expected,
                                          const std::string& shape) {
  std::vector<double> fields;
  std::stringstream stream(text);
  std::string piece;
  while (std::getline(stream, piece, ',')) {
    try {
      std::size_t used = 0;
      const double value = std::stod(piece, &used);
      while (used < piece.size() &&
             std::isspace(static_cast<unsigned char>(piece[used]))) {
        ++used;
      }
      if (used != piece.size() || !std::isfinite(value)) {
        throw std::invalid_argument("bad field");
      }
      fields.push_back(value);
    } catch (const std::exception&) {
      throw std::invalid_argument("--generate field '" + piece +
                                  "' is not a number (expected \"" + shape +
                                  "\")");
    }
  }
  if (fields.size() != expected) {
    throw std::invalid_argument("--generate \"" + text + "\" has " +
                                std::to_string(fields.size()) +
                                " fields, expected \"" + shape + "\"");
  }
  return fields;
}

Index size_field(double value, const std::string& what) {
  if (!(value >= 1.0) || value != std::floor(value) || value > (1 << 20)) {
    throw std::invalid_argument("--generate " + what +
                                " must be a positive integer, got " +
                                format_double(value));
  }
  return static_cast<Index>(value);
}

std::uint64_t seed_field(double value) {
  if (!(value >= 0.0) || value != std::floor(value)) {
    throw std::invalid_argument("--generate seed must be a whole number, got " +
                                format_double(value));
  }
  return static_cast<std::uint64_t>(value);
}

const char* kind_name(InstanceKind kind) {
  switch (kind) {
    case InstanceKind::mdp:
      return "mdp";
    case InstanceKind::game:
      return "game";
    case InstanceKind::finite_horizon:
      return "finite-horizon";
  }
  return "?";
}

/// Loads or generates the instance for the mode and returns it together
/// with a label and a content digest for the run metadata.
struct PreparedInstance {
  Instance instance;
  std::string label;
  std::string digest;
};

PreparedInstance prepare_instance(const Config& config, InstanceKind expected) {
  if (!config.instance_path.empty() && !config.generate.empty()) {
    throw std::invalid_argument("give either --instance or --generate, not both");
  }
  PreparedInstance prepared;
  if (!config.instance_path.empty()) {
    prepared.instance = load_instance(config.instance_path);
    if (prepared.instance.kind != expected) {
      throw std::invalid_argument(
          std::string("mode '") + config.mode + "' needs a " +
          kind_name(expected) + " instance, but '" + config.instance_path +
          "' holds a " + kind_name(prepared.instance.kind));
    }
    prepared.label = config.instance_path;
  } else if (!config.generate.empty()) {
    prepared.label = "generated:" + config.generate;
    switch (expected) {
      case InstanceKind::mdp: {
        const auto f = parse_generate_fields(config.generate, 4,
                                             "nS,nA,theta,seed");
        Rng rng(seed_field(f[3]));
        prepared.instance.kind = InstanceKind::mdp;
        prepared.instance.mdp.emplace(random_mdp(
            rng, size_field(f[0], "nS"), size_field(f[1], "nA"), f[2]));
        break;
      }
      case InstanceKind::game: {
        const auto f = parse_generate_fields(config.generate, 5,
                                             "nS,nA,nB,theta,seed");
        Rng rng(seed_field(f[4]));
        prepared.instance.kind = InstanceKind::game;
        prepared.instance.game.emplace(
            random_game(rng, size_field(f[0], "nS"), size_field(f[1], "nA"),
                        size_field(f[2], "nB"), f[3]));
        break;
      }
      case InstanceKind::finite_horizon: {
        const auto f = parse_generate_fields(config.generate, 5,
                                             "H,nS,nA,theta,seed");
        if (f[3] != 0.0) {
          throw std::invalid_argument(
              "finite-horizon instances are undiscounted; give theta=0 in "
              "--generate");
        }
        Rng rng(seed_field(f[4]));
        prepared.instance.kind = InstanceKind::finite_horizon;
        prepared.instance.finite_horizon.emplace(random_finite_horizon(
            rng, static_cast<int>(size_field(f[0], "H")),
            size_field(f[1], "nS"), size_field(f[2], "nA")));
        break;
      }
    }
  } else {
    throw std::invalid_argument("mode '" + config.mode +
                                "' needs --instance or --generate");
  }
  switch (prepared.instance.kind) {
    case InstanceKind::mdp:
      prepared.digest = digest_of(*prepared.instance.mdp);
      break;
    case InstanceKind::game:
      prepared.digest = digest_of(*prepared.instance.game);
      break;
    case InstanceKind::finite_horizon:
      prepared.digest = digest_of(*prepared.instance.finite_horizon);
      break;
  }
  return prepared;
}

/// Writes the CSV trace (and a .summary sidecar) when --out is given and
/// prints the key=value summary line; returns the process exit code.
int finish_run(RunTrace& trace, const Config& config, bool thresholds_ok) {
  trace.set_meta("threshold_ok", thresholds_ok);
  if (!config.out.empty()) {
    std::ofstream csv(config.out);
    if (!csv) {
      throw std::runtime_error("cannot open '" + config.out + "' for writing");
    }
    trace.write_csv(csv);
    if (!csv) throw std::runtime_error("failed writing '" + config.out + "'");
    const std::string summary_path = config.out + ".summary";
    std::ofstream summary(summary_path);
    if (!summary) {
      throw std::runtime_error("cannot open '" + summary_path +
                               "' for writing");
    }
    summary << trace.summary_line() << '\n';
  }
  std::cout << trace.summary_line() << '\n';
  if (config.assert_thresholds && !thresholds_ok) return 4;
  return 0;
}

void set_common_meta(RunTrace& trace, const Config& config,
                     const PreparedInstance& prepared) {
  trace.set_meta("mode", config.mode);
  trace.set_meta("instance", prepared.label);
  trace.set_meta("instance_digest", prepared.digest);
  trace.set_meta("seed", config.seed);
}

/// Exact optimum of the level-structured model by backward induction with
/// a hard minimum over actions at every state.
double finite_horizon_optimum(const FiniteHorizonMDP& fh) {
  Vecd v = Vecd::Zero(fh.n_states.back());
  for (int h = fh.horizon - 1; h >= 0; --h) {
    const auto level = static_cast<std::size_t>(h);
    Vecd next(fh.n_states[level]);
    for (Index s = 0; s < fh.n_states[level]; ++s) {
      double best = std::numeric_limits<double>::infinity();
      for (Index a = 0; a < fh.n_actions[level]; ++a) {
        double q = fh.cost[level](s, a);
        if (h + 1 < fh.horizon) {
          q += fh.transition[level].row(s * fh.n_actions[level] + a).dot(v);
        }
        best = std::min(best, q);
      }
      next[s] = best;
    }
    v = std::move(next);
  }
  return fh.rho1.weights().dot(v);
}

int run_min_mode(const Config& config, const PreparedInstance& prepared,
                 const BlockOracle& oracle, const ObjectiveEval& objective,
                 double f_star, std::int64_t alphabet, double weight_sum) {
  const std::int64_t iters = config.iters.value_or(10000);
  const RecurrenceConstants constants = oracle.constants.value();
  MinSchedule schedule =
      min_schedule_adaptive(iters, constants.theta1, constants.theta2,
                            constants.k0, constants.theta);
  if (config.eta) schedule = min_schedule_override(schedule, *config.eta);

  MinRunResult result = run_min(oracle, objective, schedule, config.seed);
  RunTrace& trace = result.trace;

  double best_value = std::numeric_limits<double>::infinity();
  double value_sum = 0.0;
  for (const TraceRow& row : trace.rows()) {
    best_value = std::min(best_value, row.value);
    value_sum += row.value;
  }
  const double final_value = trace.rows().back().value;
  const double achieved =
      value_sum / static_cast<double>(iters) - f_star;
  const double bound = bound_min(schedule, alphabet, weight_sum);

  set_common_meta(trace, config, prepared);
  trace.set_meta("f_star", f_star);
  trace.set_meta("final_value", final_value);
  trace.set_meta("final_suboptimality", final_value - f_star);
  trace.set_meta("best_suboptimality", best_value - f_star);
  trace.set_meta("achieved", achieved);
  trace.set_meta("bound", bound);
  trace.set_meta("ratio", achieved / bound);

  const bool ok = schedule.theory_mode ? achieved <= bound
                                       : best_value - f_star <= config.tol;
  return finish_run(trace, config, ok);
}

int run_min_mdp(const Config& config) {
  const PreparedInstance prepared =
      prepare_instance(config, InstanceKind::mdp);
  const TabularMDP& mdp = *prepared.instance.mdp;
  const BlockOracle oracle = npg_internal_function(mdp);
  const ObjectiveEval objective = [&mdp](const ProductDistribution& pi) {
    return policy_objective(mdp, pi);
  };
  const double f_star = value_iteration(mdp, std::min(config.tol, 1e-10)).objective;
  return run_min_mode(config, prepared, oracle, objective, f_star,
                      mdp.n_actions, 1.0);
}

int run_min_finite_horizon(const Config& config) {
  const PreparedInstance prepared =
      prepare_instance(config, InstanceKind::finite_horizon);
  const FiniteHorizonMDP& fh = *prepared.instance.finite_horizon;
  const BlockOracle oracle = finite_horizon_internal_function(fh);
  const ObjectiveEval objective = [&fh](const ProductDistribution& pi) {
    return finite_horizon_evaluation(fh, pi).objective;
  };
  const double f_star = finite_horizon_optimum(fh);
  const Index alphabet =
      *std::max_element(fh.n_actions.begin(), fh.n_actions.end());
  return run_min_mode(config, prepared, oracle, objective, f_star, alphabet,
                      static_cast<double>(fh.horizon));
}

int run_minimax_game(const Config& config) {
  const PreparedInstance prepared =
      prepare_instance(config, InstanceKind::game);
  const ZeroSumMarkovGame& game = *prepared.instance.game;
  const std::int64_t iters = config.iters.value_or(10000);

  const PTensorMap p = p_tensor(game);
  MinimaxSchedule schedule =
      minimax_schedule(iters, game.discount, p.l1, p.l2, p.gamma);
  if (config.eta) schedule = minimax_schedule_override(schedule, *config.eta);

  const SaddleOracle oracle = game_internal_operator(game);
  const GapEval gap_eval = [&game](const JointDistribution& z) {
    return nash_gap(game, z);
  };
  MinimaxRunResult result = run_minimax(oracle, p, schedule, gap_eval);
  RunTrace& trace = result.trace;

  const double achieved = nash_gap(game, result.z_bar);
  const std::int64_t alphabet = std::max(game.n_a, game.n_b);
  const MinimaxBoundReport bound = bound_minimax(schedule, alphabet, 2.0, 1.0);

  set_common_meta(trace, config, prepared);
  trace.set_meta("nash_gap", achieved);
  trace.set_meta("achieved", achieved);
  trace.set_meta("bound", bound.value);
  trace.set_meta("ratio", achieved / bound.value);
  trace.set_meta("y_appendix", bound.y_appendix);
  trace.set_meta("y_main_text", bound.y_main_text);

  const bool ok =
      schedule.theory_mode ? achieved <= bound.value : achieved <= config.tol;
  return finish_run(trace, config, ok);
}

int run_certify_gqc(const Config& config) {
  const PreparedInstance prepared =
      prepare_instance(config, InstanceKind::mdp);
  const TabularMDP& mdp = *prepared.instance.mdp;
  const std::int64_t samples_n = config.iters.value_or(100);

  const ValueIteration vi = value_iteration(mdp, std::min(config.tol, 1e-10));
  GqcCertificate cert;
  cert.oracle.block_sizes.assign(static_cast<std::size_t>(mdp.n_states),
                                 mdp.n_actions);
  const double rescale = 1.0 / (1.0 - mdp.discount);
  cert.oracle.eval = [&mdp, rescale](const ProductDistribution& pi) {
    const PolicyEvaluation pe = policy_evaluation(mdp, pi);
    std::vector<Vecd> out;
    out.reserve(static_cast<std::size_t>(mdp.n_states));
    for (Index s = 0; s < mdp.n_states; ++s) {
      out.push_back(rescale * pe.q.row(s).transpose());
    }
    return out;
  };
  cert.objective = [&mdp](const ProductDistribution& pi) {
    return policy_objective(mdp, pi);
  };
  cert.minimizer = vi.greedy;
  cert.weights = visitation_distribution(mdp, vi.greedy, mdp.rho0).weights();
  const double weight_sum = cert.weights.sum();

  Rng rng(config.seed);
  const std::vector<Index> sizes(static_cast<std::size_t>(mdp.n_states),
                                 mdp.n_actions);
  RunTrace trace;
  double worst = std::numeric_limits<double>::infinity();
  double worst_abs = 0.0;
  for (std::int64_t i = 1; i <= samples_n; ++i) {
    const std::vector<ProductDistribution> one{random_policy(rng, sizes)};
    const GqcReport report = check_gqc(cert, one, config.tol, config.seed);
    worst = std::min(worst, report.worst_slack);
    worst_abs = std::max(worst_abs, std::abs(report.worst_slack));
    TraceRow row;
    row.t = i;
    row.value = report.worst_slack;
    trace.add_row(std::move(row));
  }

  set_common_meta(trace, config, prepared);
  trace.set_meta("samples", samples_n);
  trace.set_meta("worst_slack", worst);
  trace.set_meta("achieved", worst_abs);
  trace.set_meta("bound", config.tol);
  trace.set_meta("ratio", worst_abs / config.tol);
  trace.set_meta("weight_sum", weight_sum);
  trace.set_meta("theory_mode", true);

  const bool ok =
      worst_abs <= config.tol && std::abs(weight_sum - 1.0) <= 1e-9;
  return finish_run(trace, config, ok);
}

int run_certify_gqcc(const Config& config) {
  const PreparedInstance prepared =
      prepare_instance(config, InstanceKind::game);
  const ZeroSumMarkovGame& game = *prepared.instance.game;
  const std::int64_t samples_n = config.iters.value_or(100);

  const ShapleySolution sol = shapley_fixed_point(game, config.tol);
  QTensor rescaled = sol.q;
  for (Matd& block : rescaled) block /= 1.0 - game.discount;
  const auto gap_eval = [&game](const JointDistribution& z) {
    return nash_gap(game, z);
  };
  const auto psi = [&game](const JointDistribution& z) {
    return psi_weights(game, z);
  };

  Rng rng(config.seed);
  RunTrace trace;
  double worst = std::numeric_limits<double>::infinity();
  double psi_max = 0.0;
  for (std::int64_t i = 1; i <= samples_n; ++i) {
    const std::vector<JointDistribution> one{random_joint_policy(rng, game)};
    const GqccReport report =
        check_gqcc(gap_eval, psi, rescaled, one, config.tol, config.seed);
    worst = std::min(worst, report.worst_slack);
    psi_max = std::max(psi_max, report.psi_sum_max);
    TraceRow row;
    row.t = i;
    row.value = report.worst_slack;
    row.gap = report.psi_sum_max;
    trace.add_row(std::move(row));
  }

  set_common_meta(trace, config, prepared);
  trace.set_meta("samples", samples_n);
  trace.set_meta("worst_slack", worst);
  trace.set_meta("achieved", -worst);
  trace.set_meta("bound", config.tol);
  trace.set_meta("ratio", -worst / config.tol);
  trace.set_meta("psi_sum_max", psi_max);
  trace.set_meta("theory_mode", true);

  const bool ok = worst >= -config.tol && psi_max <= 2.0 + 1e-9;
  return finish_run(trace, config, ok);
}

int run_property_mode(const Config& config) {
  if (!config.instance_path.empty() || !config.generate.empty()) {
    throw std::invalid_argument(
        "mode 'property-suite' takes no instance; drop --instance/--generate");
  }
  const std::int64_t cases = config.iters.value_or(1000);
  const PropertyReport report = run_property_suite(cases, config.seed);

  RunTrace trace;
  trace.set_meta("mode", config.mode);
  trace.set_meta("seed", config.seed);
  trace.set_meta("cases", cases);
  std::int64_t index = 0;
  for (const PropertyCheck& check : report.checks) {
    TraceRow row;
    row.t = ++index;
    row.value = check.worst_slack;
    row.gap = static_cast<double>(check.failures);
    row.flags = check.name;
    trace.add_row(std::move(row));
  }
  trace.set_meta("checks", static_cast<std::int64_t>(report.checks.size()));
  trace.set_meta("failures", report.total_failures());
  trace.set_meta("all_passed", report.all_passed());

  return finish_run(trace, config, report.all_passed());
}

int dispatch(const Config& config) {
  if (config.mode == "min-mdp") return run_min_mdp(config);
  if (config.mode == "min-finite-horizon") {
    return run_min_finite_horizon(config);
  }
  if (config.mode == "minimax-game") return run_minimax_game(config);
  if (config.mode == "certify-gqc") return run_certify_gqc(config);
  if (config.mode == "certify-gqcc") return run_certify_gqcc(config);
  if (config.mode == "property-suite") return run_property_mode(config);
  throw std::invalid_argument("unknown mode '" + config.mode + "'");
}

}  // namespace

int main(int argc, char** argv) {
  Config config;
  CLI::App app{
      "Mirror-descent experiment runner for tabular MDPs and zero-sum "
      "stochastic games"};
  app.add_option("--mode", config.mode,
                 "min-mdp | min-finite-horizon | minimax-game | certify-gqc "
                 "| certify-gqcc | property-suite")
      ->required()
      ->check(CLI::IsMember({"min-mdp", "min-finite-horizon", "minimax-game",
                             "certify-gqc", "certify-gqcc",
                             "property-suite"}));
  app.add_option("--instance", config.instance_path,
                 "path to an instance file");
  app.add_option("--generate", config.generate,
                 "draw an instance: \"nS,nA,theta,seed\" (mdp), "
                 "\"nS,nA,nB,theta,seed\" (game), \"H,nS,nA,theta,seed\" "
                 "(finite-horizon, theta must be 0)");
  app.add_option("--iters", config.iters,
                 "iteration count (certify modes: sample count; "
                 "property-suite: cases per check)");
  app.add_option("--tol", config.tol,
                 "oracle and threshold tolerance (default 1e-8)");
  app.add_option("--eta", config.eta,
                 "step-size override; flags the run outside-theory");
  app.add_option("--seed", config.seed, "run seed (default 1)");
  app.add_option("--out", config.out,
                 "CSV trace path; also writes <out>.summary");
  app.add_flag("--assert", config.assert_thresholds,
               "exit 4 when a threshold check fails");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return dispatch(config);
  } catch (const NonConvergence& e) {
    std::cerr << "error: " << e.what()
              << " (best gap " << format_double(e.best_gap()) << ")\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
