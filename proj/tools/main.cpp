// SPDX-License-Identifier: Apache-2.0
//
// ehsched — finite-horizon transmission policies for energy-harvesting
// sensors: solve threshold tables, verify them against brute-force oracles,
// and evaluate policies by seeded Monte Carlo simulation.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ehsched/config.hpp"
#include "ehsched/format.hpp"
#include "ehsched/model.hpp"
#include "ehsched/oracle.hpp"
#include "ehsched/simulate.hpp"
#include "ehsched/single_node.hpp"
#include "ehsched/two_node.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitVerifyFailure = 2;
constexpr int kExitGuardRefusal = 3;

struct CommonOptions {
  std::string config_path;
  std::string preset;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  long long paths = 0;
  bool paths_set = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_preset) {
  cmd->add_option("--config", opts.config_path, "Experiment config file");
  if (with_preset)
    cmd->add_option("--preset", opts.preset, "Built-in experiment: fig1 or fig2")
        ->check(CLI::IsMember({"fig1", "fig2"}));
  cmd->add_option("--out", opts.out, "Output CSV path (overrides config)");
  cmd->add_option("--seed", opts.seed, "Master seed (overrides config)")
      ->each([&opts](const std::string&) { opts.seed_set = true; });
  cmd->add_option("--paths", opts.paths, "Monte Carlo path count (overrides config)")
      ->each([&opts](const std::string&) { opts.paths_set = true; });
}

ehsched::ExperimentConfig resolve_config(const CommonOptions& opts,
                                         bool allow_preset) {
  if (!opts.preset.empty() && !opts.config_path.empty())
    throw ehsched::ConfigError({"--preset and --config are exclusive"});
  ehsched::ExperimentConfig config;
  if (!opts.preset.empty()) {
    if (!allow_preset)
      throw ehsched::ConfigError({"--preset: only valid for sweep and compare"});
    config = opts.preset == "fig2" ? ehsched::preset_fig2()
                                   : ehsched::preset_fig1_discrete();
  } else if (!opts.config_path.empty()) {
    config = ehsched::load_config_file(opts.config_path);
  } else {
    throw ehsched::ConfigError({"--config: required"});
  }
  if (opts.seed_set) config.seed = opts.seed;
  if (opts.paths_set) {
    if (opts.paths < 2) throw ehsched::ConfigError({"--paths: must be >= 2"});
    config.paths = opts.paths;
  }
  if (!opts.out.empty()) config.out = opts.out;
  return config;
}

int require_single_horizon(const ehsched::ExperimentConfig& config,
                           const char* command) {
  if (config.horizons.size() != 1)
    throw ehsched::ConfigError(
        {std::string("horizon: ") + command + " requires a single horizon"});
  return config.horizons.front();
}

const char* kResultHeader = "mode,horizon,battery,policy,mean,stderr,paths,seed";

void append_result_row(std::ostream& os, const std::string& mode, int horizon,
                       int battery, const std::string& policy,
                       const ehsched::MonteCarloResult& mc) {
  os << mode << ',' << horizon << ',' << battery << ',' << policy << ','
     << ehsched::format_g17(mc.mean) << ',' << ehsched::format_g17(mc.std_error)
     << ',' << mc.paths << ',' << mc.seed << '\n';
}

std::ofstream open_fresh(const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ehsched::ConfigError({"out: cannot write " + path});
  return os;
}

// ---------------------------------------------------------------- solve --

int run_solve(const CommonOptions& opts) {
  const auto config = resolve_config(opts, false);
  const int horizon = require_single_horizon(config, "solve");

  double value = 0.0;
  if (config.mode == ehsched::ExperimentMode::TwoNode) {
    const auto table = ehsched::solve_two_node(two_node_spec(config, horizon));
    value = policy_value(table);
    if (!config.out.empty()) {
      auto os = open_fresh(config.out);
      write_csv(os, table);
    }
  } else {
    const auto spec = single_spec(config, horizon);
    const auto table = config.mode == ehsched::ExperimentMode::SingleBinary
                           ? ehsched::solve_binary(spec)
                           : ehsched::solve_discrete(spec);
    value = policy_value(table);
    if (!config.out.empty()) {
      auto os = open_fresh(config.out);
      write_csv(os, table);
    }
  }
  std::cout << ehsched::format_g17(value) << "\n";
  return kExitOk;
}

// ------------------------------------------------------------- simulate --

int run_simulate(const CommonOptions& opts, const std::string& dump_path,
                 long long dump_paths) {
  const auto config = resolve_config(opts, false);
  const int horizon = require_single_horizon(config, "simulate");
  if (config.out.empty()) throw ehsched::ConfigError({"out: required for simulate"});

  ehsched::MonteCarloResult mc;
  std::string mode = to_string(config.mode);
  std::string policy_name = "optimal";
  if (config.mode == ehsched::ExperimentMode::TwoNode) {
    if (!dump_path.empty())
      throw ehsched::ConfigError(
          {"--dump: trajectory dumps are defined for single-node modes"});
    const auto spec = two_node_spec(config, horizon);
    const auto table = ehsched::solve_two_node(spec);
    mc = monte_carlo(dp_policy(table), spec, config.paths, config.seed,
                     config.initial_energy, config.initial_energy);
    policy_name = "O";
  } else {
    const auto spec = single_spec(config, horizon);
    const auto table = config.mode == ehsched::ExperimentMode::SingleBinary
                           ? ehsched::solve_binary(spec)
                           : ehsched::solve_discrete(spec);
    const auto decide = dp_policy(table);
    mc = monte_carlo(decide, spec, config.paths, config.seed,
                     config.initial_energy);
    if (!dump_path.empty()) {
      auto os = open_fresh(dump_path);
      os << ehsched::trajectory_csv_header() << '\n';
      for (long long i = 0; i < dump_paths; ++i) {
        const auto path = sample_path(spec, config.seed,
                                      static_cast<std::uint64_t>(i));
        append_trajectory_csv(os, i,
                              run_policy(decide, path, spec, config.initial_energy));
      }
    }
  }

  const bool fresh = !std::filesystem::exists(config.out) ||
                     std::filesystem::file_size(config.out) == 0;
  std::ofstream os(config.out, std::ios::app);
  if (!os) throw ehsched::ConfigError({"out: cannot write " + config.out});
  if (fresh) os << kResultHeader << '\n';
  append_result_row(os, mode, horizon, config.battery, policy_name, mc);

  std::cout << "mean " << ehsched::format_g17(mc.mean) << " stderr "
            << ehsched::format_g17(mc.std_error) << " paths " << mc.paths
            << " seed " << mc.seed << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- sweep --

int run_sweep(const CommonOptions& opts) {
  const auto config = resolve_config(opts, true);
  if (config.out.empty()) throw ehsched::ConfigError({"out: required for sweep"});
  auto os = open_fresh(config.out);
  os << kResultHeader << '\n';

  const bool fig1 = opts.preset == "fig1";
  for (int horizon : config.horizons) {
    std::vector<ehsched::ExperimentConfig> curves;
    if (fig1) {
      auto discrete = ehsched::preset_fig1_discrete();
      auto binary = ehsched::preset_fig1_binary();
      discrete.paths = binary.paths = config.paths;
      discrete.seed = binary.seed = config.seed;
      curves = {discrete, binary};
    } else {
      curves = {config};
    }
    for (const auto& curve : curves) {
      if (curve.mode == ehsched::ExperimentMode::TwoNode) {
        const auto spec = two_node_spec(curve, horizon);
        const auto joint = ehsched::solve_two_node(spec);
        const auto node1 = ehsched::solve_binary(spec.marginal(1));
        const auto node2 = ehsched::solve_binary(spec.marginal(2));
        append_result_row(os, "two-node", horizon, curve.battery, "O",
                          monte_carlo(dp_policy(joint), spec, curve.paths,
                                      curve.seed));
        append_result_row(os, "two-node", horizon, curve.battery, "S",
                          monte_carlo(decoupled_policy(node1, node2), spec,
                                      curve.paths, curve.seed));
      } else {
        const auto spec = single_spec(curve, horizon);
        const auto table = curve.mode == ehsched::ExperimentMode::SingleBinary
                               ? ehsched::solve_binary(spec)
                               : ehsched::solve_discrete(spec);
        append_result_row(os, to_string(curve.mode), horizon, curve.battery,
                          "optimal",
                          monte_carlo(dp_policy(table), spec, curve.paths,
                                      curve.seed, curve.initial_energy));
      }
    }
  }
  std::cout << "wrote " << config.out << "\n";
  return kExitOk;
}

// -------------------------------------------------------------- compare --

int run_compare(const CommonOptions& opts) {
  const auto config = resolve_config(opts, true);
  if (!opts.preset.empty() && opts.preset != "fig2")
    throw ehsched::ConfigError({"--preset: compare expects fig2"});
  if (config.mode != ehsched::ExperimentMode::TwoNode)
    throw ehsched::ConfigError({"mode: compare requires a two-node config"});

  std::ofstream os;
  if (!config.out.empty()) {
    os = open_fresh(config.out);
    os << "horizon,battery,mean_O,mean_S,mean_diff,stderr_diff,paths,seed,"
          "div00,div01,div10,div11,coincident_slots\n";
  }

  for (int horizon : config.horizons) {
    const auto spec = two_node_spec(config, horizon);
    const auto joint = ehsched::solve_two_node(spec);
    const auto node1 = ehsched::solve_binary(spec.marginal(1));
    const auto node2 = ehsched::solve_binary(spec.marginal(2));
    const auto result = compare_on_common_paths(
        dp_policy(joint), decoupled_policy(node1, node2), spec, config.paths,
        config.seed, decoupled_classifier(node1, node2));

    const auto& d = result.divergence;
    std::cout << "horizon " << horizon << ": mean(O) "
              << ehsched::format_g17(result.a.mean) << ", mean(S) "
              << ehsched::format_g17(result.b.mean) << ", diff "
              << ehsched::format_g17(result.mean_diff) << " +- "
              << ehsched::format_g17(result.std_error_diff) << "\n";
    std::cout << "  first divergences by S decisions (F1,F2): (0,0)="
              << d.first_divergence_by_class[0][0]
              << " (0,1)=" << d.first_divergence_by_class[0][1]
              << " (1,0)=" << d.first_divergence_by_class[1][0]
              << " (1,1)=" << d.first_divergence_by_class[1][1]
              << ", coincident slots " << d.coincident_slots << "\n";

    if (os.is_open()) {
      os << horizon << ',' << config.battery << ','
         << ehsched::format_g17(result.a.mean) << ','
         << ehsched::format_g17(result.b.mean) << ','
         << ehsched::format_g17(result.mean_diff) << ','
         << ehsched::format_g17(result.std_error_diff) << ',' << config.paths
         << ',' << config.seed << ',' << d.first_divergence_by_class[0][0] << ','
         << d.first_divergence_by_class[0][1] << ','
         << d.first_divergence_by_class[1][0] << ','
         << d.first_divergence_by_class[1][1] << ',' << d.coincident_slots
         << '\n';
    }
  }
  return kExitOk;
}

// --------------------------------------------------------------- verify --

struct VerifyState {
  bool failed = false;
  bool guard_refused = false;
};

void report(VerifyState& state, const std::string& what, double deviation,
            double tolerance) {
  const bool ok = deviation <= tolerance;
  if (!ok) state.failed = true;
  std::cout << "verify: " << what << " max deviation "
            << ehsched::format_g17(deviation) << (ok ? " PASS" : " FAIL")
            << "\n";
}

void verify_single(const ehsched::ExperimentConfig& config, int horizon,
                   bool force_enumeration, double guard,
                   const std::string& table_path, VerifyState& state) {
  const auto spec = single_spec(config, horizon);
  const auto table = config.mode == ehsched::ExperimentMode::SingleBinary
                         ? ehsched::solve_binary(spec)
                         : ehsched::solve_discrete(spec);
  const auto vi = ehsched::oracle::value_iteration_single(spec);

  double dev = 0.0;
  for (int k = 1; k <= spec.horizon + 1; ++k)
    for (int m = 0; m <= spec.battery; ++m)
      dev = std::max(dev, std::abs(table.at(k, m) - vi.at(k, m)));
  report(state, "solver vs value iteration (horizon " + std::to_string(horizon) + ")",
         dev, 1e-12);

  const double count = ehsched::oracle::markov_policy_count(spec);
  if (count <= guard || force_enumeration) {
    try {
      const auto enumerated = ehsched::oracle::enumerate_markov_policies(spec, guard);
      report(state,
             "policy enumeration (" +
                 std::to_string(enumerated.policies_evaluated) + " policies)",
             std::abs(enumerated.best_value - vi.at(1, 0)), 1e-12);
    } catch (const ehsched::oracle::GuardRefusal& refusal) {
      std::cout << "verify: " << refusal.what() << "\n";
      state.guard_refused = true;
    }
  } else {
    std::cout << "verify: skipped enumeration (guard: "
              << ehsched::format_g17(count) << " > " << ehsched::format_g17(guard)
              << " policies)\n";
  }

  if (!table_path.empty()) {
    std::ifstream is(table_path);
    if (!is) throw ehsched::ConfigError({"--table: cannot open " + table_path});
    const auto stored =
        ehsched::read_gamma_csv(is, spec.horizon, spec.battery);
    double table_dev = 0.0;
    int bad_k = -1, bad_m = -1;
    for (int k = 1; k <= spec.horizon + 1; ++k)
      for (int m = 0; m <= spec.battery; ++m) {
        const double d = std::abs(
            stored[static_cast<std::size_t>(k - 1) * (spec.battery + 1) + m] -
            table.at(k, m));
        if (d > table_dev) {
          table_dev = d;
          bad_k = k;
          bad_m = m;
        }
      }
    const bool ok = table_dev <= 1e-12;
    if (!ok) state.failed = true;
    std::cout << "verify: table file '" << table_path << "' max deviation "
              << ehsched::format_g17(table_dev);
    if (!ok) std::cout << " at slot=" << bad_k << " energy=" << bad_m;
    std::cout << (ok ? " PASS" : " FAIL") << "\n";
  }
}

void verify_two_node(const ehsched::ExperimentConfig& config, int horizon,
                     bool force_enumeration, double guard, VerifyState& state) {
  const auto spec = two_node_spec(config, horizon);
  const auto table = ehsched::solve_two_node(spec);
  const auto vi = ehsched::oracle::value_iteration_two(spec);

  double dev = 0.0;
  for (int k = 1; k <= spec.horizon + 1; ++k)
    for (int m1 = 0; m1 <= spec.battery; ++m1)
      for (int m2 = 0; m2 <= spec.battery; ++m2)
        dev = std::max(dev, std::abs(table.at(k, m1, m2) - vi.at(k, m1, m2)));
  report(state,
         "solver vs value iteration (horizon " + std::to_string(horizon) + ")",
         dev, 1e-12);

  const double count = ehsched::oracle::markov_policy_count(spec);
  if (count <= guard || force_enumeration) {
    try {
      const auto enumerated = ehsched::oracle::enumerate_markov_policies(spec, guard);
      report(state,
             "policy enumeration (" +
                 std::to_string(enumerated.policies_evaluated) + " policies)",
             std::abs(enumerated.best_value - vi.at(1, 0, 0)), 1e-12);
    } catch (const ehsched::oracle::GuardRefusal& refusal) {
      std::cout << "verify: " << refusal.what() << "\n";
      state.guard_refused = true;
    }
  } else {
    std::cout << "verify: skipped enumeration (guard: "
              << ehsched::format_g17(count) << " > " << ehsched::format_g17(guard)
              << " policies)\n";
  }
}

int run_verify(const CommonOptions& opts, bool force_enumeration, double guard,
               const std::string& table_path) {
  const auto config = resolve_config(opts, false);
  VerifyState state;
  for (int horizon : config.horizons) {
    if (config.mode == ehsched::ExperimentMode::TwoNode) {
      if (!table_path.empty())
        throw ehsched::ConfigError({"--table: only supported for single-node configs"});
      verify_two_node(config, horizon, force_enumeration, guard, state);
    } else {
      verify_single(config, horizon, force_enumeration, guard, table_path, state);
    }
  }
  if (state.failed) return kExitVerifyFailure;
  if (state.guard_refused && force_enumeration) return kExitGuardRefusal;
  return kExitOk;
}

// ------------------------------------------------------------- quantize --

int run_quantize(const CommonOptions& opts, const std::string& family, double a,
                 double b, double rate, int levels) {
  ehsched::ChannelDistribution dist;
  if (!opts.config_path.empty()) {
    const auto config = ehsched::load_config_file(opts.config_path);
    if (config.mode == ehsched::ExperimentMode::TwoNode)
      throw ehsched::ConfigError({"quantize: use a single-node config"});
    dist = resolve_channel(config.channel);
  } else if (family == "uniform") {
    dist = ehsched::uniform_channel(a, b, levels);
  } else if (family == "exponential") {
    dist = ehsched::exponential_channel(rate, levels);
  } else {
    throw ehsched::ConfigError({"--family: must be 'uniform' or 'exponential'"});
  }

  std::ostringstream support, probs;
  for (std::size_t j = 0; j < dist.support.size(); ++j) {
    support << (j ? ", " : "") << ehsched::format_g17(dist.support[j].gain);
    probs << (j ? ", " : "") << ehsched::format_g17(dist.support[j].prob);
  }
  std::cout << "channel.support = [" << support.str() << "]\n";
  std::cout << "channel.probs = [" << probs.str() << "]\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "ehsched: optimal finite-horizon transmission policies for "
      "energy-harvesting sensors"};
  app.require_subcommand(1);

  CommonOptions solve_opts, sim_opts, sweep_opts, compare_opts, verify_opts,
      quant_opts;

  auto* solve = app.add_subcommand(
      "solve", "Solve the threshold table; print the program value");
  add_common(solve, solve_opts, false);

  auto* simulate = app.add_subcommand(
      "simulate", "Monte Carlo evaluation of the solved policy");
  add_common(simulate, sim_opts, false);
  std::string dump_path;
  long long dump_paths = 10;
  simulate->add_option("--dump", dump_path,
                       "Write per-slot trajectories for the first paths");
  simulate->add_option("--dump-paths", dump_paths,
                       "How many trajectories to dump");

  auto* sweep = app.add_subcommand(
      "sweep", "Simulate across the horizon sweep list (or a preset)");
  add_common(sweep, sweep_opts, true);

  auto* compare = app.add_subcommand(
      "compare", "Paired comparison of the joint optimum O vs decoupled S");
  add_common(compare, compare_opts, true);

  auto* verify = app.add_subcommand(
      "verify", "Check solver tables against brute-force oracles");
  add_common(verify, verify_opts, false);
  bool force_enumeration = false;
  double guard = 1e7;
  std::string table_path;
  verify->add_flag("--enumerate", force_enumeration,
                   "Fail with exit 3 instead of skipping oversized enumerations");
  verify->add_option("--guard", guard, "Markov-policy count guard");
  verify->add_option("--table", table_path,
                     "Previously written gamma CSV to check");

  auto* quantize = app.add_subcommand(
      "quantize", "Print the finite support for a continuous gain family");
  add_common(quantize, quant_opts, false);
  std::string family;
  double qa = 0.0, qb = 1.0, rate = 1.0;
  int levels = 8;
  quantize->add_option("--family", family, "uniform or exponential");
  quantize->add_option("--a", qa, "Uniform lower bound");
  quantize->add_option("--b", qb, "Uniform upper bound");
  quantize->add_option("--rate", rate, "Exponential rate");
  quantize->add_option("--levels", levels, "Quantization levels")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (solve->parsed()) return run_solve(solve_opts);
    if (simulate->parsed()) return run_simulate(sim_opts, dump_path, dump_paths);
    if (sweep->parsed()) return run_sweep(sweep_opts);
    if (compare->parsed()) return run_compare(compare_opts);
    if (verify->parsed())
      return run_verify(verify_opts, force_enumeration, guard, table_path);
    if (quantize->parsed())
      return run_quantize(quant_opts, family, qa, qb, rate, levels);
  } catch (const ehsched::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitOk;
}
