// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line with the measured numbers. Run via ctest or directly; the binary also
// drives the installed CLI (path baked in at build time) for the
// determinism and exit-code checks.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "ehsched/config.hpp"
#include "ehsched/format.hpp"
#include "ehsched/oracle.hpp"
#include "ehsched/simulate.hpp"
#include "ehsched/single_node.hpp"
#include "ehsched/two_node.hpp"

using namespace ehsched;

namespace {

void report(int number, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("criterion %2d %-34s %s  (%s)\n", number, name.c_str(),
              pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

// The acceptance grid: n in {1..4}, B in {1..3}, Bernoulli rates and a
// uniform categorical arrival, channel supports of size 1..3.
struct GridSpec {
  ProblemSpec spec;
  bool bernoulli;
};

std::vector<GridSpec> acceptance_grid() {
  std::vector<GridSpec> grid;
  for (int n : {1, 2, 3, 4})
    for (int b : {1, 2, 3})
      for (const auto& channel : testfix::grid_channels()) {
        for (double p : {0.0, 0.3, 0.5, 1.0})
          grid.push_back({ProblemSpec::binary(n, b, p, channel), true});
        grid.push_back(
            {ProblemSpec::discrete(n, b, testfix::uniform_arrivals(b), channel),
             false});
      }
  return grid;
}

std::vector<TwoNodeSpec> two_node_grid() {
  std::vector<TwoNodeSpec> grid;
  const std::vector<std::pair<ChannelDistribution, ChannelDistribution>> channels{
      {testfix::unit_gain(), testfix::unit_gain()},
      {testfix::two_gains(), testfix::two_gains()},
      {testfix::two_gains(), testfix::two_gains_shifted()}};
  const std::vector<std::pair<double, double>> rates{
      {0.5, 0.5}, {0.3, 0.7}, {1.0, 0.0}};
  for (int n : {1, 2, 3})
    for (int b : {1, 2})
      for (const auto& [ch1, ch2] : channels)
        for (const auto& [p1, p2] : rates)
          grid.push_back({n, b, p1, p2, ch1, ch2});
  return grid;
}

// Max |solver - value iteration| over all entries of whichever solver
// routes apply to the spec.
double solver_vs_oracle_deviation(const GridSpec& item) {
  const auto vi = oracle::value_iteration_single(item.spec);
  double dev = 0.0;
  auto check = [&](const ThresholdTable& table) {
    for (int k = 1; k <= item.spec.horizon + 1; ++k)
      for (int m = 0; m <= item.spec.battery; ++m)
        dev = std::max(dev, std::abs(table.at(k, m) - vi.at(k, m)));
  };
  check(solve_discrete(item.spec));
  if (item.bernoulli) check(solve_binary(item.spec));
  return dev;
}

// ----------------------------------------------------------------- CLI --

const std::filesystem::path kTmp = "acceptance_tmp";

int run_cli(const std::string& args, const std::string& stdout_file) {
  const std::string cmd = std::string(EHSCHED_CLI_PATH) + " " + args + " > " +
                          (kTmp / stdout_file).string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  os << text;
}

const char* kHandConfig =
    "mode = single-binary\nhorizon = 2\nbattery = 2\narrival.p = 0.5\n"
    "channel.support = [1.7182818284590452]\nchannel.probs = [1]\n"
    "paths = 5000\nseed = 11\n";

const char* kTwoNodeConfig =
    "mode = two-node\nhorizon = 3\nbattery = 2\n"
    "arrival1.p = 0.5\narrival2.p = 0.5\n"
    "channel1.support = [0.5, 2.0]\nchannel1.probs = [0.5, 0.5]\n"
    "channel2.support = [0.45, 1.9]\nchannel2.probs = [0.5, 0.5]\n"
    "paths = 4000\nseed = 17\n";

const char* kSweepConfig =
    "mode = single-binary\nhorizon = [2, 3]\nbattery = 2\narrival.p = 0.5\n"
    "channel.support = [0.5, 2.0]\nchannel.probs = [0.5, 0.5]\n"
    "paths = 3000\nseed = 5\n";

}  // namespace

TEST_CASE("criterion 1: single-node oracle equality over the grid") {
  const auto start = std::chrono::steady_clock::now();
  double dev = 0.0;
  int count = 0;
  for (const auto& item : acceptance_grid()) {
    dev = std::max(dev, solver_vs_oracle_deviation(item));
    ++count;
  }
  const double elapsed = seconds_since(start);
  const bool pass = dev <= 1e-12 && elapsed < 10.0;
  std::ostringstream detail;
  detail << count << " specs, max deviation " << format_g17(dev) << ", "
         << elapsed << " s";
  report(1, "oracle equality, single node", pass, detail.str());
  CHECK(dev <= 1e-12);
  CHECK(elapsed < 10.0);
}

TEST_CASE("criterion 2: enumeration optimality witness") {
  double dev = 0.0;
  long long instances = 0, policies = 0;
  for (const auto& item : acceptance_grid()) {
    if (oracle::markov_policy_count(item.spec) > 1e6) continue;
    const auto result = oracle::enumerate_markov_policies(item.spec, 1e6);
    const auto vi = oracle::value_iteration_single(item.spec);
    dev = std::max(dev, std::abs(result.best_value - vi.at(1, 0)));
    ++instances;
    policies += result.policies_evaluated;
  }
  const bool pass = dev <= 1e-12 && instances > 0;
  std::ostringstream detail;
  detail << instances << " instances, " << policies
         << " policies, max deviation " << format_g17(dev);
  report(2, "markov-policy enumeration", pass, detail.str());
  CHECK(pass);
}

TEST_CASE("criterion 3: binary/discrete reduction") {
  double dev = 0.0;
  long long decision_mismatches = 0, decisions = 0;
  for (const auto& item : acceptance_grid()) {
    if (!item.bernoulli) continue;
    const auto binary = solve_binary(item.spec);
    const auto general = solve_discrete(item.spec);
    for (int k = 1; k <= item.spec.horizon + 1; ++k)
      for (int m = 0; m <= item.spec.battery; ++m)
        dev = std::max(dev, std::abs(binary.at(k, m) - general.at(k, m)));
    for (int k = 1; k <= item.spec.horizon; ++k)
      for (int m = 0; m <= item.spec.battery; ++m)
        for (const auto& atom : item.spec.channel.support) {
          ++decisions;
          if (decide_binary(binary, k, m, atom.gain) !=
              decide_discrete(general, k, m, atom.gain))
            ++decision_mismatches;
        }
  }
  const bool pass = dev <= 1e-12 && decision_mismatches == 0;
  std::ostringstream detail;
  detail << "max table deviation " << format_g17(dev) << ", "
         << decision_mismatches << "/" << decisions << " decision mismatches";
  report(3, "binary/discrete reduction", pass, detail.str());
  CHECK(pass);
}

TEST_CASE("criterion 4: saturated-energy closed form when the cap is idle") {
  double dev = 0.0;
  for (int n : {1, 2, 3, 4})
    for (double p : {0.0, 0.3, 0.5, 1.0})
      for (const auto& channel : testfix::grid_channels())
        for (int b : {n, n + 1, n + 3}) {
          const auto spec = ProblemSpec::binary(n, b, p, channel);
          const auto table = solve_binary(spec);
          const double er = expected_reward(channel, 1);
          for (int k = 1; k <= n; ++k)
            for (int m = n - k + 1; m <= b; ++m)
              dev = std::max(dev, std::abs(table.at(k, m) -
                                           (er + table.at(k + 1, n - k))));
        }
  const bool pass = dev <= 1e-12;
  report(4, "threshold-recursion closed form", pass,
         "max deviation " + format_g17(dev));
  CHECK(pass);
}

TEST_CASE("criterion 5: hand-derived two-slot instance") {
  const auto table = solve_binary(testfix::hand_spec());
  const double d1 = std::abs(table.at(1, 1) - 1.75);
  const double d0 = std::abs(table.at(1, 0) - 1.0);
  const bool pass = d1 <= 1e-12 && d0 <= 1e-12;
  report(5, "hand-derived instance", pass,
         "gamma(1,1) off by " + format_g17(d1) + ", gamma(1,0) off by " +
             format_g17(d0));
  CHECK(pass);
}

TEST_CASE("criterion 6: monte carlo agrees with the DP value") {
  struct Case {
    ProblemSpec spec;
    const char* name;
  };
  const std::vector<Case> cases{
      {testfix::hand_spec(), "hand"},
      {ProblemSpec::discrete(6, 3, testfix::uniform_arrivals(3),
                             testfix::three_gains()),
       "uniform-discrete"},
      {ProblemSpec::binary(8, 2, 0.3, testfix::two_gains()), "sparse-binary"},
  };
  bool pass = true;
  std::ostringstream detail;
  for (const auto& item : cases) {
    const auto start = std::chrono::steady_clock::now();
    const auto table = item.spec.mode == ConsumptionMode::Binary
                           ? solve_binary(item.spec)
                           : solve_discrete(item.spec);
    const auto mc = monte_carlo(dp_policy(table), item.spec, 100000, 20240811);
    const double elapsed = seconds_since(start);
    const double gap = std::abs(mc.mean - policy_value(table));
    const bool ok = gap <= 3.0 * mc.std_error && elapsed < 30.0;
    pass = pass && ok;
    detail << item.name << " |mean-value|/stderr "
           << format_g17(mc.std_error > 0 ? gap / mc.std_error : 0.0) << " in "
           << elapsed << "s; ";
  }
  report(6, "monte carlo vs DP value", pass, detail.str());
  CHECK(pass);
}

TEST_CASE("criterion 7: two-node oracle equality and the divergence classifier") {
  double dev = 0.0;
  for (const auto& spec : two_node_grid()) {
    const auto table = solve_two_node(spec);
    const auto vi = oracle::value_iteration_two(spec);
    for (int k = 1; k <= spec.horizon + 1; ++k)
      for (int m1 = 0; m1 <= spec.battery; ++m1)
        for (int m2 = 0; m2 <= spec.battery; ++m2)
          dev = std::max(dev, std::abs(table.at(k, m1, m2) - vi.at(k, m1, m2)));
  }
  const bool oracle_pass = dev <= 1e-12;
  report(7, "two-node oracle equality", oracle_pass,
         "max deviation " + format_g17(dev));
  CHECK(oracle_pass);

  // Divergence classifier on the Fig.-2 preset: the criterion demands that
  // every first divergence between O and S happens where S is fully idle.
  // The exact optimal policy genuinely violates this (it can prefer
  // draining the fuller battery at a slightly smaller gain, preserving both
  // nodes' future options), so this half is expected to fail; the counts
  // below quantify the gap.
  const auto config = preset_fig2();
  const auto spec = two_node_spec(config, 20);
  const auto joint = solve_two_node(spec);
  const auto t1 = solve_binary(spec.marginal(1));
  const auto t2 = solve_binary(spec.marginal(2));
  const auto result =
      compare_on_common_paths(dp_policy(joint), decoupled_policy(t1, t2), spec,
                              5000, config.seed, decoupled_classifier(t1, t2));
  const auto& classes = result.divergence.first_divergence_by_class;
  const long long violations = classes[0][1] + classes[1][0] + classes[1][1];
  const bool classifier_pass =
      violations == 0 && result.divergence.coincident_slots >= 10000;
  std::ostringstream detail;
  detail << result.divergence.coincident_slots << " coincident slots, classes"
         << " (0,0)=" << classes[0][0] << " (0,1)=" << classes[0][1]
         << " (1,0)=" << classes[1][0] << " (1,1)=" << classes[1][1];
  report(7, "lemma-1 divergence classifier", classifier_pass, detail.str());
  CHECK(result.divergence.coincident_slots >= 10000);
  CHECK_MESSAGE(violations == 0,
                "known model-level gap: the exact optimal policy can transmit "
                "from the fuller battery at the smaller gain, so some first "
                "divergences land outside class (0,0)");
}

TEST_CASE("criterion 8: exact dominance of the joint optimum over S") {
  double worst_excess = 0.0;
  for (const auto& spec : two_node_grid()) {
    const auto joint = solve_two_node(spec);
    const auto t1 = solve_binary(spec.marginal(1));
    const auto t2 = solve_binary(spec.marginal(2));
    const auto policy_s = [&](int k, int u1, int u2, int j1, int j2) {
      return decide_decoupled(
          t1, t2, k, u1, u2,
          spec.channel1.support[static_cast<std::size_t>(j1)].gain,
          spec.channel2.support[static_cast<std::size_t>(j2)].gain);
    };
    const double value_s = oracle::evaluate_fixed_policy(policy_s, spec);
    worst_excess = std::max(worst_excess, value_s - policy_value(joint));
  }
  const bool pass = worst_excess <= 1e-12;
  report(8, "exact dominance O >= S", pass,
         "max (V_S - V_O) = " + format_g17(worst_excess));
  CHECK(pass);

  // relative gap on the Fig.-2 preset: reported, not gated
  const auto config = preset_fig2();
  std::ostringstream gaps;
  for (int horizon : {5, 10, 20}) {
    const auto spec = two_node_spec(config, horizon);
    const auto joint = solve_two_node(spec);
    const auto t1 = solve_binary(spec.marginal(1));
    const auto t2 = solve_binary(spec.marginal(2));
    const auto policy_s = [&](int k, int u1, int u2, int j1, int j2) {
      return decide_decoupled(
          t1, t2, k, u1, u2,
          spec.channel1.support[static_cast<std::size_t>(j1)].gain,
          spec.channel2.support[static_cast<std::size_t>(j2)].gain);
    };
    const double value_s = oracle::evaluate_fixed_policy(policy_s, spec);
    const double value_o = policy_value(joint);
    gaps << "n=" << horizon << ": " << format_g17((value_o - value_s) / value_o)
         << "  ";
  }
  std::printf("criterion  8 report: fig2 relative gap (V_O-V_S)/V_O: %s\n",
              gaps.str().c_str());
}

TEST_CASE("criterion 9: figure-shape reproduction") {
  // fig1: both curves strictly increase with the horizon and the uniform
  // multi-unit curve dominates the binary one.
  const auto discrete_cfg = preset_fig1_discrete();
  const auto binary_cfg = preset_fig1_binary();
  bool fig1_pass = true;
  double prev_discrete = -1.0, prev_binary = -1.0;
  for (int horizon : discrete_cfg.horizons) {
    const auto dspec = single_spec(discrete_cfg, horizon);
    const auto bspec = single_spec(binary_cfg, horizon);
    const auto dmc = monte_carlo(dp_policy(solve_discrete(dspec)), dspec,
                                 discrete_cfg.paths, discrete_cfg.seed);
    const auto bmc = monte_carlo(dp_policy(solve_binary(bspec)), bspec,
                                 binary_cfg.paths, binary_cfg.seed);
    fig1_pass = fig1_pass && dmc.mean > prev_discrete && bmc.mean > prev_binary &&
                dmc.mean >= bmc.mean;
    prev_discrete = dmc.mean;
    prev_binary = bmc.mean;
  }
  report(9, "fig1 sweep ordering", fig1_pass,
         "uniform and binary curves strictly increasing, uniform >= binary");
  CHECK(fig1_pass);

  // fig2: O >= S within 3 paired standard errors at every horizon.
  const auto config = preset_fig2();
  bool fig2_pass = true;
  double worst_margin = 0.0;
  for (int horizon : config.horizons) {
    const auto spec = two_node_spec(config, horizon);
    const auto joint = solve_two_node(spec);
    const auto t1 = solve_binary(spec.marginal(1));
    const auto t2 = solve_binary(spec.marginal(2));
    const auto result = compare_on_common_paths(
        dp_policy(joint), decoupled_policy(t1, t2), spec, config.paths,
        config.seed);
    const double margin = result.mean_diff + 3.0 * result.std_error_diff;
    worst_margin = std::min(worst_margin, margin);
    fig2_pass = fig2_pass && margin >= 0.0;
  }
  report(9, "fig2 O vs S ordering", fig2_pass,
         "min (diff + 3*stderr) = " + format_g17(worst_margin));
  CHECK(fig2_pass);
}

TEST_CASE("criterion 10: CLI byte-determinism") {
  std::filesystem::remove_all(kTmp);
  std::filesystem::create_directories(kTmp);
  write_file(kTmp / "hand.cfg", kHandConfig);
  write_file(kTmp / "two.cfg", kTwoNodeConfig);
  write_file(kTmp / "sweep.cfg", kSweepConfig);

  struct Invocation {
    std::string args;
    std::vector<std::string> outputs;
  };
  const std::string tmp = kTmp.string();
  const std::vector<Invocation> invocations{
      {"solve --config " + tmp + "/hand.cfg --out " + tmp + "/table.csv",
       {"table.csv", "stdout.txt"}},
      {"simulate --config " + tmp + "/hand.cfg --out " + tmp +
           "/sim.csv --dump " + tmp + "/traj.csv --dump-paths 3",
       {"sim.csv", "traj.csv", "stdout.txt"}},
      {"sweep --config " + tmp + "/sweep.cfg --out " + tmp + "/sweep.csv",
       {"sweep.csv", "stdout.txt"}},
      {"compare --config " + tmp + "/two.cfg --out " + tmp + "/cmp.csv",
       {"cmp.csv", "stdout.txt"}},
  };

  bool pass = true;
  for (const auto& invocation : invocations) {
    std::vector<std::string> first, second;
    for (int round = 0; round < 2; ++round) {
      for (const auto& name : invocation.outputs)
        if (name != "stdout.txt") std::filesystem::remove(kTmp / name);
      const int code = run_cli(invocation.args, "stdout.txt");
      CHECK(code == 0);
      auto& bytes = round == 0 ? first : second;
      for (const auto& name : invocation.outputs)
        bytes.push_back(slurp(kTmp / name));
    }
    if (first != second) pass = false;
  }
  report(10, "CLI byte-determinism", pass,
         std::to_string(invocations.size()) + " invocations, two runs each");
  CHECK(pass);
}

TEST_CASE("property: marginal value of stored energy is diminishing") {
  // gamma(k, m) - gamma(k, m-1) nonincreasing in m across the whole grid;
  // a violation would contradict the threshold ordering and must be
  // investigated.
  double worst = 0.0;
  for (const auto& item : acceptance_grid()) {
    const auto table = item.bernoulli ? solve_binary(item.spec)
                                      : solve_discrete(item.spec);
    for (int k = 1; k <= item.spec.horizon; ++k)
      for (int m = 2; m <= item.spec.battery; ++m) {
        const double upper = table.at(k, m - 1) - table.at(k, m - 2);
        const double lower = table.at(k, m) - table.at(k, m - 1);
        worst = std::max(worst, lower - upper);
      }
  }
  const bool pass = worst <= 1e-12;
  report(0, "threshold concavity (property)", pass,
         "max second difference " + format_g17(worst));
  CHECK(pass);
}

TEST_CASE("property: CLI exit codes") {
  std::filesystem::create_directories(kTmp);
  write_file(kTmp / "hand.cfg", kHandConfig);
  write_file(kTmp / "bad.cfg",
             "mode = single-binary\nhorizon = 2\nbattery = 2\n"
             "arrival.p = 0.5\nchannel.support = [1.0]\nchannel.probs = [0.9]\n");
  const std::string tmp = kTmp.string();

  const int bad = run_cli("solve --config " + tmp + "/bad.cfg", "stdout.txt");
  const bool config_error = bad == 1 &&
                            slurp(kTmp / "stdout.txt").find("channel") !=
                                std::string::npos;

  // corrupt one table value and expect verify to locate it
  REQUIRE(run_cli("solve --config " + tmp + "/hand.cfg --out " + tmp +
                      "/good.csv",
                  "stdout.txt") == 0);
  std::string table = slurp(kTmp / "good.csv");
  const auto pos = table.find("1,1,1.75");
  REQUIRE(pos != std::string::npos);
  table.replace(pos, 8, "1,1,1.85");
  write_file(kTmp / "bad.csv", table);
  const int corrupted = run_cli("verify --config " + tmp + "/hand.cfg --table " +
                                    tmp + "/bad.csv",
                                "stdout.txt");
  const std::string verify_out = slurp(kTmp / "stdout.txt");
  const bool located = corrupted == 2 &&
                       verify_out.find("slot=1 energy=1") != std::string::npos;

  const int refused = run_cli("verify --config " + tmp +
                                  "/hand.cfg --enumerate --guard 1",
                              "stdout.txt");
  const bool guard = refused == 3 &&
                     slurp(kTmp / "stdout.txt").find("instance too large") !=
                         std::string::npos;

  const int skipped = run_cli("verify --config " + tmp + "/hand.cfg --guard 1",
                              "stdout.txt");
  const bool skip_ok = skipped == 0 &&
                       slurp(kTmp / "stdout.txt").find("skipped enumeration") !=
                           std::string::npos;

  const int intact = run_cli("verify --config " + tmp + "/hand.cfg --table " +
                                 tmp + "/good.csv",
                             "stdout.txt");
  const bool intact_ok = intact == 0;

  const bool pass = config_error && located && guard && skip_ok && intact_ok;
  report(0, "CLI exit codes (property)", pass,
         std::string("config-error ") + (config_error ? "ok" : "BAD") +
             ", located-corruption " + (located ? "ok" : "BAD") +
             ", guard-refusal " + (guard ? "ok" : "BAD") + ", guard-skip " +
             (skip_ok ? "ok" : "BAD") + ", intact-table " +
             (intact_ok ? "ok" : "BAD"));
  CHECK(pass);
}

TEST_CASE("property: a single-element sweep matches simulate") {
  std::filesystem::create_directories(kTmp);
  write_file(kTmp / "hand.cfg", kHandConfig);
  const std::string tmp = kTmp.string();

  std::filesystem::remove(kTmp / "one_sim.csv");
  REQUIRE(run_cli("simulate --config " + tmp + "/hand.cfg --out " + tmp +
                      "/one_sim.csv",
                  "stdout.txt") == 0);
  REQUIRE(run_cli("sweep --config " + tmp + "/hand.cfg --out " + tmp +
                      "/one_sweep.csv",
                  "stdout.txt") == 0);
  const bool pass = slurp(kTmp / "one_sim.csv") == slurp(kTmp / "one_sweep.csv");
  report(0, "single-element sweep == simulate", pass, "byte-compared CSVs");
  CHECK(pass);
}
