// SPDX-License-Identifier: Apache-2.0
#include "ehsched/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ehsched {

std::uint64_t substream_seed(std::uint64_t master_seed,
                             std::uint64_t path_index) {
  // SplitMix64 finalizer over the master seed advanced by the golden-ratio
  // increment per path index.
  std::uint64_t z = master_seed + 0x9E3779B97F4A7C15ull * (path_index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

class PathRng {
 public:
  PathRng(std::uint64_t master_seed, std::uint64_t path_index)
      : engine_(substream_seed(master_seed, path_index)) {}

  double u01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // CDF walk; the final positive-probability cell absorbs any rounding gap.
  int categorical(const std::vector<double>& probs) {
    const double u = u01();
    double cum = 0.0;
    int last_positive = 0;
    for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
      if (probs[static_cast<std::size_t>(i)] <= 0.0) continue;
      cum += probs[static_cast<std::size_t>(i)];
      last_positive = i;
      if (u < cum) return i;
    }
    return last_positive;
  }

  int gain_index(const ChannelDistribution& dist) {
    const double u = u01();
    double cum = 0.0;
    for (std::size_t j = 0; j + 1 < dist.support.size(); ++j) {
      cum += dist.support[j].prob;
      if (u < cum) return static_cast<int>(j);
    }
    return static_cast<int>(dist.support.size()) - 1;
  }

 private:
  std::mt19937_64 engine_;
};

SamplePath sample_path_unchecked(const ProblemSpec& spec,
                                 std::uint64_t master_seed,
                                 std::uint64_t path_index) {
  PathRng rng(master_seed, path_index);
  SamplePath path;
  path.arrivals.assign(1, std::vector<int>(static_cast<std::size_t>(spec.horizon)));
  path.gains.assign(1, std::vector<double>(static_cast<std::size_t>(spec.horizon)));
  for (int k = 0; k < spec.horizon; ++k) {
    path.arrivals[0][static_cast<std::size_t>(k)] =
        rng.categorical(spec.arrivals.probs);
    path.gains[0][static_cast<std::size_t>(k)] =
        spec.channel.support[static_cast<std::size_t>(rng.gain_index(spec.channel))]
            .gain;
  }
  return path;
}

SamplePath sample_path_unchecked(const TwoNodeSpec& spec,
                                 std::uint64_t master_seed,
                                 std::uint64_t path_index) {
  PathRng rng(master_seed, path_index);
  const std::vector<double> bern1{1.0 - spec.arrival_p1, spec.arrival_p1};
  const std::vector<double> bern2{1.0 - spec.arrival_p2, spec.arrival_p2};
  SamplePath path;
  path.arrivals.assign(2, std::vector<int>(static_cast<std::size_t>(spec.horizon)));
  path.gains.assign(2, std::vector<double>(static_cast<std::size_t>(spec.horizon)));
  for (int k = 0; k < spec.horizon; ++k) {
    path.arrivals[0][static_cast<std::size_t>(k)] = rng.categorical(bern1);
    path.gains[0][static_cast<std::size_t>(k)] =
        spec.channel1.support[static_cast<std::size_t>(rng.gain_index(spec.channel1))]
            .gain;
    path.arrivals[1][static_cast<std::size_t>(k)] = rng.categorical(bern2);
    path.gains[1][static_cast<std::size_t>(k)] =
        spec.channel2.support[static_cast<std::size_t>(rng.gain_index(spec.channel2))]
            .gain;
  }
  return path;
}

void check_initial(int initial, int battery, const char* fn) {
  if (initial < 0 || initial > battery)
    throw std::invalid_argument(std::string(fn) + ": initial energy out of range");
}

// Welford accumulator; kept in path-index order so reductions are
// deterministic.
struct RunningStats {
  long long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double std_error() const {
    if (n < 2) return 0.0;
    return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  }
};

}  // namespace

SamplePath sample_path(const ProblemSpec& spec, std::uint64_t master_seed,
                       std::uint64_t path_index) {
  require_valid(spec);
  return sample_path_unchecked(spec, master_seed, path_index);
}

SamplePath sample_path(const TwoNodeSpec& spec, std::uint64_t master_seed,
                       std::uint64_t path_index) {
  require_valid(spec);
  return sample_path_unchecked(spec, master_seed, path_index);
}

SingleDecider dp_policy(const ThresholdTable& table) {
  if (table.spec().mode == ConsumptionMode::Binary)
    return [table](int slot, int available, double gain) {
      return decide_binary(table, slot, available, gain);
    };
  return [table](int slot, int available, double gain) {
    return decide_discrete(table, slot, available, gain);
  };
}

TwoNodeDecider dp_policy(const TwoNodeThresholdTable& table) {
  return [table](int slot, int a1, int a2, double g1, double g2) {
    return decide_two_node(table, slot, a1, a2, g1, g2);
  };
}

TwoNodeDecider decoupled_policy(const ThresholdTable& node1,
                                const ThresholdTable& node2) {
  return [node1, node2](int slot, int a1, int a2, double g1, double g2) {
    return decide_decoupled(node1, node2, slot, a1, a2, g1, g2);
  };
}

DecoupledClassifier decoupled_classifier(const ThresholdTable& node1,
                                         const ThresholdTable& node2) {
  return [node1, node2](int slot, int a1, int a2, double g1, double g2) {
    return std::make_pair(decide_binary(node1, slot, a1, g1),
                          decide_binary(node2, slot, a2, g2));
  };
}

Trajectory run_policy(const SingleDecider& decide, const SamplePath& path,
                      const ProblemSpec& spec, int initial_energy) {
  if (!decide) throw std::invalid_argument("run_policy: empty policy");
  if (path.num_nodes() != 1 || path.num_slots() != spec.horizon)
    throw std::invalid_argument("run_policy: path does not match spec");
  check_initial(initial_energy, spec.battery, "run_policy");

  Trajectory trajectory;
  trajectory.steps.reserve(static_cast<std::size_t>(spec.horizon));
  int carry = initial_energy;
  for (int k = 1; k <= spec.horizon; ++k) {
    const int arrival = path.arrivals[0][static_cast<std::size_t>(k - 1)];
    const double gain = path.gains[0][static_cast<std::size_t>(k - 1)];
    const int available = std::min(carry + arrival, spec.battery);
    const int f = decide(k, available, gain);
    if (f < 0 || f > spec.max_transmit(available)) {
      std::ostringstream os;
      os << "run_policy: infeasible transmission " << f << " at slot " << k
         << " with " << available << " unit(s) available";
      throw std::runtime_error(os.str());
    }
    const double payoff = reward(gain, f);
    trajectory.steps.push_back({arrival, gain, available, f, payoff});
    trajectory.total_payoff += payoff;
    carry = available - f;
  }
  return trajectory;
}

TwoNodeTrajectory run_policy(const TwoNodeDecider& decide, const SamplePath& path,
                             const TwoNodeSpec& spec, int initial_energy1,
                             int initial_energy2) {
  if (!decide) throw std::invalid_argument("run_policy: empty policy");
  if (path.num_nodes() != 2 || path.num_slots() != spec.horizon)
    throw std::invalid_argument("run_policy: path does not match spec");
  check_initial(initial_energy1, spec.battery, "run_policy");
  check_initial(initial_energy2, spec.battery, "run_policy");

  TwoNodeTrajectory trajectory;
  trajectory.steps.reserve(static_cast<std::size_t>(spec.horizon));
  int c1 = initial_energy1, c2 = initial_energy2;
  for (int k = 1; k <= spec.horizon; ++k) {
    const int e1 = path.arrivals[0][static_cast<std::size_t>(k - 1)];
    const int e2 = path.arrivals[1][static_cast<std::size_t>(k - 1)];
    const double g1 = path.gains[0][static_cast<std::size_t>(k - 1)];
    const double g2 = path.gains[1][static_cast<std::size_t>(k - 1)];
    const int u1 = std::min(c1 + e1, spec.battery);
    const int u2 = std::min(c2 + e2, spec.battery);
    const Action a = decide(k, u1, u2, g1, g2);
    if ((a == Action::Tx1 && u1 < 1) || (a == Action::Tx2 && u2 < 1)) {
      std::ostringstream os;
      os << "run_policy: infeasible action at slot " << k << " with energies ("
         << u1 << "," << u2 << ")";
      throw std::runtime_error(os.str());
    }
    const double payoff = a == Action::Tx1   ? reward(g1, 1)
                          : a == Action::Tx2 ? reward(g2, 1)
                                             : 0.0;
    trajectory.steps.push_back({{e1, e2}, {g1, g2}, {u1, u2}, a, payoff});
    trajectory.total_payoff += payoff;
    c1 = u1 - (a == Action::Tx1 ? 1 : 0);
    c2 = u2 - (a == Action::Tx2 ? 1 : 0);
  }
  return trajectory;
}

MonteCarloResult monte_carlo(const SingleDecider& decide, const ProblemSpec& spec,
                             long long n_paths, std::uint64_t master_seed,
                             int initial_energy) {
  require_valid(spec);
  if (n_paths < 2) throw std::invalid_argument("monte_carlo: need at least 2 paths");
  RunningStats stats;
  for (long long i = 0; i < n_paths; ++i) {
    const auto path =
        sample_path_unchecked(spec, master_seed, static_cast<std::uint64_t>(i));
    stats.add(run_policy(decide, path, spec, initial_energy).total_payoff);
  }
  return {stats.mean, stats.std_error(), n_paths, master_seed};
}

MonteCarloResult monte_carlo(const TwoNodeDecider& decide, const TwoNodeSpec& spec,
                             long long n_paths, std::uint64_t master_seed,
                             int initial_energy1, int initial_energy2) {
  require_valid(spec);
  if (n_paths < 2) throw std::invalid_argument("monte_carlo: need at least 2 paths");
  RunningStats stats;
  for (long long i = 0; i < n_paths; ++i) {
    const auto path =
        sample_path_unchecked(spec, master_seed, static_cast<std::uint64_t>(i));
    stats.add(
        run_policy(decide, path, spec, initial_energy1, initial_energy2).total_payoff);
  }
  return {stats.mean, stats.std_error(), n_paths, master_seed};
}

ComparisonResult compare_on_common_paths(const TwoNodeDecider& a,
                                         const TwoNodeDecider& b,
                                         const TwoNodeSpec& spec, long long n_paths,
                                         std::uint64_t master_seed,
                                         const DecoupledClassifier& classify) {
  require_valid(spec);
  if (!a || !b) throw std::invalid_argument("compare_on_common_paths: empty policy");
  if (n_paths < 2)
    throw std::invalid_argument("compare_on_common_paths: need at least 2 paths");

  ComparisonResult result;
  RunningStats stats_a, stats_b, stats_diff;

  for (long long i = 0; i < n_paths; ++i) {
    const auto path =
        sample_path_unchecked(spec, master_seed, static_cast<std::uint64_t>(i));
    int a1 = 0, a2 = 0, b1 = 0, b2 = 0;  // per-policy carry-overs
    double total_a = 0.0, total_b = 0.0;
    bool coincide = true;

    for (int k = 1; k <= spec.horizon; ++k) {
      const int e1 = path.arrivals[0][static_cast<std::size_t>(k - 1)];
      const int e2 = path.arrivals[1][static_cast<std::size_t>(k - 1)];
      const double g1 = path.gains[0][static_cast<std::size_t>(k - 1)];
      const double g2 = path.gains[1][static_cast<std::size_t>(k - 1)];

      const int ua1 = std::min(a1 + e1, spec.battery);
      const int ua2 = std::min(a2 + e2, spec.battery);
      const int ub1 = std::min(b1 + e1, spec.battery);
      const int ub2 = std::min(b2 + e2, spec.battery);

      const Action act_a = a(k, ua1, ua2, g1, g2);
      const Action act_b = b(k, ub1, ub2, g1, g2);
      if ((act_a == Action::Tx1 && ua1 < 1) || (act_a == Action::Tx2 && ua2 < 1) ||
          (act_b == Action::Tx1 && ub1 < 1) || (act_b == Action::Tx2 && ub2 < 1))
        throw std::runtime_error("compare_on_common_paths: infeasible action");

      if (coincide) {
        ++result.divergence.coincident_slots;
        if (act_a != act_b) {
          coincide = false;
          ++result.divergence.diverged_paths;
          if (classify) {
            const auto [f1, f2] = classify(k, ub1, ub2, g1, g2);
            ++result.divergence.first_divergence_by_class[f1 ? 1 : 0][f2 ? 1 : 0];
          } else {
            ++result.divergence.unclassified;
          }
        }
      }

      total_a += act_a == Action::Tx1   ? reward(g1, 1)
                 : act_a == Action::Tx2 ? reward(g2, 1)
                                        : 0.0;
      total_b += act_b == Action::Tx1   ? reward(g1, 1)
                 : act_b == Action::Tx2 ? reward(g2, 1)
                                        : 0.0;
      a1 = ua1 - (act_a == Action::Tx1 ? 1 : 0);
      a2 = ua2 - (act_a == Action::Tx2 ? 1 : 0);
      b1 = ub1 - (act_b == Action::Tx1 ? 1 : 0);
      b2 = ub2 - (act_b == Action::Tx2 ? 1 : 0);
    }

    stats_a.add(total_a);
    stats_b.add(total_b);
    stats_diff.add(total_a - total_b);
  }

  result.a = {stats_a.mean, stats_a.std_error(), n_paths, master_seed};
  result.b = {stats_b.mean, stats_b.std_error(), n_paths, master_seed};
  result.mean_diff = stats_diff.mean;
  result.std_error_diff = stats_diff.std_error();
  return result;
}

const char* trajectory_csv_header() {
  return "path,slot,arrival,gain,available,transmitted,payoff";
}

void append_trajectory_csv(std::ostream& os, long long path_index,
                           const Trajectory& trajectory) {
  char gain_buf[40], payoff_buf[40];
  for (std::size_t s = 0; s < trajectory.steps.size(); ++s) {
    const auto& step = trajectory.steps[s];
    std::snprintf(gain_buf, sizeof(gain_buf), "%.17g", step.gain);
    std::snprintf(payoff_buf, sizeof(payoff_buf), "%.17g", step.payoff);
    os << path_index << ',' << (s + 1) << ',' << step.arrival << ',' << gain_buf
       << ',' << step.available << ',' << step.transmitted << ',' << payoff_buf
       << '\n';
  }
}

}  // namespace ehsched
