// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "ehsched/model.hpp"
#include "ehsched/single_node.hpp"
#include "ehsched/two_node.hpp"

namespace ehsched {

/**
 * Seeded sample-path generation and policy execution under the battery
 * dynamics U_{k+1} = min(U_k + E_{k+1} - F_k, B).
 *
 * Reproducibility contract: the stream for path i is a std::mt19937_64
 * seeded with a SplitMix64 finalizer over (master_seed, i), uniforms take
 * the top 53 bits, and finite distributions are sampled by an explicit CDF
 * walk. Per slot the draws are, for each node in index order, arrival then
 * gain. Results are therefore bit-identical for a given (spec, seed, paths)
 * regardless of evaluation order or platform.
 */

/// Deterministic per-path seed; distinct indices give decorrelated streams.
std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t path_index);

SamplePath sample_path(const ProblemSpec& spec, std::uint64_t master_seed,
                       std::uint64_t path_index);
SamplePath sample_path(const TwoNodeSpec& spec, std::uint64_t master_seed,
                       std::uint64_t path_index);

struct TrajectoryStep {
  int arrival = 0;
  double gain = 0.0;
  int available = 0;    // post-arrival energy U_k
  int transmitted = 0;  // F_k
  double payoff = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  double total_payoff = 0.0;
};

struct TwoNodeTrajectoryStep {
  std::array<int, 2> arrival{};
  std::array<double, 2> gain{};
  std::array<int, 2> available{};
  Action action = Action::Idle;
  double payoff = 0.0;
};

struct TwoNodeTrajectory {
  std::vector<TwoNodeTrajectoryStep> steps;
  double total_payoff = 0.0;
};

struct MonteCarloResult {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(paths)
  long long paths = 0;
  std::uint64_t seed = 0;
};

/// Decision callbacks queried with the post-arrival state and realized gains.
using SingleDecider = std::function<int(int slot, int available, double gain)>;
using TwoNodeDecider =
    std::function<Action(int slot, int a1, int a2, double g1, double g2)>;
/// Reports the two decoupled single-node decisions at a joint state; used to
/// classify policy divergences.
using DecoupledClassifier =
    std::function<std::pair<int, int>(int slot, int a1, int a2, double g1, double g2)>;

/// Greedy policy induced by a solved table (unit rule for Binary tables,
/// argmax transmission size for Discrete ones).
SingleDecider dp_policy(const ThresholdTable& table);
TwoNodeDecider dp_policy(const TwoNodeThresholdTable& table);
/// The decoupled heuristic as a joint policy.
TwoNodeDecider decoupled_policy(const ThresholdTable& node1,
                                const ThresholdTable& node2);
DecoupledClassifier decoupled_classifier(const ThresholdTable& node1,
                                         const ThresholdTable& node2);

/**
 * Executes one policy on one realized path. Throws with a diagnostic if the
 * policy returns an infeasible transmission.
 */
Trajectory run_policy(const SingleDecider& decide, const SamplePath& path,
                      const ProblemSpec& spec, int initial_energy = 0);
TwoNodeTrajectory run_policy(const TwoNodeDecider& decide, const SamplePath& path,
                             const TwoNodeSpec& spec, int initial_energy1 = 0,
                             int initial_energy2 = 0);

/// Mean and standard error of the total payoff over n_paths independent
/// trajectories; deterministic for fixed (spec, seed, n_paths).
MonteCarloResult monte_carlo(const SingleDecider& decide, const ProblemSpec& spec,
                             long long n_paths, std::uint64_t master_seed,
                             int initial_energy = 0);
MonteCarloResult monte_carlo(const TwoNodeDecider& decide, const TwoNodeSpec& spec,
                             long long n_paths, std::uint64_t master_seed,
                             int initial_energy1 = 0, int initial_energy2 = 0);

/**
 * Counts of first-divergence slots between two policies run on common
 * paths, classified by the decoupled decisions (F1, F2) at that slot.
 * Only the prefix of a path on which the two action histories still
 * coincide is examined — past the first divergence the battery states may
 * differ and the policies are no longer comparable state-for-state.
 */
struct DivergenceReport {
  long long diverged_paths = 0;
  long long coincident_slots = 0;
  std::array<std::array<long long, 2>, 2> first_divergence_by_class{};
  long long unclassified = 0;  // first divergences seen without a classifier
};

struct ComparisonResult {
  MonteCarloResult a;
  MonteCarloResult b;
  double mean_diff = 0.0;       // mean of per-path (A - B)
  double std_error_diff = 0.0;  // paired standard error of the difference
  DivergenceReport divergence;
};

/// Runs both policies on identical sample paths and pairs the payoffs.
ComparisonResult compare_on_common_paths(const TwoNodeDecider& a,
                                         const TwoNodeDecider& b,
                                         const TwoNodeSpec& spec, long long n_paths,
                                         std::uint64_t master_seed,
                                         const DecoupledClassifier& classify = {});

/// CSV row format "path,slot,arrival,gain,available,transmitted,payoff".
const char* trajectory_csv_header();
void append_trajectory_csv(std::ostream& os, long long path_index,
                           const Trajectory& trajectory);

}  // namespace ehsched
