// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace ehsched {

/// One point of a finite gain distribution: gain value and its probability.
struct ChannelAtom {
  double gain = 0.0;
  double prob = 0.0;
};

/**
 * Finite-support distribution of the per-slot channel gain h >= 0.
 *
 * The solvers and the exact policy evaluator take expectations as finite
 * sums over this support. Continuous gain models must be reduced to a
 * finite support first; quantize() is the provided bridge, and the
 * approximation error of that step is owned by the caller.
 *
 * Invariants (see validate): non-empty support, gains >= 0 and strictly
 * increasing, probabilities > 0 and summing to 1 within 1e-12.
 */
struct ChannelDistribution {
  std::vector<ChannelAtom> support;

  static ChannelDistribution point_mass(double gain) { return {{{gain, 1.0}}}; }

  /// Mean gain, exact finite sum.
  double mean() const;
};

/**
 * Distribution of the integer energy units arriving per slot:
 * probs[i] = P(E = i) for i = 0..B. Length is always battery + 1.
 */
struct ArrivalDistribution {
  std::vector<double> probs;

  /// One unit with probability p, none otherwise.
  static ArrivalDistribution bernoulli(double p, int battery);
  /// Uniform over {0, ..., battery}.
  static ArrivalDistribution uniform(int battery);
  static ArrivalDistribution point_mass(int units, int battery);

  double mean() const;
  /// True when all probability mass sits on {0, 1}.
  bool binary_support() const;
};

/// Per-slot action set: transmit 0/1 unit, or any whole number of stored units.
enum class ConsumptionMode { Binary, Discrete };

/**
 * A single-node finite-horizon transmission problem.
 *
 * Time is slotted 1..horizon. The node stores harvested energy in a battery
 * of `battery` integer units; energy arriving beyond the cap is lost. Each
 * slot reveals a gain h drawn i.i.d. from `channel`, the node transmits
 * f units (f limited by `mode` and by the stored energy) and collects
 * log(1 + f*h) nats.
 */
struct ProblemSpec {
  int horizon = 0;
  int battery = 0;
  ArrivalDistribution arrivals;
  ChannelDistribution channel;
  ConsumptionMode mode = ConsumptionMode::Binary;

  static ProblemSpec binary(int horizon, int battery, double p,
                            ChannelDistribution channel);
  static ProblemSpec discrete(int horizon, int battery,
                              std::vector<double> arrival_probs,
                              ChannelDistribution channel);

  /// Largest transmission the action set allows from `available` stored units.
  int max_transmit(int available) const {
    return mode == ConsumptionMode::Binary ? (available > 0 ? 1 : 0)
                                           : available;
  }
};

/**
 * Two interfering nodes sharing one channel: Bernoulli unit arrivals per
 * node, unit transmissions, and at most one transmitter per slot.
 */
struct TwoNodeSpec {
  int horizon = 0;
  int battery = 0;
  double arrival_p1 = 0.0;
  double arrival_p2 = 0.0;
  ChannelDistribution channel1;
  ChannelDistribution channel2;

  /// The single-node binary problem node 1 or 2 faces when the other node
  /// is ignored.
  ProblemSpec marginal(int node) const;
};

/// Realized arrivals and gains for every node and slot of one horizon.
struct SamplePath {
  std::vector<std::vector<int>> arrivals;   // [node][slot-1]
  std::vector<std::vector<double>> gains;   // [node][slot-1]

  int num_nodes() const { return static_cast<int>(arrivals.size()); }
  int num_slots() const {
    return arrivals.empty() ? 0 : static_cast<int>(arrivals.front().size());
  }
};

/**
 * Payoff in nats for transmitting `units` energy units at gain `gain`:
 * log(1 + units * gain). Rejects negative inputs.
 */
double reward(double gain, int units);

/// E{log(1 + units * h)} over the channel support.
double expected_reward(const ChannelDistribution& dist, int units);

/// Returns every invariant violation; empty means valid. Never throws.
std::vector<std::string> validate(const ChannelDistribution& dist);
std::vector<std::string> validate(const ProblemSpec& spec);
std::vector<std::string> validate(const TwoNodeSpec& spec);

/// Throws std::invalid_argument listing all violations.
void require_valid(const ProblemSpec& spec);
void require_valid(const TwoNodeSpec& spec);

/**
 * Equal-mass quantization of a continuous gain model given by its CDF on
 * [0, inf): probability is split into `levels` cells of mass 1/levels and
 * each cell is represented by its conditional mean gain. Adjacent cells
 * whose means coincide (within 1e-12 relative) are merged, so the result
 * always satisfies the ChannelDistribution invariants. The output mean
 * matches the input mean up to quadrature error (< 1e-6).
 *
 * Rejects non-monotone CDFs and CDFs that never reach 1.
 */
ChannelDistribution quantize(const std::function<double(double)>& cdf,
                             int levels);

/// Same, but from the quantile function Q : (0,1) -> [0, inf); this is the
/// precise form and avoids the numeric CDF inversion.
ChannelDistribution quantize_quantile(
    const std::function<double(double)>& quantile, int levels);

/// Same, from tabulated (probability, quantile) pairs, interpolated
/// piecewise-linearly. The table must cover (0,1) monotonically.
ChannelDistribution quantize_tabulated(
    const std::vector<std::pair<double, double>>& quantiles, int levels);

}  // namespace ehsched
