// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehsched/model.hpp"

namespace ehsched {

/**
 * Experiment configuration: a flat key-value text format with dotted
 * sections, chosen for diff-friendliness and language-neutral parsing.
 *
 *   mode = single-binary          # single-binary | single-discrete | two-node
 *   horizon = 4                   # or a sweep list: [1, 2, 4, 8]
 *   battery = 2
 *   arrival.p = 0.5               # single-binary
 *   arrival.probs = [0.4, 0.3, 0.3]   # single-discrete, p_0..p_B
 *   channel.support = [0.5, 2.0]
 *   channel.probs = [0.5, 0.5]
 *   channel.family = exponential  # alternative to support/probs
 *   channel.rate = 1.0            # exponential parameter
 *   channel.a = 0.0               # uniform bounds
 *   channel.b = 1.0
 *   channel.levels = 8            # quantization levels for a family
 *   paths = 10000
 *   seed = 1
 *   initial_energy = 0
 *   out = results.csv
 *
 * Two-node configs use arrival1.p / arrival2.p and channel1.* / channel2.*.
 * '#' starts a comment; later occurrences of a key override earlier ones.
 */

/// Carries every violation found while parsing or resolving a config.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// A gain model before resolution: either an explicit finite support or a
/// named continuous family plus quantization levels.
struct ChannelConfig {
  std::vector<double> support;
  std::vector<double> probs;
  std::string family;  // "uniform" | "exponential"
  double a = 0.0;
  double b = 1.0;
  double rate = 1.0;
  int levels = 8;
};

enum class ExperimentMode { SingleBinary, SingleDiscrete, TwoNode };

std::string to_string(ExperimentMode mode);

struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::SingleBinary;
  std::vector<int> horizons;  // one entry, or a strictly increasing sweep
  int battery = 1;
  double arrival_p = 0.0;             // single-binary
  std::vector<double> arrival_probs;  // single-discrete
  double arrival1_p = 0.0;            // two-node
  double arrival2_p = 0.0;
  ChannelConfig channel;   // single-node
  ChannelConfig channel1;  // two-node
  ChannelConfig channel2;
  long long paths = 10000;
  std::uint64_t seed = 1;
  int initial_energy = 0;
  std::string out;
};

/// Parses and fully validates; throws ConfigError listing every violation
/// with its field path.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

/// Canonical text form; parsing it back yields identical resolved specs.
std::string serialize_config(const ExperimentConfig& config);

/// Finite-support gain distribution for a config channel (quantizing a
/// named family when one is configured).
ChannelDistribution resolve_channel(const ChannelConfig& channel);

/// Exact-quantile named families used by configs and presets.
ChannelDistribution exponential_channel(double rate, int levels);
ChannelDistribution uniform_channel(double a, double b, int levels);

/// The validated problem at one horizon from the sweep list.
ProblemSpec single_spec(const ExperimentConfig& config, int horizon);
TwoNodeSpec two_node_spec(const ExperimentConfig& config, int horizon);

/**
 * Built-in experiment reconstructions. Both sweep horizons 1..20 with
 * battery 10 and exponential(1) gains quantized to 8 levels.
 *
 * fig1: single node, one curve with uniform arrivals on {0..10} and
 * multi-unit transmissions, one with Bernoulli(0.5) arrivals and unit
 * transmissions.
 *
 * fig2: two nodes with Bernoulli(0.5) arrivals each. Node 2 uses 9
 * quantization levels so the two nodes' realized gains never tie exactly;
 * the decoupled policy resolves simultaneous transmit requests by the
 * larger gain, and exact ties would make that rule arbitrary.
 */
ExperimentConfig preset_fig1_discrete();
ExperimentConfig preset_fig1_binary();
ExperimentConfig preset_fig2();

}  // namespace ehsched
