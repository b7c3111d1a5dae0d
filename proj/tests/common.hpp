// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <vector>

#include "ehsched/model.hpp"

namespace testfix {

// Channel fixtures used across the suites; supports of size 1..3.
inline ehsched::ChannelDistribution unit_gain() {
  return ehsched::ChannelDistribution::point_mass(1.0);
}

inline ehsched::ChannelDistribution two_gains() {
  return {{{0.5, 0.5}, {2.0, 0.5}}};
}

// Slightly shifted copy of two_gains so two nodes never tie exactly.
inline ehsched::ChannelDistribution two_gains_shifted() {
  return {{{0.45, 0.5}, {1.9, 0.5}}};
}

inline ehsched::ChannelDistribution three_gains() {
  return {{{0.3, 0.2}, {1.0, 0.5}, {3.0, 0.3}}};
}

inline std::vector<ehsched::ChannelDistribution> grid_channels() {
  return {unit_gain(), two_gains(), three_gains()};
}

inline std::vector<double> uniform_arrivals(int battery) {
  return std::vector<double>(static_cast<std::size_t>(battery) + 1,
                             1.0 / (battery + 1.0));
}

// The hand-derived instance: n=2, B=2, Bernoulli(0.5), point gain e-1 so a
// unit transmission pays exactly 1 nat.
inline ehsched::ProblemSpec hand_spec() {
  return ehsched::ProblemSpec::binary(
      2, 2, 0.5, ehsched::ChannelDistribution::point_mass(std::exp(1.0) - 1.0));
}

}  // namespace testfix
