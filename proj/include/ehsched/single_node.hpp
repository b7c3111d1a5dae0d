// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <vector>

#include "ehsched/model.hpp"

namespace ehsched {

/**
 * Expected optimal future payoff indexed by slot and stored energy.
 *
 * at(k, m) is the optimal expected payoff from slot k onward, given m units
 * carried over into slot k before that slot's arrival. Rows run k = 1 to
 * horizon+1 (the terminal row is identically zero), columns m = 0..battery.
 * The per-slot decision rules read consecutive-row differences, which act
 * as the opportunity cost of depleting one stored unit.
 *
 * Instances are immutable and safe to share across threads.
 */
class ThresholdTable {
 public:
  ThresholdTable(ProblemSpec spec, std::vector<double> values);

  /// Bounds-checked lookup; slot in [1, horizon+1], energy in [0, battery].
  double at(int slot, int energy) const;

  int horizon() const { return spec_.horizon; }
  int battery() const { return spec_.battery; }
  const ProblemSpec& spec() const { return spec_; }

 private:
  ProblemSpec spec_;
  std::vector<double> values_;  // (horizon+1) x (battery+1), row-major
};

/**
 * Backward induction for the Bernoulli-arrival, unit-transmission model.
 * Each entry mixes the next arrival and gain exactly:
 *   at(k, c) = sum_e P(E=e) * E_h max{ log(1+h) + at(k+1, u-1), at(k+1, u) }
 * with u = min(c+e, battery) and the transmit branch dropped at u = 0.
 * Rejects specs that are invalid or not Binary mode.
 */
ThresholdTable solve_binary(const ProblemSpec& spec);

/**
 * Backward induction for general discrete arrivals and transmissions:
 *   at(k, c) = sum_i p_i * E_h max_{j <= cap(u)} [ log(1+j*h) + at(k+1, u-j) ]
 * with u = min(c+i, battery). The transmission cap follows the spec's
 * consumption mode, so on a Binary-mode spec this reproduces solve_binary's
 * table (the general recursion specializes to the unit-transmission one).
 */
ThresholdTable solve_discrete(const ProblemSpec& spec);

/**
 * Optimal unit-transmission decision at slot k with `available` units after
 * the arrival and realized gain: transmit exactly when
 * log(1+gain) + at(k+1, available-1) strictly exceeds at(k+1, available).
 * Ties keep the energy. Requires a Binary-mode table.
 */
int decide_binary(const ThresholdTable& table, int slot, int available,
                  double gain);

/**
 * The gain threshold equivalent to decide_binary: transmit iff
 * gain > exp(at(k+1, m) - at(k+1, m-1)) - 1. Requires available >= 1.
 */
double channel_cutoff(const ThresholdTable& table, int slot, int available);

/**
 * Optimal transmission size at slot k: argmax over j of
 * log(1+j*gain) + at(k+1, available-j), ties broken toward the smallest j.
 * The j range honors the table's consumption mode.
 */
int decide_discrete(const ThresholdTable& table, int slot, int available,
                    double gain);

/// The program value from an initially empty battery: at(1, 0).
double policy_value(const ThresholdTable& table);

/// CSV with header "slot,energy,gamma", rows in (slot, energy) order,
/// values at 17 significant digits.
void write_csv(std::ostream& os, const ThresholdTable& table);

/// Reads values written by write_csv back into (horizon+1)x(battery+1)
/// row-major order. Throws on malformed rows or wrong dimensions.
std::vector<double> read_gamma_csv(std::istream& is, int horizon, int battery);

}  // namespace ehsched
