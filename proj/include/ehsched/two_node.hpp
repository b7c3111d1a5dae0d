// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ehsched/model.hpp"
#include "ehsched/single_node.hpp"

namespace ehsched {

/// Joint per-slot action: at most one node transmits one unit.
enum class Action { Idle, Tx1, Tx2 };

/**
 * Joint expected optimal future payoff for two interfering nodes.
 *
 * at(k, m1, m2) is the optimal expected payoff from slot k onward given the
 * carry-overs (m1, m2) entering slot k before that slot's arrivals. Rows run
 * k = 1..horizon+1 with the terminal row zero. Immutable once solved.
 */
class TwoNodeThresholdTable {
 public:
  TwoNodeThresholdTable(TwoNodeSpec spec, std::vector<double> values);

  double at(int slot, int energy1, int energy2) const;

  int horizon() const { return spec_.horizon; }
  int battery() const { return spec_.battery; }
  const TwoNodeSpec& spec() const { return spec_; }

 private:
  TwoNodeSpec spec_;
  std::vector<double> values_;  // (horizon+1) x (battery+1)^2
};

/**
 * Backward induction over the joint state: each entry mixes both nodes'
 * arrivals and gains exactly and takes the best of the three feasible
 * actions (transmit from node 1, from node 2, or idle).
 */
TwoNodeThresholdTable solve_two_node(const TwoNodeSpec& spec);

/**
 * Jointly optimal action at slot k given post-arrival energies and realized
 * gains. Tie-breaking: idling wins any tie; between equal transmit values
 * the larger realized gain wins, then node 1.
 */
Action decide_two_node(const TwoNodeThresholdTable& table, int slot, int m1,
                       int m2, double h1, double h2);

/**
 * The decoupled heuristic: each node runs its own single-node rule ignoring
 * the other; simultaneous transmit requests are resolved toward the larger
 * realized gain (node 1 on an exact tie).
 */
Action decide_decoupled(const ThresholdTable& node1, const ThresholdTable& node2,
                        int slot, int m1, int m2, double h1, double h2);

/**
 * N-node extension of the decoupled rule: among nodes whose single-node rule
 * says transmit, pick the one with the largest realized gain (lowest index
 * on ties); nullopt when none wants to transmit.
 */
std::optional<std::size_t> decide_decoupled_n(
    std::span<const ThresholdTable> tables, int slot,
    std::span<const int> energies, std::span<const double> gains);

/// The program value from initially empty batteries: at(1, 0, 0).
double policy_value(const TwoNodeThresholdTable& table);

/// CSV with header "slot,energy1,energy2,gamma", rows in (slot, m1, m2)
/// order, values at 17 significant digits.
void write_csv(std::ostream& os, const TwoNodeThresholdTable& table);

}  // namespace ehsched
