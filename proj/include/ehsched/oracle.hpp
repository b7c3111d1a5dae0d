// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "ehsched/model.hpp"
#include "ehsched/two_node.hpp"

namespace ehsched::oracle {

/**
 * Brute-force ground truth, deliberately free of threshold structure: a
 * generic action loop over every feasible transmission, exhaustive Markov
 * policy enumeration on tiny instances, and exact policy evaluation by
 * forward recursion over the state distribution. Everything here exists to
 * check the solvers, so it shares only the model types with them.
 */

/// V[k][c]: optimal expected payoff from slot k onward with carry-over c.
struct ValueTable {
  int horizon = 0;
  int battery = 0;
  std::vector<double> values;  // (horizon+1) x (battery+1)

  double at(int slot, int energy) const;
};

/// Two-node analogue over joint carry-overs.
struct TwoNodeValueTable {
  int horizon = 0;
  int battery = 0;
  std::vector<double> values;  // (horizon+1) x (battery+1)^2

  double at(int slot, int energy1, int energy2) const;
};

ValueTable value_iteration_single(const ProblemSpec& spec);
TwoNodeValueTable value_iteration_two(const TwoNodeSpec& spec);

/// A Markov decision rule: slot, post-arrival energy, gain-support index.
using IndexedPolicy = std::function<int(int slot, int available, int gain_index)>;
using IndexedTwoNodePolicy =
    std::function<Action(int slot, int a1, int a2, int j1, int j2)>;
/// Pluggable payoff; defaults to log(1 + units*gain) when empty.
using RewardFn = std::function<double(double gain, int units)>;

/// Explicit finite Markov policy, one feasible action per decision point.
struct PolicyMap {
  int horizon = 0;
  int battery = 0;
  int gain_levels = 0;
  std::vector<int> decisions;  // [slot-1][available][gain_index]

  int at(int slot, int available, int gain_index) const;
  IndexedPolicy decider() const;
};

struct TwoNodePolicyMap {
  int horizon = 0;
  int battery = 0;
  int gain_levels1 = 0;
  int gain_levels2 = 0;
  std::vector<Action> decisions;  // [slot-1][a1][a2][j1][j2]

  Action at(int slot, int a1, int a2, int j1, int j2) const;
  IndexedTwoNodePolicy decider() const;
};

/// Thrown when an enumeration request exceeds its policy-count guard.
struct GuardRefusal : std::runtime_error {
  GuardRefusal(std::string msg, double count)
      : std::runtime_error(std::move(msg)), policy_count(count) {}
  double policy_count;
};

/// Number of feasible Markov policies (product over decision points of the
/// feasible action counts). Returns +inf when it overflows a double.
double markov_policy_count(const ProblemSpec& spec);
double markov_policy_count(const TwoNodeSpec& spec);

struct EnumerationResult {
  double best_value = 0.0;
  PolicyMap best_policy;
  long long policies_evaluated = 0;
};

struct TwoNodeEnumerationResult {
  double best_value = 0.0;
  TwoNodePolicyMap best_policy;
  long long policies_evaluated = 0;
};

/**
 * Evaluates every feasible Markov policy exactly and returns the best.
 * The maximum must match value iteration at the initial state; that
 * agreement is the optimality witness the test suites assert. Throws
 * GuardRefusal when the policy count exceeds `guard`.
 */
EnumerationResult enumerate_markov_policies(const ProblemSpec& spec,
                                            double guard = 1e7);
TwoNodeEnumerationResult enumerate_markov_policies(const TwoNodeSpec& spec,
                                                   double guard = 1e7);

/**
 * Exact expected total payoff of a fixed Markov policy: forward recursion
 * over the carry-over distribution, no sampling. Infeasible decisions at
 * reachable states are rejected with a diagnostic.
 */
double evaluate_fixed_policy(const IndexedPolicy& policy,
                             const ProblemSpec& spec, int initial_energy = 0,
                             const RewardFn& reward_fn = {});
double evaluate_fixed_policy(const IndexedTwoNodePolicy& policy,
                             const TwoNodeSpec& spec, int initial_energy1 = 0,
                             int initial_energy2 = 0,
                             const RewardFn& reward_fn = {});

}  // namespace ehsched::oracle
