// SPDX-License-Identifier: Apache-2.0
#include "ehsched/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ehsched::oracle {

namespace {

std::size_t checked_index(const char* fn, int slot, int max_slot, int idx,
                          int extent) {
  if (slot < 1 || slot > max_slot)
    throw std::out_of_range(std::string(fn) + ": slot out of range");
  if (idx < 0 || idx >= extent)
    throw std::out_of_range(std::string(fn) + ": index out of range");
  return static_cast<std::size_t>(idx);
}

}  // namespace

double ValueTable::at(int slot, int energy) const {
  checked_index("ValueTable::at", slot, horizon + 1, energy, battery + 1);
  return values[static_cast<std::size_t>(slot - 1) * (battery + 1) + energy];
}

double TwoNodeValueTable::at(int slot, int energy1, int energy2) const {
  checked_index("TwoNodeValueTable::at", slot, horizon + 1, energy1,
                battery + 1);
  checked_index("TwoNodeValueTable::at", slot, horizon + 1, energy2,
                battery + 1);
  const std::size_t stride = static_cast<std::size_t>(battery + 1);
  return values[(static_cast<std::size_t>(slot - 1) * stride + energy1) * stride +
                energy2];
}

ValueTable value_iteration_single(const ProblemSpec& spec) {
  require_valid(spec);
  const int n = spec.horizon;
  const int b = spec.battery;
  ValueTable table{n, b,
                   std::vector<double>(static_cast<std::size_t>(n + 1) * (b + 1),
                                       0.0)};
  auto row = [&](int slot) { return table.values.data() + (slot - 1) * (b + 1); };

  for (int k = n; k >= 1; --k) {
    const double* next = row(k + 1);
    double* cur = row(k);
    for (int c = 0; c <= b; ++c) {
      double acc = 0.0;
      for (int e = 0; e <= b; ++e) {
        const double pe = spec.arrivals.probs[static_cast<std::size_t>(e)];
        if (pe == 0.0) continue;
        const int u = std::min(c + e, b);
        double over_gains = 0.0;
        for (const auto& atom : spec.channel.support) {
          double best = -std::numeric_limits<double>::infinity();
          for (int f = 0; f <= spec.max_transmit(u); ++f)
            best = std::max(best, reward(atom.gain, f) + next[u - f]);
          over_gains += atom.prob * best;
        }
        acc += pe * over_gains;
      }
      cur[c] = acc;
    }
  }
  return table;
}

TwoNodeValueTable value_iteration_two(const TwoNodeSpec& spec) {
  require_valid(spec);
  const int n = spec.horizon;
  const int b = spec.battery;
  const std::size_t stride = static_cast<std::size_t>(b + 1);
  TwoNodeValueTable table{
      n, b,
      std::vector<double>(static_cast<std::size_t>(n + 1) * stride * stride, 0.0)};
  auto row = [&](int slot) {
    return table.values.data() + static_cast<std::size_t>(slot - 1) * stride * stride;
  };
  const double arr1[2] = {1.0 - spec.arrival_p1, spec.arrival_p1};
  const double arr2[2] = {1.0 - spec.arrival_p2, spec.arrival_p2};

  for (int k = n; k >= 1; --k) {
    const double* next = row(k + 1);
    double* cur = row(k);
    for (int c1 = 0; c1 <= b; ++c1)
      for (int c2 = 0; c2 <= b; ++c2) {
        double acc = 0.0;
        for (int e1 = 0; e1 <= 1; ++e1) {
          if (arr1[e1] == 0.0) continue;
          const int u1 = std::min(c1 + e1, b);
          for (int e2 = 0; e2 <= 1; ++e2) {
            if (arr2[e2] == 0.0) continue;
            const int u2 = std::min(c2 + e2, b);
            double over_gains = 0.0;
            for (const auto& a1 : spec.channel1.support)
              for (const auto& a2 : spec.channel2.support) {
                double best = next[u1 * stride + u2];  // idle
                if (u1 >= 1)
                  best = std::max(best, reward(a1.gain, 1) +
                                            next[(u1 - 1) * stride + u2]);
                if (u2 >= 1)
                  best = std::max(best, reward(a2.gain, 1) +
                                            next[u1 * stride + (u2 - 1)]);
                over_gains += a1.prob * a2.prob * best;
              }
            acc += arr1[e1] * arr2[e2] * over_gains;
          }
        }
        cur[c1 * stride + c2] = acc;
      }
  }
  return table;
}

int PolicyMap::at(int slot, int available, int gain_index) const {
  const auto u =
      checked_index("PolicyMap::at", slot, horizon, available, battery + 1);
  const auto j =
      checked_index("PolicyMap::at", slot, horizon, gain_index, gain_levels);
  return decisions[(static_cast<std::size_t>(slot - 1) * (battery + 1) + u) *
                       gain_levels +
                   j];
}

IndexedPolicy PolicyMap::decider() const {
  return [map = *this](int slot, int available, int gain_index) {
    return map.at(slot, available, gain_index);
  };
}

Action TwoNodePolicyMap::at(int slot, int a1, int a2, int j1, int j2) const {
  const auto u1 =
      checked_index("TwoNodePolicyMap::at", slot, horizon, a1, battery + 1);
  const auto u2 =
      checked_index("TwoNodePolicyMap::at", slot, horizon, a2, battery + 1);
  const auto i1 =
      checked_index("TwoNodePolicyMap::at", slot, horizon, j1, gain_levels1);
  const auto i2 =
      checked_index("TwoNodePolicyMap::at", slot, horizon, j2, gain_levels2);
  const std::size_t stride = static_cast<std::size_t>(battery + 1);
  return decisions[(((static_cast<std::size_t>(slot - 1) * stride + u1) * stride +
                     u2) *
                        gain_levels1 +
                    i1) *
                       gain_levels2 +
                   i2];
}

IndexedTwoNodePolicy TwoNodePolicyMap::decider() const {
  return [map = *this](int slot, int a1, int a2, int j1, int j2) {
    return map.at(slot, a1, a2, j1, j2);
  };
}

double markov_policy_count(const ProblemSpec& spec) {
  const int levels = static_cast<int>(spec.channel.support.size());
  double count = 1.0;
  for (int u = 0; u <= spec.battery; ++u) {
    const double actions = spec.max_transmit(u) + 1;
    for (int i = 0; i < spec.horizon * levels; ++i) count *= actions;
  }
  return count;
}

double markov_policy_count(const TwoNodeSpec& spec) {
  const int j1 = static_cast<int>(spec.channel1.support.size());
  const int j2 = static_cast<int>(spec.channel2.support.size());
  double count = 1.0;
  for (int u1 = 0; u1 <= spec.battery; ++u1)
    for (int u2 = 0; u2 <= spec.battery; ++u2) {
      const double actions = 1.0 + (u1 >= 1 ? 1.0 : 0.0) + (u2 >= 1 ? 1.0 : 0.0);
      for (int i = 0; i < spec.horizon * j1 * j2; ++i) count *= actions;
    }
  return count;
}

namespace {

// Forward recursion over the carry-over distribution; exact up to floating
// point. `act(k, u, j)` must return a feasible transmission.
template <typename Act>
double eval_single(const ProblemSpec& spec, Act&& act,
                   const std::vector<std::vector<double>>& reward_table,
                   int initial_energy) {
  const int n = spec.horizon;
  const int b = spec.battery;
  std::vector<double> dist(static_cast<std::size_t>(b) + 1, 0.0);
  dist[static_cast<std::size_t>(initial_energy)] = 1.0;
  std::vector<double> next(dist.size());
  double total = 0.0;

  for (int k = 1; k <= n; ++k) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int c = 0; c <= b; ++c) {
      const double wc = dist[static_cast<std::size_t>(c)];
      if (wc == 0.0) continue;
      for (int e = 0; e <= b; ++e) {
        const double pe = spec.arrivals.probs[static_cast<std::size_t>(e)];
        if (pe == 0.0) continue;
        const int u = std::min(c + e, b);
        for (std::size_t j = 0; j < spec.channel.support.size(); ++j) {
          const int f = act(k, u, static_cast<int>(j));
          if (f < 0 || f > spec.max_transmit(u)) {
            std::ostringstream os;
            os << "evaluate_fixed_policy: infeasible decision " << f
               << " at slot " << k << ", energy " << u;
            throw std::invalid_argument(os.str());
          }
          const double w = wc * pe * spec.channel.support[j].prob;
          total += w * reward_table[j][static_cast<std::size_t>(f)];
          next[static_cast<std::size_t>(u - f)] += w;
        }
      }
    }
    dist.swap(next);
  }
  return total;
}

template <typename Act>
double eval_two(const TwoNodeSpec& spec, Act&& act,
                const std::vector<double>& r1, const std::vector<double>& r2,
                int init1, int init2) {
  const int n = spec.horizon;
  const int b = spec.battery;
  const std::size_t stride = static_cast<std::size_t>(b) + 1;
  std::vector<double> dist(stride * stride, 0.0);
  dist[static_cast<std::size_t>(init1) * stride + init2] = 1.0;
  std::vector<double> next(dist.size());
  const double arr1[2] = {1.0 - spec.arrival_p1, spec.arrival_p1};
  const double arr2[2] = {1.0 - spec.arrival_p2, spec.arrival_p2};
  double total = 0.0;

  for (int k = 1; k <= n; ++k) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int c1 = 0; c1 <= b; ++c1)
      for (int c2 = 0; c2 <= b; ++c2) {
        const double wc = dist[static_cast<std::size_t>(c1) * stride + c2];
        if (wc == 0.0) continue;
        for (int e1 = 0; e1 <= 1; ++e1) {
          if (arr1[e1] == 0.0) continue;
          const int u1 = std::min(c1 + e1, b);
          for (int e2 = 0; e2 <= 1; ++e2) {
            if (arr2[e2] == 0.0) continue;
            const int u2 = std::min(c2 + e2, b);
            const double we = wc * arr1[e1] * arr2[e2];
            for (std::size_t j1 = 0; j1 < spec.channel1.support.size(); ++j1)
              for (std::size_t j2 = 0; j2 < spec.channel2.support.size(); ++j2) {
                const Action a = act(k, u1, u2, static_cast<int>(j1),
                                     static_cast<int>(j2));
                if ((a == Action::Tx1 && u1 < 1) ||
                    (a == Action::Tx2 && u2 < 1)) {
                  std::ostringstream os;
                  os << "evaluate_fixed_policy: infeasible action at slot " << k
                     << ", energies (" << u1 << "," << u2 << ")";
                  throw std::invalid_argument(os.str());
                }
                const double w =
                    we * spec.channel1.support[j1].prob * spec.channel2.support[j2].prob;
                const int f1 = a == Action::Tx1 ? 1 : 0;
                const int f2 = a == Action::Tx2 ? 1 : 0;
                if (a == Action::Tx1) total += w * r1[j1];
                if (a == Action::Tx2) total += w * r2[j2];
                next[static_cast<std::size_t>(u1 - f1) * stride + (u2 - f2)] += w;
              }
          }
        }
      }
    dist.swap(next);
  }
  return total;
}

std::vector<std::vector<double>> build_reward_table(
    const ChannelDistribution& channel, int battery, const RewardFn& fn) {
  std::vector<std::vector<double>> table(channel.support.size());
  for (std::size_t j = 0; j < channel.support.size(); ++j) {
    table[j].resize(static_cast<std::size_t>(battery) + 1);
    for (int f = 0; f <= battery; ++f)
      table[j][static_cast<std::size_t>(f)] =
          fn ? fn(channel.support[j].gain, f) : reward(channel.support[j].gain, f);
  }
  return table;
}

}  // namespace

double evaluate_fixed_policy(const IndexedPolicy& policy,
                             const ProblemSpec& spec, int initial_energy,
                             const RewardFn& reward_fn) {
  require_valid(spec);
  if (!policy) throw std::invalid_argument("evaluate_fixed_policy: empty policy");
  if (initial_energy < 0 || initial_energy > spec.battery)
    throw std::invalid_argument("evaluate_fixed_policy: initial energy out of range");
  const auto rt = build_reward_table(spec.channel, spec.battery, reward_fn);
  return eval_single(spec, policy, rt, initial_energy);
}

double evaluate_fixed_policy(const IndexedTwoNodePolicy& policy,
                             const TwoNodeSpec& spec, int initial_energy1,
                             int initial_energy2, const RewardFn& reward_fn) {
  require_valid(spec);
  if (!policy) throw std::invalid_argument("evaluate_fixed_policy: empty policy");
  if (initial_energy1 < 0 || initial_energy1 > spec.battery ||
      initial_energy2 < 0 || initial_energy2 > spec.battery)
    throw std::invalid_argument("evaluate_fixed_policy: initial energy out of range");
  std::vector<double> r1(spec.channel1.support.size()),
      r2(spec.channel2.support.size());
  for (std::size_t j = 0; j < r1.size(); ++j)
    r1[j] = reward_fn ? reward_fn(spec.channel1.support[j].gain, 1)
                      : reward(spec.channel1.support[j].gain, 1);
  for (std::size_t j = 0; j < r2.size(); ++j)
    r2[j] = reward_fn ? reward_fn(spec.channel2.support[j].gain, 1)
                      : reward(spec.channel2.support[j].gain, 1);
  return eval_two(spec, policy, r1, r2, initial_energy1, initial_energy2);
}

EnumerationResult enumerate_markov_policies(const ProblemSpec& spec,
                                            double guard) {
  require_valid(spec);
  const double count = markov_policy_count(spec);
  if (count > guard) {
    std::ostringstream os;
    os << "instance too large: " << count << " markov policies exceed guard "
       << guard;
    throw GuardRefusal(os.str(), count);
  }

  const int n = spec.horizon;
  const int b = spec.battery;
  const int levels = static_cast<int>(spec.channel.support.size());
  const auto rt = build_reward_table(spec.channel, b, {});

  PolicyMap map{n, b, levels,
                std::vector<int>(static_cast<std::size_t>(n) * (b + 1) * levels, 0)};
  auto offset = [&](int k, int u, int j) {
    return (static_cast<std::size_t>(k - 1) * (b + 1) + u) * levels + j;
  };

  // Odometer over decision points with more than one feasible action.
  struct Point {
    std::size_t offset;
    int max_action;
  };
  std::vector<Point> points;
  for (int k = 1; k <= n; ++k)
    for (int u = 0; u <= b; ++u)
      for (int j = 0; j < levels; ++j)
        if (spec.max_transmit(u) > 0)
          points.push_back({offset(k, u, j), spec.max_transmit(u)});

  auto act = [&](int k, int u, int j) { return map.decisions[offset(k, u, j)]; };

  EnumerationResult result;
  result.best_value = -std::numeric_limits<double>::infinity();
  bool done = false;
  while (!done) {
    const double value = eval_single(spec, act, rt, 0);
    ++result.policies_evaluated;
    if (value > result.best_value) {
      result.best_value = value;
      result.best_policy = map;
    }
    done = true;
    for (const auto& pt : points) {
      if (map.decisions[pt.offset] < pt.max_action) {
        ++map.decisions[pt.offset];
        done = false;
        break;
      }
      map.decisions[pt.offset] = 0;
    }
  }
  return result;
}

TwoNodeEnumerationResult enumerate_markov_policies(const TwoNodeSpec& spec,
                                                   double guard) {
  require_valid(spec);
  const double count = markov_policy_count(spec);
  if (count > guard) {
    std::ostringstream os;
    os << "instance too large: " << count << " markov policies exceed guard "
       << guard;
    throw GuardRefusal(os.str(), count);
  }

  const int n = spec.horizon;
  const int b = spec.battery;
  const int l1 = static_cast<int>(spec.channel1.support.size());
  const int l2 = static_cast<int>(spec.channel2.support.size());
  const std::size_t stride = static_cast<std::size_t>(b) + 1;

  std::vector<double> r1(spec.channel1.support.size()),
      r2(spec.channel2.support.size());
  for (std::size_t j = 0; j < r1.size(); ++j)
    r1[j] = reward(spec.channel1.support[j].gain, 1);
  for (std::size_t j = 0; j < r2.size(); ++j)
    r2[j] = reward(spec.channel2.support[j].gain, 1);

  TwoNodePolicyMap map{
      n, b, l1, l2,
      std::vector<Action>(static_cast<std::size_t>(n) * stride * stride * l1 * l2,
                          Action::Idle)};
  auto offset = [&](int k, int u1, int u2, int j1, int j2) {
    return (((static_cast<std::size_t>(k - 1) * stride + u1) * stride + u2) * l1 +
            j1) *
               l2 +
           j2;
  };

  struct Point {
    std::size_t offset;
    std::vector<Action> feasible;
    int index = 0;
  };
  std::vector<Point> points;
  for (int k = 1; k <= n; ++k)
    for (int u1 = 0; u1 <= b; ++u1)
      for (int u2 = 0; u2 <= b; ++u2) {
        std::vector<Action> feasible{Action::Idle};
        if (u1 >= 1) feasible.push_back(Action::Tx1);
        if (u2 >= 1) feasible.push_back(Action::Tx2);
        if (feasible.size() == 1) continue;
        for (int j1 = 0; j1 < l1; ++j1)
          for (int j2 = 0; j2 < l2; ++j2)
            points.push_back({offset(k, u1, u2, j1, j2), feasible, 0});
      }

  auto act = [&](int k, int u1, int u2, int j1, int j2) {
    return map.decisions[offset(k, u1, u2, j1, j2)];
  };

  TwoNodeEnumerationResult result;
  result.best_value = -std::numeric_limits<double>::infinity();
  bool done = false;
  while (!done) {
    const double value = eval_two(spec, act, r1, r2, 0, 0);
    ++result.policies_evaluated;
    if (value > result.best_value) {
      result.best_value = value;
      result.best_policy = map;
    }
    done = true;
    for (auto& pt : points) {
      if (pt.index + 1 < static_cast<int>(pt.feasible.size())) {
        ++pt.index;
        map.decisions[pt.offset] = pt.feasible[static_cast<std::size_t>(pt.index)];
        done = false;
        break;
      }
      pt.index = 0;
      map.decisions[pt.offset] = pt.feasible[0];
    }
  }
  return result;
}

}  // namespace ehsched::oracle
