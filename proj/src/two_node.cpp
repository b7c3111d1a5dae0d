// SPDX-License-Identifier: Apache-2.0
#include "ehsched/two_node.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ehsched {

namespace {

void check_range(const char* fn, int slot, int max_slot, int m1, int m2,
                 int battery) {
  if (slot < 1 || slot > max_slot)
    throw std::out_of_range(std::string(fn) + ": slot out of range");
  if (m1 < 0 || m1 > battery || m2 < 0 || m2 > battery)
    throw std::out_of_range(std::string(fn) + ": energy out of range");
}

}  // namespace

TwoNodeThresholdTable::TwoNodeThresholdTable(TwoNodeSpec spec,
                                             std::vector<double> values)
    : spec_(std::move(spec)), values_(std::move(values)) {
  const auto stride = static_cast<std::size_t>(spec_.battery + 1);
  if (values_.size() != static_cast<std::size_t>(spec_.horizon + 1) * stride * stride)
    throw std::invalid_argument(
        "TwoNodeThresholdTable: value count does not match dimensions");
}

double TwoNodeThresholdTable::at(int slot, int energy1, int energy2) const {
  check_range("TwoNodeThresholdTable::at", slot, spec_.horizon + 1, energy1,
              energy2, spec_.battery);
  const auto stride = static_cast<std::size_t>(spec_.battery + 1);
  return values_[(static_cast<std::size_t>(slot - 1) * stride +
                  static_cast<std::size_t>(energy1)) *
                     stride +
                 static_cast<std::size_t>(energy2)];
}

TwoNodeThresholdTable solve_two_node(const TwoNodeSpec& spec) {
  require_valid(spec);
  const int n = spec.horizon;
  const int b = spec.battery;
  const auto& ch1 = spec.channel1.support;
  const auto& ch2 = spec.channel2.support;
  const std::size_t stride = static_cast<std::size_t>(b + 1);

  std::vector<double> r1(ch1.size()), r2(ch2.size());
  for (std::size_t j = 0; j < ch1.size(); ++j) r1[j] = reward(ch1[j].gain, 1);
  for (std::size_t j = 0; j < ch2.size(); ++j) r2[j] = reward(ch2[j].gain, 1);

  const double arr1[2] = {1.0 - spec.arrival_p1, spec.arrival_p1};
  const double arr2[2] = {1.0 - spec.arrival_p2, spec.arrival_p2};

  std::vector<double> values(static_cast<std::size_t>(n + 1) * stride * stride,
                             0.0);
  auto row = [&](int slot) {
    return values.data() + static_cast<std::size_t>(slot - 1) * stride * stride;
  };

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
            const double idle = next[static_cast<std::size_t>(u1) * stride + u2];
            double over_gains = 0.0;
            for (std::size_t j1 = 0; j1 < ch1.size(); ++j1) {
              const double tx1 =
                  u1 >= 1 ? r1[j1] + next[static_cast<std::size_t>(u1 - 1) * stride + u2]
                          : idle;
              for (std::size_t j2 = 0; j2 < ch2.size(); ++j2) {
                const double tx2 =
                    u2 >= 1
                        ? r2[j2] + next[static_cast<std::size_t>(u1) * stride + (u2 - 1)]
                        : idle;
                over_gains += ch1[j1].prob * ch2[j2].prob *
                              std::max({idle, tx1, tx2});
              }
            }
            acc += arr1[e1] * arr2[e2] * over_gains;
          }
        }
        cur[static_cast<std::size_t>(c1) * stride + c2] = acc;
      }
  }
  return {spec, std::move(values)};
}

Action decide_two_node(const TwoNodeThresholdTable& table, int slot, int m1,
                       int m2, double h1, double h2) {
  check_range("decide_two_node", slot, table.horizon(), m1, m2,
              table.battery());
  const double idle = table.at(slot + 1, m1, m2);
  const double v1 =
      m1 >= 1 ? reward(h1, 1) + table.at(slot + 1, m1 - 1, m2) : idle;
  const double v2 =
      m2 >= 1 ? reward(h2, 1) + table.at(slot + 1, m1, m2 - 1) : idle;

  Action best_tx = Action::Idle;
  double best = idle;
  if (m1 >= 1 && m2 >= 1) {
    if (v1 > v2 || (v1 == v2 && h1 >= h2)) {
      best_tx = Action::Tx1;
      best = v1;
    } else {
      best_tx = Action::Tx2;
      best = v2;
    }
  } else if (m1 >= 1) {
    best_tx = Action::Tx1;
    best = v1;
  } else if (m2 >= 1) {
    best_tx = Action::Tx2;
    best = v2;
  }
  return best > idle ? best_tx : Action::Idle;
}

Action decide_decoupled(const ThresholdTable& node1, const ThresholdTable& node2,
                        int slot, int m1, int m2, double h1, double h2) {
  const int f1 = decide_binary(node1, slot, m1, h1);
  const int f2 = decide_binary(node2, slot, m2, h2);
  if (f1 && f2) return h1 >= h2 ? Action::Tx1 : Action::Tx2;
  if (f1) return Action::Tx1;
  if (f2) return Action::Tx2;
  return Action::Idle;
}

std::optional<std::size_t> decide_decoupled_n(
    std::span<const ThresholdTable> tables, int slot,
    std::span<const int> energies, std::span<const double> gains) {
  if (tables.size() != energies.size() || tables.size() != gains.size())
    throw std::invalid_argument("decide_decoupled_n: size mismatch");
  std::optional<std::size_t> winner;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (!decide_binary(tables[i], slot, energies[i], gains[i])) continue;
    if (!winner || gains[i] > gains[*winner]) winner = i;
  }
  return winner;
}

double policy_value(const TwoNodeThresholdTable& table) {
  return table.at(1, 0, 0);
}

void write_csv(std::ostream& os, const TwoNodeThresholdTable& table) {
  os << "slot,energy1,energy2,gamma\n";
  char buf[40];
  for (int k = 1; k <= table.horizon() + 1; ++k)
    for (int m1 = 0; m1 <= table.battery(); ++m1)
      for (int m2 = 0; m2 <= table.battery(); ++m2) {
        std::snprintf(buf, sizeof(buf), "%.17g", table.at(k, m1, m2));
        os << k << ',' << m1 << ',' << m2 << ',' << buf << '\n';
      }
}

}  // namespace ehsched
