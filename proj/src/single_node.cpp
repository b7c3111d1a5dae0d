// SPDX-License-Identifier: Apache-2.0
#include "ehsched/single_node.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ehsched {

namespace {

void check_range(const char* fn, int slot, int max_slot, int energy,
                 int battery) {
  if (slot < 1 || slot > max_slot)
    throw std::out_of_range(std::string(fn) + ": slot out of range");
  if (energy < 0 || energy > battery)
    throw std::out_of_range(std::string(fn) + ": energy out of range");
}

}  // namespace

ThresholdTable::ThresholdTable(ProblemSpec spec, std::vector<double> values)
    : spec_(std::move(spec)), values_(std::move(values)) {
  const auto expected = static_cast<std::size_t>(spec_.horizon + 1) *
                        static_cast<std::size_t>(spec_.battery + 1);
  if (values_.size() != expected)
    throw std::invalid_argument("ThresholdTable: value count does not match dimensions");
}

double ThresholdTable::at(int slot, int energy) const {
  check_range("ThresholdTable::at", slot, spec_.horizon + 1, energy,
              spec_.battery);
  return values_[static_cast<std::size_t>(slot - 1) *
                     static_cast<std::size_t>(spec_.battery + 1) +
                 static_cast<std::size_t>(energy)];
}

namespace {

// Shared backward induction over the arrival-mixed expectation. The only
// difference between the two published recursions is the action set, which
// `cap` pins per energy level.
std::vector<double> backward_induction(const ProblemSpec& spec) {
  const int n = spec.horizon;
  const int b = spec.battery;
  const auto& channel = spec.channel.support;
  const auto& arrivals = spec.arrivals.probs;

  // Rewards r[j][f] = log(1 + f * h_j), f = 0..B.
  std::vector<std::vector<double>> r(channel.size());
  for (std::size_t j = 0; j < channel.size(); ++j) {
    r[j].resize(static_cast<std::size_t>(b) + 1);
    for (int f = 0; f <= b; ++f) r[j][f] = reward(channel[j].gain, f);
  }

  std::vector<double> values(static_cast<std::size_t>(n + 1) *
                                 static_cast<std::size_t>(b + 1),
                             0.0);
  auto row = [&](int slot) { return values.data() + (slot - 1) * (b + 1); };

  for (int k = n; k >= 1; --k) {
    const double* next = row(k + 1);
    double* cur = row(k);
    for (int c = 0; c <= b; ++c) {
      double acc = 0.0;
      for (int e = 0; e < static_cast<int>(arrivals.size()); ++e) {
        const double pe = arrivals[static_cast<std::size_t>(e)];
        if (pe == 0.0) continue;
        const int u = std::min(c + e, b);
        const int cap = spec.max_transmit(u);
        double over_gains = 0.0;
        for (std::size_t j = 0; j < channel.size(); ++j) {
          double best = next[u];  // j = 0: keep everything
          for (int f = 1; f <= cap; ++f)
            best = std::max(best, r[j][static_cast<std::size_t>(f)] + next[u - f]);
          over_gains += channel[j].prob * best;
        }
        acc += pe * over_gains;
      }
      cur[c] = acc;
    }
  }
  return values;
}

}  // namespace

ThresholdTable solve_binary(const ProblemSpec& spec) {
  require_valid(spec);
  if (spec.mode != ConsumptionMode::Binary)
    throw std::invalid_argument("solve_binary: spec is not Binary mode");
  return {spec, backward_induction(spec)};
}

ThresholdTable solve_discrete(const ProblemSpec& spec) {
  require_valid(spec);
  return {spec, backward_induction(spec)};
}

int decide_binary(const ThresholdTable& table, int slot, int available,
                  double gain) {
  if (table.spec().mode != ConsumptionMode::Binary)
    throw std::invalid_argument("decide_binary: table is not Binary mode");
  check_range("decide_binary", slot, table.horizon(), available,
              table.battery());
  if (available == 0) return 0;
  return reward(gain, 1) + table.at(slot + 1, available - 1) >
                 table.at(slot + 1, available)
             ? 1
             : 0;
}

double channel_cutoff(const ThresholdTable& table, int slot, int available) {
  if (table.spec().mode != ConsumptionMode::Binary)
    throw std::invalid_argument("channel_cutoff: table is not Binary mode");
  check_range("channel_cutoff", slot, table.horizon(), available,
              table.battery());
  if (available < 1)
    throw std::out_of_range("channel_cutoff: available energy must be >= 1");
  return std::expm1(table.at(slot + 1, available) -
                    table.at(slot + 1, available - 1));
}

int decide_discrete(const ThresholdTable& table, int slot, int available,
                    double gain) {
  check_range("decide_discrete", slot, table.horizon(), available,
              table.battery());
  const int cap = table.spec().max_transmit(available);
  int best_units = 0;
  double best = table.at(slot + 1, available);
  for (int f = 1; f <= cap; ++f) {
    const double v = reward(gain, f) + table.at(slot + 1, available - f);
    if (v > best) {
      best = v;
      best_units = f;
    }
  }
  return best_units;
}

double policy_value(const ThresholdTable& table) { return table.at(1, 0); }

void write_csv(std::ostream& os, const ThresholdTable& table) {
  os << "slot,energy,gamma\n";
  char buf[40];
  for (int k = 1; k <= table.horizon() + 1; ++k)
    for (int m = 0; m <= table.battery(); ++m) {
      std::snprintf(buf, sizeof(buf), "%.17g", table.at(k, m));
      os << k << ',' << m << ',' << buf << '\n';
    }
}

std::vector<double> read_gamma_csv(std::istream& is, int horizon,
                                   int battery) {
  std::string line;
  if (!std::getline(is, line) || line != "slot,energy,gamma")
    throw std::runtime_error("gamma csv: missing or wrong header");
  std::vector<double> values(static_cast<std::size_t>(horizon + 1) *
                                 static_cast<std::size_t>(battery + 1),
                             std::nan(""));
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    int k = 0, m = 0;
    double g = 0.0;
    if (std::sscanf(line.c_str(), "%d,%d,%lf", &k, &m, &g) != 3)
      throw std::runtime_error("gamma csv: malformed row: " + line);
    if (k < 1 || k > horizon + 1 || m < 0 || m > battery)
      throw std::runtime_error("gamma csv: index out of range: " + line);
    values[static_cast<std::size_t>(k - 1) * (battery + 1) + m] = g;
    ++rows;
  }
  if (rows != values.size())
    throw std::runtime_error("gamma csv: wrong row count");
  return values;
}

}  // namespace ehsched
