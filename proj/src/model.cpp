// SPDX-License-Identifier: Apache-2.0
#include "ehsched/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ehsched {

namespace {
constexpr double kProbSumTol = 1e-12;

void append(std::vector<std::string>& out, const std::vector<std::string>& more,
            const std::string& prefix) {
  for (const auto& m : more) out.push_back(prefix + m);
}
}  // namespace

double ChannelDistribution::mean() const {
  double m = 0.0;
  for (const auto& a : support) m += a.prob * a.gain;
  return m;
}

ArrivalDistribution ArrivalDistribution::bernoulli(double p, int battery) {
  ArrivalDistribution d;
  d.probs.assign(static_cast<std::size_t>(battery) + 1, 0.0);
  d.probs[0] = 1.0 - p;
  if (battery >= 1) d.probs[1] = p;
  return d;
}

ArrivalDistribution ArrivalDistribution::uniform(int battery) {
  ArrivalDistribution d;
  d.probs.assign(static_cast<std::size_t>(battery) + 1,
                 1.0 / (static_cast<double>(battery) + 1.0));
  return d;
}

ArrivalDistribution ArrivalDistribution::point_mass(int units, int battery) {
  ArrivalDistribution d;
  d.probs.assign(static_cast<std::size_t>(battery) + 1, 0.0);
  if (units >= 0 && units <= battery) d.probs[static_cast<std::size_t>(units)] = 1.0;
  return d;
}

double ArrivalDistribution::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) m += static_cast<double>(i) * probs[i];
  return m;
}

bool ArrivalDistribution::binary_support() const {
  for (std::size_t i = 2; i < probs.size(); ++i)
    if (probs[i] != 0.0) return false;
  return true;
}

ProblemSpec ProblemSpec::binary(int horizon, int battery, double p,
                                ChannelDistribution channel) {
  return {horizon, battery, ArrivalDistribution::bernoulli(p, battery),
          std::move(channel), ConsumptionMode::Binary};
}

ProblemSpec ProblemSpec::discrete(int horizon, int battery,
                                  std::vector<double> arrival_probs,
                                  ChannelDistribution channel) {
  return {horizon, battery, ArrivalDistribution{std::move(arrival_probs)},
          std::move(channel), ConsumptionMode::Discrete};
}

ProblemSpec TwoNodeSpec::marginal(int node) const {
  if (node != 1 && node != 2)
    throw std::invalid_argument("TwoNodeSpec::marginal: node must be 1 or 2");
  return ProblemSpec::binary(horizon, battery,
                             node == 1 ? arrival_p1 : arrival_p2,
                             node == 1 ? channel1 : channel2);
}

double reward(double gain, int units) {
  if (gain < 0.0) throw std::invalid_argument("reward: gain must be >= 0");
  if (units < 0) throw std::invalid_argument("reward: units must be >= 0");
  return std::log1p(static_cast<double>(units) * gain);
}

double expected_reward(const ChannelDistribution& dist, int units) {
  double e = 0.0;
  for (const auto& a : dist.support) e += a.prob * reward(a.gain, units);
  return e;
}

std::vector<std::string> validate(const ChannelDistribution& dist) {
  std::vector<std::string> v;
  if (dist.support.empty()) {
    v.push_back("support must be non-empty");
    return v;
  }
  double sum = 0.0;
  for (const auto& a : dist.support) {
    if (a.gain < 0.0) v.push_back("gains must be >= 0");
    if (a.prob <= 0.0) v.push_back("probabilities must be > 0");
    sum += a.prob;
  }
  for (std::size_t j = 1; j < dist.support.size(); ++j)
    if (dist.support[j].gain <= dist.support[j - 1].gain) {
      v.push_back("gains must be strictly increasing");
      break;
    }
  if (std::abs(sum - 1.0) > kProbSumTol)
    v.push_back("probabilities sum != 1");
  return v;
}

namespace {
std::vector<std::string> validate_arrivals(const ArrivalDistribution& arrivals,
                                           int battery) {
  std::vector<std::string> v;
  if (arrivals.probs.size() != static_cast<std::size_t>(battery) + 1) {
    v.push_back("arrival probabilities must have length battery+1");
    return v;
  }
  double sum = 0.0;
  for (double p : arrivals.probs) {
    if (p < 0.0 || p > 1.0) v.push_back("arrival probabilities must be in [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbSumTol)
    v.push_back("arrival probabilities sum != 1");
  return v;
}
}  // namespace

std::vector<std::string> validate(const ProblemSpec& spec) {
  std::vector<std::string> v;
  if (spec.horizon < 1) v.push_back("horizon must be >= 1");
  if (spec.battery < 1) v.push_back("battery must be >= 1");
  append(v, validate(spec.channel), "channel: ");
  if (spec.battery >= 1)
    append(v, validate_arrivals(spec.arrivals, spec.battery), "");
  if (spec.mode == ConsumptionMode::Binary && !spec.arrivals.binary_support())
    v.push_back("binary mode requires {0,1} arrivals");
  return v;
}

std::vector<std::string> validate(const TwoNodeSpec& spec) {
  std::vector<std::string> v;
  if (spec.horizon < 1) v.push_back("horizon must be >= 1");
  if (spec.battery < 1) v.push_back("battery must be >= 1");
  if (spec.arrival_p1 < 0.0 || spec.arrival_p1 > 1.0)
    v.push_back("arrival probability p1 must be in [0,1]");
  if (spec.arrival_p2 < 0.0 || spec.arrival_p2 > 1.0)
    v.push_back("arrival probability p2 must be in [0,1]");
  append(v, validate(spec.channel1), "channel1: ");
  append(v, validate(spec.channel2), "channel2: ");
  return v;
}

namespace {
[[noreturn]] void throw_violations(const std::vector<std::string>& v,
                                   const char* what) {
  std::ostringstream os;
  os << what << ":";
  for (const auto& s : v) os << " [" << s << "]";
  throw std::invalid_argument(os.str());
}
}  // namespace

void require_valid(const ProblemSpec& spec) {
  auto v = validate(spec);
  if (!v.empty()) throw_violations(v, "invalid ProblemSpec");
}

void require_valid(const TwoNodeSpec& spec) {
  auto v = validate(spec);
  if (!v.empty()) throw_violations(v, "invalid TwoNodeSpec");
}

}  // namespace ehsched
