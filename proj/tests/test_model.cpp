// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>

#include "common.hpp"
#include "ehsched/model.hpp"
#include "ehsched/simulate.hpp"

using namespace ehsched;

TEST_CASE("reward evaluates log(1 + f*h) in nats") {
  CHECK(reward(1.0, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(reward(0.0, 5) == 0.0);
  CHECK(reward(2.5, 0) == 0.0);
  CHECK_THROWS_AS(reward(-0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(reward(1.0, -1), std::invalid_argument);
}

TEST_CASE("expected_reward is the exact support sum") {
  CHECK(expected_reward(ChannelDistribution::point_mass(1.0), 1) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  ChannelDistribution half{{{0.0, 0.5}, {1.0, 0.5}}};
  // gains must be strictly increasing and may include 0
  CHECK(validate(half).empty());
  CHECK(expected_reward(half, 1) ==
        doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-12));
  CHECK(expected_reward(testfix::three_gains(), 0) == 0.0);
}

TEST_CASE("expected_reward cross-checked by sampling") {
  ProblemSpec spec = ProblemSpec::binary(1, 1, 1.0, ChannelDistribution{{{0.0, 0.5}, {1.0, 0.5}}});
  const long long paths = 100000;
  double sum = 0.0;
  for (long long i = 0; i < paths; ++i)
    sum += reward(sample_path(spec, 99, static_cast<std::uint64_t>(i)).gains[0][0], 1);
  const double mc = sum / static_cast<double>(paths);
  const double exact = expected_reward(spec.channel, 1);
  // binomial spread of the log(2)-or-0 coin
  const double sigma = 0.5 * std::log(2.0) / std::sqrt(static_cast<double>(paths));
  CHECK(std::abs(mc - exact) < 3.0 * sigma);
}

TEST_CASE("expected_reward monotone in transmitted units") {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    ChannelDistribution dist;
    double gain = u(gen);
    double total = 0.0;
    const int levels = 1 + static_cast<int>(u(gen) * 3);
    for (int j = 0; j < levels; ++j) {
      dist.support.push_back({gain, 1.0 / levels});
      gain += 0.1 + u(gen);
      total += 1.0 / levels;
    }
    REQUIRE(validate(dist).empty());
    double prev = expected_reward(dist, 0);
    for (int f = 1; f <= 4; ++f) {
      const double cur = expected_reward(dist, f);
      if (dist.support.back().gain > 0.0)
        CHECK(cur > prev);
      else
        CHECK(cur >= prev);
      prev = cur;
    }
  }
}

TEST_CASE("reward concave in transmitted units") {
  for (double h : {0.1, 0.7, 1.0, 3.5}) {
    for (int f = 1; f <= 9; ++f) {
      const double second_diff =
          reward(h, f + 1) - 2.0 * reward(h, f) + reward(h, f - 1);
      CHECK(second_diff <= 1e-15);
    }
  }
}

TEST_CASE("validate reports every violation") {
  CHECK(validate(testfix::hand_spec()).empty());

  ProblemSpec bad = testfix::hand_spec();
  bad.arrivals.probs = {0.5, 0.4, 0.0};  // sums to 0.9
  auto violations = validate(bad);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0] == "arrival probabilities sum != 1");

  ProblemSpec nonbinary = testfix::hand_spec();
  nonbinary.arrivals.probs = {0.5, 0.3, 0.2};
  violations = validate(nonbinary);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0] == "binary mode requires {0,1} arrivals");

  ProblemSpec degenerate;
  CHECK(validate(degenerate).size() >= 3);  // horizon, battery, channel

  ChannelDistribution decreasing{{{2.0, 0.5}, {1.0, 0.5}}};
  CHECK(!validate(decreasing).empty());

  TwoNodeSpec two{2, 1, 0.5, 1.5, testfix::unit_gain(), testfix::unit_gain()};
  violations = validate(two);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0] == "arrival probability p2 must be in [0,1]");
}

TEST_CASE("binary arrivals classified by support") {
  CHECK(ArrivalDistribution::bernoulli(0.3, 4).binary_support());
  CHECK_FALSE(ArrivalDistribution::uniform(2).binary_support());
  CHECK(ArrivalDistribution::bernoulli(0.3, 4).mean() == doctest::Approx(0.3));
  CHECK(ArrivalDistribution::uniform(2).mean() == doctest::Approx(1.0));
}

TEST_CASE("quantize: degenerate point mass merges to one atom") {
  auto dist = quantize([](double x) { return x < 1.0 ? 0.0 : 1.0; }, 4);
  REQUIRE(dist.support.size() == 1);
  CHECK(dist.support[0].gain == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(dist.support[0].prob == doctest::Approx(1.0));
}

TEST_CASE("quantize: uniform [0,1] halves to conditional means") {
  auto dist = quantize([](double x) { return std::min(std::max(x, 0.0), 1.0); }, 2);
  REQUIRE(dist.support.size() == 2);
  CHECK(dist.support[0].gain == doctest::Approx(0.25).epsilon(1e-8));
  CHECK(dist.support[1].gain == doctest::Approx(0.75).epsilon(1e-8));
  CHECK(dist.support[0].prob == doctest::Approx(0.5));
}

TEST_CASE("quantize: exponential(1) single level recovers the mean") {
  auto dist = quantize([](double x) { return -std::expm1(-x); }, 1);
  REQUIRE(dist.support.size() == 1);
  CHECK(std::abs(dist.support[0].gain - 1.0) < 1e-6);
}

TEST_CASE("quantize properties: valid output, mean preserved") {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double rate = u(gen);
    const int levels = 1 + static_cast<int>(u(gen) * 5);
    auto quantile = [rate](double v) { return -std::log1p(-v) / rate; };
    auto dist = quantize_quantile(quantile, levels);
    CHECK(validate(dist).empty());
    CHECK(std::abs(dist.mean() - 1.0 / rate) < 1e-6);

    const double a = u(gen), width = u(gen);
    auto uniform = quantize_quantile(
        [a, width](double v) { return a + width * v; }, levels);
    CHECK(validate(uniform).empty());
    CHECK(std::abs(uniform.mean() - (a + 0.5 * width)) < 1e-6);
  }
}

TEST_CASE("quantize rejects bad inputs") {
  CHECK_THROWS_AS(quantize([](double) { return 0.5; }, 0), std::invalid_argument);
  CHECK_THROWS_AS(quantize([](double x) { return std::sin(x); }, 2),
                  std::invalid_argument);  // non-monotone
  CHECK_THROWS_AS(quantize_quantile([](double v) { return -v; }, 2),
                  std::invalid_argument);  // decreasing quantile
  CHECK_THROWS_AS(quantize([](double) { return 0.0; }, 2),
                  std::invalid_argument);  // never reaches 1
}

TEST_CASE("quantize from tabulated quantiles") {
  // Uniform [0,1] tabulated at the ends is exact under linear interpolation.
  auto dist = quantize_tabulated({{0.0, 0.0}, {1.0, 1.0}}, 4);
  REQUIRE(dist.support.size() == 4);
  CHECK(dist.support[0].gain == doctest::Approx(0.125).epsilon(1e-8));
  CHECK(dist.support[3].gain == doctest::Approx(0.875).epsilon(1e-8));
  CHECK_THROWS_AS(quantize_tabulated({{0.0, 1.0}, {1.0, 0.0}}, 2),
                  std::invalid_argument);
}

TEST_CASE("two-node marginals are binary single-node problems") {
  TwoNodeSpec spec{3, 2, 0.3, 0.8, testfix::two_gains(),
                   testfix::two_gains_shifted()};
  const auto node2 = spec.marginal(2);
  CHECK(node2.mode == ConsumptionMode::Binary);
  CHECK(node2.arrivals.probs[1] == doctest::Approx(0.8));
  CHECK(node2.channel.support[0].gain == doctest::Approx(0.45));
  CHECK_THROWS_AS(spec.marginal(3), std::invalid_argument);
}
