// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "common.hpp"
#include "ehsched/config.hpp"

using namespace ehsched;

namespace {

const char* kBinaryConfig = R"(
# hand-derived instance
mode = single-binary
horizon = 2
battery = 2
arrival.p = 0.5
channel.support = [1.7182818284590452]
channel.probs = [1]
paths = 1000
seed = 7
)";

const char* kTwoNodeConfig = R"(
mode = two-node
horizon = [2, 4, 8]
battery = 2
arrival1.p = 0.5
arrival2.p = 0.25
channel1.support = [0.5, 2.0]
channel1.probs = [0.5, 0.5]
channel2.family = exponential
channel2.rate = 2.0
channel2.levels = 4
out = results.csv
)";

bool same_channel(const ChannelDistribution& a, const ChannelDistribution& b) {
  if (a.support.size() != b.support.size()) return false;
  for (std::size_t i = 0; i < a.support.size(); ++i)
    if (a.support[i].gain != b.support[i].gain ||
        a.support[i].prob != b.support[i].prob)
      return false;
  return true;
}

}  // namespace

TEST_CASE("parse a single-binary config into a validated spec") {
  const auto config = parse_config_text(kBinaryConfig);
  CHECK(config.mode == ExperimentMode::SingleBinary);
  CHECK(config.paths == 1000);
  CHECK(config.seed == 7);
  CHECK(config.out.empty());

  const auto spec = single_spec(config, config.horizons.front());
  CHECK(spec.horizon == 2);
  CHECK(spec.battery == 2);
  CHECK(spec.mode == ConsumptionMode::Binary);
  CHECK(spec.arrivals.probs[1] == 0.5);
  CHECK(spec.channel.support.size() == 1);
}

TEST_CASE("parse a two-node config with a quantized family") {
  const auto config = parse_config_text(kTwoNodeConfig);
  REQUIRE(config.horizons == std::vector<int>{2, 4, 8});
  const auto spec = two_node_spec(config, 4);
  CHECK(spec.horizon == 4);
  CHECK(spec.arrival_p2 == 0.25);
  CHECK(spec.channel2.support.size() == 4);
  // exponential(2) quantized to 4 equal cells keeps the overall mean 1/2
  CHECK(std::abs(spec.channel2.mean() - 0.5) < 1e-6);
}

TEST_CASE("config violations carry field paths and accumulate") {
  try {
    parse_config_text(
        "mode = single-binary\nhorizon = 2\nbattery = 2\n"
        "arrival.p = 1.5\nchannel.probs = [1]\nbogus = 1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const auto& v = e.violations();
    REQUIRE(v.size() >= 3);
    bool saw_arrival = false, saw_channel = false, saw_unknown = false;
    for (const auto& msg : v) {
      saw_arrival = saw_arrival || msg.rfind("arrival.p:", 0) == 0;
      saw_channel = saw_channel || msg.rfind("channel.", 0) == 0;
      saw_unknown = saw_unknown || msg == "bogus: unknown key";
    }
    CHECK(saw_arrival);
    CHECK(saw_channel);
    CHECK(saw_unknown);
  }
}

TEST_CASE("malformed probabilities are reported") {
  CHECK_THROWS_AS(parse_config_text("mode = single-discrete\nhorizon = 1\n"
                                    "battery = 1\narrival.probs = [0.5, 0.4]\n"
                                    "channel.support = [1]\nchannel.probs = [1]\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text("mode = single-binary\nhorizon = [2, 2]\n"
                                    "battery = 1\narrival.p = 0.5\n"
                                    "channel.support = [1]\nchannel.probs = [1]\n"),
                  ConfigError);
}

TEST_CASE("config round-trips through serialization to identical specs") {
  for (const char* text : {kBinaryConfig, kTwoNodeConfig}) {
    const auto config = parse_config_text(text);
    const auto reparsed = parse_config_text(serialize_config(config));
    CHECK(config.horizons == reparsed.horizons);
    CHECK(config.paths == reparsed.paths);
    CHECK(config.seed == reparsed.seed);
    CHECK(config.out == reparsed.out);
    if (config.mode == ExperimentMode::TwoNode) {
      for (int h : config.horizons) {
        const auto a = two_node_spec(config, h);
        const auto b = two_node_spec(reparsed, h);
        CHECK(a.arrival_p1 == b.arrival_p1);
        CHECK(a.arrival_p2 == b.arrival_p2);
        CHECK(same_channel(a.channel1, b.channel1));
        CHECK(same_channel(a.channel2, b.channel2));
      }
    } else {
      const auto a = single_spec(config, config.horizons.front());
      const auto b = single_spec(reparsed, reparsed.horizons.front());
      CHECK(a.arrivals.probs == b.arrivals.probs);
      CHECK(same_channel(a.channel, b.channel));
      CHECK(a.mode == b.mode);
    }
  }
}

TEST_CASE("presets resolve to valid sweep configs") {
  const auto fig1a = preset_fig1_discrete();
  const auto fig1b = preset_fig1_binary();
  const auto fig2 = preset_fig2();

  CHECK(fig1a.horizons.size() == 20);
  CHECK(fig1a.battery == 10);
  CHECK(fig1a.arrival_probs.size() == 11);
  CHECK(fig1b.arrival_p == 0.5);

  const auto discrete_spec = single_spec(fig1a, 20);
  CHECK(discrete_spec.mode == ConsumptionMode::Discrete);
  CHECK(discrete_spec.channel.support.size() == 8);

  const auto two = two_node_spec(fig2, 20);
  CHECK(two.arrival_p1 == 0.5);
  CHECK(two.channel1.support.size() == 8);
  CHECK(two.channel2.support.size() == 9);
  // the two supports never collide, so realized gains cannot tie exactly
  for (const auto& a1 : two.channel1.support)
    for (const auto& a2 : two.channel2.support)
      CHECK(a1.gain != a2.gain);
}

TEST_CASE("named families quantize to the documented supports") {
  const auto uniform = uniform_channel(0.0, 1.0, 2);
  REQUIRE(uniform.support.size() == 2);
  CHECK(uniform.support[0].gain == doctest::Approx(0.25).epsilon(1e-8));
  CHECK(uniform.support[1].gain == doctest::Approx(0.75).epsilon(1e-8));

  const auto exp1 = exponential_channel(1.0, 1);
  REQUIRE(exp1.support.size() == 1);
  CHECK(std::abs(exp1.support[0].gain - 1.0) < 1e-6);
}
