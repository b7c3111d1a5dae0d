// SPDX-License-Identifier: Apache-2.0
#include "ehsched/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ehsched/format.hpp"

namespace ehsched {

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = 0, end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return errno == 0 && end == t.c_str() + t.size() && std::isfinite(out);
}

bool parse_int(const std::string& s, long long& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtoll(t.c_str(), &end, 10);
  return errno == 0 && end == t.c_str() + t.size();
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
  const std::string t = trim(s);
  if (t.empty() || t[0] == '-') return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtoull(t.c_str(), &end, 10);
  return errno == 0 && end == t.c_str() + t.size();
}

// Raw key/value view of the text plus violation collection; typed getters
// mark keys as consumed so leftovers can be reported.
class KvReader {
 public:
  explicit KvReader(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos)
        line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        violations_.push_back("line " + std::to_string(lineno) +
                              ": expected 'key = value'");
        continue;
      }
      kv_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
  }

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  void violation(const std::string& msg) { violations_.push_back(msg); }

  std::string get_string(const std::string& key, const std::string& fallback) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    used_.insert(key);
    return it->second;
  }

  double get_double(const std::string& key, double fallback, double lo,
                    double hi) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    used_.insert(key);
    double v = 0.0;
    if (!parse_double(it->second, v) || v < lo || v > hi) {
      violations_.push_back(key + ": expected a number in [" + format_g17(lo) +
                            ", " + format_g17(hi) + "]");
      return fallback;
    }
    return v;
  }

  long long get_int(const std::string& key, long long fallback, long long lo,
                    long long hi) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    used_.insert(key);
    long long v = 0;
    if (!parse_int(it->second, v) || v < lo || v > hi) {
      violations_.push_back(key + ": expected an integer in [" +
                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
      return fallback;
    }
    return v;
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    used_.insert(key);
    std::uint64_t v = 0;
    if (!parse_u64(it->second, v)) {
      violations_.push_back(key + ": expected an unsigned integer");
      return fallback;
    }
    return v;
  }

  std::vector<double> get_double_list(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return {};
    used_.insert(key);
    auto items = split_list(key, it->second);
    std::vector<double> out;
    out.reserve(items.size());
    for (const auto& item : items) {
      double v = 0.0;
      if (!parse_double(item, v)) {
        violations_.push_back(key + ": expected a list of numbers");
        return {};
      }
      out.push_back(v);
    }
    return out;
  }

  // A bare integer is accepted as a one-element list.
  std::vector<int> get_int_list(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return {};
    used_.insert(key);
    std::vector<std::string> items;
    if (!it->second.empty() && it->second.front() == '[')
      items = split_list(key, it->second);
    else
      items.push_back(it->second);
    std::vector<int> out;
    for (const auto& item : items) {
      long long v = 0;
      if (!parse_int(item, v)) {
        violations_.push_back(key + ": expected an integer or integer list");
        return {};
      }
      out.push_back(static_cast<int>(v));
    }
    return out;
  }

  void report_unknown_keys() {
    for (const auto& [key, value] : kv_)
      if (!used_.count(key)) violations_.push_back(key + ": unknown key");
  }

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> split_list(const std::string& key,
                                      const std::string& value) {
    if (value.size() < 2 || value.front() != '[' || value.back() != ']') {
      violations_.push_back(key + ": expected a [..] list");
      return {};
    }
    std::vector<std::string> items;
    std::string body = value.substr(1, value.size() - 2);
    std::istringstream is(body);
    std::string item;
    while (std::getline(is, item, ',')) items.push_back(trim(item));
    if (items.size() == 1 && items.front().empty()) items.clear();
    return items;
  }

  std::map<std::string, std::string> kv_;
  std::set<std::string> used_;
  std::vector<std::string> violations_;
};

ChannelConfig read_channel(KvReader& kv, const std::string& prefix) {
  ChannelConfig ch;
  ch.support = kv.get_double_list(prefix + ".support");
  ch.probs = kv.get_double_list(prefix + ".probs");
  ch.family = kv.get_string(prefix + ".family", "");
  ch.a = kv.get_double(prefix + ".a", 0.0, 0.0, 1e300);
  ch.b = kv.get_double(prefix + ".b", 1.0, 0.0, 1e300);
  ch.rate = kv.get_double(prefix + ".rate", 1.0, 1e-300, 1e300);
  ch.levels = static_cast<int>(kv.get_int(prefix + ".levels", 8, 1, 4096));

  const bool explicit_support = !ch.support.empty() || kv.has(prefix + ".support");
  const bool named = !ch.family.empty();
  if (explicit_support && named)
    kv.violation(prefix + ".family: exclusive with " + prefix + ".support");
  if (!explicit_support && !named)
    kv.violation(prefix + ".support or " + prefix + ".family: required");
  if (explicit_support && ch.support.size() != ch.probs.size())
    kv.violation(prefix + ".probs: must match " + prefix + ".support length");
  if (named && ch.family != "uniform" && ch.family != "exponential")
    kv.violation(prefix + ".family: must be 'uniform' or 'exponential'");
  if (ch.family == "uniform" && !(ch.a < ch.b))
    kv.violation(prefix + ".a: uniform family requires a < b");
  return ch;
}

void check_channel_resolvable(KvReader& kv, const ChannelConfig& ch,
                              const std::string& prefix) {
  if (!ch.support.empty() && ch.support.size() == ch.probs.size()) {
    ChannelDistribution dist;
    for (std::size_t i = 0; i < ch.support.size(); ++i)
      dist.support.push_back({ch.support[i], ch.probs[i]});
    for (const auto& v : validate(dist)) kv.violation(prefix + ": " + v);
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error([&violations] {
        std::string msg = "invalid config:";
        for (const auto& v : violations) msg += "\n  " + v;
        return msg;
      }()),
      violations_(std::move(violations)) {}

std::string to_string(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::SingleBinary: return "single-binary";
    case ExperimentMode::SingleDiscrete: return "single-discrete";
    case ExperimentMode::TwoNode: return "two-node";
  }
  return "?";
}

ExperimentConfig parse_config_text(const std::string& text) {
  KvReader kv(text);
  ExperimentConfig config;

  const std::string mode = kv.get_string("mode", "");
  if (mode == "single-binary")
    config.mode = ExperimentMode::SingleBinary;
  else if (mode == "single-discrete")
    config.mode = ExperimentMode::SingleDiscrete;
  else if (mode == "two-node")
    config.mode = ExperimentMode::TwoNode;
  else
    kv.violation("mode: must be single-binary, single-discrete or two-node");

  config.horizons = kv.get_int_list("horizon");
  if (config.horizons.empty()) kv.violation("horizon: required");
  for (int h : config.horizons)
    if (h < 1) kv.violation("horizon: entries must be >= 1");
  for (std::size_t i = 1; i < config.horizons.size(); ++i)
    if (config.horizons[i] <= config.horizons[i - 1]) {
      kv.violation("horizon: sweep list must be strictly increasing");
      break;
    }

  config.battery = static_cast<int>(kv.get_int("battery", 1, 1, 1000000));
  config.paths = kv.get_int("paths", 10000, 2, 1000000000000LL);
  config.seed = kv.get_u64("seed", 1);
  config.initial_energy = static_cast<int>(
      kv.get_int("initial_energy", 0, 0, config.battery));
  config.out = kv.get_string("out", "");

  if (config.mode == ExperimentMode::TwoNode) {
    if (!kv.has("arrival1.p")) kv.violation("arrival1.p: required for two-node");
    if (!kv.has("arrival2.p")) kv.violation("arrival2.p: required for two-node");
    config.arrival1_p = kv.get_double("arrival1.p", 0.0, 0.0, 1.0);
    config.arrival2_p = kv.get_double("arrival2.p", 0.0, 0.0, 1.0);
    config.channel1 = read_channel(kv, "channel1");
    config.channel2 = read_channel(kv, "channel2");
    check_channel_resolvable(kv, config.channel1, "channel1");
    check_channel_resolvable(kv, config.channel2, "channel2");
  } else {
    if (config.mode == ExperimentMode::SingleBinary) {
      if (!kv.has("arrival.p")) kv.violation("arrival.p: required for single-binary");
      config.arrival_p = kv.get_double("arrival.p", 0.0, 0.0, 1.0);
    } else {
      config.arrival_probs = kv.get_double_list("arrival.probs");
      if (config.arrival_probs.empty())
        kv.violation("arrival.probs: required for single-discrete");
      if (!config.arrival_probs.empty()) {
        if (config.arrival_probs.size() !=
            static_cast<std::size_t>(config.battery) + 1)
          kv.violation("arrival.probs: must list battery+1 probabilities");
        double sum = 0.0;
        for (double p : config.arrival_probs) {
          if (p < 0.0 || p > 1.0)
            kv.violation("arrival.probs: entries must be in [0,1]");
          sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12)
          kv.violation("arrival.probs: arrival probabilities sum != 1");
      }
    }
    config.channel = read_channel(kv, "channel");
    check_channel_resolvable(kv, config.channel, "channel");
  }

  kv.report_unknown_keys();
  if (!kv.violations().empty()) throw ConfigError(kv.violations());
  return config;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError({"cannot open config file: " + path});
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return parse_config_text(buffer.str());
}

namespace {

void serialize_list(std::ostream& os, const std::string& key,
                    const std::vector<double>& values) {
  os << key << " = [";
  for (std::size_t i = 0; i < values.size(); ++i)
    os << (i ? ", " : "") << format_g17(values[i]);
  os << "]\n";
}

void serialize_channel(std::ostream& os, const ChannelConfig& ch,
                       const std::string& prefix) {
  if (!ch.support.empty()) {
    serialize_list(os, prefix + ".support", ch.support);
    serialize_list(os, prefix + ".probs", ch.probs);
    return;
  }
  os << prefix << ".family = " << ch.family << "\n";
  if (ch.family == "uniform") {
    os << prefix << ".a = " << format_g17(ch.a) << "\n";
    os << prefix << ".b = " << format_g17(ch.b) << "\n";
  } else {
    os << prefix << ".rate = " << format_g17(ch.rate) << "\n";
  }
  os << prefix << ".levels = " << ch.levels << "\n";
}

}  // namespace

std::string serialize_config(const ExperimentConfig& config) {
  std::ostringstream os;
  os << "mode = " << to_string(config.mode) << "\n";
  if (config.horizons.size() == 1) {
    os << "horizon = " << config.horizons.front() << "\n";
  } else {
    os << "horizon = [";
    for (std::size_t i = 0; i < config.horizons.size(); ++i)
      os << (i ? ", " : "") << config.horizons[i];
    os << "]\n";
  }
  os << "battery = " << config.battery << "\n";
  switch (config.mode) {
    case ExperimentMode::SingleBinary:
      os << "arrival.p = " << format_g17(config.arrival_p) << "\n";
      serialize_channel(os, config.channel, "channel");
      break;
    case ExperimentMode::SingleDiscrete:
      serialize_list(os, "arrival.probs", config.arrival_probs);
      serialize_channel(os, config.channel, "channel");
      break;
    case ExperimentMode::TwoNode:
      os << "arrival1.p = " << format_g17(config.arrival1_p) << "\n";
      os << "arrival2.p = " << format_g17(config.arrival2_p) << "\n";
      serialize_channel(os, config.channel1, "channel1");
      serialize_channel(os, config.channel2, "channel2");
      break;
  }
  os << "paths = " << config.paths << "\n";
  os << "seed = " << config.seed << "\n";
  os << "initial_energy = " << config.initial_energy << "\n";
  if (!config.out.empty()) os << "out = " << config.out << "\n";
  return os.str();
}

ChannelDistribution exponential_channel(double rate, int levels) {
  return quantize_quantile(
      [rate](double u) { return -std::log1p(-u) / rate; }, levels);
}

ChannelDistribution uniform_channel(double a, double b, int levels) {
  return quantize_quantile([a, b](double u) { return a + (b - a) * u; },
                           levels);
}

ChannelDistribution resolve_channel(const ChannelConfig& ch) {
  if (!ch.support.empty()) {
    ChannelDistribution dist;
    for (std::size_t i = 0; i < ch.support.size(); ++i)
      dist.support.push_back({ch.support[i], ch.probs[i]});
    return dist;
  }
  if (ch.family == "uniform") return uniform_channel(ch.a, ch.b, ch.levels);
  return exponential_channel(ch.rate, ch.levels);
}

ExperimentConfig preset_fig1_discrete() {
  ExperimentConfig config;
  config.mode = ExperimentMode::SingleDiscrete;
  config.battery = 10;
  config.arrival_probs.assign(11, 1.0 / 11.0);
  config.channel = {{}, {}, "exponential", 0.0, 1.0, 1.0, 8};
  for (int n = 1; n <= 20; ++n) config.horizons.push_back(n);
  config.paths = 20000;
  return config;
}

ExperimentConfig preset_fig1_binary() {
  ExperimentConfig config = preset_fig1_discrete();
  config.mode = ExperimentMode::SingleBinary;
  config.arrival_probs.clear();
  config.arrival_p = 0.5;
  return config;
}

ExperimentConfig preset_fig2() {
  ExperimentConfig config;
  config.mode = ExperimentMode::TwoNode;
  config.battery = 10;
  config.arrival1_p = 0.5;
  config.arrival2_p = 0.5;
  config.channel1 = {{}, {}, "exponential", 0.0, 1.0, 1.0, 8};
  config.channel2 = {{}, {}, "exponential", 0.0, 1.0, 1.0, 9};
  for (int n = 1; n <= 20; ++n) config.horizons.push_back(n);
  config.paths = 20000;
  return config;
}

ProblemSpec single_spec(const ExperimentConfig& config, int horizon) {
  if (config.mode == ExperimentMode::TwoNode)
    throw ConfigError({"mode: expected a single-node config"});
  ProblemSpec spec =
      config.mode == ExperimentMode::SingleBinary
          ? ProblemSpec::binary(horizon, config.battery, config.arrival_p,
                                resolve_channel(config.channel))
          : ProblemSpec::discrete(horizon, config.battery, config.arrival_probs,
                                  resolve_channel(config.channel));
  require_valid(spec);
  return spec;
}

TwoNodeSpec two_node_spec(const ExperimentConfig& config, int horizon) {
  if (config.mode != ExperimentMode::TwoNode)
    throw ConfigError({"mode: expected a two-node config"});
  TwoNodeSpec spec{horizon,
                   config.battery,
                   config.arrival1_p,
                   config.arrival2_p,
                   resolve_channel(config.channel1),
                   resolve_channel(config.channel2)};
  require_valid(spec);
  return spec;
}

}  // namespace ehsched
