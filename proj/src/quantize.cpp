// SPDX-License-Identifier: Apache-2.0
#include "ehsched/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ehsched {

namespace {

// tanh-sinh quadrature of f over (a, b). Open rule: abscissae never touch
// the endpoints, so integrable endpoint singularities (log-type quantile
// tails) converge. Nodes closer than 1e-14 to an endpoint are dropped;
// their weights are below any tolerance used here.
double integrate_open(const std::function<double(double)>& f, double a,
                      double b, double tol) {
  const double halfw = 0.5 * (b - a);
  if (halfw <= 0.0) return 0.0;
  const double kPi2 = 1.5707963267948966;

  auto node_sum = [&](double h, bool odd_only) {
    double s = 0.0;
    for (int k = odd_only ? 1 : 0;; k += odd_only ? 2 : 1) {
      const double t = k * h;
      const double z = kPi2 * std::sinh(t);
      const double offset = halfw * 2.0 / (std::exp(2.0 * z) + 1.0);  // halfw*(1-tanh z)
      if (offset < 1e-14) break;
      const double weight = kPi2 * std::cosh(t) * 2.0 /
                            (std::cosh(2.0 * z) + 1.0);  // sech^2(z), stable form
      const double hi = f(b - offset);
      const double lo = (k == 0) ? hi : f(a + offset);
      if (!std::isfinite(hi) || !std::isfinite(lo))
        throw std::invalid_argument("quantize: quantile not integrable");
      s += weight * (k == 0 ? hi : hi + lo);
    }
    return s;
  };

  double h = 1.0;
  double sum = node_sum(h, false);
  double result = halfw * h * sum;
  for (int level = 0; level < 10; ++level) {
    h *= 0.5;
    sum += node_sum(h, true);
    const double next = halfw * h * sum;
    if (level > 1 && std::abs(next - result) <= tol * std::max(1.0, std::abs(next))) {
      return next;
    }
    result = next;
  }
  return result;
}

ChannelDistribution cells_to_distribution(const std::vector<double>& means,
                                          int levels) {
  // Merge adjacent cells with coinciding means; means are nondecreasing
  // because the quantile is.
  ChannelDistribution out;
  const double cell_prob = 1.0 / static_cast<double>(levels);
  for (double m : means) {
    if (!out.support.empty() &&
        std::abs(m - out.support.back().gain) <=
            1e-12 * std::max(1.0, std::abs(m))) {
      out.support.back().prob += cell_prob;
    } else {
      out.support.push_back({m, cell_prob});
    }
  }
  auto violations = validate(out);
  if (!violations.empty())
    throw std::invalid_argument("quantize: result violates distribution invariants: " +
                                violations.front());
  return out;
}

}  // namespace

ChannelDistribution quantize_quantile(
    const std::function<double(double)>& quantile, int levels) {
  if (levels < 1) throw std::invalid_argument("quantize: levels must be >= 1");
  if (!quantile) throw std::invalid_argument("quantize: missing quantile function");

  // Monotonicity and range probe.
  double prev = quantile(1.0 / 512.0);
  for (int i = 2; i < 512; ++i) {
    const double q = quantile(static_cast<double>(i) / 512.0);
    if (!std::isfinite(q) || q < prev - 1e-12)
      throw std::invalid_argument("quantize: non-monotone quantile");
    if (q < 0.0) throw std::invalid_argument("quantize: negative gains");
    prev = q;
  }

  std::vector<double> means;
  means.reserve(static_cast<std::size_t>(levels));
  for (int j = 0; j < levels; ++j) {
    const double lo = static_cast<double>(j) / levels;
    const double hi = static_cast<double>(j + 1) / levels;
    const double mass_integral = integrate_open(quantile, lo, hi, 1e-10);
    means.push_back(mass_integral * levels);
  }
  return cells_to_distribution(means, levels);
}

ChannelDistribution quantize(const std::function<double(double)>& cdf,
                             int levels) {
  if (levels < 1) throw std::invalid_argument("quantize: levels must be >= 1");
  if (!cdf) throw std::invalid_argument("quantize: missing cdf");

  // Probe monotonicity on a geometric grid.
  double prev = cdf(0.0);
  if (prev < -1e-12 || prev > 1.0 + 1e-12)
    throw std::invalid_argument("quantize: cdf out of [0,1]");
  for (double x = 1e-6; x < 1e9; x *= 1.3) {
    const double fx = cdf(x);
    if (fx < prev - 1e-12 || fx > 1.0 + 1e-12)
      throw std::invalid_argument("quantize: non-monotone cdf");
    prev = std::max(prev, fx);
  }

  // Upper bracket covering all probability mass we will query.
  double hi = 1.0;
  while (cdf(hi) < 1.0 - 1e-15) {
    hi *= 2.0;
    if (hi > 1e300)
      throw std::invalid_argument("quantize: cdf does not reach 1");
  }

  auto quantile = [cdf, hi](double u) {
    double lo = 0.0, up = hi;
    for (int it = 0; it < 200 && up - lo > 1e-15 * std::max(1.0, up); ++it) {
      const double mid = 0.5 * (lo + up);
      if (cdf(mid) >= u)
        up = mid;
      else
        lo = mid;
    }
    return up;
  };
  return quantize_quantile(quantile, levels);
}

ChannelDistribution quantize_tabulated(
    const std::vector<std::pair<double, double>>& quantiles, int levels) {
  if (quantiles.size() < 2)
    throw std::invalid_argument("quantize: need at least two tabulated points");
  for (std::size_t i = 1; i < quantiles.size(); ++i)
    if (quantiles[i].first <= quantiles[i - 1].first ||
        quantiles[i].second < quantiles[i - 1].second)
      throw std::invalid_argument("quantize: tabulated quantiles not monotone");

  auto quantile = [table = quantiles](double u) {
    if (u <= table.front().first) return table.front().second;
    if (u >= table.back().first) return table.back().second;
    auto it = std::upper_bound(
        table.begin(), table.end(), u,
        [](double v, const std::pair<double, double>& q) { return v < q.first; });
    const auto& [u1, q1] = *it;
    const auto& [u0, q0] = *(it - 1);
    return q0 + (q1 - q0) * (u - u0) / (u1 - u0);
  };
  return quantize_quantile(quantile, levels);
}

}  // namespace ehsched
