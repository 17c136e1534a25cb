#include "edgecache/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "edgecache/errors.hpp"

namespace edgecache {

void PlateauConfig::validate() const {
  if (window < 1 || hold < 1) throw ConfigError("plateau window and hold must be positive");
  if (tolerance < 0.0) throw ConfigError("plateau tolerance must be non-negative");
  if (!(recovery_fraction > 0.0 && recovery_fraction <= 1.0)) {
    throw ConfigError("recovery fraction must lie in (0, 1]");
  }
}

std::vector<double> trailing_means(std::span<const double> rewards, int window) {
  if (window < 1) throw std::invalid_argument("window must be positive");
  const auto w = static_cast<std::size_t>(window);
  if (rewards.size() < w) return {};
  std::vector<double> out(rewards.size() - w + 1);
  // Exact window sums; a running sum would accumulate rounding over long runs.
  for (std::size_t j = 0; j < out.size(); ++j) {
    double s = 0.0;
    for (std::size_t k = j; k < j + w; ++k) s += rewards[k];
    out[j] = s / static_cast<double>(w);
  }
  return out;
}

std::optional<long> convergence_trial(std::span<const double> rewards,
                                      const PlateauConfig& config) {
  config.validate();
  const std::vector<double> means = trailing_means(rewards, config.window);
  if (means.empty()) return std::nullopt;
  const double final_mean = means.back();
  const double band = config.tolerance * std::abs(final_mean);
  const auto hold = static_cast<std::size_t>(config.hold);
  std::size_t run = 0;
  for (std::size_t j = 0; j < means.size(); ++j) {
    run = std::abs(means[j] - final_mean) <= band ? run + 1 : 0;
    if (run == hold) return static_cast<long>(j + 1 - hold) + config.window;
  }
  return std::nullopt;
}

std::optional<double> pre_change_plateau(std::span<const double> rewards, long change,
                                         int window) {
  if (change < window || change > static_cast<long>(rewards.size())) return std::nullopt;
  double s = 0.0;
  for (long k = change - window; k < change; ++k) s += rewards[static_cast<std::size_t>(k)];
  return s / window;
}

double recovery_threshold(double plateau, double fraction) {
  return plateau - (1.0 - fraction) * std::abs(plateau);
}

std::optional<long> recovery_trial(std::span<const double> rewards, long change,
                                   const PlateauConfig& config) {
  config.validate();
  const auto plateau = pre_change_plateau(rewards, change, config.window);
  if (!plateau) return std::nullopt;
  const double threshold = recovery_threshold(*plateau, config.recovery_fraction);
  const auto post = rewards.subspan(static_cast<std::size_t>(change));
  const std::vector<double> means = trailing_means(post, config.window);
  for (std::size_t j = 0; j < means.size(); ++j) {
    if (means[j] >= threshold) return change + static_cast<long>(j) + config.window;
  }
  return std::nullopt;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  if (lo == hi || values[lo] == values[hi]) return values[lo];
  if (std::isinf(values[hi])) return values[hi];
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Spread spread(std::span<const std::optional<double>> values) {
  std::vector<double> v;
  v.reserve(values.size());
  for (const auto& x : values) v.push_back(x ? *x : std::numeric_limits<double>::infinity());
  const double q1 = quantile(v, 0.25);
  const double q3 = quantile(v, 0.75);
  return {quantile(v, 0.5), std::isinf(q3) ? q3 : q3 - q1};
}

}  // namespace edgecache
