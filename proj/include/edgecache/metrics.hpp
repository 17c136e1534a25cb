#pragma once

#include <optional>
#include <span>
#include <vector>

namespace edgecache {

struct PlateauConfig {
  int window = 500;                // trailing-mean length W
  double tolerance = 0.05;         // relative band around the final mean
  int hold = 500;                  // consecutive trials inside the band
  double recovery_fraction = 0.9;  // of the pre-change plateau

  void validate() const;
};

// Element j is the mean of rewards[j .. j+window-1], i.e. the trailing mean
// at trial j+window (trials counted from 1).
std::vector<double> trailing_means(std::span<const double> rewards, int window);

// First trial whose trailing mean, and that of the next hold-1 trials, lies
// within tolerance*|final| of the final trailing mean. Trials are 1-based
// positions within `rewards`.
std::optional<long> convergence_trial(std::span<const double> rewards,
                                      const PlateauConfig& config);

// Trailing mean over the last `window` trials up to and including `change`.
std::optional<double> pre_change_plateau(std::span<const double> rewards, long change,
                                         int window);

// Threshold that counts as recovered; reduces to fraction*plateau for a
// positive plateau and stays below the plateau when it is negative.
double recovery_threshold(double plateau, double fraction);

// First trial n >= change + window whose trailing mean over post-change
// trials reaches the recovery threshold. `change` is the last trial
// generated under the old law.
std::optional<long> recovery_trial(std::span<const double> rewards, long change,
                                   const PlateauConfig& config);

// Linear-interpolation quantile; +inf entries sort last.
double quantile(std::vector<double> values, double q);

struct Spread {
  double median = 0.0;
  double iqr = 0.0;
};

// Absent values count as +inf.
Spread spread(std::span<const std::optional<double>> values);

}  // namespace edgecache
