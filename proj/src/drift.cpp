#include "edgecache/drift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "edgecache/errors.hpp"

namespace edgecache {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::logic_error("cosine inputs differ in length");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0.0 && nb == 0.0) return 1.0;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::logic_error("KL inputs differ in length");
  double total = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] <= 0.0) continue;
    if (q[k] <= 0.0) return std::numeric_limits<double>::infinity();
    total += p[k] * std::log(p[k] / q[k]);
  }
  return total;
}

std::vector<double> smoothed_distribution(std::span<const double> counts,
                                          double window, double eps) {
  std::vector<double> out(counts.size());
  double total = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    out[k] = counts[k] / window + eps;
    total += out[k];
  }
  for (double& v : out) v /= total;
  return out;
}

RateDetector::RateDetector(RateConfig config, double reference_mean)
    : config_(config), reference_(reference_mean) {
  if (config.window < 1 || config.persistence < 1 || !(config.threshold > 0.0)) {
    throw ConfigError("invalid rate detector settings");
  }
  if (!(reference_mean > 0.0)) throw ConfigError("reference interarrival must be positive");
}

RateReading RateDetector::update(double interarrival) {
  window_.push_back(interarrival);
  sum_ += interarrival;
  if (window_.size() > static_cast<std::size_t>(config_.window)) {
    sum_ -= window_.front();
    window_.pop_front();
  }
  RateReading reading;
  if (window_.size() < static_cast<std::size_t>(config_.window)) return reading;
  // Recompute from scratch to keep the running sum from drifting.
  const double mean =
      std::accumulate(window_.begin(), window_.end(), 0.0) / config_.window;
  reading.statistic = mean;
  reading.violated = std::abs(mean - reference_) > config_.threshold;
  violations_ = reading.violated ? std::min(violations_ + 1, config_.persistence) : 0;
  if (!fired_ && violations_ >= config_.persistence) {
    fired_ = true;
    reading.triggered = true;
  }
  return reading;
}

void RateDetector::rearm(double reference_mean) {
  if (!(reference_mean > 0.0)) throw ConfigError("reference interarrival must be positive");
  reference_ = reference_mean;
  window_.clear();
  sum_ = 0.0;
  violations_ = 0;
  fired_ = false;
}

BlockCounts::BlockCounts(int window, int files, WindowAlignment alignment)
    : window_(window),
      shift_(alignment == WindowAlignment::Adjacent ? window : 1),
      current_(static_cast<std::size_t>(files), 0.0),
      previous_(static_cast<std::size_t>(files), 0.0) {
  if (window < 1) throw ConfigError("popularity window must be positive");
  if (files < 1) throw ConfigError("file count must be positive");
}

void BlockCounts::push(int file) {
  if (file < 0 || file >= static_cast<int>(current_.size())) {
    throw std::out_of_range("file id outside catalog");
  }
  history_.push_front(file);  // history_[k] is the request k trials ago
  ++seen_;
  const auto at = [&](long back) { return static_cast<std::size_t>(history_[static_cast<std::size_t>(back)]); };
  current_[static_cast<std::size_t>(file)] += 1.0;
  if (seen_ > window_) current_[at(window_)] -= 1.0;
  if (seen_ > shift_) previous_[at(shift_)] += 1.0;
  if (seen_ > shift_ + window_) previous_[at(shift_ + window_)] -= 1.0;
  const auto keep = static_cast<std::size_t>(shift_ + window_ + 1);
  while (history_.size() > keep) history_.pop_back();
}

bool BlockCounts::warm() const { return seen_ >= window_ + shift_; }

void BlockCounts::clear() {
  history_.clear();
  std::fill(current_.begin(), current_.end(), 0.0);
  std::fill(previous_.begin(), previous_.end(), 0.0);
  seen_ = 0;
}

PopularityDetector::PopularityDetector(PopularityConfig config, int files)
    : config_(config),
      blocks_(config.window, files, config.alignment),
      ring_(static_cast<std::size_t>(config.similarity_window), 0.0) {
  if (config.similarity_window < 1) throw ConfigError("similarity window must be positive");
}

PopularityReading PopularityDetector::update(int file) {
  blocks_.push(file);
  PopularityReading reading;
  if (!blocks_.warm()) return reading;
  const double c = cosine_similarity(blocks_.current(), blocks_.previous());
  ring_[ring_pos_] = c;
  ring_pos_ = (ring_pos_ + 1) % ring_.size();
  const double mean =
      std::accumulate(ring_.begin(), ring_.end(), 0.0) / static_cast<double>(ring_.size());
  reading.cosine = c;
  reading.statistic = mean;
  reading.violated = mean < config_.threshold;
  if (reading.violated && !fired_) {
    fired_ = true;
    reading.triggered = true;
  }
  return reading;
}

void PopularityDetector::rearm() {
  blocks_.clear();
  std::fill(ring_.begin(), ring_.end(), 0.0);
  ring_pos_ = 0;
  fired_ = false;
}

KlDetector::KlDetector(KlConfig config, int files)
    : config_(config), blocks_(config.window, files, config.alignment) {
  if (!(config.smoothing > 0.0)) throw ConfigError("KL smoothing must be positive");
}

KlReading KlDetector::update(int file) {
  blocks_.push(file);
  KlReading reading;
  if (!blocks_.warm()) return reading;
  const auto window = static_cast<double>(config_.window);
  const auto p = smoothed_distribution(blocks_.current(), window, config_.smoothing);
  const auto q = smoothed_distribution(blocks_.previous(), window, config_.smoothing);
  const double d = kl_divergence(p, q);
  reading.statistic = d;
  reading.violated = d > config_.threshold;
  if (reading.violated && !fired_) {
    fired_ = true;
    reading.triggered = true;
  }
  return reading;
}

void KlDetector::rearm() {
  blocks_.clear();
  fired_ = false;
}

DetectorSuite::DetectorSuite(DetectorSuiteConfig config, int files)
    : config_(std::move(config)), files_(files) {
  if (config_.use_rate && config_.rate_reference) {
    rate_.emplace(config_.rate, *config_.rate_reference);
  }
  if (config_.use_rate && !config_.rate_reference && config_.reference_trials < 1) {
    throw ConfigError("rate reference needs at least one calibration trial");
  }
  if (config_.use_popularity) popularity_.emplace(config_.popularity, files);
  if (config_.use_kl) kl_.emplace(config_.kl, files);
}

std::optional<double> DetectorSuite::rate_reference() const {
  if (rate_) return rate_->reference();
  return std::nullopt;
}

std::vector<DetectionEvent> DetectorSuite::observe(const RequestEvent& event) {
  std::vector<DetectionEvent> fired;
  auto log = [&](const char* name, double stat, double threshold, bool violated,
                 bool triggered) {
    if (keep_rows_) rows_.push_back({event.trial, name, stat, threshold, violated, triggered});
    if (triggered) {
      fired.push_back({name, event.trial, stat});
      events_.push_back(fired.back());
    }
  };

  if (config_.use_rate) {
    if (!rate_) {
      calibration_sum_ += event.interarrival;
      if (++calibration_count_ >= config_.reference_trials) {
        rate_.emplace(config_.rate, calibration_sum_ / static_cast<double>(calibration_count_));
      }
    } else {
      const RateReading r = rate_->update(event.interarrival);
      if (r.statistic) {
        log("rate", *r.statistic, config_.rate.threshold, r.violated, r.triggered);
      }
    }
  }
  if (popularity_) {
    const PopularityReading r = popularity_->update(event.file);
    if (r.statistic) {
      log("popularity", *r.statistic, config_.popularity.threshold, r.violated,
          r.triggered);
    }
  }
  if (kl_) {
    const KlReading r = kl_->update(event.file);
    if (r.statistic) log("kl", *r.statistic, config_.kl.threshold, r.violated, r.triggered);
  }
  return fired;
}

void DetectorSuite::rearm() {
  if (config_.use_rate) {
    if (config_.rate_reference) {
      rate_->rearm(*config_.rate_reference);
    } else {
      rate_.reset();
      calibration_sum_ = 0.0;
      calibration_count_ = 0;
    }
  }
  if (popularity_) popularity_->rearm();
  if (kl_) kl_->rearm();
}

ReplayResult replay_trace(const DetectorSuiteConfig& config, int files,
                          std::span<const RequestEvent> trace) {
  DetectorSuite suite(config, files);
  for (const RequestEvent& e : trace) {
    if (e.file >= files) throw ConfigError("trace references a file outside the catalog");
    suite.observe(e);
  }
  return {suite.events(), suite.rows()};
}

void write_detection_csv(std::ostream& out, std::span<const DetectionRow> rows) {
  out << kDetectionHeader << '\n';
  std::ostringstream line;
  line.precision(12);
  for (const DetectionRow& r : rows) {
    line.str("");
    line << r.trial << ',' << r.detector << ',' << r.statistic << ',' << r.threshold
         << ',' << (r.violated ? 1 : 0) << ',' << (r.triggered ? 1 : 0);
    out << line.str() << '\n';
  }
}

}  // namespace edgecache
