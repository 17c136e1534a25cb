#pragma once

#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edgecache/environment.hpp"

namespace edgecache {

double cosine_similarity(std::span<const double> a, std::span<const double> b);
double kl_divergence(std::span<const double> p, std::span<const double> q);
// counts / window + eps per file, renormalised to a distribution.
std::vector<double> smoothed_distribution(std::span<const double> counts,
                                          double window, double eps);

struct RateConfig {
  int window = 10;          // L_R
  double threshold = 0.05;  // th_R, time units
  int persistence = 3;      // K consecutive violations
};

struct RateReading {
  std::optional<double> statistic;  // W_R once the window is full
  bool violated = false;
  bool triggered = false;
};

// Moving average of interarrivals compared with a reference mean 1/lambda.
class RateDetector {
 public:
  RateDetector(RateConfig config, double reference_mean);

  RateReading update(double interarrival);
  void rearm(double reference_mean);

  double reference() const { return reference_; }
  int violations() const { return violations_; }
  bool fired() const { return fired_; }
  const RateConfig& config() const { return config_; }

 private:
  RateConfig config_;
  double reference_;
  std::deque<double> window_;
  double sum_ = 0.0;
  int violations_ = 0;
  bool fired_ = false;
};

// Adjacent: current [n-L+1, n] against previous [n-2L+1, n-L].
// Shifted: previous is the current window one trial earlier.
enum class WindowAlignment { Adjacent, Shifted };

// Request counts over the current and the previous block.
class BlockCounts {
 public:
  BlockCounts(int window, int files, WindowAlignment alignment);

  void push(int file);
  bool warm() const;
  const std::vector<double>& current() const { return current_; }
  const std::vector<double>& previous() const { return previous_; }
  long seen() const { return seen_; }
  int window() const { return window_; }
  void clear();

 private:
  int window_;
  int shift_;
  std::deque<int> history_;
  std::vector<double> current_;
  std::vector<double> previous_;
  long seen_ = 0;
};

struct PopularityConfig {
  int window = 50;            // L_P
  double threshold = 0.3;     // th_c
  int similarity_window = 2;  // M_C
  WindowAlignment alignment = WindowAlignment::Adjacent;
};

struct PopularityReading {
  std::optional<double> cosine;
  std::optional<double> statistic;  // mean over the W_C ring
  bool violated = false;
  bool triggered = false;
};

// Cosine similarity of adjacent request-count blocks. The W_C ring starts
// zero-filled and its mean is always taken over all M_C slots.
class PopularityDetector {
 public:
  PopularityDetector(PopularityConfig config, int files);

  PopularityReading update(int file);
  void rearm();

  bool fired() const { return fired_; }
  const PopularityConfig& config() const { return config_; }

 private:
  PopularityConfig config_;
  BlockCounts blocks_;
  std::vector<double> ring_;
  std::size_t ring_pos_ = 0;
  bool fired_ = false;
};

struct KlConfig {
  int window = 50;
  double threshold = 10.0;
  double smoothing = 1e-10;
  WindowAlignment alignment = WindowAlignment::Adjacent;
};

struct KlReading {
  std::optional<double> statistic;  // D_KL(current || previous)
  bool violated = false;
  bool triggered = false;
};

class KlDetector {
 public:
  KlDetector(KlConfig config, int files);

  KlReading update(int file);
  void rearm();

  bool fired() const { return fired_; }
  const KlConfig& config() const { return config_; }

 private:
  KlConfig config_;
  BlockCounts blocks_;
  bool fired_ = false;
};

struct DetectionEvent {
  std::string detector;
  long trial = 0;
  double statistic = 0.0;
};

// One evaluated statistic; rows for detection.csv.
struct DetectionRow {
  long trial = 0;
  std::string detector;
  double statistic = 0.0;
  double threshold = 0.0;
  bool violated = false;
  bool triggered = false;
};

inline constexpr const char* kDetectionHeader =
    "trial,detector,statistic,threshold,violated,triggered";

struct DetectorSuiteConfig {
  bool use_rate = true;
  bool use_popularity = true;
  bool use_kl = false;
  RateConfig rate;
  PopularityConfig popularity;
  KlConfig kl;
  // Reference mean interarrival; estimated from the first reference_trials
  // arrivals when absent.
  std::optional<double> rate_reference;
  long reference_trials = 500;
};

// Runs the enabled detectors side by side over one request stream.
class DetectorSuite {
 public:
  DetectorSuite(DetectorSuiteConfig config, int files);

  // Returns the events triggered by this arrival.
  std::vector<DetectionEvent> observe(const RequestEvent& event);

  // Forgets all windows; the rate reference is re-estimated.
  void rearm();

  const std::vector<DetectionRow>& rows() const { return rows_; }
  const std::vector<DetectionEvent>& events() const { return events_; }
  void keep_rows(bool keep) { keep_rows_ = keep; }
  std::optional<double> rate_reference() const;

 private:
  DetectorSuiteConfig config_;
  int files_;
  std::optional<RateDetector> rate_;
  std::optional<PopularityDetector> popularity_;
  std::optional<KlDetector> kl_;
  double calibration_sum_ = 0.0;
  long calibration_count_ = 0;
  std::vector<DetectionRow> rows_;
  std::vector<DetectionEvent> events_;
  bool keep_rows_ = true;
};

struct ReplayResult {
  std::vector<DetectionEvent> events;
  std::vector<DetectionRow> rows;
};

ReplayResult replay_trace(const DetectorSuiteConfig& config, int files,
                          std::span<const RequestEvent> trace);

void write_detection_csv(std::ostream& out, std::span<const DetectionRow> rows);

}  // namespace edgecache
