#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "edgecache/catalog.hpp"
#include "edgecache/random.hpp"

namespace edgecache {

struct CacheEntry {
  int file = 0;
  double generated_at = 0.0;
  double cached_at = 0.0;
};

// Age ratio (t - generated) / lifetime, clamped to [0, 1]. Values at 1 mean
// the copy has expired.
double freshness(double t, const CacheEntry& entry, double lifetime);

// y = i * (e^(1-h) - 1) / (e - 1): linear in importance, exponential in the
// remaining freshness, y(0) = i and y(1) = 0.
double utility(double h, double importance);

class CacheState {
 public:
  CacheState(double capacity, int files);

  double capacity() const { return capacity_; }
  double used() const { return used_; }
  double free_fraction() const { return (capacity_ - used_) / capacity_; }
  bool contains(int file) const { return entries_.at(static_cast<std::size_t>(file)).has_value(); }
  const std::optional<CacheEntry>& entry(int file) const {
    return entries_.at(static_cast<std::size_t>(file));
  }
  int files() const { return static_cast<int>(entries_.size()); }
  std::size_t occupancy() const;
  std::vector<double> indicator() const;

  void insert(const CacheEntry& entry, double size);
  void erase(int file, double size);

 private:
  double capacity_;
  double used_ = 0.0;
  std::vector<std::optional<CacheEntry>> entries_;
};

// Removes every entry whose freshness reached 1 at time t.
std::vector<int> purge_expired(CacheState& cache, const FileCatalog& catalog,
                               double t);

// Utility of every file at time t; zero for uncached files.
std::vector<double> utilities(const CacheState& cache, const FileCatalog& catalog,
                              double t);

// Per-file share of the last min(N, seen) requests, divided by N.
std::vector<double> popularity_counts(std::span<const int> history, int window,
                                      int files);

class PopularityWindow {
 public:
  PopularityWindow(int window, int files);

  void push(int file);
  std::vector<double> normalized() const;
  int window() const { return window_; }

 private:
  int window_;
  std::deque<int> recent_;
  std::vector<int> counts_;
};

struct RewardWeights {
  double utility = 1.0;
  double memory = 1.0;
};

// w1 * sum_f b_f d_f y_f - w2 * Mem.
double reward(std::span<const double> cached, std::span<const double> popularity,
              std::span<const double> utility, double free_fraction,
              const RewardWeights& weights);

struct RequestEvent {
  long trial = 0;
  double time = 0.0;
  int file = 0;
  double interarrival = 0.0;
};

// Poisson arrivals of Zipf-distributed requests on its own random stream.
class RequestStream {
 public:
  RequestStream(FileCatalog catalog, double rate, std::uint64_t seed);

  RequestEvent next();

  void set_rate(double rate);
  void set_probabilities(std::vector<double> probs);
  double rate() const { return rate_; }
  const FileCatalog& catalog() const { return catalog_; }

 private:
  FileCatalog catalog_;
  double rate_;
  Rng rng_;
  long trial_ = 0;
  double clock_ = 0.0;
};

struct SystemState {
  double free_fraction = 1.0;
  std::vector<double> cached;
  std::vector<double> utility;
  std::vector<double> popularity;
  std::vector<double> importance;
  std::vector<double> lifetime;
  std::vector<double> size;
  std::vector<double> pending;  // empty when the pending request is hidden

  std::vector<double> flatten() const;
};

struct EnvConfig {
  double capacity = 5000.0;
  double rate = 5.0;
  int popularity_window = 50;
  bool observe_pending = true;
  RewardWeights weights;
};

struct StepResult {
  double reward = 0.0;
  double interarrival = 0.0;
  bool hit = false;
  bool admitted = false;
  std::vector<int> evicted;
};

// One decision per request. The decision for the pending request is applied,
// the reward is read from the post-action state, then the clock advances to
// the next arrival.
class CacheEnv {
 public:
  CacheEnv(FileCatalog catalog, EnvConfig config, std::uint64_t seed);

  const SystemState& state() const { return state_; }
  std::vector<double> observation() const { return state_.flatten(); }
  int observation_width() const;

  StepResult step(int action);

  const RequestEvent& pending() const { return pending_; }
  double now() const { return pending_.time; }
  long trial() const { return pending_.trial; }
  const CacheState& cache() const { return cache_; }
  const FileCatalog& catalog() const { return stream_.catalog(); }
  const EnvConfig& config() const { return config_; }
  long uncacheable_admissions() const { return uncacheable_; }
  const std::vector<RequestEvent>& trace() const { return trace_; }

  // Scenario changes take effect from the next arrival on.
  void set_rate(double rate) { stream_.set_rate(rate); }
  void set_probabilities(std::vector<double> probs) {
    stream_.set_probabilities(std::move(probs));
  }

 private:
  void admit(int file);
  void arrive(const RequestEvent& event);
  void refresh_state();

  EnvConfig config_;
  RequestStream stream_;
  CacheState cache_;
  PopularityWindow window_;
  RequestEvent pending_;
  SystemState state_;
  std::vector<int> last_evicted_;
  std::vector<RequestEvent> trace_;
  long uncacheable_ = 0;
};

// requests.csv: trial,time,file_id,interarrival with 1-based file ids.
void write_trace_csv(std::ostream& out, std::span<const RequestEvent> events);
std::vector<RequestEvent> read_trace_csv(std::istream& in);

}  // namespace edgecache
