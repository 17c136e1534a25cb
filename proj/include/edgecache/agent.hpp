#pragma once

#include <cstddef>
#include <deque>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgecache/environment.hpp"
#include "edgecache/random.hpp"

namespace edgecache {

struct ChainLink {
  double reward = 0.0;
  double interarrival = 0.0;
};

// One decision epoch. chain[0] is this transition's own (r, tau); later
// links follow in decision order and chain_terminal is the state reached
// after the last link.
struct Transition {
  std::vector<double> state;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  double interarrival = 1.0;
  double behavior_prob = 1.0;
  bool demo = false;
  std::vector<ChainLink> chain;
  std::vector<double> chain_terminal;
  double tde = 0.0;
  double priority = 1.0;
};

// Holds transitions back until their n-step chain is complete.
class ChainBuilder {
 public:
  explicit ChainBuilder(int horizon);

  std::vector<Transition> push(Transition transition);
  // Releases pending transitions with truncated chains.
  std::vector<Transition> flush();
  int horizon() const { return horizon_; }
  std::size_t pending() const { return pending_.size(); }

 private:
  int horizon_;
  std::deque<Transition> pending_;
};

// Fixed-capacity FIFO; the oldest element is overwritten once full.
template <typename T>
class RingBuffer {
 public:
  explicit RingBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ring buffer capacity must be positive");
    items_.reserve(capacity);
  }

  void push(T item) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      items_[head_] = std::move(item);
    }
    head_ = (head_ + 1) % capacity_;
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool full() const { return items_.size() == capacity_; }
  bool empty() const { return items_.empty(); }
  void clear() {
    items_.clear();
    head_ = 0;
  }

  // k-th oldest element.
  const T& chronological(std::size_t k) const {
    return full() ? items_[(head_ + k) % capacity_] : items_.at(k);
  }
  const T& operator[](std::size_t slot) const { return items_.at(slot); }

  std::vector<T> oldest_first() const {
    std::vector<T> out;
    out.reserve(items_.size());
    for (std::size_t k = 0; k < items_.size(); ++k) out.push_back(chronological(k));
    return out;
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<T> items_;
};

struct ActionSample {
  int action = 0;
  double probability = 1.0;
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual ActionSample act(std::span<const double> state, Rng& rng) = 0;
  virtual void observe(Transition transition, Rng& rng) = 0;
};

class UniformRandomAgent final : public Agent {
 public:
  ActionSample act(std::span<const double> state, Rng& rng) override;
  void observe(Transition, Rng&) override {}
};

struct TrialRecord {
  long trial = 0;
  double time = 0.0;
  int action = 0;
  bool hit = false;
  double reward = 0.0;
  double avg_reward = 0.0;
};

// Per-decision reward log; avg_reward is the cumulative mean up to the trial.
class MetricSeries {
 public:
  void record(long trial, double time, int action, bool hit, double reward);

  const std::vector<TrialRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::vector<double> rewards() const;
  std::vector<double> average_rewards() const;

  // rewards.csv: trial,time,action,hit,instant_reward,avg_reward,algorithm
  void write_csv(std::ostream& out, const std::string& algorithm) const;

 private:
  std::vector<TrialRecord> records_;
  double sum_ = 0.0;
};

inline constexpr const char* kRewardsHeader =
    "trial,time,action,hit,instant_reward,avg_reward,algorithm";

// Runs `trials` decisions of agent against env, feeding every transition
// back to the agent.
void run_trials(CacheEnv& env, Agent& agent, long trials, Rng& rng,
                MetricSeries& metrics);

}  // namespace edgecache
