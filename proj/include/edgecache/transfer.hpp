#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "edgecache/ppo.hpp"

namespace edgecache {

struct TransferConfig {
  double margin_weight = 1.0;  // lambda_1
  double nstep_weight = 1.0;   // lambda_2
  double l2_weight = 1e-5;     // lambda_3
  double margin = 0.8;         // l(a_E, a) for a != a_E
  int nstep = 10;
  double alpha = 0.4;
  double beta_start = 0.6;
  double beta_end = 1.0;
  long beta_horizon = 3000;  // decisions
  double floor = 0.01;       // priority floor constant

  void validate() const;
};

class RewardTracker {
 public:
  void add(double reward) {
    sum_ += reward;
    ++count_;
  }
  double average() const { return count_ == 0 ? 0.0 : sum_ / static_cast<double>(count_); }
  double sum() const { return sum_; }
  long count() const { return count_; }

 private:
  double sum_ = 0.0;
  long count_ = 0;
};

// max(floor, (avg_r - r) + |tde| + floor)
double priority(double avg_reward, double reward, double tde, double floor);

// Affine from start to end over horizon steps, clamped afterwards.
class BetaSchedule {
 public:
  BetaSchedule(double start, double end, long horizon);
  double value(long step) const;

 private:
  double start_;
  double end_;
  long horizon_;
};

// Fixed-capacity replay with proportional prioritization. Slots fill in
// cursor order; once the end is reached the cursor wraps to the protected
// prefix (0 unless protected slots were requested).
class PrioritizedBuffer {
 public:
  PrioritizedBuffer(std::size_t capacity, double alpha, double floor);

  // Fills slots [0, demos.size()) with demo-flagged transitions at the
  // current maximum priority; the cursor moves to the first free slot.
  void load_demos(std::vector<Transition> demos, bool protect = false);

  // Returns the slot written.
  std::size_t push(Transition transition);

  void set_priority(std::size_t slot, double p);
  void set_tde(std::size_t slot, double tde) { slots_.at(slot).tde = tde; }

  std::size_t size() const { return slots_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t cursor() const { return cursor_; }
  std::size_t protected_prefix() const { return protected_; }
  std::size_t demo_count() const { return demos_; }
  double alpha() const { return alpha_; }
  double floor() const { return floor_; }
  double max_priority() const { return max_priority_; }
  double mean_priority() const;
  const Transition& operator[](std::size_t slot) const { return slots_.at(slot); }

  // P(i) over occupied slots.
  std::vector<double> probabilities() const;

 private:
  std::size_t capacity_;
  double alpha_;
  double floor_;
  std::vector<Transition> slots_;
  std::size_t cursor_ = 0;
  std::size_t protected_ = 0;
  std::size_t demos_ = 0;
  double max_priority_ = 1.0;
  double priority_sum_ = 0.0;
};

struct SampledBatch {
  std::vector<std::size_t> slots;
  std::vector<double> probabilities;
  std::vector<double> weights;  // importance weights scaled by the batch max
};

// Draws with replacement; throws std::logic_error when the buffer holds
// fewer than batch_size transitions.
SampledBatch sample_batch(const PrioritizedBuffer& buffer, std::size_t batch_size,
                          double beta, Rng& rng);

// max_a [p(a) + l(a_E, a)] - p(a_E); zero for self-generated transitions.
double margin_loss(std::span<const double> probs, int expert_action, double margin,
                   bool demo);

struct TlpPolicyItem {
  PolicyItem policy;  // policy.weight carries omega
  bool demo = false;
};

LossResult tlp_actor_loss(const Network& actor, std::span<const TlpPolicyItem> batch,
                          double clip, double margin_weight, double margin);

struct NStepReturn {
  double value = 0.0;  // sum_k gamma^{tau_(k)} r_(k)
  double tau = 0.0;    // cumulative time of the chain
  int steps = 0;
};

NStepReturn nstep_return(std::span<const ChainLink> chain, double gamma);

struct TlpValueItem {
  std::span<const double> state;
  double target = 0.0;        // one-step R(t)
  double nstep_target = 0.0;  // R_(n) + gamma^{tau_(n)} V(s'_(n))
  double weight = 1.0;
};

// Mean of w * [(V - R)^2 + lambda_2 (V - R_n)^2 + lambda_3 * sum W^2].
LossResult tlp_critic_loss(const Network& critic, std::span<const TlpValueItem> batch,
                           double nstep_weight, double l2_weight);

struct TransferRow {
  long trial = 0;
  double demo_fraction = 0.0;
  double beta = 0.0;
  double mean_priority = 0.0;
  double avg_reward = 0.0;
};

inline constexpr const char* kTransferHeader =
    "trial,demo_fraction_in_buffer,beta,mean_priority,avg_reward";

void write_transfer_csv(std::ostream& out, std::span<const TransferRow> rows);

class TlpAgent final : public Agent {
 public:
  TlpAgent(ActorCritic nets, PrioritizedBuffer buffer, UpdateConfig update,
           AgentConfig agent, TransferConfig config);

  ActionSample act(std::span<const double> state, Rng& rng) override;
  void observe(Transition transition, Rng& rng) override;
  void update(Rng& rng);

  const ActorCritic& networks() const { return nets_; }
  const PrioritizedBuffer& buffer() const { return buffer_; }
  const RewardTracker& tracker() const { return tracker_; }
  const TransferConfig& config() const { return config_; }
  double beta() const;
  long decisions() const { return decisions_; }
  long update_rounds() const { return rounds_; }

  // One row per decision since the transfer.
  const std::vector<TransferRow>& rows() const { return rows_; }
  void set_trial_offset(long offset) { trial_offset_ = offset; }

 private:
  ActorCritic nets_;
  PrioritizedBuffer buffer_;
  UpdateConfig update_;
  AgentConfig agent_;
  TransferConfig config_;
  BetaSchedule beta_;
  RewardTracker tracker_;
  ChainBuilder chains_;
  long decisions_ = 0;
  int since_update_ = 0;
  long rounds_ = 0;
  long trial_offset_ = 0;
  std::vector<TransferRow> rows_;
};

// Requires a full old buffer. The new actor is drawn from actor_seed, the
// critic is copied bit for bit and the old transitions become demos.
TlpAgent init_transfer(const PpoAgent& old_agent, TransferConfig config,
                       std::uint64_t actor_seed);

}  // namespace edgecache
