#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "edgecache/ppo.hpp"
#include "edgecache/transfer.hpp"

namespace edgecache {

struct QConfig {
  double learning_rate = 1e-3;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  long epsilon_horizon = 3000;  // decisions
  long target_sync = 500;       // decisions between target copies
  // DQfD
  double margin_weight = 1.0;
  double nstep_weight = 1.0;
  double l2_weight = 1e-5;
  double margin = 0.8;
  int pretrain_steps = 0;  // minibatch steps on demos before interaction
  // QDTRL
  double prior_weight = 0.5;

  void validate() const;
};

NetworkSpec q_spec(int input_width, const AgentConfig& config);

struct QPair {
  Network online;
  Network target;
  AdamState opt;

  static QPair create(int input_width, const AgentConfig& agent, double lr,
                      std::uint64_t seed);
  void sync() { target = online; }
};

// Decoupled argmax: the online network picks a', the target network scores it.
double ddqn_target(double reward, double discount, std::span<const double> q_online_next,
                   std::span<const double> q_target_next);
double ddqn_target(const QPair& q, const Transition& t, double gamma);
// R_(n) + gamma^{tau_(n)} Q_target(s'_(n), argmax Q_online(s'_(n))).
double ddqn_nstep_target(const QPair& q, const Transition& t, double gamma);

// max_a [Q(s,a) + l(a_E, a)] - Q(s, a_E)
double q_margin(std::span<const double> q, int expert_action, double margin);

struct QItem {
  std::span<const double> state;
  int action = 0;
  double target = 0.0;
  double nstep_target = 0.0;
  double prior = 0.0;  // Q_old(s, a)
  bool demo = false;
  double weight = 1.0;
};

struct QLossWeights {
  double nstep = 0.0;
  double margin_weight = 0.0;
  double margin = 0.8;
  double l2 = 0.0;
  double prior = 0.0;
};

// Mean of w * [(Q - y)^2 + nstep (Q - y_n)^2 + margin_weight * J_E
//              + prior (Q_old - Q)^2] plus l2 * sum W^2.
LossResult q_loss(const Network& q, std::span<const QItem> batch, const QLossWeights& w);

class EpsilonSchedule {
 public:
  EpsilonSchedule(double start, double end, long horizon);
  double value(long step) const;

 private:
  double start_;
  double end_;
  long horizon_;
};

// Shared epsilon-greedy action selection and target bookkeeping.
class QLearner : public Agent {
 public:
  ActionSample act(std::span<const double> state, Rng& rng) override;

  const QPair& q() const { return q_; }
  QPair& q() { return q_; }
  double epsilon() const { return schedule_.value(decisions_); }
  long decisions() const { return decisions_; }
  long update_rounds() const { return rounds_; }
  const UpdateConfig& update_config() const { return update_; }
  const AgentConfig& agent_config() const { return agent_; }
  const QConfig& q_config() const { return config_; }
  int input_width() const { return width_; }

 protected:
  QLearner(int width, QPair q, UpdateConfig update, AgentConfig agent, QConfig config);
  // Advances the decision clock; returns true when an update round is due.
  bool tick();

  int width_;
  QPair q_;
  UpdateConfig update_;
  AgentConfig agent_;
  QConfig config_;
  EpsilonSchedule schedule_;
  long decisions_ = 0;
  int since_update_ = 0;
  long rounds_ = 0;
};

// Plain double-Q learner with a uniform ring; trains the pre-change phase
// of the Q-based baselines.
class DdqnAgent final : public QLearner {
 public:
  DdqnAgent(int input_width, UpdateConfig update, AgentConfig agent, QConfig config,
            std::uint64_t seed);

  void observe(Transition transition, Rng& rng) override;
  void update(Rng& rng);
  const RingBuffer<Transition>& buffer() const { return buffer_; }

 private:
  RingBuffer<Transition> buffer_;
  ChainBuilder chains_;
};

// Demonstration slots are write-protected for the whole run.
class DqfdAgent final : public QLearner {
 public:
  // Imports the old Q pair; its buffer becomes the protected demo set.
  DqfdAgent(const DdqnAgent& old, QConfig config, TransferConfig replay, Rng& rng);

  void observe(Transition transition, Rng& rng) override;
  void update(Rng& rng);
  const PrioritizedBuffer& buffer() const { return buffer_; }

 private:
  void step(Rng& rng);

  PrioritizedBuffer buffer_;
  TransferConfig replay_;
  BetaSchedule beta_;
  ChainBuilder chains_;
};

class QdtrlAgent final : public QLearner {
 public:
  // The old online network is frozen as the prior; the learner restarts
  // from a fresh online network and an empty ring.
  QdtrlAgent(const DdqnAgent& old, QConfig config, std::uint64_t seed);

  void observe(Transition transition, Rng& rng) override;
  void update(Rng& rng);
  const Network& frozen() const { return frozen_; }
  const RingBuffer<Transition>& buffer() const { return buffer_; }

 private:
  Network frozen_;
  RingBuffer<Transition> buffer_;
  ChainBuilder chains_;
};

// Learn-from-scratch: a new PPO agent with empty buffer.
PpoAgent lfs_reset(const PpoAgent& old, std::uint64_t seed);

}  // namespace edgecache
