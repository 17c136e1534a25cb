#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "edgecache/agent.hpp"
#include "edgecache/network.hpp"

namespace edgecache {

struct UpdateConfig {
  double gamma = 0.99;
  double clip = 0.2;
  int update_period = 64;  // decisions between update rounds
  int epochs = 4;          // minibatch steps per round
  int minibatch = 64;
  int buffer_capacity = 2000;
  double entropy_coef = 0.0;
};

struct AgentConfig {
  std::vector<int> hidden{64, 64};
  double actor_lr = 3e-4;
  double critic_lr = 1e-3;
  int nstep = 10;  // chain length recorded on stored transitions
};

NetworkSpec actor_spec(int input_width, const AgentConfig& config);
NetworkSpec critic_spec(int input_width, const AgentConfig& config);

struct ActorCritic {
  Network actor;   // softmax over {0, 1}
  Network critic;  // scalar value
  AdamState actor_opt;
  AdamState critic_opt;

  static ActorCritic create(int input_width, const AgentConfig& config,
                            std::uint64_t seed);
  void reset_optimizers(const AgentConfig& config);
};

ActionSample act(const Network& actor, std::span<const double> state, Rng& rng);

// r + gamma^tau * V(s') - V(s)
double advantage(double reward, double next_value, double value, double gamma,
                 double tau);
// r + gamma^tau * V(s')
double value_target(double reward, double next_value, double gamma, double tau);

double advantage(const Network& critic, const Transition& t, double gamma);
double value_target(const Network& critic, const Transition& t, double gamma);

double critic_value(const Network& critic, std::span<const double> state);

struct LossResult {
  double loss = 0.0;
  GradientSet grads;
};

struct SurrogateTerm {
  double value = 0.0;
  bool gradient_flows = true;
};

// min(rho * A, clip(rho, 1-eps, 1+eps) * A). The gradient through rho is
// zero when the clipped branch is the binding one.
SurrogateTerm clipped_surrogate(double ratio, double adv, double clip);

struct PolicyItem {
  std::span<const double> state;
  int action = 0;
  double behavior_prob = 1.0;
  double advantage = 0.0;
  double weight = 1.0;
};

// Negated minibatch mean of the weighted clipped surrogate (minus an entropy
// bonus when entropy_coef > 0).
LossResult ppo_actor_loss(const Network& actor, std::span<const PolicyItem> batch,
                          double clip, double entropy_coef = 0.0);

struct ValueItem {
  std::span<const double> state;
  double target = 0.0;
  double weight = 1.0;
};

// Minibatch mean of weight * (V(s) - target)^2.
LossResult critic_loss(const Network& critic, std::span<const ValueItem> batch);

class PpoAgent final : public Agent {
 public:
  PpoAgent(int input_width, UpdateConfig update, AgentConfig config,
           std::uint64_t seed);

  ActionSample act(std::span<const double> state, Rng& rng) override;
  void observe(Transition transition, Rng& rng) override;

  // One round of `epochs` uniformly sampled minibatch steps.
  void update(Rng& rng);

  const ActorCritic& networks() const { return nets_; }
  ActorCritic& networks() { return nets_; }
  const RingBuffer<Transition>& buffer() const { return buffer_; }
  const UpdateConfig& update_config() const { return update_; }
  const AgentConfig& agent_config() const { return config_; }
  long update_rounds() const { return rounds_; }
  int input_width() const { return input_width_; }

 private:
  int input_width_;
  UpdateConfig update_;
  AgentConfig config_;
  ActorCritic nets_;
  RingBuffer<Transition> buffer_;
  ChainBuilder chains_;
  int since_update_ = 0;
  long rounds_ = 0;
};

MetricSeries train_loop(CacheEnv& env, Agent& agent, long trials, Rng& rng);

}  // namespace edgecache
