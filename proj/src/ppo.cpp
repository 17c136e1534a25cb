#include "edgecache/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edgecache {

NetworkSpec actor_spec(int input_width, const AgentConfig& config) {
  NetworkSpec spec;
  spec.widths.push_back(input_width);
  spec.widths.insert(spec.widths.end(), config.hidden.begin(), config.hidden.end());
  spec.widths.push_back(2);
  spec.head = Head::Softmax;
  return spec;
}

NetworkSpec critic_spec(int input_width, const AgentConfig& config) {
  NetworkSpec spec;
  spec.widths.push_back(input_width);
  spec.widths.insert(spec.widths.end(), config.hidden.begin(), config.hidden.end());
  spec.widths.push_back(1);
  spec.head = Head::Linear;
  return spec;
}

ActorCritic ActorCritic::create(int input_width, const AgentConfig& config,
                                std::uint64_t seed) {
  ActorCritic ac{Network(actor_spec(input_width, config), mix_seed(seed, 0)),
                 Network(critic_spec(input_width, config), mix_seed(seed, 1)),
                 {}, {}};
  ac.reset_optimizers(config);
  return ac;
}

void ActorCritic::reset_optimizers(const AgentConfig& config) {
  actor_opt = AdamState(actor, AdamConfig{config.actor_lr});
  critic_opt = AdamState(critic, AdamConfig{config.critic_lr});
}

ActionSample act(const Network& actor, std::span<const double> state, Rng& rng) {
  const Eigen::VectorXd p = actor.evaluate(state);
  const int a = unit_uniform(rng) < p(0) ? 0 : 1;
  return {a, p(a)};
}

double advantage(double reward, double next_value, double value, double gamma,
                 double tau) {
  return reward + std::pow(gamma, tau) * next_value - value;
}

double value_target(double reward, double next_value, double gamma, double tau) {
  return reward + std::pow(gamma, tau) * next_value;
}

double critic_value(const Network& critic, std::span<const double> state) {
  return critic.evaluate(state)(0);
}

double advantage(const Network& critic, const Transition& t, double gamma) {
  return advantage(t.reward, critic_value(critic, t.next_state),
                   critic_value(critic, t.state), gamma, t.interarrival);
}

double value_target(const Network& critic, const Transition& t, double gamma) {
  return value_target(t.reward, critic_value(critic, t.next_state), gamma,
                      t.interarrival);
}

SurrogateTerm clipped_surrogate(double ratio, double adv, double clip) {
  const double unclipped = ratio * adv;
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip) * adv;
  if (unclipped <= clipped) return {unclipped, true};
  return {clipped, false};
}

LossResult ppo_actor_loss(const Network& actor, std::span<const PolicyItem> batch,
                          double clip, double entropy_coef) {
  LossResult out{0.0, actor.zero_gradients()};
  if (batch.empty()) return out;
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const PolicyItem& item : batch) {
    if (!(item.behavior_prob > 0.0)) {
      throw std::logic_error("behavior probability must be positive");
    }
    const ForwardPass pass = actor.forward(item.state);
    const double p = pass.output(item.action);
    const double ratio = p / item.behavior_prob;
    const SurrogateTerm term = clipped_surrogate(ratio, item.advantage, clip);
    out.loss -= item.weight * term.value * inv;

    Eigen::VectorXd g = Eigen::VectorXd::Zero(pass.output.size());
    if (term.gradient_flows) {
      g(item.action) = -item.weight * item.advantage / item.behavior_prob * inv;
    }
    if (entropy_coef > 0.0) {
      for (Eigen::Index a = 0; a < pass.output.size(); ++a) {
        const double pa = std::max(pass.output(a), 1e-300);
        out.loss += entropy_coef * pa * std::log(pa) * inv;
        g(a) += entropy_coef * (std::log(pa) + 1.0) * inv;
      }
    }
    if (!g.isZero(0.0)) out.grads.add(actor.backward(pass, g));
  }
  return out;
}

LossResult critic_loss(const Network& critic, std::span<const ValueItem> batch) {
  LossResult out{0.0, critic.zero_gradients()};
  if (batch.empty()) return out;
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const ValueItem& item : batch) {
    const ForwardPass pass = critic.forward(item.state);
    const double err = pass.output(0) - item.target;
    out.loss += item.weight * err * err * inv;
    Eigen::VectorXd g(1);
    g(0) = 2.0 * item.weight * err * inv;
    out.grads.add(critic.backward(pass, g));
  }
  return out;
}

PpoAgent::PpoAgent(int input_width, UpdateConfig update, AgentConfig config,
                   std::uint64_t seed)
    : input_width_(input_width),
      update_(update),
      config_(config),
      nets_(ActorCritic::create(input_width, config, seed)),
      buffer_(static_cast<std::size_t>(update.buffer_capacity)),
      chains_(config.nstep) {
  if (!(update.gamma > 0.0 && update.gamma < 1.0)) {
    throw std::invalid_argument("discount must lie in (0, 1)");
  }
  if (update.clip <= 0.0 || update.update_period <= 0 || update.epochs <= 0 ||
      update.minibatch <= 0) {
    throw std::invalid_argument("update parameters must be positive");
  }
}

ActionSample PpoAgent::act(std::span<const double> state, Rng& rng) {
  return edgecache::act(nets_.actor, state, rng);
}

void PpoAgent::observe(Transition transition, Rng& rng) {
  for (Transition& done : chains_.push(std::move(transition))) {
    buffer_.push(std::move(done));
  }
  if (++since_update_ >= update_.update_period &&
      buffer_.size() >= static_cast<std::size_t>(update_.minibatch)) {
    since_update_ = 0;
    update(rng);
  }
}

void PpoAgent::update(Rng& rng) {
  const Network frozen = nets_.critic;
  const std::size_t batch_size = static_cast<std::size_t>(update_.minibatch);
  std::vector<PolicyItem> policy(batch_size);
  std::vector<ValueItem> value(batch_size);
  for (int epoch = 0; epoch < update_.epochs; ++epoch) {
    for (std::size_t k = 0; k < batch_size; ++k) {
      const Transition& t = buffer_[uniform_index(rng, buffer_.size())];
      const double v = critic_value(frozen, t.state);
      const double target = value_target(frozen, t, update_.gamma);
      policy[k] = {t.state, t.action, t.behavior_prob, target - v, 1.0};
      value[k] = {t.state, target, 1.0};
    }
    const LossResult actor = ppo_actor_loss(nets_.actor, policy, update_.clip,
                                            update_.entropy_coef);
    const LossResult critic = critic_loss(nets_.critic, value);
    nets_.actor_opt.step(nets_.actor, actor.grads);
    nets_.critic_opt.step(nets_.critic, critic.grads);
  }
  ++rounds_;
}

MetricSeries train_loop(CacheEnv& env, Agent& agent, long trials, Rng& rng) {
  MetricSeries metrics;
  run_trials(env, agent, trials, rng, metrics);
  return metrics;
}

}  // namespace edgecache
