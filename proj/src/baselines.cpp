#include "edgecache/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "edgecache/errors.hpp"

namespace edgecache {

namespace {

int argmax(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

void QConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("Q learning rate must be positive");
  if (epsilon_start < 0.0 || epsilon_start > 1.0 || epsilon_end < 0.0 ||
      epsilon_end > 1.0) {
    throw ConfigError("exploration rates must lie in [0, 1]");
  }
  if (epsilon_horizon < 1 || target_sync < 1) {
    throw ConfigError("exploration horizon and target sync period must be positive");
  }
  if (margin_weight < 0.0 || nstep_weight < 0.0 || l2_weight < 0.0 || prior_weight < 0.0) {
    throw ConfigError("Q loss weights must be non-negative");
  }
  if (!(margin > 0.0)) throw ConfigError("margin must be positive");
  if (pretrain_steps < 0) throw ConfigError("pretrain steps must be non-negative");
}

NetworkSpec q_spec(int input_width, const AgentConfig& config) {
  NetworkSpec spec;
  spec.widths.push_back(input_width);
  spec.widths.insert(spec.widths.end(), config.hidden.begin(), config.hidden.end());
  spec.widths.push_back(2);
  spec.head = Head::Linear;
  return spec;
}

QPair QPair::create(int input_width, const AgentConfig& agent, double lr,
                    std::uint64_t seed) {
  Network online(q_spec(input_width, agent), seed);
  QPair q{online, online, AdamState(online, AdamConfig{lr})};
  return q;
}

double ddqn_target(double reward, double discount, std::span<const double> q_online_next,
                   std::span<const double> q_target_next) {
  const int a = argmax(q_online_next);
  return reward + discount * q_target_next[static_cast<std::size_t>(a)];
}

double ddqn_target(const QPair& q, const Transition& t, double gamma) {
  const Eigen::VectorXd online = q.online.evaluate(t.next_state);
  const Eigen::VectorXd target = q.target.evaluate(t.next_state);
  return ddqn_target(t.reward, std::pow(gamma, t.interarrival), as_span(online),
                     as_span(target));
}

double ddqn_nstep_target(const QPair& q, const Transition& t, double gamma) {
  if (t.chain.empty()) return ddqn_target(q, t, gamma);
  const NStepReturn ret = nstep_return(t.chain, gamma);
  const Eigen::VectorXd online = q.online.evaluate(t.chain_terminal);
  const Eigen::VectorXd target = q.target.evaluate(t.chain_terminal);
  return ddqn_target(ret.value, std::pow(gamma, ret.tau), as_span(online), as_span(target));
}

double q_margin(std::span<const double> q, int expert_action, double margin) {
  const auto e = static_cast<std::size_t>(expert_action);
  double best = q[e];
  for (std::size_t a = 0; a < q.size(); ++a) {
    if (a != e) best = std::max(best, q[a] + margin);
  }
  return best - q[e];
}

LossResult q_loss(const Network& q, std::span<const QItem> batch, const QLossWeights& w) {
  LossResult out{0.0, q.zero_gradients()};
  if (batch.empty()) return out;
  const double inv = 1.0 / static_cast<double>(batch.size());
  double weight_mean = 0.0;
  for (const QItem& item : batch) {
    const ForwardPass pass = q.forward(item.state);
    const int a = item.action;
    const double qa = pass.output(a);
    const double scale = item.weight * inv;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(pass.output.size());

    const double e1 = qa - item.target;
    double loss = e1 * e1;
    g(a) += 2.0 * e1;
    if (w.nstep != 0.0) {
      const double en = qa - item.nstep_target;
      loss += w.nstep * en * en;
      g(a) += 2.0 * w.nstep * en;
    }
    if (w.prior != 0.0) {
      const double ep = qa - item.prior;
      loss += w.prior * ep * ep;
      g(a) += 2.0 * w.prior * ep;
    }
    if (item.demo && w.margin_weight != 0.0) {
      const auto values = as_span(pass.output);
      loss += w.margin_weight * q_margin(values, a, w.margin);
      int arg = a;
      double best = values[static_cast<std::size_t>(a)];
      for (int b = 0; b < static_cast<int>(values.size()); ++b) {
        if (b != a && values[static_cast<std::size_t>(b)] + w.margin > best) {
          best = values[static_cast<std::size_t>(b)] + w.margin;
          arg = b;
        }
      }
      if (arg != a) {
        g(arg) += w.margin_weight;
        g(a) -= w.margin_weight;
      }
    }
    out.loss += scale * loss;
    out.grads.add(q.backward(pass, g * scale));
    weight_mean += scale;
  }
  if (w.l2 != 0.0) {
    const double scale = w.l2 * weight_mean;
    out.loss += scale * q.weight_norm_squared();
    for (std::size_t l = 0; l < q.layers().size(); ++l) {
      out.grads.layers[l].weight += 2.0 * scale * q.layers()[l].weight;
    }
  }
  return out;
}

EpsilonSchedule::EpsilonSchedule(double start, double end, long horizon)
    : start_(start), end_(end), horizon_(horizon) {
  if (horizon < 1) throw ConfigError("exploration horizon must be positive");
}

double EpsilonSchedule::value(long step) const {
  if (step <= 0) return start_;
  if (step >= horizon_) return end_;
  return start_ + (end_ - start_) * static_cast<double>(step) / static_cast<double>(horizon_);
}

QLearner::QLearner(int width, QPair q, UpdateConfig update, AgentConfig agent,
                   QConfig config)
    : width_(width),
      q_(std::move(q)),
      update_(update),
      agent_(std::move(agent)),
      config_(config),
      schedule_(config.epsilon_start, config.epsilon_end, config.epsilon_horizon) {
  config_.validate();
}

ActionSample QLearner::act(std::span<const double> state, Rng& rng) {
  const double eps = epsilon();
  const Eigen::VectorXd values = q_.online.evaluate(state);
  const int greedy = argmax(as_span(values));
  const int n = static_cast<int>(values.size());
  int a = greedy;
  if (unit_uniform(rng) < eps) a = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(n)));
  const double p = (a == greedy ? 1.0 - eps : 0.0) + eps / n;
  return {a, p};
}

bool QLearner::tick() {
  ++decisions_;
  if (decisions_ % config_.target_sync == 0) q_.sync();
  if (++since_update_ >= update_.update_period) {
    since_update_ = 0;
    return true;
  }
  return false;
}

DdqnAgent::DdqnAgent(int input_width, UpdateConfig update, AgentConfig agent,
                     QConfig config, std::uint64_t seed)
    : QLearner(input_width,
               QPair::create(input_width, agent, config.learning_rate, mix_seed(seed, 2)),
               update, agent, config),
      buffer_(static_cast<std::size_t>(update.buffer_capacity)),
      chains_(agent.nstep) {}

void DdqnAgent::observe(Transition transition, Rng& rng) {
  for (Transition& done : chains_.push(std::move(transition))) buffer_.push(std::move(done));
  if (tick() && buffer_.size() >= static_cast<std::size_t>(update_.minibatch)) update(rng);
}

void DdqnAgent::update(Rng& rng) {
  const auto batch_size = static_cast<std::size_t>(update_.minibatch);
  std::vector<QItem> items(batch_size);
  for (int epoch = 0; epoch < update_.epochs; ++epoch) {
    for (std::size_t k = 0; k < batch_size; ++k) {
      const Transition& t = buffer_[uniform_index(rng, buffer_.size())];
      items[k] = {t.state, t.action, ddqn_target(q_, t, update_.gamma), 0.0, 0.0, false, 1.0};
    }
    const LossResult loss = q_loss(q_.online, items, QLossWeights{});
    q_.opt.step(q_.online, loss.grads);
  }
  ++rounds_;
}

DqfdAgent::DqfdAgent(const DdqnAgent& old, QConfig config, TransferConfig replay, Rng& rng)
    : QLearner(old.input_width(), old.q(), old.update_config(), old.agent_config(), config),
      buffer_(2 * old.buffer().capacity(), replay.alpha, replay.floor),
      replay_(replay),
      beta_(replay.beta_start, replay.beta_end, replay.beta_horizon),
      chains_(old.agent_config().nstep) {
  if (!old.buffer().full()) {
    throw ConfigError("DQfD needs a full pre-change buffer");
  }
  q_.opt = AdamState(q_.online, AdamConfig{config.learning_rate});
  buffer_.load_demos(old.buffer().oldest_first(), true);
  for (int k = 0; k < config_.pretrain_steps; ++k) step(rng);
}

void DqfdAgent::observe(Transition transition, Rng& rng) {
  for (Transition& done : chains_.push(std::move(transition))) buffer_.push(std::move(done));
  if (tick()) update(rng);
}

void DqfdAgent::update(Rng& rng) {
  for (int epoch = 0; epoch < update_.epochs; ++epoch) step(rng);
  ++rounds_;
}

void DqfdAgent::step(Rng& rng) {
  const auto batch_size = static_cast<std::size_t>(update_.minibatch);
  const SampledBatch batch = sample_batch(buffer_, batch_size, beta_.value(decisions_), rng);
  std::vector<QItem> items(batch_size);
  std::vector<double> tde(batch_size);
  for (std::size_t k = 0; k < batch_size; ++k) {
    const Transition& t = buffer_[batch.slots[k]];
    const double y = ddqn_target(q_, t, update_.gamma);
    items[k] = {t.state, t.action, y, ddqn_nstep_target(q_, t, update_.gamma), 0.0,
                t.demo, batch.weights[k]};
    tde[k] = q_.online.evaluate(t.state)(t.action) - y;
  }
  const QLossWeights w{config_.nstep_weight, config_.margin_weight, config_.margin,
                       config_.l2_weight, 0.0};
  const LossResult loss = q_loss(q_.online, items, w);
  q_.opt.step(q_.online, loss.grads);
  for (std::size_t k = 0; k < batch_size; ++k) {
    const std::size_t slot = batch.slots[k];
    buffer_.set_tde(slot, tde[k]);
    buffer_.set_priority(slot, std::abs(tde[k]) + replay_.floor);
  }
}

QdtrlAgent::QdtrlAgent(const DdqnAgent& old, QConfig config, std::uint64_t seed)
    : QLearner(old.input_width(),
               QPair::create(old.input_width(), old.agent_config(), config.learning_rate,
                             mix_seed(seed, 2)),
               old.update_config(), old.agent_config(), config),
      frozen_(old.q().online),
      buffer_(static_cast<std::size_t>(old.update_config().buffer_capacity)),
      chains_(1) {}

void QdtrlAgent::observe(Transition transition, Rng& rng) {
  for (Transition& done : chains_.push(std::move(transition))) buffer_.push(std::move(done));
  if (tick() && buffer_.size() >= static_cast<std::size_t>(update_.minibatch)) update(rng);
}

void QdtrlAgent::update(Rng& rng) {
  const auto batch_size = static_cast<std::size_t>(update_.minibatch);
  std::vector<QItem> items(batch_size);
  for (int epoch = 0; epoch < update_.epochs; ++epoch) {
    for (std::size_t k = 0; k < batch_size; ++k) {
      const Transition& t = buffer_[uniform_index(rng, buffer_.size())];
      items[k] = {t.state, t.action, ddqn_target(q_, t, update_.gamma), 0.0,
                  frozen_.evaluate(t.state)(t.action), false, 1.0};
    }
    QLossWeights w;
    w.prior = config_.prior_weight;
    const LossResult loss = q_loss(q_.online, items, w);
    q_.opt.step(q_.online, loss.grads);
  }
  ++rounds_;
}

PpoAgent lfs_reset(const PpoAgent& old, std::uint64_t seed) {
  return PpoAgent(old.input_width(), old.update_config(), old.agent_config(), seed);
}

}  // namespace edgecache
