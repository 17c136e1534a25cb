#include "edgecache/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "edgecache/errors.hpp"

namespace edgecache {

void TransferConfig::validate() const {
  if (margin_weight < 0.0 || nstep_weight < 0.0 || l2_weight < 0.0) {
    throw ConfigError("transfer loss weights must be non-negative");
  }
  if (!(margin > 0.0)) throw ConfigError("margin must be positive");
  if (nstep < 1) throw ConfigError("n-step horizon must be >= 1");
  if (alpha < 0.0) throw ConfigError("prioritization exponent must be non-negative");
  if (beta_horizon < 1) throw ConfigError("beta horizon must be positive");
  if (!(floor > 0.0)) throw ConfigError("priority floor must be positive");
}

double priority(double avg_reward, double reward, double tde, double floor) {
  return std::max(floor, (avg_reward - reward) + std::abs(tde) + floor);
}

BetaSchedule::BetaSchedule(double start, double end, long horizon)
    : start_(start), end_(end), horizon_(horizon) {
  if (horizon < 1) throw ConfigError("beta horizon must be positive");
}

double BetaSchedule::value(long step) const {
  if (step <= 0) return start_;
  if (step >= horizon_) return end_;
  return start_ + (end_ - start_) * static_cast<double>(step) / static_cast<double>(horizon_);
}

PrioritizedBuffer::PrioritizedBuffer(std::size_t capacity, double alpha, double floor)
    : capacity_(capacity), alpha_(alpha), floor_(floor) {
  if (capacity == 0) throw ConfigError("buffer capacity must be positive");
  if (!(floor > 0.0)) throw ConfigError("priority floor must be positive");
  slots_.reserve(capacity);
}

void PrioritizedBuffer::load_demos(std::vector<Transition> demos, bool protect) {
  if (!slots_.empty()) throw std::logic_error("demos must be loaded into an empty buffer");
  if (demos.size() >= capacity_) {
    throw ConfigError("demonstrations must leave room for new transitions");
  }
  for (Transition& t : demos) {
    t.demo = true;
    t.tde = 0.0;
    t.priority = max_priority_;
    priority_sum_ += t.priority;
    slots_.push_back(std::move(t));
  }
  demos_ = slots_.size();
  cursor_ = slots_.size();
  protected_ = protect ? slots_.size() : 0;
}

std::size_t PrioritizedBuffer::push(Transition transition) {
  transition.demo = false;
  transition.priority = max_priority_;
  const std::size_t slot = cursor_;
  if (slot == slots_.size()) {
    slots_.push_back(std::move(transition));
  } else {
    if (slots_[slot].demo) --demos_;
    priority_sum_ -= slots_[slot].priority;
    slots_[slot] = std::move(transition);
  }
  priority_sum_ += slots_[slot].priority;
  cursor_ = slot + 1 == capacity_ ? protected_ : slot + 1;
  return slot;
}

void PrioritizedBuffer::set_priority(std::size_t slot, double p) {
  if (!(p >= floor_)) throw std::logic_error("priority below floor");
  Transition& t = slots_.at(slot);
  priority_sum_ += p - t.priority;
  t.priority = p;
  max_priority_ = std::max(max_priority_, p);
}

double PrioritizedBuffer::mean_priority() const {
  if (slots_.empty()) return 0.0;
  return priority_sum_ / static_cast<double>(slots_.size());
}

std::vector<double> PrioritizedBuffer::probabilities() const {
  std::vector<double> p(slots_.size());
  double total = 0.0;
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    p[k] = std::pow(slots_[k].priority, alpha_);
    total += p[k];
  }
  for (double& v : p) v /= total;
  return p;
}

SampledBatch sample_batch(const PrioritizedBuffer& buffer, std::size_t batch_size,
                          double beta, Rng& rng) {
  if (buffer.size() < batch_size || batch_size == 0) {
    throw std::logic_error("buffer holds fewer transitions than the batch size");
  }
  const std::vector<double> p = buffer.probabilities();
  std::vector<double> cdf(p.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    acc += p[k];
    cdf[k] = acc;
  }
  SampledBatch out;
  out.slots.reserve(batch_size);
  const auto n = static_cast<double>(buffer.size());
  double max_w = 0.0;
  for (std::size_t b = 0; b < batch_size; ++b) {
    const double u = unit_uniform(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    const auto slot = static_cast<std::size_t>(it - cdf.begin());
    out.slots.push_back(slot);
    out.probabilities.push_back(p[slot]);
    const double w = std::pow(1.0 / (n * p[slot]), beta);
    out.weights.push_back(w);
    max_w = std::max(max_w, w);
  }
  for (double& w : out.weights) w /= max_w;
  return out;
}

double margin_loss(std::span<const double> probs, int expert_action, double margin,
                   bool demo) {
  if (!demo) return 0.0;
  const auto e = static_cast<std::size_t>(expert_action);
  double best = probs[e];
  for (std::size_t a = 0; a < probs.size(); ++a) {
    if (a != e) best = std::max(best, probs[a] + margin);
  }
  return best - probs[e];
}

LossResult tlp_actor_loss(const Network& actor, std::span<const TlpPolicyItem> batch,
                          double clip, double margin_weight, double margin) {
  std::vector<PolicyItem> policy;
  policy.reserve(batch.size());
  for (const TlpPolicyItem& item : batch) policy.push_back(item.policy);
  LossResult out = ppo_actor_loss(actor, policy, clip);
  if (batch.empty() || margin_weight == 0.0) return out;

  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const TlpPolicyItem& item : batch) {
    if (!item.demo) continue;
    const ForwardPass pass = actor.forward(item.policy.state);
    const int e = item.policy.action;
    const std::span<const double> probs(pass.output.data(),
                                        static_cast<std::size_t>(pass.output.size()));
    const double j = margin_loss(probs, e, margin, true);
    const double scale = item.policy.weight * margin_weight * inv;
    out.loss += scale * j;
    // Subgradient: the binding alternative gains, the expert action loses.
    int arg = e;
    double best = probs[static_cast<std::size_t>(e)];
    for (int a = 0; a < static_cast<int>(probs.size()); ++a) {
      if (a != e && probs[static_cast<std::size_t>(a)] + margin > best) {
        best = probs[static_cast<std::size_t>(a)] + margin;
        arg = a;
      }
    }
    if (arg == e) continue;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(pass.output.size());
    g(arg) = scale;
    g(e) = -scale;
    out.grads.add(actor.backward(pass, g));
  }
  return out;
}

NStepReturn nstep_return(std::span<const ChainLink> chain, double gamma) {
  if (chain.empty()) throw std::logic_error("empty n-step chain");
  NStepReturn out;
  for (const ChainLink& link : chain) {
    out.tau += link.interarrival;
    out.value += std::pow(gamma, out.tau) * link.reward;
  }
  out.steps = static_cast<int>(chain.size());
  return out;
}

LossResult tlp_critic_loss(const Network& critic, std::span<const TlpValueItem> batch,
                           double nstep_weight, double l2_weight) {
  LossResult out{0.0, critic.zero_gradients()};
  if (batch.empty()) return out;
  const double inv = 1.0 / static_cast<double>(batch.size());
  double weight_mean = 0.0;
  for (const TlpValueItem& item : batch) {
    const ForwardPass pass = critic.forward(item.state);
    const double v = pass.output(0);
    const double e1 = v - item.target;
    const double en = v - item.nstep_target;
    out.loss += item.weight * (e1 * e1 + nstep_weight * en * en) * inv;
    Eigen::VectorXd g(1);
    g(0) = 2.0 * item.weight * (e1 + nstep_weight * en) * inv;
    out.grads.add(critic.backward(pass, g));
    weight_mean += item.weight * inv;
  }
  if (l2_weight != 0.0) {
    const double scale = l2_weight * weight_mean;
    out.loss += scale * critic.weight_norm_squared();
    for (std::size_t l = 0; l < critic.layers().size(); ++l) {
      out.grads.layers[l].weight += 2.0 * scale * critic.layers()[l].weight;
    }
  }
  return out;
}

void write_transfer_csv(std::ostream& out, std::span<const TransferRow> rows) {
  out << kTransferHeader << '\n';
  std::ostringstream line;
  line.precision(12);
  for (const TransferRow& r : rows) {
    line.str("");
    line << r.trial << ',' << r.demo_fraction << ',' << r.beta << ',' << r.mean_priority
         << ',' << r.avg_reward;
    out << line.str() << '\n';
  }
}

TlpAgent::TlpAgent(ActorCritic nets, PrioritizedBuffer buffer, UpdateConfig update,
                   AgentConfig agent, TransferConfig config)
    : nets_(std::move(nets)),
      buffer_(std::move(buffer)),
      update_(update),
      agent_(std::move(agent)),
      config_(config),
      beta_(config.beta_start, config.beta_end, config.beta_horizon),
      chains_(config.nstep) {
  config_.validate();
}

double TlpAgent::beta() const { return beta_.value(decisions_); }

ActionSample TlpAgent::act(std::span<const double> state, Rng& rng) {
  return edgecache::act(nets_.actor, state, rng);
}

void TlpAgent::observe(Transition transition, Rng& rng) {
  tracker_.add(transition.reward);
  const long trial = trial_offset_ + decisions_;
  ++decisions_;
  for (Transition& done : chains_.push(std::move(transition))) {
    buffer_.push(std::move(done));
  }
  if (++since_update_ >= update_.update_period &&
      buffer_.size() >= static_cast<std::size_t>(update_.minibatch)) {
    since_update_ = 0;
    update(rng);
  }
  rows_.push_back({trial,
                   static_cast<double>(buffer_.demo_count()) /
                       static_cast<double>(buffer_.capacity()),
                   beta(), buffer_.mean_priority(), tracker_.average()});
}

void TlpAgent::update(Rng& rng) {
  const Network frozen = nets_.critic;
  const double gamma = update_.gamma;
  const auto batch_size = static_cast<std::size_t>(update_.minibatch);
  std::vector<TlpPolicyItem> policy(batch_size);
  std::vector<TlpValueItem> value(batch_size);
  std::vector<double> tde(batch_size);
  for (int epoch = 0; epoch < update_.epochs; ++epoch) {
    const SampledBatch batch = sample_batch(buffer_, batch_size, beta(), rng);
    for (std::size_t k = 0; k < batch_size; ++k) {
      const Transition& t = buffer_[batch.slots[k]];
      const double v = critic_value(frozen, t.state);
      const double target = value_target(frozen, t, gamma);
      double nstep_target = target;
      if (!t.chain.empty()) {
        const NStepReturn ret = nstep_return(t.chain, gamma);
        nstep_target =
            ret.value + std::pow(gamma, ret.tau) * critic_value(frozen, t.chain_terminal);
      }
      const double w = batch.weights[k];
      policy[k] = {{t.state, t.action, t.behavior_prob, target - v, w}, t.demo};
      value[k] = {t.state, target, nstep_target, w};
      tde[k] = v - target;
    }
    const LossResult actor = tlp_actor_loss(nets_.actor, policy, update_.clip,
                                            config_.margin_weight, config_.margin);
    const LossResult critic =
        tlp_critic_loss(nets_.critic, value, config_.nstep_weight, config_.l2_weight);
    nets_.actor_opt.step(nets_.actor, actor.grads);
    nets_.critic_opt.step(nets_.critic, critic.grads);

    const double avg = tracker_.average();
    for (std::size_t k = 0; k < batch_size; ++k) {
      const std::size_t slot = batch.slots[k];
      buffer_.set_tde(slot, tde[k]);
      buffer_.set_priority(slot, priority(avg, buffer_[slot].reward, tde[k], config_.floor));
    }
  }
  ++rounds_;
}

TlpAgent init_transfer(const PpoAgent& old_agent, TransferConfig config,
                       std::uint64_t actor_seed) {
  config.validate();
  const RingBuffer<Transition>& old = old_agent.buffer();
  if (!old.full()) {
    throw ConfigError("transfer needs a full pre-change buffer (" +
                      std::to_string(old.size()) + " of " +
                      std::to_string(old.capacity()) + " transitions)");
  }
  const AgentConfig& agent = old_agent.agent_config();
  const int width = old_agent.input_width();
  ActorCritic nets{Network(actor_spec(width, agent), mix_seed(actor_seed, 0)),
                   old_agent.networks().critic,
                   {},
                   {}};
  nets.reset_optimizers(agent);

  PrioritizedBuffer buffer(2 * old.capacity(), config.alpha, config.floor);
  buffer.load_demos(old.oldest_first());
  return TlpAgent(std::move(nets), std::move(buffer), old_agent.update_config(), agent,
                  config);
}

}  // namespace edgecache
