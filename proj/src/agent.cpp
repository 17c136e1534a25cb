#include "edgecache/agent.hpp"

#include <ostream>
#include <sstream>

namespace edgecache {

ChainBuilder::ChainBuilder(int horizon) : horizon_(horizon) {
  if (horizon < 1) throw std::invalid_argument("n-step horizon must be >= 1");
}

std::vector<Transition> ChainBuilder::push(Transition transition) {
  const ChainLink link{transition.reward, transition.interarrival};
  for (Transition& p : pending_) {
    p.chain.push_back(link);
    p.chain_terminal = transition.next_state;
  }
  transition.chain.assign(1, link);
  transition.chain_terminal = transition.next_state;
  pending_.push_back(std::move(transition));

  std::vector<Transition> done;
  while (!pending_.empty() &&
         pending_.front().chain.size() >= static_cast<std::size_t>(horizon_)) {
    done.push_back(std::move(pending_.front()));
    pending_.pop_front();
  }
  return done;
}

std::vector<Transition> ChainBuilder::flush() {
  std::vector<Transition> done(std::make_move_iterator(pending_.begin()),
                               std::make_move_iterator(pending_.end()));
  pending_.clear();
  return done;
}

ActionSample UniformRandomAgent::act(std::span<const double>, Rng& rng) {
  return {unit_uniform(rng) < 0.5 ? 0 : 1, 0.5};
}

void MetricSeries::record(long trial, double time, int action, bool hit,
                          double reward) {
  sum_ += reward;
  TrialRecord rec{trial, time, action, hit, reward,
                  sum_ / static_cast<double>(records_.size() + 1)};
  records_.push_back(rec);
}

std::vector<double> MetricSeries::rewards() const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.reward);
  return out;
}

std::vector<double> MetricSeries::average_rewards() const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.avg_reward);
  return out;
}

void MetricSeries::write_csv(std::ostream& out, const std::string& algorithm) const {
  out << kRewardsHeader << '\n';
  std::ostringstream line;
  line.precision(12);
  for (const auto& r : records_) {
    line.str("");
    line << r.trial << ',' << r.time << ',' << r.action << ',' << (r.hit ? 1 : 0)
         << ',' << r.reward << ',' << r.avg_reward << ',' << algorithm;
    out << line.str() << '\n';
  }
}

void run_trials(CacheEnv& env, Agent& agent, long trials, Rng& rng,
                MetricSeries& metrics) {
  for (long k = 0; k < trials; ++k) {
    Transition t;
    t.state = env.observation();
    const long trial = env.trial();
    const double time = env.now();
    const ActionSample sample = agent.act(t.state, rng);
    const StepResult step = env.step(sample.action);
    t.action = sample.action;
    t.behavior_prob = sample.probability;
    t.reward = step.reward;
    t.interarrival = step.interarrival;
    t.next_state = env.observation();
    metrics.record(trial, time, sample.action, step.hit, step.reward);
    agent.observe(std::move(t), rng);
  }
}

}  // namespace edgecache
