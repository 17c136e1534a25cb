#include "edgecache/harness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "edgecache/errors.hpp"
#include "edgecache/plot.hpp"

namespace edgecache {

namespace fs = std::filesystem;

std::string to_string(ChangeKind kind) {
  switch (kind) {
    case ChangeKind::None: return "none";
    case ChangeKind::PopularitySwap: return "popularity_swap";
    case ChangeKind::RateChange: return "rate_change";
  }
  return "none";
}

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Tlp: return "tlp";
    case Algorithm::Lfs: return "lfs";
    case Algorithm::Dqfd: return "dqfd";
    case Algorithm::Qdtrl: return "qdtrl";
  }
  return "tlp";
}

ChangeKind parse_change(std::string_view text) {
  if (text == "none") return ChangeKind::None;
  if (text == "popularity_swap") return ChangeKind::PopularitySwap;
  if (text == "rate_change") return ChangeKind::RateChange;
  throw ConfigError("unknown change kind: " + std::string(text));
}

Algorithm parse_algorithm(std::string_view text) {
  if (text == "tlp") return Algorithm::Tlp;
  if (text == "lfs") return Algorithm::Lfs;
  if (text == "dqfd") return Algorithm::Dqfd;
  if (text == "qdtrl") return Algorithm::Qdtrl;
  throw ConfigError("unknown algorithm: " + std::string(text));
}

std::vector<Algorithm> parse_algorithms(std::string_view comma_list) {
  std::vector<Algorithm> out;
  while (!comma_list.empty()) {
    const auto comma = comma_list.find(',');
    const std::string_view item = comma_list.substr(0, comma);
    if (!item.empty()) out.push_back(parse_algorithm(item));
    if (comma == std::string_view::npos) break;
    comma_list.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError("no algorithms given");
  return out;
}

void ScenarioSpec::validate() const {
  if (files < 2) throw ConfigError("catalog needs at least two files");
  if (eta < 0.0 || eta > 1.0) throw ConfigError("Zipf exponent must lie in [0, 1]");
  if (change == ChangeKind::PopularitySwap && (swap_pairs < 1 || swap_pairs > files / 2)) {
    throw ConfigError("swap pairs must lie in [1, F/2]");
  }
  if (change == ChangeKind::RateChange && !(rate_after > 0.0)) {
    throw ConfigError("post-change rate must be positive");
  }
  if (!(env.capacity > 0.0) || !(env.rate > 0.0)) {
    throw ConfigError("cache capacity and request rate must be positive");
  }
  if (pre_trials < 1 || post_trials < 0) throw ConfigError("trial counts out of range");
}

std::vector<double> swap_ranks(std::span<const double> probabilities, int pairs) {
  const auto n = static_cast<int>(probabilities.size());
  if (pairs < 1 || pairs > n / 2) throw ConfigError("swap pairs must lie in [1, F/2]");
  std::vector<double> out(probabilities.begin(), probabilities.end());
  for (int i = 0; i < pairs; ++i) {
    std::swap(out[static_cast<std::size_t>(i)], out[static_cast<std::size_t>(n - 1 - i)]);
  }
  return out;
}

void apply_change(CacheEnv& env, const ScenarioSpec& spec) {
  switch (spec.change) {
    case ChangeKind::None: return;
    case ChangeKind::PopularitySwap:
      env.set_probabilities(swap_ranks(env.catalog().probabilities(), spec.swap_pairs));
      return;
    case ChangeKind::RateChange: env.set_rate(spec.rate_after); return;
  }
}

void RunConfig::validate() const {
  scenario.validate();
  transfer.validate();
  q.validate();
  plateau.validate();
  if (update.buffer_capacity < update.minibatch) {
    throw ConfigError("buffer capacity must hold at least one minibatch");
  }
}

RunConfig desk_config() {
  RunConfig c;
  c.scenario.files = 10;
  c.scenario.eta = 1.0;
  c.scenario.env.capacity = 1500.0;
  c.scenario.env.rate = 5.0;
  c.scenario.swap_pairs = 2;
  c.detectors.popularity.threshold = 0.5;
  c.detectors.popularity.similarity_window = 1;
  c.detectors.rate.window = 500;
  c.detectors.reference_trials = 2000;
  return c;
}

namespace {

std::vector<int> parse_widths(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("bad hidden layer width: " + item);
    }
    if (out.back() < 1) throw ConfigError("hidden layer widths must be positive");
  }
  return out;
}

std::string join_widths(const std::vector<int>& widths) {
  std::string out;
  for (int w : widths) out += (out.empty() ? "" : ",") + std::to_string(w);
  return out;
}

WindowAlignment parse_alignment(const std::string& text) {
  if (text == "adjacent") return WindowAlignment::Adjacent;
  if (text == "shifted") return WindowAlignment::Shifted;
  throw ConfigError("unknown window alignment: " + text);
}

std::string alignment_name(WindowAlignment a) {
  return a == WindowAlignment::Adjacent ? "adjacent" : "shifted";
}

int to_int(long v, const char* key) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(std::string("key ") + key + " out of range");
  }
  return static_cast<int>(v);
}

}  // namespace

RunConfig run_config_from(const ConfigMap& m, RunConfig c) {
  ScenarioSpec& s = c.scenario;
  s.change = parse_change(m.get_string("scenario.change", to_string(s.change)));
  s.swap_pairs = to_int(m.get_long("scenario.swap_pairs", s.swap_pairs), "scenario.swap_pairs");
  s.rate_after = m.get_double("scenario.rate_after", s.rate_after);
  s.pre_trials = m.get_long("scenario.pre_trials", s.pre_trials);
  s.post_trials = m.get_long("scenario.post_trials", s.post_trials);
  s.files = to_int(m.get_long("catalog.files", s.files), "catalog.files");
  s.eta = m.get_double("catalog.eta", s.eta);
  if (m.has("catalog.seed")) s.catalog_seed = m.get_u64("catalog.seed", 0);
  s.attributes.lifetime.lo = m.get_double("catalog.lifetime_min", s.attributes.lifetime.lo);
  s.attributes.lifetime.hi = m.get_double("catalog.lifetime_max", s.attributes.lifetime.hi);
  s.attributes.importance.lo =
      m.get_double("catalog.importance_min", s.attributes.importance.lo);
  s.attributes.importance.hi =
      m.get_double("catalog.importance_max", s.attributes.importance.hi);
  s.attributes.size.lo = m.get_double("catalog.size_min", s.attributes.size.lo);
  s.attributes.size.hi = m.get_double("catalog.size_max", s.attributes.size.hi);
  s.env.capacity = m.get_double("env.capacity", s.env.capacity);
  s.env.rate = m.get_double("env.rate", s.env.rate);
  s.env.popularity_window =
      to_int(m.get_long("env.popularity_window", s.env.popularity_window),
             "env.popularity_window");
  s.env.observe_pending = m.get_bool("env.observe_pending", s.env.observe_pending);
  s.env.weights.utility = m.get_double("reward.utility_weight", s.env.weights.utility);
  s.env.weights.memory = m.get_double("reward.memory_weight", s.env.weights.memory);

  c.algorithm = parse_algorithm(m.get_string("algorithm", to_string(c.algorithm)));
  c.seed = m.get_u64("seed", c.seed);
  c.adapt = m.get_bool("adapt", c.adapt);

  DetectorSuiteConfig& d = c.detectors;
  d.use_rate = m.get_bool("detect.rate", d.use_rate);
  d.use_popularity = m.get_bool("detect.popularity", d.use_popularity);
  d.use_kl = m.get_bool("detect.kl", d.use_kl);
  d.rate.window = to_int(m.get_long("rate.window", d.rate.window), "rate.window");
  d.rate.threshold = m.get_double("rate.threshold", d.rate.threshold);
  d.rate.persistence =
      to_int(m.get_long("rate.persistence", d.rate.persistence), "rate.persistence");
  if (m.has("rate.reference")) d.rate_reference = m.get_double("rate.reference", 0.0);
  d.reference_trials = m.get_long("rate.reference_trials", d.reference_trials);
  d.popularity.window =
      to_int(m.get_long("popularity.window", d.popularity.window), "popularity.window");
  d.popularity.threshold = m.get_double("popularity.threshold", d.popularity.threshold);
  d.popularity.similarity_window =
      to_int(m.get_long("popularity.similarity_window", d.popularity.similarity_window),
             "popularity.similarity_window");
  d.popularity.alignment = parse_alignment(
      m.get_string("popularity.alignment", alignment_name(d.popularity.alignment)));
  d.kl.window = to_int(m.get_long("kl.window", d.kl.window), "kl.window");
  d.kl.threshold = m.get_double("kl.threshold", d.kl.threshold);
  d.kl.smoothing = m.get_double("kl.smoothing", d.kl.smoothing);
  d.kl.alignment = parse_alignment(m.get_string("kl.alignment", alignment_name(d.kl.alignment)));

  UpdateConfig& u = c.update;
  u.gamma = m.get_double("ppo.gamma", u.gamma);
  u.clip = m.get_double("ppo.clip", u.clip);
  u.update_period = to_int(m.get_long("ppo.update_period", u.update_period), "ppo.update_period");
  u.epochs = to_int(m.get_long("ppo.epochs", u.epochs), "ppo.epochs");
  u.minibatch = to_int(m.get_long("ppo.minibatch", u.minibatch), "ppo.minibatch");
  u.buffer_capacity = to_int(m.get_long("ppo.buffer", u.buffer_capacity), "ppo.buffer");
  u.entropy_coef = m.get_double("ppo.entropy", u.entropy_coef);
  c.agent.hidden = parse_widths(m.get_string("net.hidden", join_widths(c.agent.hidden)));
  c.agent.actor_lr = m.get_double("ppo.actor_lr", c.agent.actor_lr);
  c.agent.critic_lr = m.get_double("ppo.critic_lr", c.agent.critic_lr);
  c.agent.nstep = to_int(m.get_long("ppo.nstep", c.agent.nstep), "ppo.nstep");

  TransferConfig& t = c.transfer;
  t.margin_weight = m.get_double("tlp.margin_weight", t.margin_weight);
  t.nstep_weight = m.get_double("tlp.nstep_weight", t.nstep_weight);
  t.l2_weight = m.get_double("tlp.l2_weight", t.l2_weight);
  t.margin = m.get_double("tlp.margin", t.margin);
  t.nstep = to_int(m.get_long("tlp.nstep", t.nstep), "tlp.nstep");
  t.alpha = m.get_double("tlp.alpha", t.alpha);
  t.beta_start = m.get_double("tlp.beta_start", t.beta_start);
  t.beta_end = m.get_double("tlp.beta_end", t.beta_end);
  t.beta_horizon = m.get_long("tlp.beta_horizon", t.beta_horizon);
  t.floor = m.get_double("tlp.floor", t.floor);

  QConfig& q = c.q;
  q.learning_rate = m.get_double("q.lr", q.learning_rate);
  q.epsilon_start = m.get_double("q.epsilon_start", q.epsilon_start);
  q.epsilon_end = m.get_double("q.epsilon_end", q.epsilon_end);
  q.epsilon_horizon = m.get_long("q.epsilon_horizon", q.epsilon_horizon);
  q.target_sync = m.get_long("q.target_sync", q.target_sync);
  q.margin_weight = m.get_double("q.margin_weight", q.margin_weight);
  q.nstep_weight = m.get_double("q.nstep_weight", q.nstep_weight);
  q.l2_weight = m.get_double("q.l2_weight", q.l2_weight);
  q.margin = m.get_double("q.margin", q.margin);
  q.pretrain_steps = to_int(m.get_long("q.pretrain_steps", q.pretrain_steps), "q.pretrain_steps");
  q.prior_weight = m.get_double("q.prior_weight", q.prior_weight);

  PlateauConfig& p = c.plateau;
  p.window = to_int(m.get_long("metrics.window", p.window), "metrics.window");
  p.tolerance = m.get_double("metrics.tolerance", p.tolerance);
  p.hold = to_int(m.get_long("metrics.hold", p.hold), "metrics.hold");
  p.recovery_fraction = m.get_double("metrics.recovery_fraction", p.recovery_fraction);

  m.reject_unused();
  c.validate();
  return c;
}

std::uint64_t trace_hash(std::span<const RequestEvent> trace) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::uint64_t v) {
    for (int k = 0; k < 8; ++k) {
      h ^= (v >> (8 * k)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  for (const RequestEvent& e : trace) {
    mix(static_cast<std::uint64_t>(e.trial));
    mix(std::bit_cast<std::uint64_t>(e.time));
    mix(static_cast<std::uint64_t>(e.file));
  }
  return h;
}

RunResult run(const RunConfig& config) {
  config.validate();
  const ScenarioSpec& spec = config.scenario;
  const std::uint64_t seed = config.seed;

  const std::uint64_t catalog_seed = spec.catalog_seed.value_or(mix_seed(seed, 10));
  CacheEnv env(build_catalog(spec.files, spec.eta, spec.attributes, catalog_seed), spec.env,
               mix_seed(seed, 11));
  Rng rng(mix_seed(seed, 13));
  const int width = env.observation_width();
  const std::uint64_t agent_seed = mix_seed(seed, 12);
  const std::uint64_t adapt_seed = mix_seed(seed, 14);

  std::unique_ptr<PpoAgent> ppo;
  std::unique_ptr<DdqnAgent> ddqn;
  std::unique_ptr<Agent> adapted;
  TlpAgent* tlp = nullptr;
  Agent* agent = nullptr;
  if (config.algorithm == Algorithm::Tlp || config.algorithm == Algorithm::Lfs) {
    ppo = std::make_unique<PpoAgent>(width, config.update, config.agent, agent_seed);
    agent = ppo.get();
  } else {
    ddqn = std::make_unique<DdqnAgent>(width, config.update, config.agent, config.q, agent_seed);
    agent = ddqn.get();
  }

  DetectorSuite detectors(config.detectors, spec.files);
  RunResult result;
  result.algorithm = config.algorithm;
  result.seed = seed;
  result.change_trial = spec.change_trial();

  const long total = spec.total_trials();
  for (long k = 1; k <= total; ++k) {
    const RequestEvent event = env.pending();
    for (const DetectionEvent& e : detectors.observe(event)) {
      result.first_trigger.try_emplace(e.detector, e.trial);
      if (e.trial > spec.change_trial() && !result.detection_trial) {
        result.detection_trial = e.trial;
      }
      if (!config.adapt || result.adaptation_trial) continue;
      // Triggers that arrive before the pre-change agent has a full buffer
      // are logged but cannot engage an adaptation.
      if (!(ppo ? ppo->buffer().full() : ddqn->buffer().full())) {
        detectors.rearm();
        continue;
      }
      switch (config.algorithm) {
        case Algorithm::Tlp:
          adapted = std::make_unique<TlpAgent>(init_transfer(*ppo, config.transfer, adapt_seed));
          tlp = static_cast<TlpAgent*>(adapted.get());
          tlp->set_trial_offset(event.trial);
          break;
        case Algorithm::Lfs:
          adapted = std::make_unique<PpoAgent>(lfs_reset(*ppo, adapt_seed));
          break;
        case Algorithm::Dqfd:
          adapted = std::make_unique<DqfdAgent>(*ddqn, config.q, config.transfer, rng);
          break;
        case Algorithm::Qdtrl:
          adapted = std::make_unique<QdtrlAgent>(*ddqn, config.q, adapt_seed);
          break;
      }
      agent = adapted.get();
      result.adaptation_trial = e.trial;
      detectors.rearm();
    }
    if (k == spec.change_trial()) apply_change(env, spec);

    Transition t;
    t.state = env.observation();
    const ActionSample sample = agent->act(t.state, rng);
    const StepResult step = env.step(sample.action);
    t.action = sample.action;
    t.behavior_prob = sample.probability;
    t.reward = step.reward;
    t.interarrival = step.interarrival;
    t.next_state = env.observation();
    result.series.record(event.trial, event.time, sample.action, step.hit, step.reward);
    agent->observe(std::move(t), rng);
  }

  result.trace = env.trace();
  result.trace.resize(static_cast<std::size_t>(total));
  result.trace_hash = trace_hash(result.trace);
  result.detection_rows = detectors.rows();
  result.events = detectors.events();
  if (tlp) result.transfer_rows = tlp->rows();

  const std::vector<double> rewards = result.series.rewards();
  const std::span<const double> all(rewards);
  const long change = spec.change_trial();
  result.convergence_pre = convergence_trial(all.first(static_cast<std::size_t>(change)),
                                             config.plateau);
  if (spec.post_trials > 0) {
    if (auto c = convergence_trial(all.subspan(static_cast<std::size_t>(change)),
                                   config.plateau)) {
      result.convergence_post = change + *c;
    }
    result.plateau = pre_change_plateau(all, change, config.plateau.window);
    result.recovery_trial = edgecache::recovery_trial(all, change, config.plateau);
    if (result.recovery_trial) result.trials_to_recovery = *result.recovery_trial - change;
  }
  result.final_avg_reward = result.series.empty() ? 0.0 : result.series.records().back().avg_reward;
  return result;
}

SummaryRow summary_row(const RunResult& r) {
  SummaryRow row;
  row.kind = "run";
  row.algorithm = to_string(r.algorithm);
  row.seed = r.seed;
  row.detection_trial = r.detection_trial;
  row.trials_to_recovery = r.trials_to_recovery;
  row.convergence_trial = r.convergence_pre;
  row.final_avg_reward = r.final_avg_reward;
  return row;
}

SummaryRow aggregate_row(const std::string& algorithm, std::span<const RunResult> runs) {
  SummaryRow row;
  row.kind = "aggregate";
  row.algorithm = algorithm;
  if (runs.empty()) return row;
  std::vector<std::optional<double>> recovery;
  std::vector<std::optional<double>> detection;
  double reward = 0.0;
  for (const RunResult& r : runs) {
    recovery.push_back(r.trials_to_recovery ? std::optional<double>(*r.trials_to_recovery)
                                            : std::nullopt);
    detection.push_back(r.detection_trial ? std::optional<double>(*r.detection_trial)
                                          : std::nullopt);
    reward += r.final_avg_reward;
  }
  const Spread rs = spread(recovery);
  const Spread ds = spread(detection);
  row.recovery_median = rs.median;
  row.recovery_iqr = rs.iqr;
  row.detection_median = ds.median;
  row.detection_iqr = ds.iqr;
  row.final_avg_reward = reward / static_cast<double>(runs.size());
  return row;
}

namespace {

template <typename T>
std::string field(const std::optional<T>& v) {
  if (!v) return "";
  std::ostringstream out;
  out.precision(12);
  out << *v;
  return out.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
  out << kSummaryHeader << '\n';
  for (const SummaryRow& r : rows) {
    out << r.kind << ',' << r.algorithm << ',' << field(r.seed) << ','
        << field(r.detection_trial) << ',' << field(r.trials_to_recovery) << ','
        << field(r.convergence_trial) << ',' << field(r.final_avg_reward) << ','
        << field(r.recovery_median) << ',' << field(r.recovery_iqr) << ','
        << field(r.detection_median) << ',' << field(r.detection_iqr) << '\n';
  }
}

void write_run(const RunResult& result, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  fs::remove(dir / "COMPLETE", ec);
  write_file(dir / "RUNNING", "");

  std::ostringstream text;
  write_trace_csv(text, result.trace);
  write_file(dir / "requests.csv", text.str());

  text.str("");
  result.series.write_csv(text, to_string(result.algorithm));
  write_file(dir / "rewards.csv", text.str());

  text.str("");
  write_detection_csv(text, result.detection_rows);
  write_file(dir / "detection.csv", text.str());

  if (result.algorithm == Algorithm::Tlp) {
    text.str("");
    write_transfer_csv(text, result.transfer_rows);
    write_file(dir / "transfer.csv", text.str());
  }

  text.str("");
  const SummaryRow row = summary_row(result);
  write_summary_csv(text, std::span(&row, 1));
  write_file(dir / "summary.csv", text.str());

  fs::remove(dir / "RUNNING", ec);
  write_file(dir / "COMPLETE", "");
}

bool run_complete(const fs::path& dir) {
  return fs::exists(dir / "COMPLETE") && !fs::exists(dir / "RUNNING");
}

SweepResult sweep(const RunConfig& base, std::span<const std::uint64_t> seeds,
                  std::span<const Algorithm> algorithms, const std::optional<fs::path>& out,
                  bool keep_series) {
  if (seeds.size() < 2) throw ConfigError("a sweep needs at least two seeds");
  SweepResult result;
  for (Algorithm algorithm : algorithms) {
    std::vector<RunResult> runs;
    for (std::uint64_t seed : seeds) {
      RunConfig config = base;
      config.algorithm = algorithm;
      config.seed = seed;
      RunResult r = run(config);
      if (out) write_run(r, *out / to_string(algorithm) / ("seed_" + std::to_string(seed)));
      result.rows.push_back(summary_row(r));
      if (!keep_series) {
        r.series = MetricSeries{};
        r.trace.clear();
        r.detection_rows.clear();
        r.transfer_rows.clear();
      }
      runs.push_back(std::move(r));
    }
    result.rows.push_back(aggregate_row(to_string(algorithm), runs));
    for (RunResult& r : runs) result.runs.push_back(std::move(r));
  }
  if (out) {
    std::ostringstream text;
    write_summary_csv(text, result.rows);
    write_file(*out / "summary.csv", text.str());
    write_file(*out / "rewards.svg", render_svg(load_reward_series(*out)));
  }
  return result;
}

}  // namespace edgecache
