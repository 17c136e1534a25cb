#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edgecache/baselines.hpp"
#include "edgecache/catalog.hpp"
#include "edgecache/config.hpp"
#include "edgecache/drift.hpp"
#include "edgecache/environment.hpp"
#include "edgecache/metrics.hpp"
#include "edgecache/ppo.hpp"
#include "edgecache/transfer.hpp"

namespace edgecache {

enum class ChangeKind { None, PopularitySwap, RateChange };
enum class Algorithm { Tlp, Lfs, Dqfd, Qdtrl };

std::string to_string(ChangeKind kind);
std::string to_string(Algorithm algorithm);
ChangeKind parse_change(std::string_view text);
Algorithm parse_algorithm(std::string_view text);
std::vector<Algorithm> parse_algorithms(std::string_view comma_list);

struct ScenarioSpec {
  ChangeKind change = ChangeKind::PopularitySwap;
  int swap_pairs = 1;
  double rate_after = 3.3;
  int files = 10;
  double eta = 1.0;
  AttributeRanges attributes;
  std::optional<std::uint64_t> catalog_seed;  // derived from the run seed when absent
  EnvConfig env;
  long pre_trials = 20000;  // the change follows the last pre-change trial
  long post_trials = 10000;

  long change_trial() const { return pre_trials; }
  long total_trials() const { return pre_trials + post_trials; }
  void validate() const;
};

// Rank i <-> rank F+1-i for i = 1..k; ids are stored in rank order.
std::vector<double> swap_ranks(std::span<const double> probabilities, int pairs);

// Takes effect from the next arrival; cache contents and clock are kept.
void apply_change(CacheEnv& env, const ScenarioSpec& spec);

struct RunConfig {
  ScenarioSpec scenario;
  Algorithm algorithm = Algorithm::Tlp;
  DetectorSuiteConfig detectors;
  UpdateConfig update;
  AgentConfig agent;
  TransferConfig transfer;
  QConfig q;
  PlateauConfig plateau;
  bool adapt = true;  // engage the adaptation on the first trigger
  std::uint64_t seed = 1;

  void validate() const;
};

// Desk-scale scenario: F=10, M=1500, eta=1, lambda=5.
RunConfig desk_config();

// Applies every recognised key on top of `base`; unknown keys are rejected.
RunConfig run_config_from(const ConfigMap& map, RunConfig base = desk_config());

struct RunResult {
  Algorithm algorithm = Algorithm::Tlp;
  std::uint64_t seed = 0;
  long change_trial = 0;
  MetricSeries series;
  std::vector<RequestEvent> trace;
  std::vector<DetectionRow> detection_rows;
  std::vector<DetectionEvent> events;
  std::map<std::string, long> first_trigger;  // per detector
  std::optional<long> detection_trial;        // first trigger after the change
  std::optional<long> adaptation_trial;
  std::vector<TransferRow> transfer_rows;
  std::optional<long> convergence_pre;
  std::optional<long> convergence_post;
  std::optional<double> plateau;
  std::optional<long> recovery_trial;
  std::optional<long> trials_to_recovery;
  double final_avg_reward = 0.0;
  std::uint64_t trace_hash = 0;
};

RunResult run(const RunConfig& config);

// FNV-1a over (trial, time bits, file) of every request.
std::uint64_t trace_hash(std::span<const RequestEvent> trace);

struct SummaryRow {
  std::string kind;  // "run" or "aggregate"
  std::string algorithm;
  std::optional<std::uint64_t> seed;
  std::optional<long> detection_trial;
  std::optional<long> trials_to_recovery;
  std::optional<long> convergence_trial;
  std::optional<double> final_avg_reward;
  std::optional<double> recovery_median;
  std::optional<double> recovery_iqr;
  std::optional<double> detection_median;
  std::optional<double> detection_iqr;
};

inline constexpr const char* kSummaryHeader =
    "kind,algorithm,seed,detection_trial,trials_to_recovery,convergence_trial,"
    "final_avg_reward,trials_to_recovery_median,trials_to_recovery_iqr,"
    "detection_median,detection_iqr";

SummaryRow summary_row(const RunResult& result);
SummaryRow aggregate_row(const std::string& algorithm, std::span<const RunResult> runs);
void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows);

// requests.csv, rewards.csv, detection.csv, summary.csv and (TLP) transfer.csv.
// A RUNNING marker exists while files are written and is replaced by
// COMPLETE at the end; a directory without COMPLETE is not a valid run.
void write_run(const RunResult& result, const std::filesystem::path& dir);
bool run_complete(const std::filesystem::path& dir);

struct SweepResult {
  std::vector<RunResult> runs;
  std::vector<SummaryRow> rows;
};

// Runs every algorithm on every seed. When out is set each run is written to
// out/<algorithm>/seed_<n> and out/summary.csv plus out/rewards.svg are added.
SweepResult sweep(const RunConfig& base, std::span<const std::uint64_t> seeds,
                  std::span<const Algorithm> algorithms,
                  const std::optional<std::filesystem::path>& out = std::nullopt,
                  bool keep_series = true);

}  // namespace edgecache
