// Command-line front end: run, sweep, detect, plot and trace.
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "edgecache/config.hpp"
#include "edgecache/errors.hpp"
#include "edgecache/harness.hpp"
#include "edgecache/plot.hpp"

namespace fs = std::filesystem;
using namespace edgecache;

namespace {

fs::path output_root() {
  const char* env = std::getenv("EDGECACHE_OUT");
  return env && *env ? fs::path(env) : fs::path("runs");
}

ConfigMap load_config(const std::string& path, const std::vector<std::string>& overrides) {
  ConfigMap map = path.empty() ? ConfigMap{} : ConfigMap::load(path);
  for (const std::string& s : overrides) map.set(std::string_view(s));
  return map;
}

std::string show(const std::optional<long>& v) { return v ? std::to_string(*v) : "-"; }

void print_run(const RunResult& r) {
  std::cout << to_string(r.algorithm) << " seed " << r.seed << ": detection "
            << show(r.detection_trial) << ", adaptation " << show(r.adaptation_trial)
            << ", convergence " << show(r.convergence_pre) << ", recovery "
            << show(r.trials_to_recovery) << " trials, final avg reward "
            << r.final_avg_reward << '\n';
}

std::vector<RequestEvent> generate_trace(const RunConfig& config, std::uint64_t seed) {
  const ScenarioSpec& s = config.scenario;
  RequestStream stream(build_catalog(s.files, s.eta, s.attributes,
                                     s.catalog_seed.value_or(mix_seed(seed, 10))),
                       s.env.rate, mix_seed(seed, 11));
  std::vector<RequestEvent> trace;
  for (long k = 1; k <= s.total_trials(); ++k) {
    if (k == s.change_trial() + 1) {
      if (s.change == ChangeKind::PopularitySwap) {
        stream.set_probabilities(swap_ranks(stream.catalog().probabilities(), s.swap_pairs));
      } else if (s.change == ChangeKind::RateChange) {
        stream.set_rate(s.rate_after);
      }
    }
    trace.push_back(stream.next());
  }
  return trace;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge cache admission with drift detection and transfer"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  std::string out;

  auto* run_cmd = app.add_subcommand("run", "Run one scenario for one algorithm");
  run_cmd->add_option("--config", config_path, "key = value config file");
  run_cmd->add_option("--seed", seed, "run seed");
  run_cmd->add_option("--out", out, "output directory");
  run_cmd->add_option("--set", overrides, "override, key=value")->take_all();

  int seed_count = 5;
  std::uint64_t first_seed = 1;
  std::string algorithms = "tlp,lfs,dqfd,qdtrl";
  auto* sweep_cmd = app.add_subcommand("sweep", "Run several algorithms over several seeds");
  sweep_cmd->add_option("--config", config_path, "key = value config file");
  sweep_cmd->add_option("--seeds", seed_count, "number of seeds")->check(CLI::Range(2, 100000));
  sweep_cmd->add_option("--first-seed", first_seed, "first seed of the range");
  sweep_cmd->add_option("--algorithms", algorithms, "comma separated list");
  sweep_cmd->add_option("--out", out, "output directory");
  sweep_cmd->add_option("--set", overrides, "override, key=value")->take_all();

  std::string trace_path;
  int files = 0;
  auto* detect_cmd = app.add_subcommand("detect", "Replay a request trace through the detectors");
  detect_cmd->add_option("--trace", trace_path, "requests.csv")->required();
  detect_cmd->add_option("--config", config_path, "key = value config file");
  detect_cmd->add_option("--files", files, "catalog size (default: largest id in the trace)");
  detect_cmd->add_option("--out", out, "detection.csv to write");
  detect_cmd->add_option("--set", overrides, "override, key=value")->take_all();

  std::string in_dir;
  auto* plot_cmd = app.add_subcommand("plot", "Render average-reward curves found below a directory");
  plot_cmd->add_option("--in", in_dir, "directory with rewards.csv files")->required();
  plot_cmd->add_option("--out", out, "SVG file")->required();

  auto* trace_cmd = app.add_subcommand("trace", "Write a synthetic request trace");
  trace_cmd->add_option("--config", config_path, "key = value config file");
  trace_cmd->add_option("--seed", seed, "seed");
  trace_cmd->add_option("--out", out, "requests.csv to write")->required();
  trace_cmd->add_option("--set", overrides, "override, key=value")->take_all();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      ConfigMap map = load_config(config_path, overrides);
      RunConfig config = run_config_from(map);
      if (run_cmd->count("--seed")) config.seed = seed;
      const fs::path dir = out.empty() ? output_root() / (to_string(config.algorithm) + "_seed" +
                                                          std::to_string(config.seed))
                                       : fs::path(out);
      const RunResult r = run(config);
      write_run(r, dir);
      print_run(r);
      std::cout << "wrote " << dir.string() << '\n';
    } else if (*sweep_cmd) {
      ConfigMap map = load_config(config_path, overrides);
      const RunConfig config = run_config_from(map);
      std::vector<std::uint64_t> seeds(static_cast<std::size_t>(seed_count));
      std::iota(seeds.begin(), seeds.end(), first_seed);
      const fs::path dir = out.empty() ? output_root() / "sweep" : fs::path(out);
      const SweepResult s = sweep(config, seeds, parse_algorithms(algorithms), dir, false);
      for (const RunResult& r : s.runs) print_run(r);
      write_summary_csv(std::cout, s.rows);
      std::cout << "wrote " << dir.string() << '\n';
    } else if (*detect_cmd) {
      ConfigMap map = load_config(config_path, overrides);
      const RunConfig config = run_config_from(map);
      std::ifstream in(trace_path);
      if (!in) throw std::runtime_error("cannot read " + trace_path);
      const std::vector<RequestEvent> trace = read_trace_csv(in);
      int catalog = files;
      if (catalog == 0) {
        for (const RequestEvent& e : trace) catalog = std::max(catalog, e.file + 1);
      }
      const ReplayResult result = replay_trace(config.detectors, catalog, trace);
      for (const DetectionEvent& e : result.events) {
        std::cout << e.detector << " triggered at trial " << e.trial << " (statistic "
                  << e.statistic << ")\n";
      }
      if (result.events.empty()) std::cout << "no detection events\n";
      if (!out.empty()) {
        std::ofstream file(out);
        if (!file) throw std::runtime_error("cannot write " + out);
        write_detection_csv(file, result.rows);
      }
    } else if (*plot_cmd) {
      const std::vector<PlotSeries> series = load_reward_series(in_dir);
      std::ofstream file(out, std::ios::binary);
      if (!file) throw std::runtime_error("cannot write " + out);
      file << render_svg(series);
      std::cout << "wrote " << out << " (" << series.size() << " series)\n";
    } else if (*trace_cmd) {
      ConfigMap map = load_config(config_path, overrides);
      const RunConfig config = run_config_from(map);
      std::ofstream file(out);
      if (!file) throw std::runtime_error("cannot write " + out);
      write_trace_csv(file, generate_trace(config, trace_cmd->count("--seed") ? seed : config.seed));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
