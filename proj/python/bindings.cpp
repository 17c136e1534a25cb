#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "edgecache/errors.hpp"
#include "edgecache/harness.hpp"

namespace py = pybind11;
using namespace edgecache;

namespace {

// Overrides use the same keys as the config files.
py::dict run_scenario(const std::map<std::string, std::string>& overrides) {
  ConfigMap map;
  for (const auto& [key, value] : overrides) map.set(key, value);
  const RunConfig config = run_config_from(map);
  map.reject_unused();

  RunResult result;
  {
    py::gil_scoped_release release;
    result = run(config);
  }
  py::dict out;
  out["algorithm"] = to_string(result.algorithm);
  out["seed"] = result.seed;
  out["change_trial"] = result.change_trial;
  out["rewards"] = result.series.rewards();
  out["average_rewards"] = result.series.average_rewards();
  out["first_trigger"] = result.first_trigger;
  out["detection_trial"] = result.detection_trial;
  out["adaptation_trial"] = result.adaptation_trial;
  out["convergence_pre"] = result.convergence_pre;
  out["plateau"] = result.plateau;
  out["recovery_trial"] = result.recovery_trial;
  out["trials_to_recovery"] = result.trials_to_recovery;
  out["final_avg_reward"] = result.final_avg_reward;
  out["trace_hash"] = result.trace_hash;
  return out;
}

PlateauConfig plateau(int window, int hold, double tolerance, double fraction) {
  PlateauConfig c;
  c.window = window;
  c.hold = hold;
  c.tolerance = tolerance;
  c.recovery_fraction = fraction;
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("zipf_probabilities", &zipf_probabilities, py::arg("files"), py::arg("eta"));
  m.def(
      "swap_ranks",
      [](const std::vector<double>& p, int pairs) { return swap_ranks(p, pairs); },
      py::arg("probabilities"), py::arg("pairs"));
  m.def(
      "cosine_similarity",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return cosine_similarity(a, b);
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "kl_divergence",
      [](const std::vector<double>& p, const std::vector<double>& q) {
        return kl_divergence(p, q);
      },
      py::arg("p"), py::arg("q"));
  m.def(
      "trailing_means",
      [](const std::vector<double>& r, int window) { return trailing_means(r, window); },
      py::arg("rewards"), py::arg("window"));
  m.def(
      "convergence_trial",
      [](const std::vector<double>& r, int window, int hold, double tolerance) {
        return convergence_trial(r, plateau(window, hold, tolerance, 0.9));
      },
      py::arg("rewards"), py::arg("window") = 500, py::arg("hold") = 500,
      py::arg("tolerance") = 0.05);
  m.def(
      "recovery_trial",
      [](const std::vector<double>& r, long change, int window, double fraction) {
        return recovery_trial(r, change, plateau(window, 1, 0.05, fraction));
      },
      py::arg("rewards"), py::arg("change"), py::arg("window") = 500,
      py::arg("fraction") = 0.9);
  m.def("run", &run_scenario, py::arg("overrides") = std::map<std::string, std::string>{},
        "Runs one scenario on the desk configuration with key=value overrides.");
}
