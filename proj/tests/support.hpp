#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "edgecache/network.hpp"
#include "edgecache/random.hpp"

namespace testing {

inline std::vector<double> random_vector(edgecache::Rng& rng, std::size_t n,
                                         double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = lo + (hi - lo) * edgecache::unit_uniform(rng);
  return v;
}

// Central-difference gradient of loss(net) with respect to every parameter.
inline std::vector<double> numeric_gradient(
    const edgecache::Network& net,
    const std::function<double(const edgecache::Network&)>& loss, double eps = 1e-5) {
  edgecache::Network probe = net;
  std::vector<double> params = net.flat_parameters();
  std::vector<double> grad(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double keep = params[k];
    params[k] = keep + eps;
    probe.set_flat_parameters(params);
    const double up = loss(probe);
    params[k] = keep - eps;
    probe.set_flat_parameters(params);
    const double down = loss(probe);
    params[k] = keep;
    grad[k] = (up - down) / (2.0 * eps);
  }
  return grad;
}

// ||a - b|| / max(||a||, ||b||); 0 when both vanish.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    diff += (a[k] - b[k]) * (a[k] - b[k]);
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

}  // namespace testing
