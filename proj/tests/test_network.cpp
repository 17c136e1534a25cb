#include <doctest.h>

#include <cmath>

#include "edgecache/errors.hpp"
#include "edgecache/network.hpp"
#include "support.hpp"

using namespace edgecache;

namespace {

GradientSet uniform_gradient(const Network& net, const std::vector<double>& flat) {
  GradientSet g = net.zero_gradients();
  std::size_t pos = 0;
  for (auto& layer : g.layers) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = flat[pos++];
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = flat[pos++];
  }
  return g;
}

}  // namespace

TEST_SUITE("network") {

TEST_CASE("initialisation ranges and determinism") {
  const NetworkSpec spec{{71, 64, 64, 2}, Head::Softmax};
  const Network a(spec, 42), b(spec, 42), c(spec, 43);
  CHECK(a.parameter_count() == 71u * 64 + 64 + 64 * 64 + 64 + 64 * 2 + 2);
  for (const auto& layer : a.layers()) {
    CHECK(layer.weight.minCoeff() >= -0.1);
    CHECK(layer.weight.maxCoeff() <= 0.1);
    CHECK((layer.bias.array() == 0.1).all());
  }
  CHECK(a.flat_parameters() == b.flat_parameters());
  CHECK(a.flat_parameters() != c.flat_parameters());
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(Network(NetworkSpec{{4, 2}, Head::Linear}, 1), std::invalid_argument);
  CHECK_THROWS_AS(Network(NetworkSpec{{4, 0, 2}, Head::Linear}, 1), std::invalid_argument);
  const Network net(NetworkSpec{{3, 4, 1}, Head::Linear}, 1);
  const std::vector<double> wrong(4, 0.0);
  CHECK_THROWS_AS(net.forward(wrong), std::logic_error);
}

TEST_CASE("softmax head is a distribution and stable for large logits") {
  Eigen::VectorXd logits(2);
  logits << 1000.0, -1000.0;
  const Eigen::VectorXd p = softmax(logits);
  CHECK(p(0) == 1.0);
  CHECK(p(1) < 1e-300);
  logits << 10.0, -10.0;
  CHECK(softmax(logits)(0) == doctest::Approx(1.0 / (1.0 + std::exp(-20.0))).epsilon(1e-14));

  Rng rng(5);
  const Network net(NetworkSpec{{6, 8, 8, 3}, Head::Softmax}, 9);
  for (int k = 0; k < 100; ++k) {
    const auto x = testing::random_vector(rng, 6, -5.0, 5.0);
    const Eigen::VectorXd out = net.evaluate(x);
    CHECK(out.sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(out.minCoeff() >= 0.0);
  }
}

TEST_CASE("forward pass matches a hand-built evaluation") {
  const Network net(NetworkSpec{{3, 5, 2}, Head::Linear}, 11);
  const std::vector<double> x{0.3, -0.7, 0.2};
  Eigen::Vector3d v(0.3, -0.7, 0.2);
  const auto& L = net.layers();
  const Eigen::VectorXd h = (L[0].weight * v + L[0].bias).cwiseMax(0.0);
  const Eigen::VectorXd y = L[1].weight * h + L[1].bias;
  CHECK((net.evaluate(x) - y).norm() < 1e-15);
}

TEST_CASE("backward agrees with central differences") {
  Rng rng(17);
  for (Head head : {Head::Softmax, Head::Linear}) {
    const Network net(NetworkSpec{{7, 12, 9, 3}, head}, 23);
    const auto x = testing::random_vector(rng, 7);
    Eigen::VectorXd w(3);
    w << 0.7, -1.3, 0.4;
    auto loss = [&](const Network& n) { return n.evaluate(x).dot(w); };
    const auto analytic = net.backward(net.forward(x), w).flatten();
    const auto numeric = testing::numeric_gradient(net, loss);
    CHECK(testing::relative_error(analytic, numeric) < 1e-6);
  }
}

TEST_CASE("dead rectifiers pass no gradient") {
  Network net(NetworkSpec{{2, 3, 1}, Head::Linear}, 1);
  auto& layers = net.mutable_layers();
  layers[0].weight.setZero();
  layers[0].bias << -1.0, 0.5, -2.0;
  const std::vector<double> x{1.0, 1.0};
  Eigen::VectorXd g(1);
  g << 1.0;
  const GradientSet grads = net.backward(net.forward(x), g);
  CHECK(grads.layers[0].weight.row(0).norm() == 0.0);
  CHECK(grads.layers[0].weight.row(2).norm() == 0.0);
  CHECK(grads.layers[0].bias(0) == 0.0);
  CHECK(grads.layers[0].bias(1) != 0.0);
  CHECK(grads.layers[1].weight(0, 0) == 0.0);
  CHECK(grads.layers[1].weight(0, 1) == 0.5);
}

TEST_CASE("zero output gradient gives zero parameter gradient") {
  const Network net(NetworkSpec{{4, 6, 2}, Head::Softmax}, 3);
  const std::vector<double> x{0.1, 0.2, 0.3, 0.4};
  const auto g = net.backward(net.forward(x), Eigen::VectorXd::Zero(2)).flatten();
  for (double v : g) CHECK(v == 0.0);
  // A uniform shift of the probability gradient is invisible through softmax.
  const auto shifted = net.backward(net.forward(x), Eigen::VectorXd::Constant(2, 3.0)).flatten();
  for (double v : shifted) CHECK(std::abs(v) < 1e-15);
}

TEST_CASE("stale forward passes are rejected") {
  Network net(NetworkSpec{{2, 3, 1}, Head::Linear}, 1);
  const std::vector<double> x{1.0, 0.0};
  const ForwardPass pass = net.forward(x);
  net.set_flat_parameters(net.flat_parameters());
  CHECK_THROWS_AS(net.backward(pass, Eigen::VectorXd::Ones(1)), std::logic_error);
}

TEST_CASE("adam follows the reference recursion and minimises a quadratic") {
  Network net(NetworkSpec{{1, 1, 1}, Head::Linear}, 7);
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  AdamState adam(net, cfg);
  std::vector<double> p = net.flat_parameters(), m(p.size(), 0.0), v(p.size(), 0.0);
  for (int t = 1; t <= 500; ++t) {
    std::vector<double> g(p.size());
    const auto current = net.flat_parameters();
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = 2.0 * (current[k] - 3.0);
    adam.step(net, uniform_gradient(net, g));
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = 0.9 * m[k] + 0.1 * g[k];
      v[k] = 0.999 * v[k] + 0.001 * g[k] * g[k];
      const double mh = m[k] / (1.0 - std::pow(0.9, t));
      const double vh = v[k] / (1.0 - std::pow(0.999, t));
      p[k] -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
    }
    const auto got = net.flat_parameters();
    for (std::size_t k = 0; k < p.size(); ++k) REQUIRE(std::abs(got[k] - p[k]) < 1e-12);
  }
  CHECK(adam.steps() == 500);
  for (double x : net.flat_parameters()) CHECK(std::abs(x - 3.0) < 0.05);
}

TEST_CASE("non-finite gradients leave parameters and moments untouched") {
  Network net(NetworkSpec{{2, 2, 1}, Head::Linear}, 2);
  AdamState adam(net, AdamConfig{});
  const auto before = net.flat_parameters();
  std::vector<double> g(before.size(), 0.5);
  g[3] = std::nan("");
  CHECK_THROWS_AS(adam.step(net, uniform_gradient(net, g)), std::domain_error);
  g[3] = INFINITY;
  CHECK_THROWS_AS(adam.step(net, uniform_gradient(net, g)), std::domain_error);
  CHECK(net.flat_parameters() == before);
  CHECK(adam.steps() == 0);

  Network twin(NetworkSpec{{2, 2, 1}, Head::Linear}, 2);
  AdamState fresh(twin, AdamConfig{});
  g[3] = 0.5;
  adam.step(net, uniform_gradient(net, g));
  fresh.step(twin, uniform_gradient(twin, g));
  CHECK(net.flat_parameters() == twin.flat_parameters());
}

TEST_CASE("checkpoint round trip is bit exact") {
  const Network net(NetworkSpec{{5, 7, 3, 2}, Head::Softmax}, 31);
  const auto blob = save(net);
  CHECK(blob.size() == 4 + 4 + 1 + 4 + 4 * 4 + 8 * net.parameter_count());
  const Network back = load(blob);
  CHECK(back.spec() == net.spec());
  CHECK(back.flat_parameters() == net.flat_parameters());
  CHECK(save(back) == blob);
}

TEST_CASE("corrupt checkpoints raise a format error") {
  const Network net(NetworkSpec{{3, 4, 1}, Head::Linear}, 1);
  auto blob = save(net);
  const std::span<const std::uint8_t> whole(blob);
  CHECK_THROWS_AS(load(whole.first(blob.size() - 1)), FormatError);
  CHECK_THROWS_AS(load(whole.first(6)), FormatError);
  auto trailing = blob;
  trailing.push_back(0);
  CHECK_THROWS_AS(load(trailing), FormatError);
  auto version = blob;
  version[4] = 9;
  CHECK_THROWS_AS(load(version), FormatError);
  auto magic = blob;
  magic[0] = 'X';
  CHECK_THROWS_AS(load(magic), FormatError);
  auto head = blob;
  head[8] = 7;
  CHECK_THROWS_AS(load(head), FormatError);
}

TEST_CASE("weight norm excludes biases") {
  Network net(NetworkSpec{{2, 2, 1}, Head::Linear}, 1);
  auto& layers = net.mutable_layers();
  layers[0].weight << 1.0, 2.0, 0.0, -1.0;
  layers[1].weight << 3.0, 0.0;
  layers[0].bias << 100.0, 100.0;
  CHECK(net.weight_norm_squared() == 15.0);
}

}
