#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace edgecache {

enum class Head : std::uint8_t { Softmax = 0, Linear = 1 };

// Dense feed-forward layout: widths = {input, hidden..., output}. Hidden
// layers use the rectifier.
struct NetworkSpec {
  std::vector<int> widths;
  Head head = Head::Linear;

  int input_width() const { return widths.front(); }
  int output_width() const { return widths.back(); }
  void validate() const;
  bool operator==(const NetworkSpec&) const = default;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

// Parameter-shaped accumulator for loss gradients.
struct GradientSet {
  std::vector<DenseLayer> layers;

  void add(const GradientSet& other, double scale = 1.0);
  void scale(double factor);
  bool all_finite() const;
  std::vector<double> flatten() const;
};

// Activations recorded by a forward pass, consumed by backward().
struct ForwardPass {
  std::vector<Eigen::VectorXd> inputs;  // input to each layer
  std::vector<Eigen::VectorXd> pre;     // pre-activation of each layer
  Eigen::VectorXd output;
  std::uint64_t version = 0;
};

class Network {
 public:
  Network() = default;
  // Weights ~ U(-0.1, 0.1), biases 0.1.
  Network(NetworkSpec spec, std::uint64_t seed);

  const NetworkSpec& spec() const { return spec_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers();

  ForwardPass forward(std::span<const double> input) const;
  Eigen::VectorXd evaluate(std::span<const double> input) const;

  // Reverse-mode gradient of <output_grad, output> with respect to every
  // parameter. output_grad is taken with respect to the head output (the
  // probabilities for a softmax head).
  GradientSet backward(const ForwardPass& pass,
                       const Eigen::VectorXd& output_grad) const;

  GradientSet zero_gradients() const;

  std::size_t parameter_count() const;
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> values);

  // Sum of squared weights, biases excluded.
  double weight_norm_squared() const;

  // Bumped on every parameter mutation; a ForwardPass from an older version
  // is rejected by backward().
  std::uint64_t version() const { return version_; }
  void touch() { ++version_; }

 private:
  NetworkSpec spec_;
  std::vector<DenseLayer> layers_;
  std::uint64_t version_ = 0;
};

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class AdamState {
 public:
  AdamState() = default;
  AdamState(const Network& net, AdamConfig config);

  // Bias-corrected adaptive-moment step. Throws std::domain_error and leaves
  // both the network and the moments untouched when a gradient is not finite.
  void step(Network& net, const GradientSet& grads);

  long steps() const { return steps_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  GradientSet first_;
  GradientSet second_;
  long steps_ = 0;
};

// Checkpoint blob: "ECNN" magic, u32 format version, u8 head, u32 layer
// count + 1, u32 widths, then per layer the row-major weights and the bias
// as little-endian IEEE-754 binary64.
std::vector<std::uint8_t> save(const Network& net);
Network load(std::span<const std::uint8_t> blob);

}  // namespace edgecache
