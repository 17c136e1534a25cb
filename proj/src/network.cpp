#include "edgecache/network.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "edgecache/errors.hpp"
#include "edgecache/random.hpp"

namespace edgecache {
namespace {

constexpr std::uint8_t kMagic[4] = {'E', 'C', 'N', 'N'};
constexpr std::uint32_t kFormatVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

Eigen::VectorXd relu(const Eigen::VectorXd& x) { return x.cwiseMax(0.0); }

class Writer {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void f64(double v) { bytes(&v, 8); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  void bytes(void* data, std::size_t n) {
    if (pos_ + n > in_.size()) throw FormatError("checkpoint truncated");
    std::memcpy(data, in_.data() + pos_, n);
    pos_ += n;
  }
  std::uint8_t u8() { std::uint8_t v; bytes(&v, 1); return v; }
  std::uint32_t u32() { std::uint32_t v; bytes(&v, 4); return v; }
  double f64() { double v; bytes(&v, 8); return v; }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

void NetworkSpec::validate() const {
  if (widths.size() < 3) throw std::invalid_argument("network needs a hidden layer");
  for (int w : widths) {
    if (w < 1) throw std::invalid_argument("layer widths must be positive");
  }
}

void GradientSet::add(const GradientSet& other, double scale) {
  if (layers.size() != other.layers.size()) {
    throw std::logic_error("gradient shapes differ");
  }
  for (std::size_t k = 0; k < layers.size(); ++k) {
    layers[k].weight += scale * other.layers[k].weight;
    layers[k].bias += scale * other.layers[k].bias;
  }
}

void GradientSet::scale(double factor) {
  for (auto& layer : layers) {
    layer.weight *= factor;
    layer.bias *= factor;
  }
}

bool GradientSet::all_finite() const {
  for (const auto& layer : layers) {
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
  }
  return true;
}

std::vector<double> GradientSet::flatten() const {
  std::vector<double> out;
  for (const auto& layer : layers) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        out.push_back(layer.weight(r, c));
      }
    }
    out.insert(out.end(), layer.bias.data(), layer.bias.data() + layer.bias.size());
  }
  return out;
}

Network::Network(NetworkSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  spec_.validate();
  Rng rng(seed);
  for (std::size_t k = 0; k + 1 < spec_.widths.size(); ++k) {
    DenseLayer layer;
    layer.weight.resize(spec_.widths[k + 1], spec_.widths[k]);
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        layer.weight(r, c) = -0.1 + 0.2 * unit_uniform(rng);
      }
    }
    layer.bias = Eigen::VectorXd::Constant(spec_.widths[k + 1], 0.1);
    layers_.push_back(std::move(layer));
  }
}

std::vector<DenseLayer>& Network::mutable_layers() {
  touch();
  return layers_;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double top = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - top).exp().matrix();
  return e / e.sum();
}

ForwardPass Network::forward(std::span<const double> input) const {
  if (static_cast<int>(input.size()) != spec_.input_width()) {
    throw std::logic_error("input width " + std::to_string(input.size()) +
                           " does not match network input " +
                           std::to_string(spec_.input_width()));
  }
  ForwardPass pass;
  pass.version = version_;
  pass.inputs.reserve(layers_.size());
  pass.pre.reserve(layers_.size());
  Eigen::VectorXd x =
      Eigen::Map<const Eigen::VectorXd>(input.data(), static_cast<Eigen::Index>(input.size()));
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    pass.inputs.push_back(x);
    Eigen::VectorXd z = layers_[k].weight * x + layers_[k].bias;
    const bool last = k + 1 == layers_.size();
    x = last ? z : relu(z);
    pass.pre.push_back(std::move(z));
  }
  pass.output = spec_.head == Head::Softmax ? softmax(x) : x;
  return pass;
}

Eigen::VectorXd Network::evaluate(std::span<const double> input) const {
  return forward(input).output;
}

GradientSet Network::zero_gradients() const {
  GradientSet g;
  for (const auto& layer : layers_) {
    g.layers.push_back({Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()),
                        Eigen::VectorXd::Zero(layer.bias.size())});
  }
  return g;
}

GradientSet Network::backward(const ForwardPass& pass,
                              const Eigen::VectorXd& output_grad) const {
  if (pass.version != version_ || pass.inputs.size() != layers_.size()) {
    throw std::logic_error("forward pass is stale for this network");
  }
  if (output_grad.size() != spec_.output_width()) {
    throw std::logic_error("output gradient width mismatch");
  }
  Eigen::VectorXd delta;
  if (spec_.head == Head::Softmax) {
    const Eigen::VectorXd& p = pass.output;
    delta = p.cwiseProduct((output_grad.array() - p.dot(output_grad)).matrix());
  } else {
    delta = output_grad;
  }

  GradientSet grads;
  grads.layers.resize(layers_.size());
  for (std::size_t k = layers_.size(); k-- > 0;) {
    grads.layers[k].weight = delta * pass.inputs[k].transpose();
    grads.layers[k].bias = delta;
    if (k == 0) break;
    Eigen::VectorXd back = layers_[k].weight.transpose() * delta;
    const Eigen::VectorXd& z = pass.pre[k - 1];
    for (Eigen::Index i = 0; i < back.size(); ++i) {
      if (z(i) <= 0.0) back(i) = 0.0;
    }
    delta = std::move(back);
  }
  return grads;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) {
    n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  }
  return n;
}

std::vector<double> Network::flat_parameters() const {
  GradientSet view;
  view.layers = layers_;
  return view.flatten();
}

void Network::set_flat_parameters(std::span<const double> values) {
  if (values.size() != parameter_count()) {
    throw std::logic_error("parameter vector length mismatch");
  }
  std::size_t pos = 0;
  for (auto& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        layer.weight(r, c) = values[pos++];
      }
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = values[pos++];
  }
  touch();
}

double Network::weight_norm_squared() const {
  double total = 0.0;
  for (const auto& layer : layers_) total += layer.weight.squaredNorm();
  return total;
}

AdamState::AdamState(const Network& net, AdamConfig config)
    : config_(config), first_(net.zero_gradients()), second_(net.zero_gradients()) {}

void AdamState::step(Network& net, const GradientSet& grads) {
  if (!grads.all_finite()) {
    throw std::domain_error("non-finite gradient rejected");
  }
  if (grads.layers.size() != first_.layers.size()) {
    throw std::logic_error("gradient shape does not match optimizer state");
  }
  ++steps_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double lr = config_.learning_rate;
  const double eps = config_.epsilon;
  auto& layers = net.mutable_layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
      m = b1 * m + (1.0 - b1) * g;
      v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
      param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    };
    update(layers[k].weight, first_.layers[k].weight, second_.layers[k].weight,
           grads.layers[k].weight);
    update(layers[k].bias, first_.layers[k].bias, second_.layers[k].bias,
           grads.layers[k].bias);
  }
}

std::vector<std::uint8_t> save(const Network& net) {
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(kFormatVersion);
  w.u8(static_cast<std::uint8_t>(net.spec().head));
  w.u32(static_cast<std::uint32_t>(net.spec().widths.size()));
  for (int width : net.spec().widths) w.u32(static_cast<std::uint32_t>(width));
  for (const auto& layer : net.layers()) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) w.f64(layer.weight(r, c));
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) w.f64(layer.bias(i));
  }
  return w.take();
}

Network load(std::span<const std::uint8_t> blob) {
  Reader r(blob);
  std::uint8_t magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad checkpoint magic");
  const std::uint32_t version = r.u32();
  if (version != kFormatVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  NetworkSpec spec;
  const std::uint8_t head = r.u8();
  if (head > 1) throw FormatError("unknown head kind");
  spec.head = static_cast<Head>(head);
  const std::uint32_t count = r.u32();
  if (count < 3 || count > 64) throw FormatError("implausible layer count");
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::uint32_t width = r.u32();
    if (width == 0 || width > (1u << 20)) throw FormatError("implausible layer width");
    spec.widths.push_back(static_cast<int>(width));
  }
  Network net(spec, 0);
  auto& layers = net.mutable_layers();
  for (auto& layer : layers) {
    for (Eigen::Index row = 0; row < layer.weight.rows(); ++row) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(row, c) = r.f64();
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = r.f64();
  }
  if (!r.done()) throw FormatError("trailing bytes after checkpoint");
  return net;
}

}  // namespace edgecache
