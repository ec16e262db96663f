#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "geolink/error.hpp"
#include "geolink/network/conv3d.hpp"
#include "geolink/network/dynamic_pool.hpp"
#include "geolink/network/loss.hpp"
#include "geolink/network/mlp.hpp"
#include "geolink/rng.hpp"

namespace geolink::nn {

/// Shapes of the conv -> pool -> conv -> pool -> MLP pipeline.
struct ArchitectureConfig {
  Index input_channels = 2;
  Index conv1_channels = 8;
  Index conv2_channels = 8;
  Shape3 kernel{3, 3, 3};
  Index padding = 1;
  Shape3 pool1{8, 8, 8};
  Shape3 pool2{4, 4, 4};
  std::vector<Index> hidden{64};

  Index mlp_input() const { return conv2_channels * pool2.volume(); }
  bool operator==(const ArchitectureConfig&) const = default;
};

template <class Scalar>
class Model {
 public:
  /// Intermediates of one forward pass, consumed by backward().
  struct Tape {
    FeatureMap<Scalar> input, conv1, pool1, conv2, pool2;
    std::vector<Index> argmax1, argmax2;
    MlpTape<Scalar> mlp;
    Scalar probability{};
    bool ready = false;
  };

  ArchitectureConfig arch;
  Conv3DLayer<Scalar> conv1;
  Conv3DLayer<Scalar> conv2;
  MlpHead<Scalar> head;

  explicit Model(const ArchitectureConfig& config = {})
      : arch(config),
        conv1(config.conv1_channels, config.input_channels, config.kernel, config.padding),
        conv2(config.conv2_channels, config.conv1_channels, config.kernel, config.padding),
        head(MlpHead<Scalar>::zeros(config.mlp_input(), config.hidden)) {}

  /// Glorot-uniform weights, zero biases. `zero_head` leaves the MLP at zero so
  /// every prediction is exactly 0.5.
  void initialize(std::uint64_t seed, bool zero_head = false) {
    Rng rng(derive_seed(seed, "init"));
    auto fill = [&](Scalar* data, Index n, double fan_in, double fan_out) {
      const double limit = std::sqrt(6.0 / (fan_in + fan_out));
      std::uniform_real_distribution<double> u(-limit, limit);
      for (Index i = 0; i < n; ++i) data[i] = static_cast<Scalar>(u(rng));
    };
    for (auto* layer : {&conv1, &conv2}) {
      const double k = static_cast<double>(layer->kernel_shape().volume());
      fill(layer->kernels.data(), layer->kernels.size(), k * layer->in_channels(), k * layer->out_channels());
      layer->biases.setZero();
    }
    for (auto& l : head.layers) {
      if (zero_head)
        l.weights.setZero();
      else
        fill(l.weights.data(), l.weights.size(), l.weights.cols(), l.weights.rows());
      l.bias.setZero();
    }
  }

  void set_zero() {
    for (auto block : parameter_blocks()) std::fill(block.begin(), block.end(), Scalar(0));
  }

  /// Probability that the pair is linked.
  Scalar forward(const FeatureMap<Scalar>& input, Tape& tape) const {
    tape.ready = false;
    tape.input = input;
    tape.conv1 = conv3d_forward(input, conv1, true, "conv1");
    tape.pool1 = dynamic_pool_forward(tape.conv1, DynamicPoolConfig{arch.pool1}, &tape.argmax1);
    tape.conv2 = conv3d_forward(tape.pool1, conv2, true, "conv2");
    tape.pool2 = dynamic_pool_forward(tape.conv2, DynamicPoolConfig{arch.pool2}, &tape.argmax2);
    const Eigen::Map<const Vector<Scalar>> flat(tape.pool2.data(), tape.pool2.size());
    if (flat.size() != head.input_dim())
      throw ShapeError("mlp: pooled feature map has " + std::to_string(flat.size()) + " values, head expects " +
                       std::to_string(head.input_dim()));
    tape.probability = sigmoid(mlp_logit(Vector<Scalar>(flat), head, &tape.mlp));
    tape.ready = true;
    return tape.probability;
  }

  Scalar predict(const FeatureMap<Scalar>& input) const {
    Tape tape;
    return forward(input, tape);
  }

  /// Accumulates d(loss)/d(parameters) into `grads` given d(loss)/d(logit).
  void backward(const Tape& tape, Scalar grad_logit, Model& grads, FeatureMap<Scalar>* grad_input = nullptr) const {
    if (!tape.ready) throw UsageError("Model::backward called without a completed forward pass");
    Vector<Scalar> g_flat;
    mlp_backward(tape.mlp, head, grad_logit, grads.head, &g_flat);
    FeatureMap<Scalar> g_pool2(tape.pool2.dimensions());
    std::copy(g_flat.data(), g_flat.data() + g_flat.size(), g_pool2.data());
    const FeatureMap<Scalar> g_conv2 = dynamic_pool_backward(g_pool2, tape.argmax2, tape.conv2.dimensions());
    FeatureMap<Scalar> g_pool1;
    conv3d_backward(tape.pool1, conv2, tape.conv2, g_conv2, grads.conv2, &g_pool1);
    const FeatureMap<Scalar> g_conv1 = dynamic_pool_backward(g_pool1, tape.argmax1, tape.conv1.dimensions());
    conv3d_backward(tape.input, conv1, tape.conv1, g_conv1, grads.conv1, grad_input);
  }

  /// Parameter storage in declaration order: conv1 kernels, biases, conv2
  /// kernels, biases, then each MLP layer's weights and bias.
  std::vector<std::span<Scalar>> parameter_blocks() {
    std::vector<std::span<Scalar>> out;
    auto add = [&](Scalar* p, Index n) { out.emplace_back(p, static_cast<std::size_t>(n)); };
    add(conv1.kernels.data(), conv1.kernels.size());
    add(conv1.biases.data(), conv1.biases.size());
    add(conv2.kernels.data(), conv2.kernels.size());
    add(conv2.biases.data(), conv2.biases.size());
    for (auto& l : head.layers) {
      add(l.weights.data(), l.weights.size());
      add(l.bias.data(), l.bias.size());
    }
    return out;
  }

  std::vector<std::span<const Scalar>> parameter_blocks() const {
    std::vector<std::span<const Scalar>> out;
    for (auto b : const_cast<Model*>(this)->parameter_blocks()) out.emplace_back(b.data(), b.size());
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (auto b : parameter_blocks()) n += b.size();
    return n;
  }

  std::vector<Scalar> flatten() const {
    std::vector<Scalar> out;
    out.reserve(parameter_count());
    for (auto b : parameter_blocks()) out.insert(out.end(), b.begin(), b.end());
    return out;
  }

  void assign(std::span<const Scalar> values) {
    if (values.size() != parameter_count()) throw ShapeError("Model::assign: parameter count mismatch");
    std::size_t at = 0;
    for (auto b : parameter_blocks()) {
      std::copy(values.begin() + static_cast<std::ptrdiff_t>(at),
                values.begin() + static_cast<std::ptrdiff_t>(at + b.size()), b.begin());
      at += b.size();
    }
  }

  template <class Other>
  Model<Other> cast() const {
    Model<Other> out(arch);
    auto dst = out.parameter_blocks();
    auto src = parameter_blocks();
    for (std::size_t i = 0; i < src.size(); ++i)
      for (std::size_t j = 0; j < src[i].size(); ++j) dst[i][j] = static_cast<Other>(src[i][j]);
    return out;
  }
};

/// Label rule: positive only when the probability strictly exceeds the threshold.
template <class Scalar>
int classify(Scalar probability, Scalar threshold = Scalar(0.5)) {
  return probability > threshold ? 1 : 0;
}

}  // namespace geolink::nn
