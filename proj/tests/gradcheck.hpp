#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "geolink/network/loss.hpp"
#include "geolink/network/model.hpp"

namespace geolink::test {

struct GradCheck {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::string worst;  ///< block/index of the worst parameter
};

inline nn::ArchitectureConfig miniature_architecture() {
  nn::ArchitectureConfig a;
  a.conv1_channels = 3;
  a.conv2_channels = 3;
  a.pool1 = {3, 3, 5};
  a.pool2 = {2, 2, 2};
  a.hidden = {4};
  return a;
}

inline nn::FeatureMap<double> random_input(std::mt19937_64& rng, nn::Index c, nn::Index d, nn::Index h, nn::Index w) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  nn::FeatureMap<double> x(c, d, h, w);
  for (nn::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  return x;
}

inline double sample_loss(const nn::Model<double>& model, const nn::FeatureMap<double>& x, double y) {
  const double p = model.predict(x);
  return nn::bce_loss<double>(std::span<const double>(&p, 1), std::span<const double>(&y, 1));
}

/// Compares backward() against central differences of the clamped loss for
/// every parameter: |analytic - fd| / max(|fd|, 1e-8).
inline GradCheck check_gradients(nn::Model<double> model, const nn::FeatureMap<double>& x, double y, double h = 1e-5) {
  nn::Model<double>::Tape tape;
  const double p = model.forward(x, tape);
  nn::Model<double> grads(model.arch);
  grads.set_zero();
  model.backward(tape, nn::bce_grad_logit(p, y), grads);
  const auto analytic = grads.flatten();

  GradCheck out;
  auto blocks = model.parameter_blocks();
  std::size_t flat = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (std::size_t i = 0; i < blocks[b].size(); ++i, ++flat) {
      double& param = blocks[b][i];
      const double saved = param;
      param = saved + h;
      const double up = sample_loss(model, x, y);
      param = saved - h;
      const double down = sample_loss(model, x, y);
      param = saved;
      const double fd = (up - down) / (2 * h);
      const double rel = std::abs(analytic[flat] - fd) / std::max(std::abs(fd), 1e-8);
      ++out.checked;
      if (rel > out.max_relative_error) {
        out.max_relative_error = rel;
        out.worst = "block " + std::to_string(b) + " index " + std::to_string(i) + " analytic " +
                    std::to_string(analytic[flat]) + " fd " + std::to_string(fd);
      }
    }
  return out;
}

}  // namespace geolink::test
