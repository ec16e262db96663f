#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>

#include "geolink/error.hpp"

namespace geolink::nn {

inline constexpr double kProbabilityClamp = 1e-7;

enum class Reduction : std::uint8_t { sum, mean };

template <class Scalar>
Scalar clamp_probability(Scalar p) {
  return std::clamp(p, Scalar(kProbabilityClamp), Scalar(1.0 - kProbabilityClamp));
}

/// Binary cross-entropy on clamped probabilities, summed (or averaged) over the batch.
template <class Scalar>
Scalar bce_loss(std::span<const Scalar> y_hat, std::span<const Scalar> y, Reduction reduction = Reduction::sum) {
  if (y_hat.empty() || y_hat.size() != y.size()) throw ShapeError("bce_loss: need equal non-empty inputs");
  Scalar total(0);
  for (std::size_t i = 0; i < y_hat.size(); ++i) {
    const Scalar p = clamp_probability(y_hat[i]);
    total -= y[i] * std::log(p) + (Scalar(1) - y[i]) * std::log(Scalar(1) - p);
  }
  return reduction == Reduction::mean ? total / static_cast<Scalar>(y_hat.size()) : total;
}

/// d(loss_i)/d(logit_i) for one sample, where prob = sigmoid(logit). Zero in
/// the clamped region, where the clamped loss is flat.
template <class Scalar>
Scalar bce_grad_logit(Scalar prob, Scalar label) {
  if (prob < Scalar(kProbabilityClamp) || prob > Scalar(1.0 - kProbabilityClamp)) return Scalar(0);
  return prob - label;
}

}  // namespace geolink::nn
