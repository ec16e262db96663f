#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "geolink/error.hpp"
#include "geolink/network/types.hpp"

namespace geolink::nn {

template <class Scalar>
struct DenseLayer {
  Matrix<Scalar> weights;  // (out, in)
  Vector<Scalar> bias;
};

/// ReLU hidden layers followed by a single sigmoid output unit.
template <class Scalar>
struct MlpHead {
  std::vector<DenseLayer<Scalar>> layers;

  static MlpHead zeros(Index input_dim, const std::vector<Index>& hidden) {
    MlpHead head;
    Index in = input_dim;
    for (Index width : hidden) {
      head.layers.push_back({Matrix<Scalar>::Zero(width, in), Vector<Scalar>::Zero(width)});
      in = width;
    }
    head.layers.push_back({Matrix<Scalar>::Zero(1, in), Vector<Scalar>::Zero(1)});
    return head;
  }

  Index input_dim() const { return layers.empty() ? 0 : layers.front().weights.cols(); }
};

template <class Scalar>
Scalar sigmoid(Scalar z) {
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

template <class Scalar>
struct MlpTape {
  std::vector<Vector<Scalar>> inputs;  // input of each layer
  Scalar logit{};
};

template <class Scalar>
Scalar mlp_logit(const Vector<Scalar>& x, const MlpHead<Scalar>& head, MlpTape<Scalar>* tape = nullptr) {
  if (head.layers.empty()) throw ShapeError("mlp: no layers");
  if (x.size() != head.input_dim())
    throw ShapeError("mlp: expected input of length " + std::to_string(head.input_dim()) + ", got " +
                     std::to_string(x.size()));
  if (tape) tape->inputs.clear();
  Vector<Scalar> a = x;
  for (std::size_t l = 0; l < head.layers.size(); ++l) {
    if (tape) tape->inputs.push_back(a);
    Vector<Scalar> z = head.layers[l].weights * a + head.layers[l].bias;
    a = l + 1 < head.layers.size() ? Vector<Scalar>(z.cwiseMax(Scalar(0))) : z;
  }
  if (a.size() != 1) throw ShapeError("mlp: final layer must have one output");
  if (tape) tape->logit = a(0);
  return a(0);
}

template <class Scalar>
Scalar mlp_forward(const Vector<Scalar>& x, const MlpHead<Scalar>& head) {
  return sigmoid(mlp_logit(x, head));
}

/// Accumulates into `grads`; writes d(loss)/d(input) into `grad_input` if given.
template <class Scalar>
void mlp_backward(const MlpTape<Scalar>& tape, const MlpHead<Scalar>& head, Scalar grad_logit,
                  MlpHead<Scalar>& grads, Vector<Scalar>* grad_input = nullptr) {
  Vector<Scalar> g = Vector<Scalar>::Constant(1, grad_logit);
  for (std::size_t l = head.layers.size(); l-- > 0;) {
    const auto& a = tape.inputs[l];
    grads.layers[l].weights.noalias() += g * a.transpose();
    grads.layers[l].bias += g;
    Vector<Scalar> g_in = head.layers[l].weights.transpose() * g;
    if (l > 0) g_in = (a.array() > Scalar(0)).select(g_in, Scalar(0));
    g = std::move(g_in);
  }
  if (grad_input) *grad_input = std::move(g);
}

}  // namespace geolink::nn
