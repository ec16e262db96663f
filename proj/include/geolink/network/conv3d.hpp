#pragma once

#include <algorithm>
#include <string>

#include "geolink/error.hpp"
#include "geolink/network/types.hpp"

namespace geolink::nn {

/// Bank of 3-D kernels (out, in, kd, kh, kw) with one bias per output channel.
template <class Scalar>
struct Conv3DLayer {
  using Kernels = Eigen::Tensor<Scalar, 5, Eigen::RowMajor>;

  Kernels kernels;
  Vector<Scalar> biases;
  Index padding = 1;  ///< zero padding on every spatial side

  Conv3DLayer() = default;
  Conv3DLayer(Index out_channels, Index in_channels, Shape3 kernel, Index pad = 1)
      : kernels(out_channels, in_channels, kernel.d, kernel.h, kernel.w),
        biases(Vector<Scalar>::Zero(out_channels)),
        padding(pad) {
    kernels.setZero();
  }

  Index out_channels() const { return kernels.dimension(0); }
  Index in_channels() const { return kernels.dimension(1); }
  Shape3 kernel_shape() const { return {kernels.dimension(2), kernels.dimension(3), kernels.dimension(4)}; }

  Shape3 output_shape(Shape3 in) const {
    const auto k = kernel_shape();
    return {in.d + 2 * padding - k.d + 1, in.h + 2 * padding - k.h + 1, in.w + 2 * padding - k.w + 1};
  }
};

namespace detail {

template <class Scalar>
FeatureMap<Scalar> zero_pad(const FeatureMap<Scalar>& in, Index p) {
  if (p == 0) return in;
  const Eigen::array<std::pair<Index, Index>, 4> pads{{{0, 0}, {p, p}, {p, p}, {p, p}}};
  return in.pad(pads);
}

template <class Scalar>
void check_conv_input(const FeatureMap<Scalar>& input, const Conv3DLayer<Scalar>& layer, const char* stage) {
  if (input.dimension(0) != layer.in_channels())
    throw ShapeError(std::string(stage) + ": expected " + std::to_string(layer.in_channels()) +
                     " input channels, got " + std::to_string(input.dimension(0)));
  const auto out = layer.output_shape(spatial_shape(input));
  if (out.d < 1 || out.h < 1 || out.w < 1)
    throw ShapeError(std::string(stage) + ": input " + spatial_shape(input).str() + " (padding " +
                     std::to_string(layer.padding) + ") is smaller than kernel " + layer.kernel_shape().str());
}

}  // namespace detail

/// Valid cross-correlation of the zero-padded input summed over input channels,
/// plus bias, followed by ReLU when `relu` is set.
template <class Scalar>
FeatureMap<Scalar> conv3d_forward(const FeatureMap<Scalar>& input, const Conv3DLayer<Scalar>& layer,
                                  bool relu = true, const char* stage = "conv3d") {
  detail::check_conv_input(input, layer, stage);
  const FeatureMap<Scalar> padded = detail::zero_pad(input, layer.padding);
  const Index C = padded.dimension(0), PD = padded.dimension(1), PH = padded.dimension(2), PW = padded.dimension(3);
  const auto k = layer.kernel_shape();
  const auto os = layer.output_shape(spatial_shape(input));
  const Index O = layer.out_channels();

  FeatureMap<Scalar> out(O, os.d, os.h, os.w);
  const Scalar* src = padded.data();
  Scalar* dst = out.data();
  const Index plane = os.d * os.h * os.w;
  for (Index o = 0; o < O; ++o) {
    std::fill(dst + o * plane, dst + (o + 1) * plane, layer.biases(o));
    for (Index c = 0; c < C; ++c)
      for (Index p = 0; p < k.d; ++p)
        for (Index q = 0; q < k.h; ++q)
          for (Index r = 0; r < k.w; ++r) {
            const Scalar w = layer.kernels(o, c, p, q, r);
            for (Index d = 0; d < os.d; ++d)
              for (Index h = 0; h < os.h; ++h) {
                const Scalar* in_row = src + ((c * PD + d + p) * PH + h + q) * PW + r;
                Scalar* out_row = dst + ((o * os.d + d) * os.h + h) * os.w;
                for (Index x = 0; x < os.w; ++x) out_row[x] += w * in_row[x];
              }
          }
  }
  if (relu)
    for (Index i = 0; i < out.size(); ++i) dst[i] = std::max(dst[i], Scalar(0));
  return out;
}

/// Accumulates parameter gradients into `grads` (same shapes as `layer`) and,
/// when `grad_input` is non-null, writes the gradient w.r.t. `input`.
/// `output` is the forward result; with `relu` set, cells where it is zero
/// pass no gradient.
template <class Scalar>
void conv3d_backward(const FeatureMap<Scalar>& input, const Conv3DLayer<Scalar>& layer,
                     const FeatureMap<Scalar>& output, const FeatureMap<Scalar>& grad_output,
                     Conv3DLayer<Scalar>& grads, FeatureMap<Scalar>* grad_input, bool relu = true) {
  const FeatureMap<Scalar> padded = detail::zero_pad(input, layer.padding);
  const Index C = padded.dimension(0), PD = padded.dimension(1), PH = padded.dimension(2), PW = padded.dimension(3);
  const auto k = layer.kernel_shape();
  const Index O = output.dimension(0), OD = output.dimension(1), OH = output.dimension(2), OW = output.dimension(3);

  FeatureMap<Scalar> g_pre = grad_output;
  if (relu) {
    const Scalar* y = output.data();
    Scalar* g = g_pre.data();
    for (Index i = 0; i < g_pre.size(); ++i)
      if (!(y[i] > Scalar(0))) g[i] = Scalar(0);
  }

  FeatureMap<Scalar> g_padded;
  if (grad_input) {
    g_padded.resize(C, PD, PH, PW);
    g_padded.setZero();
  }
  const Scalar* src = padded.data();
  const Scalar* gout = g_pre.data();
  const Index plane = OD * OH * OW;
  for (Index o = 0; o < O; ++o) {
    Scalar bias_sum(0);
    for (Index i = 0; i < plane; ++i) bias_sum += gout[o * plane + i];
    grads.biases(o) += bias_sum;
    for (Index c = 0; c < C; ++c)
      for (Index p = 0; p < k.d; ++p)
        for (Index q = 0; q < k.h; ++q)
          for (Index r = 0; r < k.w; ++r) {
            const Scalar w = layer.kernels(o, c, p, q, r);
            Scalar acc(0);
            for (Index d = 0; d < OD; ++d)
              for (Index h = 0; h < OH; ++h) {
                const Index in_off = ((c * PD + d + p) * PH + h + q) * PW + r;
                const Scalar* in_row = src + in_off;
                const Scalar* g_row = gout + ((o * OD + d) * OH + h) * OW;
                for (Index x = 0; x < OW; ++x) acc += g_row[x] * in_row[x];
                if (grad_input) {
                  Scalar* gi_row = g_padded.data() + in_off;
                  for (Index x = 0; x < OW; ++x) gi_row[x] += w * g_row[x];
                }
              }
            grads.kernels(o, c, p, q, r) += acc;
          }
  }
  if (grad_input) {
    const Index p = layer.padding;
    const Eigen::array<Index, 4> offsets{0, p, p, p};
    const Eigen::array<Index, 4> extents{input.dimension(0), input.dimension(1), input.dimension(2), input.dimension(3)};
    *grad_input = g_padded.slice(offsets, extents);
  }
}

}  // namespace geolink::nn
