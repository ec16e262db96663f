#pragma once

#include <utility>
#include <vector>

#include "geolink/error.hpp"
#include "geolink/network/types.hpp"

namespace geolink::nn {

/// Target spatial shape of a dynamic max-pooling stage; window sizes are
/// derived from the incoming feature map.
struct DynamicPoolConfig {
  Shape3 target;
};

/// Window [begin, end) along one axis for output index `i`:
/// size ceil(extent / target), anchored at i * size. A window that would start
/// past the input (possible when the target does not divide evenly, or exceeds
/// the extent) is clamped onto the last input cell.
inline std::pair<Index, Index> pool_window(Index i, Index extent, Index target) {
  const Index size = (extent + target - 1) / target;
  const Index begin = std::min(i * size, extent - 1);
  return {begin, std::min(begin + size, extent)};
}

/// Max over each window. `argmax`, when given, receives the flat input index of
/// the first maximal cell (scan order) for every output cell.
template <class Scalar>
FeatureMap<Scalar> dynamic_pool_forward(const FeatureMap<Scalar>& input, const DynamicPoolConfig& cfg,
                                        std::vector<Index>* argmax = nullptr) {
  const Index C = input.dimension(0), D = input.dimension(1), H = input.dimension(2), W = input.dimension(3);
  if (D < 1 || H < 1 || W < 1) throw ShapeError("dynamic pool: empty input");
  const auto t = cfg.target;
  if (t.d < 1 || t.h < 1 || t.w < 1) throw ShapeError("dynamic pool: target dims must be >= 1");

  FeatureMap<Scalar> out(C, t.d, t.h, t.w);
  if (argmax) argmax->assign(static_cast<std::size_t>(out.size()), 0);
  const Scalar* in = input.data();
  Index o = 0;
  for (Index c = 0; c < C; ++c)
    for (Index i = 0; i < t.d; ++i) {
      const auto [d0, d1] = pool_window(i, D, t.d);
      for (Index j = 0; j < t.h; ++j) {
        const auto [h0, h1] = pool_window(j, H, t.h);
        for (Index l = 0; l < t.w; ++l, ++o) {
          const auto [w0, w1] = pool_window(l, W, t.w);
          Index best = ((c * D + d0) * H + h0) * W + w0;
          for (Index d = d0; d < d1; ++d)
            for (Index h = h0; h < h1; ++h) {
              const Index row = ((c * D + d) * H + h) * W;
              for (Index w = w0; w < w1; ++w)
                if (in[row + w] > in[best]) best = row + w;
            }
          out.data()[o] = in[best];
          if (argmax) (*argmax)[static_cast<std::size_t>(o)] = best;
        }
      }
    }
  return out;
}

/// Routes each output gradient to its recorded argmax cell.
template <class Scalar>
FeatureMap<Scalar> dynamic_pool_backward(const FeatureMap<Scalar>& grad_output, const std::vector<Index>& argmax,
                                         const Eigen::array<Index, 4>& input_dims) {
  FeatureMap<Scalar> grad(input_dims);
  grad.setZero();
  for (Index o = 0; o < grad_output.size(); ++o) grad.data()[argmax[static_cast<std::size_t>(o)]] += grad_output.data()[o];
  return grad;
}

}  // namespace geolink::nn
