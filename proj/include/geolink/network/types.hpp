#pragma once

#include <cmath>
#include <string>

#include <Eigen/Core>
#include <unsupported/Eigen/CXX11/Tensor>

namespace geolink::nn {

using Index = Eigen::Index;

/// (channels, depth, height, width), width contiguous.
template <class Scalar>
using FeatureMap = Eigen::Tensor<Scalar, 4, Eigen::RowMajor>;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Shape3 {
  Index d = 1;
  Index h = 1;
  Index w = 1;

  Index volume() const { return d * h * w; }
  bool operator==(const Shape3&) const = default;
  std::string str() const { return std::to_string(d) + "x" + std::to_string(h) + "x" + std::to_string(w); }
};

template <class Scalar>
Shape3 spatial_shape(const FeatureMap<Scalar>& x) {
  return {x.dimension(1), x.dimension(2), x.dimension(3)};
}

template <class Scalar>
bool all_finite(const FeatureMap<Scalar>& x) {
  const Scalar* p = x.data();
  for (Index i = 0; i < x.size(); ++i)
    if (!std::isfinite(p[i])) return false;
  return true;
}

}  // namespace geolink::nn
