#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "geolink/error.hpp"
#include "geolink/network/conv3d.hpp"
#include "geolink/network/dynamic_pool.hpp"
#include "geolink/network/loss.hpp"
#include "geolink/network/mlp.hpp"
#include "geolink/network/model.hpp"
#include "gradcheck.hpp"

namespace geolink::nn {
namespace {

template <class T>
double sum(const T& t) {
  const Eigen::Tensor<double, 0, Eigen::RowMajor> s = t.sum();
  return s();
}

template <class T>
double abs_sum(const T& t) {
  return sum(t.abs());
}

FeatureMap<double> filled(Index c, Index d, Index h, Index w, double v) {
  FeatureMap<double> x(c, d, h, w);
  x.setConstant(v);
  return x;
}

TEST(Conv3D, AllOnesGivesTwentySeven) {
  Conv3DLayer<double> layer(1, 1, {3, 3, 3}, 0);
  layer.kernels.setConstant(1.0);
  const auto y = conv3d_forward(filled(1, 3, 3, 3, 1.0), layer);
  ASSERT_EQ(y.size(), 1);
  EXPECT_EQ(y(0, 0, 0, 0), 27.0);
}

TEST(Conv3D, ReluClampsNegativeBias) {
  Conv3DLayer<double> layer(1, 1, {3, 3, 3}, 0);
  layer.kernels.setConstant(0.01);
  layer.biases(0) = -100.0;
  EXPECT_EQ(conv3d_forward(filled(1, 3, 3, 3, 1.0), layer)(0, 0, 0, 0), 0.0);
}

TEST(Conv3D, DeltaKernelCropsInput) {
  Conv3DLayer<double> layer(1, 1, {3, 3, 3}, 0);
  layer.kernels(0, 0, 0, 0, 0) = 1.0;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FeatureMap<double> x(1, 5, 4, 6);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  const auto y = conv3d_forward(x, layer);
  ASSERT_EQ(y.dimension(1), 3);
  ASSERT_EQ(y.dimension(2), 2);
  ASSERT_EQ(y.dimension(3), 4);
  for (Index d = 0; d < 3; ++d)
    for (Index h = 0; h < 2; ++h)
      for (Index w = 0; w < 4; ++w) EXPECT_EQ(y(0, d, h, w), x(0, d, h, w));
}

TEST(Conv3D, PaddingPreservesShapeAndMatchesBruteForce) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Conv3DLayer<double> layer(2, 3, {3, 3, 3}, 1);
  for (Index i = 0; i < layer.kernels.size(); ++i) layer.kernels.data()[i] = u(rng);
  layer.biases << 0.1, -0.2;
  FeatureMap<double> x(3, 4, 2, 5);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  const auto y = conv3d_forward(x, layer, false);
  ASSERT_EQ(y.dimension(1), 4);
  ASSERT_EQ(y.dimension(2), 2);
  ASSERT_EQ(y.dimension(3), 5);
  auto at = [&](Index c, Index d, Index h, Index w) {
    if (d < 0 || h < 0 || w < 0 || d >= 4 || h >= 2 || w >= 5) return 0.0;
    return x(c, d, h, w);
  };
  for (Index o = 0; o < 2; ++o)
    for (Index d = 0; d < 4; ++d)
      for (Index h = 0; h < 2; ++h)
        for (Index w = 0; w < 5; ++w) {
          double s = layer.biases(o);
          for (Index c = 0; c < 3; ++c)
            for (Index a = 0; a < 3; ++a)
              for (Index b = 0; b < 3; ++b)
                for (Index e = 0; e < 3; ++e) s += layer.kernels(o, c, a, b, e) * at(c, d + a - 1, h + b - 1, w + e - 1);
          EXPECT_NEAR(y(o, d, h, w), s, 1e-12);
        }
}

TEST(Conv3D, UndersizedInputNamesStage) {
  Conv3DLayer<double> layer(1, 1, {3, 3, 3}, 0);
  try {
    conv3d_forward(filled(1, 2, 3, 3, 1.0), layer, true, "conv2");
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("conv2"), std::string::npos);
  }
  EXPECT_THROW(conv3d_forward(filled(2, 3, 3, 3, 1.0), layer), ShapeError);
}

TEST(Conv3D, ZeroIncomingGradientGivesZeroGradients) {
  std::mt19937_64 rng(3);
  Conv3DLayer<double> layer(2, 2, {3, 3, 3});
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Index i = 0; i < layer.kernels.size(); ++i) layer.kernels.data()[i] = u(rng);
  const auto x = test::random_input(rng, 2, 3, 3, 3);
  const auto y = conv3d_forward(x, layer);
  FeatureMap<double> g(y.dimensions());
  g.setZero();
  Conv3DLayer<double> grads(2, 2, {3, 3, 3});
  FeatureMap<double> gx;
  conv3d_backward(x, layer, y, g, grads, &gx);
  EXPECT_EQ(abs_sum(grads.kernels), 0.0);
  EXPECT_EQ(grads.biases.cwiseAbs().sum(), 0.0);
  EXPECT_EQ(abs_sum(gx), 0.0);
}

TEST(Conv3D, DeadReluPassesNoGradient) {
  Conv3DLayer<double> layer(1, 1, {3, 3, 3}, 0);
  layer.kernels.setConstant(1.0);
  layer.biases(0) = -100.0;
  const auto x = filled(1, 3, 3, 3, 1.0);
  const auto y = conv3d_forward(x, layer);
  FeatureMap<double> g(y.dimensions());
  g.setConstant(1.0);
  Conv3DLayer<double> grads(1, 1, {3, 3, 3}, 0);
  conv3d_backward<double>(x, layer, y, g, grads, nullptr);
  EXPECT_EQ(grads.biases(0), 0.0);
  EXPECT_EQ(abs_sum(grads.kernels), 0.0);
}

TEST(DynamicPool, BlockwiseMaxOnFourCube) {
  std::mt19937_64 rng(4);
  const auto x = test::random_input(rng, 2, 4, 4, 4);
  const auto y = dynamic_pool_forward(x, {{2, 2, 2}});
  for (Index c = 0; c < 2; ++c)
    for (Index i = 0; i < 2; ++i)
      for (Index j = 0; j < 2; ++j)
        for (Index k = 0; k < 2; ++k) {
          double m = -1e300;
          for (Index a = 0; a < 2; ++a)
            for (Index b = 0; b < 2; ++b)
              for (Index e = 0; e < 2; ++e) m = std::max(m, x(c, 2 * i + a, 2 * j + b, 2 * k + e));
          EXPECT_EQ(y(c, i, j, k), m);
        }
}

TEST(DynamicPool, TargetEqualToInputIsIdentity) {
  std::mt19937_64 rng(5);
  const auto x = test::random_input(rng, 3, 2, 5, 3);
  const auto y = dynamic_pool_forward(x, {{2, 5, 3}});
  for (Index i = 0; i < x.size(); ++i) EXPECT_EQ(y.data()[i], x.data()[i]);
}

TEST(DynamicPool, CeilWindowsAreClipped) {
  EXPECT_EQ(pool_window(0, 5, 2), (std::pair<Index, Index>{0, 3}));
  EXPECT_EQ(pool_window(1, 5, 2), (std::pair<Index, Index>{3, 5}));
  FeatureMap<double> x(1, 5, 5, 5);
  x.setZero();
  x(0, 4, 4, 4) = 9.0;
  x(0, 2, 2, 2) = 5.0;
  const auto y = dynamic_pool_forward(x, {{2, 2, 2}});
  EXPECT_EQ(y(0, 1, 1, 1), 9.0);
  EXPECT_EQ(y(0, 0, 0, 0), 5.0);
}

TEST(DynamicPool, TargetLargerThanInputKeepsShape) {
  std::mt19937_64 rng(6);
  const auto x = test::random_input(rng, 1, 1, 3, 2);
  const auto y = dynamic_pool_forward(x, {{4, 4, 4}});
  EXPECT_EQ(y.dimension(1), 4);
  EXPECT_EQ(y(0, 3, 3, 3), x(0, 0, 2, 1));
}

TEST(DynamicPool, TiesRouteGradientToFirstCell) {
  FeatureMap<double> x(1, 2, 2, 2);
  x.setConstant(1.0);
  std::vector<Index> argmax;
  const auto y = dynamic_pool_forward(x, {{1, 1, 1}}, &argmax);
  EXPECT_EQ(argmax[0], 0);
  FeatureMap<double> g(y.dimensions());
  g.setConstant(2.0);
  const auto gx = dynamic_pool_backward(g, argmax, x.dimensions());
  EXPECT_EQ(gx(0, 0, 0, 0), 2.0);
  EXPECT_EQ(sum(gx), 2.0);
}

TEST(DynamicPool, RandomShapesHitTarget) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<Index> dim(1, 40), tgt(1, 8);
  for (int trial = 0; trial < 100; ++trial) {
    const Shape3 target{tgt(rng), tgt(rng), tgt(rng)};
    const auto x = test::random_input(rng, 1, dim(rng), dim(rng), dim(rng));
    const auto y = dynamic_pool_forward(x, {target});
    EXPECT_EQ(y.dimension(1), target.d);
    EXPECT_EQ(y.dimension(2), target.h);
    EXPECT_EQ(y.dimension(3), target.w);
  }
}

TEST(Mlp, FrozenValues) {
  auto head = MlpHead<double>::zeros(3, {4});
  EXPECT_EQ(mlp_forward<double>(Vector<double>::Ones(3), head), 0.5);
  auto linear = MlpHead<double>::zeros(1, {});
  linear.layers[0].weights(0, 0) = 1.0;
  EXPECT_EQ(mlp_forward<double>(Vector<double>::Zero(1), linear), 0.5);
  EXPECT_NEAR(mlp_forward<double>(Vector<double>::Constant(1, std::log(3.0)), linear), 0.75, 1e-15);
  EXPECT_THROW(mlp_forward<double>(Vector<double>::Zero(2), linear), ShapeError);
}

TEST(Mlp, SigmoidIsStableAtExtremes) {
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
  EXPECT_TRUE(std::isfinite(sigmoid(-800.0f)));
}

TEST(Loss, FrozenValues) {
  const std::vector<double> half{0.5}, one{1.0};
  EXPECT_NEAR(bce_loss<double>(half, one), 0.69315, 1e-5);
  EXPECT_NEAR(bce_loss<double>(half, one), std::log(2.0), 1e-15);
  const std::vector<double> conf{1.0 - kProbabilityClamp};
  EXPECT_LE(bce_loss<double>(conf, one), 1.1e-7);
  const std::vector<double> p2{0.5, 0.5}, y2{1.0, 0.0};
  EXPECT_NEAR(bce_loss<double>(p2, y2), 2 * std::log(2.0), 1e-15);
  EXPECT_NEAR(bce_loss<double>(p2, y2, Reduction::mean), std::log(2.0), 1e-15);
}

TEST(Loss, ClampKeepsLossFinite) {
  const std::vector<double> p{0.0, 1.0}, y{1.0, 0.0};
  const double l = bce_loss<double>(p, y);
  EXPECT_TRUE(std::isfinite(l));
  EXPECT_NEAR(l, -2 * std::log(kProbabilityClamp), 1e-9);
  EXPECT_THROW(bce_loss<double>(std::vector<double>{}, std::vector<double>{}), ShapeError);
}

TEST(Loss, LogitGradient) {
  EXPECT_DOUBLE_EQ(bce_grad_logit(0.7, 1.0), -0.3);
  EXPECT_DOUBLE_EQ(bce_grad_logit(0.7, 0.0), 0.7);
  EXPECT_EQ(bce_grad_logit(1e-9, 1.0), 0.0);
}

TEST(Model, ZeroHeadPredictsHalf) {
  Model<double> m;
  m.initialize(1, /*zero_head=*/true);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(m.predict(test::random_input(rng, 2, 6, 5, 7)), 0.5);
}

TEST(Model, ClassifyIsStrict) {
  EXPECT_EQ(classify(0.7), 1);
  EXPECT_EQ(classify(0.5), 0);
  EXPECT_EQ(classify(0.2), 0);
}

TEST(Model, DefaultHeadInputIs512) { EXPECT_EQ(ArchitectureConfig{}.mlp_input(), 512); }

TEST(Model, BackwardWithoutForwardIsUsageError) {
  Model<double> m;
  Model<double> g;
  Model<double>::Tape tape;
  EXPECT_THROW(m.backward(tape, 1.0, g), UsageError);
}

TEST(Model, WrongChannelCountNamesConv1) {
  Model<double> m;
  m.initialize(1);
  std::mt19937_64 rng(9);
  try {
    m.predict(test::random_input(rng, 3, 4, 4, 4));
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("conv1"), std::string::npos);
  }
}

TEST(Model, InitializationIsSeededAndBounded) {
  Model<double> a, b, c;
  a.initialize(5);
  b.initialize(5);
  c.initialize(6);
  EXPECT_EQ(a.flatten(), b.flatten());
  EXPECT_NE(a.flatten(), c.flatten());
  const double limit = std::sqrt(6.0 / (27.0 * 2 + 27.0 * 8));
  for (Index i = 0; i < a.conv1.kernels.size(); ++i) EXPECT_LE(std::abs(a.conv1.kernels.data()[i]), limit);
}

TEST(Model, FlattenAssignRoundTrip) {
  Model<double> a, b;
  a.initialize(3);
  b.assign(a.flatten());
  EXPECT_EQ(a.flatten(), b.flatten());
  EXPECT_EQ(a.parameter_count(), 2u * 8 * 27 + 8 + 8 * 8 * 27 + 8 + 512 * 64 + 64 + 64 + 1);
  EXPECT_THROW(b.assign(std::vector<double>(3)), ShapeError);
}

TEST(Model, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(10);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Model<double> m(test::miniature_architecture());
    m.initialize(seed);
    const auto x = test::random_input(rng, 2, 6, 6, 10);
    const auto r = test::check_gradients(m, x, static_cast<double>(seed % 2));
    EXPECT_LE(r.max_relative_error, 1e-4) << r.worst;
  }
}

TEST(Model, InputGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  Model<double> m(test::miniature_architecture());
  m.initialize(11);
  auto x = test::random_input(rng, 2, 4, 5, 6);
  Model<double>::Tape tape;
  const double p = m.forward(x, tape);
  Model<double> g(m.arch);
  g.set_zero();
  FeatureMap<double> gx;
  m.backward(tape, bce_grad_logit(p, 1.0), g, &gx);
  const double h = 1e-5;
  for (Index i = 0; i < x.size(); ++i) {
    const double saved = x.data()[i];
    x.data()[i] = saved + h;
    const double up = test::sample_loss(m, x, 1.0);
    x.data()[i] = saved - h;
    const double down = test::sample_loss(m, x, 1.0);
    x.data()[i] = saved;
    const double fd = (up - down) / (2 * h);
    EXPECT_LE(std::abs(gx.data()[i] - fd) / std::max(std::abs(fd), 1e-8), 1e-4) << "input cell " << i;
  }
}

TEST(Model, FloatAndDoubleAgree) {
  Model<double> m;
  m.initialize(12);
  std::mt19937_64 rng(12);
  const auto x = test::random_input(rng, 2, 6, 6, 8);
  const auto mf = m.cast<float>();
  const FeatureMap<float> xf = x.cast<float>();
  EXPECT_NEAR(mf.predict(xf), m.predict(x), 1e-5);
}

}  // namespace
}  // namespace geolink::nn
