#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geolink/corpus.hpp"
#include "geolink/correlation.hpp"
#include "geolink/network/model.hpp"
#include "geolink/tensor.hpp"

namespace geolink {

enum class OptimizerKind : std::uint8_t { sgd, adam };
enum class Selection : std::uint8_t { auc, loss };

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 100;
  std::size_t patience = 20;
  std::uint64_t seed = 42;
  OptimizerKind optimizer = OptimizerKind::adam;
  nn::Reduction loss_reduction = nn::Reduction::mean;
  Selection selection = Selection::auc;
  std::size_t threads = 1;
  /// Stop once an epoch's mean training loss falls below this value (0 disables).
  double target_train_loss = 0.0;
};

void validate(const TrainConfig& config);

struct AdamConstants {
  static constexpr double beta1 = 0.9;
  static constexpr double beta2 = 0.999;
  static constexpr double eps = 1e-8;
};

struct OptimizerState {
  std::uint64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;
};

/// p <- p - lr * g
void sgd_step(std::span<double> params, std::span<const double> grads, double learning_rate);

/// Bias-corrected Adam update; grows `state` on first use.
void adam_step(std::span<double> params, std::span<const double> grads, OptimizerState& state, double learning_rate);

struct EpochRecord {
  std::size_t epoch = 0;  ///< 1-based
  double train_loss = 0.0;  ///< mean per-sample loss over the epoch
  double valid_auc = 0.0;
  double valid_loss = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

/// Everything needed to continue a run bit-identically.
struct TrainerState {
  nn::Model<double> model;
  nn::Model<double> best_model;
  OptimizerState optimizer;
  std::size_t epochs_done = 0;
  double best_score = 0.0;
  std::size_t since_improvement = 0;
  std::vector<EpochRecord> history;
};

struct TrainResult {
  nn::Model<double> best;
  std::vector<EpochRecord> history;
  TrainerState state;
};

/// Builds network inputs for labeled pairs from immutable platform data.
class PairTensorSource {
 public:
  PairTensorSource(const TextPlatform& text, const LocationPlatform& location, const CorrelationMatrix& matrix,
                   const TensorConfig& config)
      : text_(text), location_(location), matrix_(matrix), config_(config) {}

  nn::FeatureMap<double> operator()(const std::string& text_user, const std::string& location_user) const;
  nn::FeatureMap<double> operator()(const LabeledPair& pair) const { return (*this)(pair.text_user, pair.location_user); }
  const TensorConfig& config() const { return config_; }

 private:
  const TextPlatform& text_;
  const LocationPlatform& location_;
  const CorrelationMatrix& matrix_;
  TensorConfig config_;
};

/// Runs `f(i)` for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& f);

/// Probabilities for `pairs`, in order.
std::vector<double> score_pairs(const nn::Model<double>& model, const std::vector<LabeledPair>& pairs,
                                const PairTensorSource& source, std::size_t threads = 1);

/// Accumulates the batch gradient (in `grads`, which is zeroed first) and
/// returns the reduced batch loss. Per-sample work may run in parallel; the
/// reduction order is fixed, so results do not depend on the thread count.
double batch_gradient(const nn::Model<double>& model, const std::vector<nn::FeatureMap<double>>& inputs,
                      std::span<const double> labels, nn::Reduction reduction, nn::Model<double>& grads,
                      std::size_t threads = 1);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch training with per-epoch validation and best-model retention.
/// Pass `resume` to continue from a saved state.
TrainResult train(const PairDataset& dataset, const PairTensorSource& source, const nn::ArchitectureConfig& arch,
                  const TrainConfig& config, const TrainerState* resume = nullptr,
                  const EpochCallback& on_epoch = {});

void write_history_csv(const std::vector<EpochRecord>& history, const std::string& path);

}  // namespace geolink
