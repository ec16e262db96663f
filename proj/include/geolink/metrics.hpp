#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include <nlohmann/json.hpp>

namespace geolink {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

struct EvalReport {
  double f1 = 0.0;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::optional<double> auc;  ///< empty when only one class is present
  ConfusionCounts counts;
  std::size_t n = 0;
  double threshold = 0.5;
};

/// Area under the ROC curve as the Mann-Whitney statistic with ties counted 0.5.
/// Empty when either class is missing.
std::optional<double> auc_rank(std::span<const double> scores, std::span<const int> labels);

/// Confusion counts at `threshold` (score > threshold is positive), F1, accuracy and AUC.
EvalReport evaluate(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);

nlohmann::ordered_json to_json(const EvalReport& report);

}  // namespace geolink
