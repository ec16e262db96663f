#pragma once

#include <optional>
#include <string>
#include <vector>

#include "geolink/config.hpp"
#include "geolink/metrics.hpp"

namespace geolink {

struct Platforms {
  TextPlatform text;
  LocationPlatform location;
  LoadReport text_report;
  LoadReport location_report;
};

/// Loads both platform files, preprocessing text with the configured stopwords
/// and the tensor word limit.
Platforms load_platforms(const RunConfig& config);

struct Workspace {
  Platforms platforms;
  std::vector<Link> links;
  PairDataset dataset;
};

/// Platforms, links, and the seeded labeled/split pair dataset.
Workspace load_workspace(const RunConfig& config);

/// Correlation matrix from `links` (normally the training positives), pooled
/// with `external` pairs when given.
CorrelationMatrix build_correlation(const Platforms& platforms, const std::vector<Link>& links,
                                    const RunConfig& config, const std::vector<TokenizedPair>* external = nullptr);

TrainResult train_classifier(const Platforms& platforms, const PairDataset& dataset,
                             const CorrelationMatrix& matrix, const RunConfig& config,
                             const TrainerState* resume = nullptr);

EvalReport evaluate_split(const nn::Model<double>& model, const Platforms& platforms, const PairDataset& dataset,
                          Split split, const CorrelationMatrix& matrix, const TensorConfig& tensor,
                          std::size_t threads = 1);

struct SweepRow {
  double ratio = 0.0;
  bool external = false;
  std::optional<double> auc;
};

/// For each ratio, keeps that fraction of training pairs (hence training links),
/// rebuilds the correlation matrix from the kept links and retrains; test split
/// fixed. With `external` non-null each ratio is run with and without it.
std::vector<SweepRow> label_ratio_sweep(const Workspace& workspace, const RunConfig& config,
                                        const std::vector<double>& ratios,
                                        const std::vector<TokenizedPair>* external);

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

}  // namespace geolink
