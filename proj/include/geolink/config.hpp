#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "geolink/corpus.hpp"
#include "geolink/correlation.hpp"
#include "geolink/network/model.hpp"
#include "geolink/synthetic.hpp"
#include "geolink/tensor.hpp"
#include "geolink/trainer.hpp"

namespace geolink {

/// Every tunable of the pipeline. Populated from a `key = value` file and
/// overridden by command-line flags; see README for the key list.
struct RunConfig {
  // files
  std::string text_path;
  std::string location_path;
  std::string links_path;
  std::string stopwords_path;
  std::string external_path;
  std::string matrix_path;
  std::string matrix_csv_path;
  std::string checkpoint_path;
  std::string history_path;
  std::string report_path;
  std::string sweep_path;
  std::string explain_path;

  std::uint64_t seed = 42;
  std::size_t threads = 1;

  // corpus
  std::size_t negative_ratio = 1;
  SplitFractions fractions;
  bool drop_same_timestamp = false;

  // correlation
  double epsilon = 1.0;
  std::int64_t window_seconds = 86400;
  std::int64_t min_count = 2;
  LocationKey location_key = LocationKey::category;

  TensorConfig tensor;
  nn::ArchitectureConfig arch;
  TrainConfig train;

  SynthConfig synth;
  std::size_t synth_external_pairs = 0;

  std::vector<double> sweep_ratios{0.5, 0.6, 0.7, 0.8, 0.9};
  std::size_t explain_top_n = 20;

  /// Pushes `seed` and `threads` into the per-module configs.
  void finalize();
};

/// Sets one key; throws UsageError for unknown keys or unparsable values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Applies `key = value` lines; `#` starts a comment.
void apply_config_file(RunConfig& config, const std::string& path);

/// Sorted list of accepted keys.
std::vector<std::string> config_keys();

}  // namespace geolink
