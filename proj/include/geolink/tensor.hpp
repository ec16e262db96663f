#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include <unsupported/Eigen/CXX11/Tensor>

#include "geolink/correlation.hpp"
#include "geolink/corpus.hpp"

namespace geolink {

enum class TimeTransform : std::uint8_t { log_days, identity };

TimeTransform parse_time_transform(std::string_view s);
const char* to_string(TimeTransform t);

struct TensorConfig {
  std::size_t doc_len = 50;       ///< K, words per document after truncation/padding
  std::size_t max_docs = 32;      ///< most recent posts kept
  std::size_t max_checkins = 32;  ///< most recent check-ins kept
  TimeTransform time_transform = TimeTransform::log_days;
  double time_scale = 86400.0;  ///< seconds per unit inside the log transform
};

/// Maps an absolute time gap to the second tensor channel.
/// log_days: ln(1 + delta / time_scale); identity: delta.
double time_transform(double delta_seconds, const TensorConfig& config);

/// Per-pair interactive tensor, shape (docs, checkins, doc_len, 2).
/// Channel 0 holds M[word, location], channel 1 the transformed time gap.
struct InteractiveTensor {
  Eigen::Tensor<double, 4, Eigen::RowMajor> values;
  std::size_t real_docs = 0;      ///< rows before padding
  std::size_t real_checkins = 0;  ///< columns before padding

  /// Channel-first copy (2, docs, checkins, doc_len) for the convolutional network.
  template <class Scalar>
  Eigen::Tensor<Scalar, 4, Eigen::RowMajor> as_feature_map() const {
    const Eigen::array<Eigen::Index, 4> order{3, 0, 1, 2};
    // Shuffle and cast are evaluated separately: fusing them trips Eigen's
    // block evaluator when the scalar types differ.
    const Eigen::Tensor<double, 4, Eigen::RowMajor> channel_first = values.shuffle(order);
    if constexpr (std::is_same_v<Scalar, double>)
      return channel_first;
    else
      return channel_first.template cast<Scalar>();
  }
};

/// Throws Error when both sequences are empty; one empty sequence gives an
/// all-zero tensor and a warning.
InteractiveTensor build_tensor(const TextSequence& text, const LocationSequence& location,
                               const CorrelationMatrix& matrix, const TensorConfig& config);

/// One nonzero correlation cell of a pair, for inspection.
struct Evidence {
  std::size_t doc_index = 0;      ///< index into the user's full, time-sorted post sequence
  std::size_t checkin_index = 0;  ///< index into the full check-in sequence
  std::size_t word_position = 0;
  std::string word;
  std::string category;
  double correlation = 0.0;
  std::int64_t time_gap_seconds = 0;
};

/// Top `top_n` cells by correlation (ties in scan order); zero cells are never reported.
std::vector<Evidence> explain(const TextSequence& text, const LocationSequence& location,
                              const CorrelationMatrix& matrix, const TensorConfig& config, std::size_t top_n);

/// CSV with header `doc_idx,checkin_idx,word,category,correlation,time_gap_seconds`.
void write_explain_csv(const std::vector<Evidence>& evidence, std::ostream& out);

}  // namespace geolink
