#include "geolink/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <spdlog/spdlog.h>

#include "geolink/error.hpp"

namespace geolink {

TimeTransform parse_time_transform(std::string_view s) {
  if (s == "log_days") return TimeTransform::log_days;
  if (s == "identity") return TimeTransform::identity;
  throw UsageError("time transform must be 'log_days' or 'identity', got '" + std::string(s) + "'");
}

const char* to_string(TimeTransform t) { return t == TimeTransform::identity ? "identity" : "log_days"; }

double time_transform(double delta_seconds, const TensorConfig& config) {
  if (config.time_transform == TimeTransform::identity) return delta_seconds;
  return std::log1p(delta_seconds / config.time_scale);
}

namespace {

// Kept window [first, size) of the most recent `limit` records.
template <class Record>
std::size_t recent_begin(const std::vector<Record>& records, std::size_t limit) {
  return records.size() > limit ? records.size() - limit : 0;
}

void validate(const TensorConfig& c) {
  if (c.doc_len == 0 || c.max_docs == 0 || c.max_checkins == 0)
    throw UsageError("tensor config: doc_len, max_docs and max_checkins must be >= 1");
  if (!(c.time_scale > 0.0)) throw UsageError("tensor config: time_scale must be > 0");
}

}  // namespace

InteractiveTensor build_tensor(const TextSequence& text, const LocationSequence& location,
                               const CorrelationMatrix& matrix, const TensorConfig& config) {
  validate(config);
  if (text.empty() && location.empty())
    throw Error("cannot build a tensor for " + text.user_id + " / " + location.user_id + ": both sequences are empty");
  if (text.empty() || location.empty())
    spdlog::warn("pair {} / {}: one sequence is empty, tensor is all zero", text.user_id, location.user_id);

  const auto n_docs = static_cast<Eigen::Index>(config.max_docs);
  const auto n_checkins = static_cast<Eigen::Index>(config.max_checkins);
  const auto k_len = static_cast<Eigen::Index>(config.doc_len);

  InteractiveTensor t;
  t.values.resize(n_docs, n_checkins, k_len, 2);
  t.values.setZero();

  const auto doc0 = recent_begin(text.records, config.max_docs);
  const auto chk0 = recent_begin(location.records, config.max_checkins);
  t.real_docs = text.records.size() - doc0;
  t.real_checkins = location.records.size() - chk0;

  std::vector<std::optional<std::size_t>> columns(t.real_checkins);
  for (std::size_t j = 0; j < t.real_checkins; ++j)
    columns[j] = matrix.category_column(location_key(location.records[chk0 + j], matrix.key));

  for (std::size_t i = 0; i < t.real_docs; ++i) {
    const auto& doc = text.records[doc0 + i];
    const auto n_words = std::min(doc.tokens.size(), config.doc_len);
    std::vector<std::size_t> rows(n_words);
    for (std::size_t k = 0; k < n_words; ++k) rows[k] = matrix.word_row(doc.tokens[k]);
    for (std::size_t j = 0; j < t.real_checkins; ++j) {
      const auto& chk = location.records[chk0 + j];
      const double gap = time_transform(static_cast<double>(std::llabs(doc.time - chk.time)), config);
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      for (std::size_t k = 0; k < n_words; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        t.values(ii, jj, kk, 0) =
            columns[j] ? matrix.values(static_cast<Eigen::Index>(rows[k]), static_cast<Eigen::Index>(*columns[j])) : 0.0;
        t.values(ii, jj, kk, 1) = gap;
      }
    }
  }
  return t;
}

std::vector<Evidence> explain(const TextSequence& text, const LocationSequence& location,
                              const CorrelationMatrix& matrix, const TensorConfig& config, std::size_t top_n) {
  const auto t = build_tensor(text, location, matrix, config);
  const auto doc0 = text.records.size() - t.real_docs;
  const auto chk0 = location.records.size() - t.real_checkins;

  std::vector<Evidence> cells;
  for (std::size_t i = 0; i < t.real_docs; ++i) {
    const auto& doc = text.records[doc0 + i];
    for (std::size_t j = 0; j < t.real_checkins; ++j) {
      const auto& chk = location.records[chk0 + j];
      for (std::size_t k = 0; k < std::min(doc.tokens.size(), config.doc_len); ++k) {
        const double v = t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j),
                                  static_cast<Eigen::Index>(k), 0);
        if (v == 0.0) continue;
        cells.push_back({doc0 + i, chk0 + j, k, doc.tokens[k], location_key(chk, matrix.key), v,
                         std::llabs(doc.time - chk.time)});
      }
    }
  }
  std::stable_sort(cells.begin(), cells.end(),
                   [](const Evidence& a, const Evidence& b) { return a.correlation > b.correlation; });
  if (cells.size() > top_n) cells.resize(top_n);
  return cells;
}

void write_explain_csv(const std::vector<Evidence>& evidence, std::ostream& out) {
  out << "doc_idx,checkin_idx,word,category,correlation,time_gap_seconds\n";
  char buf[64];
  for (const auto& e : evidence) {
    std::snprintf(buf, sizeof buf, "%.17g", e.correlation);
    out << e.doc_index << ',' << e.checkin_index << ',' << e.word << ',' << e.category << ',' << buf << ','
        << e.time_gap_seconds << '\n';
  }
}

}  // namespace geolink
