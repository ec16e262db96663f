#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "geolink/corpus.hpp"

namespace geolink {

inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::size_t kPadIndex = 0;
inline constexpr std::size_t kUnkIndex = 1;

/// What identifies a location column of the correlation matrix.
enum class LocationKey : std::uint8_t { category, instance };

LocationKey parse_location_key(std::string_view s);
const std::string& location_key(const LocationRecord& record, LocationKey key);

/// Bidirectional word <-> row index map. Index 0 is PAD and 1 is UNK.
class Vocabulary {
 public:
  Vocabulary();

  std::size_t add(std::string_view word);
  std::optional<std::size_t> find(std::string_view word) const;
  /// Row of `word`, or kUnkIndex when absent.
  std::size_t index_or_unk(std::string_view word) const;
  const std::string& word(std::size_t index) const { return words_[index]; }
  const std::vector<std::string>& words() const { return words_; }
  std::size_t size() const { return words_.size(); }

  bool operator==(const Vocabulary& other) const { return words_ == other.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Sorted distinct location keys of a platform.
std::vector<std::string> location_index(const LocationPlatform& location, LocationKey key);

/// Sparse (word, location) co-occurrence table with per-word totals.
class CoocCounts {
 public:
  CoocCounts() = default;
  explicit CoocCounts(std::vector<std::string> categories);

  void add(std::string_view word, std::size_t category, std::int64_t n = 1);
  std::int64_t count(std::size_t word, std::size_t category) const;
  std::int64_t count(std::string_view word, std::string_view category) const;
  std::int64_t word_total(std::size_t word) const { return word < word_totals_.size() ? word_totals_[word] : 0; }
  std::optional<std::size_t> category_index(std::string_view category) const;

  const Vocabulary& vocab() const { return vocab_; }
  const std::vector<std::string>& categories() const { return categories_; }
  /// Number of stored nonzero (word, category) cells.
  std::size_t nonzeros() const { return cells_.size(); }

  template <class F>
  void for_each(F&& f) const {
    for (const auto& [key, n] : cells_) f(static_cast<std::size_t>(key / categories_.size()),
                                          static_cast<std::size_t>(key % categories_.size()), n);
  }

  /// Adds `other` cell by cell. Category lists must be identical.
  void merge(const CoocCounts& other);

  /// Vocabulary sorted (after PAD and UNK); words with total below `min_count`
  /// are folded into UNK.
  CoocCounts compacted(std::int64_t min_count) const;

 private:
  std::uint64_t key(std::size_t word, std::size_t category) const {
    return static_cast<std::uint64_t>(word) * categories_.size() + category;
  }

  Vocabulary vocab_;
  std::vector<std::string> categories_;
  std::unordered_map<std::uint64_t, std::int64_t> cells_;
  std::vector<std::int64_t> word_totals_;
};

/// For every linked pair, each token of a post counts once for every check-in
/// within `window_seconds` of the post.
CoocCounts count_cooccurrences(const std::vector<Link>& links, const TextPlatform& text,
                               const LocationPlatform& location, const std::vector<std::string>& categories,
                               std::int64_t window_seconds, LocationKey key = LocationKey::category);

struct TokenizedPair {
  std::vector<std::string> tokens;
  std::string category;
};

/// JSONL with {"text", "category"}; text runs through preprocess_text.
std::vector<TokenizedPair> load_external_pairs(const std::string& path, const StopwordSet& stopwords,
                                               std::size_t max_len);

struct ExternalDelta {
  CoocCounts delta;
  std::size_t skipped = 0;  ///< pairs whose category is not in the index
};

ExternalDelta ingest_external_pairs(const std::vector<TokenizedPair>& pairs,
                                    const std::vector<std::string>& categories);

/// Dense word x location tf-idf style correlation table.
struct CorrelationMatrix {
  using Values = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Values values;
  Vocabulary vocab;
  std::vector<std::string> categories;
  double epsilon = 1.0;
  LocationKey key = LocationKey::category;

  std::size_t word_row(std::string_view word) const { return vocab.index_or_unk(word); }
  std::optional<std::size_t> category_column(std::string_view category) const;
  /// FNV-1a over the serialized content; embedded in checkpoints.
  std::uint64_t content_hash() const;

  bool operator==(const CorrelationMatrix& other) const;
};

/// M(w,l) = ln(1 + c(w,l)) * ln(1 + total(w) / (eps + c(w,l))).
CorrelationMatrix build_matrix(const CoocCounts& counts, double epsilon, LocationKey key = LocationKey::category);

void save_matrix(const CorrelationMatrix& matrix, const std::string& path);
CorrelationMatrix load_matrix(const std::string& path);
/// `word,category,value` rows for nonzero entries.
void export_matrix_csv(const CorrelationMatrix& matrix, const std::string& path);

}  // namespace geolink
