#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "geolink/text.hpp"

namespace geolink {

/// One post on the text platform.
struct TextRecord {
  std::string user_id;
  std::int64_t time = 0;
  std::vector<std::string> tokens;
};

/// One check-in on the location platform.
struct LocationRecord {
  std::string user_id;
  std::int64_t time = 0;
  std::string location_id;
  std::string category;
};

/// All records of one account, sorted by time (stable for equal times).
template <class Record>
struct UserSequence {
  std::string user_id;
  std::vector<Record> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

using TextSequence = UserSequence<TextRecord>;
using LocationSequence = UserSequence<LocationRecord>;

// std::map keeps iteration order independent of hashing, which the seeded
// sampling code relies on.
using TextPlatform = std::map<std::string, TextSequence>;
using LocationPlatform = std::map<std::string, LocationSequence>;

struct Link {
  std::string text_user;
  std::string location_user;

  auto operator<=>(const Link&) const = default;
};

enum class Split : std::uint8_t { train, valid, test, unassigned };

const char* to_string(Split split);

struct LabeledPair {
  std::string text_user;
  std::string location_user;
  int label = 0;
  Split split = Split::unassigned;
};

struct PairDataset {
  std::vector<LabeledPair> pairs;

  std::vector<LabeledPair> in_split(Split split) const;
  std::size_t count(Split split, int label) const;
  std::vector<Link> positive_links(Split split) const;
};

struct LoadReport {
  std::size_t records_in = 0;  ///< non-blank input lines
  std::size_t records_out = 0;
  std::size_t malformed = 0;
  std::size_t dropped_empty = 0;  ///< text records with no tokens left
};

struct TextLoadOptions {
  StopwordSet stopwords;
  std::size_t max_len = 50;
};

template <class Platform>
struct Loaded {
  Platform platform;
  LoadReport report;
};

/// JSONL with {"user_id", "time", "text"}. Throws Error if the file cannot be read.
Loaded<TextPlatform> load_text_platform(const std::string& path, const TextLoadOptions& options);

/// JSONL with {"user_id", "time", "location_id", "category"}.
Loaded<LocationPlatform> load_location_platform(const std::string& path);

/// CSV with header `text_user_id,location_user_id`.
std::vector<Link> load_links(const std::string& path);
void save_links(const std::vector<Link>& links, const std::string& path);

/// Drops text/location records of a linked pair that carry the same timestamp.
/// Returns the number of records removed.
std::size_t drop_same_timestamp(TextPlatform& text, LocationPlatform& location,
                                const std::vector<Link>& links);

/// Draws `ratio * |positives|` non-linked pairs uniformly from
/// text_users x location_users, without duplicates. If fewer are available,
/// returns all of them and logs a warning.
std::vector<LabeledPair> sample_negatives(const std::vector<Link>& positives,
                                          const std::vector<std::string>& text_users,
                                          const std::vector<std::string>& location_users,
                                          std::size_t ratio, std::uint64_t seed);

struct SplitFractions {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
};

/// Label-stratified split. Throws Error for fewer than 10 pairs or fractions
/// that do not sum to one.
PairDataset split_dataset(std::vector<LabeledPair> pairs, const SplitFractions& fractions,
                          std::uint64_t seed);

/// Positives from `links` plus sampled negatives, split. Users are taken from
/// the loaded platforms.
PairDataset make_pair_dataset(const std::vector<Link>& links, const TextPlatform& text,
                              const LocationPlatform& location, std::size_t negative_ratio,
                              const SplitFractions& fractions, std::uint64_t seed);

/// Keeps `ratio` of the training pairs of each label (at least one each);
/// validation and test pairs are untouched.
PairDataset subsample_training(const PairDataset& dataset, double ratio, std::uint64_t seed);

}  // namespace geolink
