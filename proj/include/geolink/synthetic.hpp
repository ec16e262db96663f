#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "geolink/corpus.hpp"

namespace geolink {

/// Parameters of the planted-correlation generator. Each synthetic person owns
/// one account per platform and takes part in `records_per_user` occasions,
/// chosen among `time_slots` occasions shared by everyone and evenly spread
/// over `span_days`. Each occasion yields one check-in and one post, each
/// within `jitter_seconds` of the occasion. With probability `signal_strength`
/// all of the post's words come from the check-in's category, otherwise they
/// are drawn uniformly from the whole vocabulary. A person's check-ins fall
/// uniformly in `favorite_categories` categories of their own.
struct SynthConfig {
  std::size_t n_users = 500;
  std::size_t vocab_size = 20000;
  std::size_t n_categories = 20;
  double signal_strength = 0.8;
  std::size_t records_per_user = 40;
  std::uint64_t seed = 42;

  std::int64_t start_time = 1356998400;  // 2013-01-01T00:00:00Z
  double span_days = 60.0;
  std::size_t time_slots = 40;
  std::int64_t jitter_seconds = 3 * 3600;
  std::size_t words_per_post = 8;
  std::size_t external_words = 20;  ///< words per external text
  std::size_t venues_per_category = 10;
  std::size_t favorite_categories = 3;
};

struct RawTextRecord {
  std::string user_id;
  std::int64_t time = 0;
  std::string text;
};

struct ExternalPair {
  std::string text;
  std::string category;
};

struct SyntheticCorpus {
  std::vector<RawTextRecord> text;
  std::vector<LocationRecord> location;
  std::vector<Link> links;
};

std::string synthetic_word(std::size_t index);
std::string synthetic_category(std::size_t index);

/// Words owned by `category`; the topical subsets of different categories are disjoint.
std::vector<std::string> topical_words(const SynthConfig& config, std::size_t category);

/// Throws Error when vocab_size < n_categories or a count is zero.
SyntheticCorpus generate_synthetic(const SynthConfig& config);

/// External text-category pairs drawn from the same topical structure, each
/// text carrying `external_words` words of its category.
std::vector<ExternalPair> generate_external_pairs(const SynthConfig& config, std::size_t n_pairs,
                                                  std::uint64_t seed);

struct SyntheticPaths {
  std::string text;
  std::string location;
  std::string links;
};

void write_synthetic(const SyntheticCorpus& corpus, const SyntheticPaths& paths);
void write_external_pairs(const std::vector<ExternalPair>& pairs, const std::string& path);

}  // namespace geolink
