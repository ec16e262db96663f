#include "geolink/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "geolink/error.hpp"
#include "geolink/rng.hpp"

namespace geolink {
namespace {

// The vocabulary is split evenly into category-owned subsets; any remainder
// words belong to no category and only show up in unfocused posts.
std::size_t topical_per_category(const SynthConfig& c) { return c.vocab_size / c.n_categories; }

void validate(const SynthConfig& c) {
  if (c.n_users == 0 || c.vocab_size == 0 || c.n_categories == 0 || c.records_per_user == 0 ||
      c.words_per_post == 0 || c.external_words == 0 || c.venues_per_category == 0 ||
      c.favorite_categories == 0 || c.time_slots == 0)
    throw Error("synthetic generator: all counts must be >= 1");
  if (c.favorite_categories > c.n_categories)
    throw Error("synthetic generator: favorite_categories must be <= n_categories");
  if (c.vocab_size < c.n_categories) throw Error("synthetic generator: vocab_size must be >= n_categories");
  if (c.signal_strength < 0.0 || c.signal_strength > 1.0)
    throw Error("synthetic generator: signal_strength must lie in [0, 1]");
  if (c.jitter_seconds < 0 || c.span_days <= 0.0) throw Error("synthetic generator: bad timing parameters");
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

std::string topical_text(const SynthConfig& c, std::size_t category, std::size_t n_words, Rng& rng) {
  const auto per_cat = topical_per_category(c);
  std::uniform_int_distribution<std::size_t> pick(0, per_cat - 1);
  std::vector<std::string> words(n_words);
  for (auto& w : words) w = synthetic_word(category * per_cat + pick(rng));
  return join(words);
}

}  // namespace

std::string synthetic_word(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "w%05zu", index);
  return buf;
}

std::string synthetic_category(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "cat%03zu", index);
  return buf;
}

std::vector<std::string> topical_words(const SynthConfig& config, std::size_t category) {
  const auto per_cat = topical_per_category(config);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < per_cat; ++i) out.push_back(synthetic_word(category * per_cat + i));
  return out;
}

SyntheticCorpus generate_synthetic(const SynthConfig& c) {
  validate(c);
  Rng rng(derive_seed(c.seed, "synthetic"));

  // Location account ids are a permutation of person ids so that ids carry no linkage hint.
  std::vector<std::size_t> loc_ids(c.n_users);
  for (std::size_t i = 0; i < c.n_users; ++i) loc_ids[i] = i;
  std::shuffle(loc_ids.begin(), loc_ids.end(), rng);

  // Everyone is active around the same `time_slots` occasions, evenly spread
  // over the span, so timing alone cannot tell a linked pair from a random one.
  const double slot_gap = c.span_days * 86400.0 / static_cast<double>(c.time_slots);
  std::vector<std::int64_t> slot_times(c.time_slots);
  for (std::size_t k = 0; k < c.time_slots; ++k)
    slot_times[k] = c.start_time + std::llround((static_cast<double>(k) + 0.5) * slot_gap);
  std::uniform_int_distribution<std::size_t> any_slot(0, c.time_slots - 1);
  std::uniform_int_distribution<std::int64_t> jitter(-c.jitter_seconds, c.jitter_seconds);
  std::uniform_int_distribution<std::size_t> pick_favorite(0, c.favorite_categories - 1);
  std::uniform_int_distribution<std::size_t> pick_venue(0, c.venues_per_category - 1);
  std::uniform_int_distribution<std::size_t> any_word(0, c.vocab_size - 1);
  std::bernoulli_distribution topical(c.signal_strength);

  SyntheticCorpus out;
  out.text.reserve(c.n_users * c.records_per_user);
  out.location.reserve(c.n_users * c.records_per_user);
  char buf[64];
  for (std::size_t person = 0; person < c.n_users; ++person) {
    std::snprintf(buf, sizeof buf, "t%05zu", person);
    const std::string text_user = buf;
    std::snprintf(buf, sizeof buf, "l%05zu", loc_ids[person]);
    const std::string loc_user = buf;
    out.links.push_back({text_user, loc_user});

    std::vector<std::size_t> categories(c.n_categories);
    for (std::size_t i = 0; i < c.n_categories; ++i) categories[i] = i;
    std::shuffle(categories.begin(), categories.end(), rng);

    // One occasion per record: distinct slots while there are enough of them.
    std::vector<std::size_t> slots(c.time_slots);
    for (std::size_t k = 0; k < c.time_slots; ++k) slots[k] = k;
    std::shuffle(slots.begin(), slots.end(), rng);
    slots.resize(std::min(c.time_slots, c.records_per_user));
    while (slots.size() < c.records_per_user) slots.push_back(any_slot(rng));

    std::vector<LocationRecord> checkins(c.records_per_user);
    std::vector<std::int64_t> post_times(c.records_per_user);
    for (std::size_t r = 0; r < c.records_per_user; ++r) {
      const auto at = slot_times[slots[r]];
      checkins[r].user_id = loc_user;
      checkins[r].time = std::max<std::int64_t>(0, at + jitter(rng));
      post_times[r] = std::max<std::int64_t>(0, at + jitter(rng));
      const auto cat = categories[pick_favorite(rng)];
      checkins[r].category = synthetic_category(cat);
      std::snprintf(buf, sizeof buf, "v%03zu_%02zu", cat, pick_venue(rng));
      checkins[r].location_id = buf;
    }

    std::vector<RawTextRecord> posts;
    for (std::size_t r = 0; r < c.records_per_user; ++r) {
      const auto& checkin = checkins[r];
      RawTextRecord post{text_user, post_times[r], {}};
      if (topical(rng)) {
        const auto cat = static_cast<std::size_t>(std::stoul(checkin.category.substr(3)));
        post.text = topical_text(c, cat, c.words_per_post, rng);
      } else {
        std::vector<std::string> words;
        for (std::size_t i = 0; i < c.words_per_post; ++i) words.push_back(synthetic_word(any_word(rng)));
        post.text = join(words);
      }
      posts.push_back(std::move(post));
    }
    std::stable_sort(checkins.begin(), checkins.end(),
                     [](const LocationRecord& a, const LocationRecord& b) { return a.time < b.time; });
    std::stable_sort(posts.begin(), posts.end(),
                     [](const RawTextRecord& a, const RawTextRecord& b) { return a.time < b.time; });
    out.text.insert(out.text.end(), posts.begin(), posts.end());
    out.location.insert(out.location.end(), checkins.begin(), checkins.end());
  }
  return out;
}

std::vector<ExternalPair> generate_external_pairs(const SynthConfig& c, std::size_t n_pairs,
                                                  std::uint64_t seed) {
  validate(c);
  Rng rng(derive_seed(seed, "external"));
  std::uniform_int_distribution<std::size_t> pick_category(0, c.n_categories - 1);
  std::vector<ExternalPair> out;
  out.reserve(n_pairs);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const auto cat = pick_category(rng);
    out.push_back({topical_text(c, cat, c.external_words, rng), synthetic_category(cat)});
  }
  return out;
}

void write_synthetic(const SyntheticCorpus& corpus, const SyntheticPaths& paths) {
  using nlohmann::json;
  {
    std::ofstream out(paths.text, std::ios::binary);
    if (!out) throw Error("cannot write " + paths.text);
    for (const auto& r : corpus.text)
      out << json{{"user_id", r.user_id}, {"time", r.time}, {"text", r.text}}.dump() << '\n';
  }
  {
    std::ofstream out(paths.location, std::ios::binary);
    if (!out) throw Error("cannot write " + paths.location);
    for (const auto& r : corpus.location)
      out << json{{"user_id", r.user_id}, {"time", r.time}, {"location_id", r.location_id}, {"category", r.category}}
                 .dump()
          << '\n';
  }
  save_links(corpus.links, paths.links);
}

void write_external_pairs(const std::vector<ExternalPair>& pairs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  for (const auto& p : pairs) out << nlohmann::json{{"text", p.text}, {"category", p.category}}.dump() << '\n';
}

}  // namespace geolink
