#include "geolink/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "geolink/error.hpp"
#include "geolink/rng.hpp"

namespace geolink {

using nlohmann::json;

const char* to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
    case Split::unassigned: break;
  }
  return "unassigned";
}

std::vector<LabeledPair> PairDataset::in_split(Split split) const {
  std::vector<LabeledPair> out;
  for (const auto& p : pairs)
    if (p.split == split) out.push_back(p);
  return out;
}

std::size_t PairDataset::count(Split split, int label) const {
  return static_cast<std::size_t>(std::count_if(pairs.begin(), pairs.end(), [&](const LabeledPair& p) {
    return p.split == split && p.label == label;
  }));
}

std::vector<Link> PairDataset::positive_links(Split split) const {
  std::vector<Link> out;
  for (const auto& p : pairs)
    if (p.split == split && p.label == 1) out.push_back({p.text_user, p.location_user});
  return out;
}

namespace {

template <class Record>
void sort_sequences(std::map<std::string, UserSequence<Record>>& platform) {
  for (auto& [_, seq] : platform)
    std::stable_sort(seq.records.begin(), seq.records.end(),
                     [](const Record& a, const Record& b) { return a.time < b.time; });
}

// Returns nullopt-like false when the line does not satisfy the schema.
bool read_time(const json& j, std::int64_t& time) {
  auto it = j.find("time");
  if (it == j.end() || !it->is_number_integer()) return false;
  time = it->get<std::int64_t>();
  return time >= 0;
}

bool read_string(const json& j, const char* key, std::string& out) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) return false;
  out = it->get<std::string>();
  return true;
}

template <class Parse>
LoadReport scan_jsonl(const std::string& path, Parse&& parse) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  LoadReport report;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++report.records_in;
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object() || !parse(j, report)) {
      ++report.malformed;
      spdlog::warn("{}:{}: malformed record skipped", path, line_no);
    }
  }
  return report;
}

}  // namespace

Loaded<TextPlatform> load_text_platform(const std::string& path, const TextLoadOptions& options) {
  Loaded<TextPlatform> out;
  out.report = scan_jsonl(path, [&](const json& j, LoadReport& report) {
    TextRecord rec;
    std::string text;
    if (!read_string(j, "user_id", rec.user_id) || !read_time(j, rec.time) || !read_string(j, "text", text))
      return false;
    rec.tokens = preprocess_text(text, options.stopwords, options.max_len);
    if (rec.tokens.empty()) {
      ++report.dropped_empty;
      return true;
    }
    auto& seq = out.platform[rec.user_id];
    seq.user_id = rec.user_id;
    seq.records.push_back(std::move(rec));
    ++report.records_out;
    return true;
  });
  sort_sequences(out.platform);
  if (out.report.malformed > 0)
    spdlog::warn("{}: {} malformed line(s) skipped", path, out.report.malformed);
  return out;
}

Loaded<LocationPlatform> load_location_platform(const std::string& path) {
  Loaded<LocationPlatform> out;
  out.report = scan_jsonl(path, [&](const json& j, LoadReport& report) {
    LocationRecord rec;
    if (!read_string(j, "user_id", rec.user_id) || !read_time(j, rec.time) ||
        !read_string(j, "location_id", rec.location_id) || !read_string(j, "category", rec.category) ||
        rec.category.empty())
      return false;
    auto& seq = out.platform[rec.user_id];
    seq.user_id = rec.user_id;
    seq.records.push_back(std::move(rec));
    ++report.records_out;
    return true;
  });
  sort_sequences(out.platform);
  if (out.report.malformed > 0)
    spdlog::warn("{}: {} malformed line(s) skipped", path, out.report.malformed);
  return out;
}

std::vector<Link> load_links(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read link file " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path + ": empty link file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "text_user_id,location_user_id")
    throw FormatError(path + ": expected header 'text_user_id,location_user_id'");
  std::vector<Link> links;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || comma == 0 || comma + 1 == line.size()) {
      spdlog::warn("{}:{}: malformed link skipped", path, line_no);
      continue;
    }
    links.push_back({line.substr(0, comma), line.substr(comma + 1)});
  }
  return links;
}

void save_links(const std::vector<Link>& links, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "text_user_id,location_user_id\n";
  for (const auto& l : links) out << l.text_user << ',' << l.location_user << '\n';
}

std::size_t drop_same_timestamp(TextPlatform& text, LocationPlatform& location,
                                const std::vector<Link>& links) {
  std::size_t removed = 0;
  for (const auto& link : links) {
    auto t = text.find(link.text_user);
    auto l = location.find(link.location_user);
    if (t == text.end() || l == location.end()) continue;
    std::set<std::int64_t> text_times, loc_times;
    for (const auto& r : t->second.records) text_times.insert(r.time);
    for (const auto& r : l->second.records) loc_times.insert(r.time);
    removed += std::erase_if(t->second.records, [&](const TextRecord& r) { return loc_times.contains(r.time); });
    removed += std::erase_if(l->second.records, [&](const LocationRecord& r) { return text_times.contains(r.time); });
  }
  return removed;
}

std::vector<LabeledPair> sample_negatives(const std::vector<Link>& positives,
                                          const std::vector<std::string>& text_users,
                                          const std::vector<std::string>& location_users,
                                          std::size_t ratio, std::uint64_t seed) {
  if (ratio == 0) throw UsageError("negative ratio must be >= 1");
  if (text_users.size() < 2 || location_users.size() < 2)
    throw Error("negative sampling needs at least 2 users on each platform");

  const std::set<Link> linked(positives.begin(), positives.end());
  const std::set<std::string> text_set(text_users.begin(), text_users.end());
  const std::set<std::string> loc_set(location_users.begin(), location_users.end());
  std::size_t linked_in_grid = 0;
  for (const auto& l : linked)
    if (text_set.contains(l.text_user) && loc_set.contains(l.location_user)) ++linked_in_grid;

  const std::size_t grid = text_users.size() * location_users.size();
  const std::size_t available = grid - linked_in_grid;
  std::size_t wanted = ratio * positives.size();
  Rng rng(derive_seed(seed, "negatives"));

  auto to_pair = [](const Link& l) { return LabeledPair{l.text_user, l.location_user, 0, Split::unassigned}; };
  std::vector<LabeledPair> out;

  if (wanted >= available || wanted * 2 > available) {
    if (wanted > available) {
      spdlog::warn("requested {} negatives but only {} non-linked pairs exist; using all", wanted, available);
      wanted = available;
    }
    std::vector<Link> pool;
    pool.reserve(available);
    for (const auto& t : text_users)
      for (const auto& l : location_users)
        if (Link c{t, l}; !linked.contains(c)) pool.push_back(std::move(c));
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(wanted);
    for (const auto& l : pool) out.push_back(to_pair(l));
    return out;
  }

  std::set<Link> chosen;
  std::uniform_int_distribution<std::size_t> pick_text(0, text_users.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_loc(0, location_users.size() - 1);
  while (out.size() < wanted) {
    Link c{text_users[pick_text(rng)], location_users[pick_loc(rng)]};
    if (linked.contains(c) || chosen.contains(c)) continue;
    chosen.insert(c);
    out.push_back(to_pair(c));
  }
  return out;
}

PairDataset split_dataset(std::vector<LabeledPair> pairs, const SplitFractions& fractions,
                          std::uint64_t seed) {
  if (pairs.size() < 10) throw Error("dataset has fewer than 10 pairs; splits would be empty");
  const double sum = fractions.train + fractions.valid + fractions.test;
  if (std::abs(sum - 1.0) > 1e-9 || fractions.train < 0 || fractions.valid < 0 || fractions.test < 0)
    throw UsageError("split fractions must be non-negative and sum to 1");

  Rng rng(derive_seed(seed, "split"));
  PairDataset out;
  for (int label : {1, 0}) {
    std::vector<LabeledPair> group;
    for (const auto& p : pairs)
      if (p.label == label) group.push_back(p);
    std::shuffle(group.begin(), group.end(), rng);
    const auto n = group.size();
    const auto n_train = std::min(n, static_cast<std::size_t>(std::llround(fractions.train * n)));
    const auto n_valid = std::min(n - n_train, static_cast<std::size_t>(std::llround(fractions.valid * n)));
    for (std::size_t i = 0; i < n; ++i) {
      group[i].split = i < n_train ? Split::train : i < n_train + n_valid ? Split::valid : Split::test;
      out.pairs.push_back(std::move(group[i]));
    }
  }
  return out;
}

PairDataset make_pair_dataset(const std::vector<Link>& links, const TextPlatform& text,
                              const LocationPlatform& location, std::size_t negative_ratio,
                              const SplitFractions& fractions, std::uint64_t seed) {
  std::vector<LabeledPair> pairs;
  std::set<Link> seen;
  for (const auto& l : links) {
    if (!text.contains(l.text_user) || !location.contains(l.location_user)) {
      spdlog::warn("link {} -> {} refers to a user without records; skipped", l.text_user, l.location_user);
      continue;
    }
    if (!seen.insert(l).second) continue;
    pairs.push_back({l.text_user, l.location_user, 1, Split::unassigned});
  }
  std::vector<std::string> text_users, loc_users;
  for (const auto& [id, _] : text) text_users.push_back(id);
  for (const auto& [id, _] : location) loc_users.push_back(id);
  const std::vector<Link> positives(seen.begin(), seen.end());
  auto negatives = sample_negatives(positives, text_users, loc_users, negative_ratio, seed);
  pairs.insert(pairs.end(), negatives.begin(), negatives.end());
  return split_dataset(std::move(pairs), fractions, seed);
}

PairDataset subsample_training(const PairDataset& dataset, double ratio, std::uint64_t seed) {
  if (ratio <= 0.0 || ratio > 1.0) throw UsageError("training ratio must lie in (0, 1]");
  Rng rng(derive_seed(seed, "subsample"));
  PairDataset out;
  for (int label : {1, 0}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < dataset.pairs.size(); ++i)
      if (dataset.pairs[i].split == Split::train && dataset.pairs[i].label == label) idx.push_back(i);
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto keep = std::max<std::size_t>(idx.empty() ? 0 : 1, static_cast<std::size_t>(std::llround(ratio * idx.size())));
    idx.resize(std::min(keep, idx.size()));
    std::sort(idx.begin(), idx.end());
    for (auto i : idx) out.pairs.push_back(dataset.pairs[i]);
  }
  for (const auto& p : dataset.pairs)
    if (p.split != Split::train) out.pairs.push_back(p);
  return out;
}

}  // namespace geolink
