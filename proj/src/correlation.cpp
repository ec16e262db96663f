#include "geolink/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "geolink/error.hpp"
#include "geolink/io.hpp"

namespace geolink {

LocationKey parse_location_key(std::string_view s) {
  if (s == "category") return LocationKey::category;
  if (s == "instance") return LocationKey::instance;
  throw UsageError("location key must be 'category' or 'instance', got '" + std::string(s) + "'");
}

const std::string& location_key(const LocationRecord& record, LocationKey key) {
  return key == LocationKey::category ? record.category : record.location_id;
}

Vocabulary::Vocabulary() {
  add(kPadToken);
  add(kUnkToken);
}

std::size_t Vocabulary::add(std::string_view word) {
  std::string w(word);
  if (auto it = index_.find(w); it != index_.end()) return it->second;
  const auto idx = words_.size();
  words_.push_back(w);
  index_.emplace(std::move(w), idx);
  return idx;
}

std::optional<std::size_t> Vocabulary::find(std::string_view word) const {
  if (auto it = index_.find(std::string(word)); it != index_.end()) return it->second;
  return std::nullopt;
}

std::size_t Vocabulary::index_or_unk(std::string_view word) const { return find(word).value_or(kUnkIndex); }

std::vector<std::string> location_index(const LocationPlatform& location, LocationKey key) {
  std::set<std::string> keys;
  for (const auto& [_, seq] : location)
    for (const auto& r : seq.records) keys.insert(location_key(r, key));
  return {keys.begin(), keys.end()};
}

CoocCounts::CoocCounts(std::vector<std::string> categories) : categories_(std::move(categories)) {}

void CoocCounts::add(std::string_view word, std::size_t category, std::int64_t n) {
  if (category >= categories_.size()) throw UsageError("CoocCounts::add: category index out of range");
  if (n < 0) throw UsageError("CoocCounts::add: negative count");
  if (word == kPadToken || n == 0) return;
  const auto w = vocab_.add(word);
  if (word_totals_.size() <= w) word_totals_.resize(w + 1, 0);
  cells_[key(w, category)] += n;
  word_totals_[w] += n;
}

std::int64_t CoocCounts::count(std::size_t word, std::size_t category) const {
  if (categories_.empty()) return 0;
  auto it = cells_.find(key(word, category));
  return it == cells_.end() ? 0 : it->second;
}

std::int64_t CoocCounts::count(std::string_view word, std::string_view category) const {
  const auto w = vocab_.find(word);
  const auto c = category_index(category);
  return w && c ? count(*w, *c) : 0;
}

std::optional<std::size_t> CoocCounts::category_index(std::string_view category) const {
  for (std::size_t i = 0; i < categories_.size(); ++i)
    if (categories_[i] == category) return i;
  return std::nullopt;
}

void CoocCounts::merge(const CoocCounts& other) {
  if (other.categories_ != categories_) throw UsageError("CoocCounts::merge: category indices differ");
  other.for_each([&](std::size_t w, std::size_t c, std::int64_t n) { add(other.vocab_.word(w), c, n); });
}

CoocCounts CoocCounts::compacted(std::int64_t min_count) const {
  std::vector<std::string> kept;
  for (std::size_t w = 2; w < vocab_.size(); ++w)
    if (word_total(w) >= min_count) kept.push_back(vocab_.word(w));
  std::sort(kept.begin(), kept.end());

  CoocCounts out(categories_);
  for (const auto& w : kept) out.vocab_.add(w);
  out.word_totals_.assign(out.vocab_.size(), 0);
  // Insert in (word, category) order so hashing order never leaks into results.
  std::vector<std::tuple<std::size_t, std::size_t, std::int64_t>> cells;
  for_each([&](std::size_t w, std::size_t c, std::int64_t n) {
    cells.emplace_back(out.vocab_.index_or_unk(vocab_.word(w)), c, n);
  });
  std::sort(cells.begin(), cells.end());
  for (const auto& [w, c, n] : cells) {
    out.cells_[out.key(w, c)] += n;
    out.word_totals_[w] += n;
  }
  return out;
}

CoocCounts count_cooccurrences(const std::vector<Link>& links, const TextPlatform& text,
                               const LocationPlatform& location, const std::vector<std::string>& categories,
                               std::int64_t window_seconds, LocationKey key) {
  if (window_seconds <= 0) throw UsageError("co-occurrence window must be > 0 seconds");
  CoocCounts counts(categories);
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < categories.size(); ++i) column.emplace(categories[i], i);

  for (const auto& link : links) {
    auto t = text.find(link.text_user);
    auto l = location.find(link.location_user);
    if (t == text.end() || l == location.end()) continue;
    const auto& checkins = l->second.records;
    for (const auto& doc : t->second.records) {
      // Check-ins are time sorted: scan only the window.
      auto first = std::lower_bound(checkins.begin(), checkins.end(), doc.time - window_seconds,
                                    [](const LocationRecord& r, std::int64_t t) { return r.time < t; });
      for (auto it = first; it != checkins.end() && it->time <= doc.time + window_seconds; ++it) {
        auto col = column.find(location_key(*it, key));
        if (col == column.end()) continue;
        for (const auto& token : doc.tokens) counts.add(token, col->second);
      }
    }
  }
  return counts;
}

std::vector<TokenizedPair> load_external_pairs(const std::string& path, const StopwordSet& stopwords,
                                               std::size_t max_len) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read external pairs file " + path);
  std::vector<TokenizedPair> out;
  std::string line;
  std::size_t line_no = 0, malformed = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("text") || !j["text"].is_string() ||
        !j.contains("category") || !j["category"].is_string()) {
      ++malformed;
      spdlog::warn("{}:{}: malformed external pair skipped", path, line_no);
      continue;
    }
    TokenizedPair p{preprocess_text(j["text"].get<std::string>(), stopwords, max_len), j["category"].get<std::string>()};
    if (!p.tokens.empty()) out.push_back(std::move(p));
  }
  return out;
}

ExternalDelta ingest_external_pairs(const std::vector<TokenizedPair>& pairs,
                                    const std::vector<std::string>& categories) {
  ExternalDelta out{CoocCounts(categories), 0};
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < categories.size(); ++i) column.emplace(categories[i], i);
  std::set<std::string> unknown;
  for (const auto& p : pairs) {
    auto col = column.find(p.category);
    if (col == column.end()) {
      ++out.skipped;
      unknown.insert(p.category);
      continue;
    }
    for (const auto& token : p.tokens) out.delta.add(token, col->second);
  }
  if (out.skipped > 0)
    spdlog::warn("{} external pair(s) skipped: {} categor{} not in the location index", out.skipped,
                 unknown.size(), unknown.size() == 1 ? "y" : "ies");
  return out;
}

std::optional<std::size_t> CorrelationMatrix::category_column(std::string_view category) const {
  auto it = std::lower_bound(categories.begin(), categories.end(), category,
                             [](const std::string& a, std::string_view b) { return a < b; });
  if (it != categories.end() && *it == category) return static_cast<std::size_t>(it - categories.begin());
  for (std::size_t i = 0; i < categories.size(); ++i)  // unsorted fallback
    if (categories[i] == category) return i;
  return std::nullopt;
}

bool CorrelationMatrix::operator==(const CorrelationMatrix& other) const {
  return epsilon == other.epsilon && key == other.key && vocab == other.vocab && categories == other.categories &&
         values.rows() == other.values.rows() && values.cols() == other.values.cols() && values == other.values;
}

CorrelationMatrix build_matrix(const CoocCounts& counts, double epsilon, LocationKey key) {
  if (!(epsilon > 0.0)) throw UsageError("epsilon must be > 0");
  CorrelationMatrix m;
  m.vocab = counts.vocab();
  m.categories = counts.categories();
  m.epsilon = epsilon;
  m.key = key;
  m.values = CorrelationMatrix::Values::Zero(static_cast<Eigen::Index>(m.vocab.size()),
                                             static_cast<Eigen::Index>(m.categories.size()));
  counts.for_each([&](std::size_t w, std::size_t c, std::int64_t n) {
    const auto count = static_cast<double>(n);
    const auto total = static_cast<double>(counts.word_total(w));
    m.values(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(c)) =
        std::log1p(count) * std::log1p(total / (epsilon + count));
  });
  m.values.row(kPadIndex).setZero();
  return m;
}

namespace {

constexpr std::string_view kMatrixMagic = "GEOLINK-CORR";
constexpr std::uint32_t kMatrixVersion = 1;

void write_matrix_body(BinaryWriter& w, const CorrelationMatrix& m) {
  w.pod<double>(m.epsilon);
  w.pod<std::uint8_t>(static_cast<std::uint8_t>(m.key));
  w.pod<std::uint64_t>(m.vocab.size());
  for (const auto& word : m.vocab.words()) w.string(word);
  w.pod<std::uint64_t>(m.categories.size());
  for (const auto& c : m.categories) w.string(c);
  w.pod<std::uint64_t>(static_cast<std::uint64_t>(m.values.rows()));
  w.pod<std::uint64_t>(static_cast<std::uint64_t>(m.values.cols()));
  w.array(std::span<const double>(m.values.data(), static_cast<std::size_t>(m.values.size())));
}

}  // namespace

std::uint64_t CorrelationMatrix::content_hash() const {
  struct NullBuf : std::streambuf {
    int overflow(int c) override { return c; }
    std::streamsize xsputn(const char*, std::streamsize n) override { return n; }
  } buf;
  std::ostream sink(&buf);
  BinaryWriter w(sink);
  write_matrix_body(w, *this);
  return w.checksum();
}

void save_matrix(const CorrelationMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write matrix file " + path);
  BinaryWriter header(out);
  header.bytes(kMatrixMagic.data(), kMatrixMagic.size());
  header.pod<std::uint32_t>(kMatrixVersion);
  BinaryWriter body(out);
  write_matrix_body(body, m);
  write_checksum(out, body);
  if (!out) throw Error("failed writing matrix file " + path);
}

CorrelationMatrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read matrix file " + path);
  BinaryReader header(in, path);
  header.expect_magic(kMatrixMagic);
  if (const auto v = header.pod<std::uint32_t>(); v != kMatrixVersion)
    throw FormatError(path + ": unsupported matrix format version " + std::to_string(v));

  BinaryReader r(in, path);
  CorrelationMatrix m;
  m.epsilon = r.pod<double>();
  const auto key = r.pod<std::uint8_t>();
  if (key > 1) throw FormatError(path + ": unknown location key");
  m.key = static_cast<LocationKey>(key);
  const auto n_vocab = r.pod<std::uint64_t>();
  if (n_vocab < 2 || n_vocab > (1ULL << 32)) throw FormatError(path + ": corrupt vocabulary size");
  std::vector<std::string> words(n_vocab);
  for (auto& w : words) w = r.string();
  if (words[kPadIndex] != kPadToken || words[kUnkIndex] != kUnkToken)
    throw FormatError(path + ": vocabulary does not start with PAD and UNK");
  for (std::size_t i = 2; i < words.size(); ++i)
    if (m.vocab.add(words[i]) != i) throw FormatError(path + ": duplicate vocabulary entry");
  const auto n_cat = r.pod<std::uint64_t>();
  if (n_cat > (1ULL << 32)) throw FormatError(path + ": corrupt category count");
  m.categories.resize(n_cat);
  for (auto& c : m.categories) c = r.string();
  const auto rows = r.pod<std::uint64_t>();
  const auto cols = r.pod<std::uint64_t>();
  if (rows != n_vocab || cols != n_cat) throw FormatError(path + ": matrix shape does not match indices");
  m.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  r.array(std::span<double>(m.values.data(), static_cast<std::size_t>(m.values.size())));
  r.verify_checksum();
  return m;
}

void export_matrix_csv(const CorrelationMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "word,category,value\n";
  char buf[64];
  for (Eigen::Index w = 0; w < m.values.rows(); ++w)
    for (Eigen::Index c = 0; c < m.values.cols(); ++c)
      if (const double v = m.values(w, c); v != 0.0) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << m.vocab.word(static_cast<std::size_t>(w)) << ',' << m.categories[static_cast<std::size_t>(c)] << ','
            << buf << '\n';
      }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace geolink
