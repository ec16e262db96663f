#include "geolink/text.hpp"

#include <cstdint>
#include <fstream>

#include "geolink/error.hpp"

namespace geolink {
namespace {

bool is_url(std::string_view token) {
  auto starts = [&](std::string_view prefix) {
    if (token.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
      char c = token[i];
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      if (c != prefix[i]) return false;
    }
    return true;
  };
  return starts("http://") || starts("https://") || starts("ftp://") || starts("www.");
}

// Decodes one UTF-8 sequence starting at `pos`. Invalid bytes decode as
// themselves with length 1.
char32_t decode(std::string_view s, std::size_t pos, std::size_t& len) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  std::size_t n = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xe ? 3 : (b0 >> 3) == 0x1e ? 4 : 0;
  if (n == 0 || pos + n > s.size()) {
    len = 1;
    return b0;
  }
  char32_t cp = n == 1 ? b0 : n == 2 ? (b0 & 0x1f) : n == 3 ? (b0 & 0x0f) : (b0 & 0x07);
  for (std::size_t i = 1; i < n; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b >> 6) != 0x2) {
      len = 1;
      return b0;
    }
    cp = (cp << 6) | (b & 0x3f);
  }
  len = n;
  return cp;
}

bool is_punctuation(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2f) || (cp >= 0x3a && cp <= 0x40) || (cp >= 0x5b && cp <= 0x60) ||
           (cp >= 0x7b && cp <= 0x7e);
  }
  // Latin-1 punctuation and symbols commonly used as punctuation.
  if (cp == 0xa1 || cp == 0xa7 || cp == 0xab || cp == 0xb6 || cp == 0xb7 || cp == 0xbb || cp == 0xbf)
    return true;
  if (cp >= 0x2000 && cp <= 0x206f) return true;  // General Punctuation
  if (cp >= 0x2e00 && cp <= 0x2e7f) return true;  // Supplemental Punctuation
  if (cp >= 0x3000 && cp <= 0x303f) return true;  // CJK Symbols and Punctuation
  if (cp >= 0xfe30 && cp <= 0xfe4f) return true;  // CJK Compatibility Forms
  if (cp >= 0xfe50 && cp <= 0xfe6f) return true;  // Small Form Variants
  // Fullwidth ASCII punctuation.
  if (cp >= 0xff01 && cp <= 0xff0f) return true;
  if (cp >= 0xff1a && cp <= 0xff20) return true;
  if (cp >= 0xff3b && cp <= 0xff40) return true;
  if (cp >= 0xff5b && cp <= 0xff65) return true;
  return false;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string clean_token(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  for (std::size_t pos = 0; pos < token.size();) {
    std::size_t len = 1;
    const char32_t cp = decode(token, pos, len);
    if (!is_punctuation(cp)) {
      if (len == 1 && cp >= 'A' && cp <= 'Z')
        out.push_back(static_cast<char>(cp - 'A' + 'a'));
      else
        out.append(token.substr(pos, len));
    }
    pos += len;
  }
  return out;
}

}  // namespace

std::vector<std::string> preprocess_text(std::string_view raw, const StopwordSet& stopwords,
                                         std::size_t max_len) {
  if (max_len == 0) throw UsageError("preprocess_text: max_len must be >= 1");
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < raw.size() && tokens.size() < max_len) {
    while (pos < raw.size() && is_space(raw[pos])) ++pos;
    std::size_t end = pos;
    while (end < raw.size() && !is_space(raw[end])) ++end;
    if (end == pos) break;
    const std::string_view token = raw.substr(pos, end - pos);
    pos = end;
    if (is_url(token)) continue;
    std::string cleaned = clean_token(token);
    if (cleaned.empty() || stopwords.contains(cleaned)) continue;
    tokens.push_back(std::move(cleaned));
  }
  return tokens;
}

StopwordSet load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read stopword file: " + path);
  StopwordSet words;
  std::string line;
  while (std::getline(in, line)) {
    std::size_t b = 0, e = line.size();
    while (b < e && is_space(line[b])) ++b;
    while (e > b && is_space(line[e - 1])) --e;
    if (e > b) words.insert(clean_token(std::string_view(line).substr(b, e - b)));
  }
  return words;
}

}  // namespace geolink
