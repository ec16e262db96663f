#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace geolink {

using StopwordSet = std::unordered_set<std::string>;

/// Lowercases, drops URL tokens (scheme or "www." prefix), strips Unicode
/// punctuation, removes stopwords and keeps at most `max_len` tokens.
/// Tokens are whitespace separated; input is assumed to be UTF-8.
std::vector<std::string> preprocess_text(std::string_view raw, const StopwordSet& stopwords,
                                         std::size_t max_len);

/// One stopword per line; blank lines and surrounding whitespace ignored.
StopwordSet load_stopwords(const std::string& path);

}  // namespace geolink
