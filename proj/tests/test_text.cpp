#include <gtest/gtest.h>

#include "geolink/error.hpp"
#include "geolink/text.hpp"
#include "test_util.hpp"

namespace geolink {
namespace {

using Tokens = std::vector<std::string>;

TEST(PreprocessText, RemovesUrlsPunctuationAndStopwords) {
  EXPECT_EQ(preprocess_text("Great pizza at http://x.co !!", {"at"}, 50), (Tokens{"great", "pizza"}));
}

TEST(PreprocessText, EmptyInputGivesNoTokens) { EXPECT_TRUE(preprocess_text("", {}, 50).empty()); }

TEST(PreprocessText, TruncatesToMaxLength) {
  std::string raw;
  Tokens expected;
  for (int i = 0; i < 61; ++i) {
    raw += "tok" + std::to_string(i) + " ";
    if (i < 50) expected.push_back("tok" + std::to_string(i));
  }
  EXPECT_EQ(preprocess_text(raw, {}, 50), expected);
}

TEST(PreprocessText, TruncationCountsKeptTokensOnly) {
  EXPECT_EQ(preprocess_text("the a cat the dog", {"the", "a"}, 2), (Tokens{"cat", "dog"}));
}

TEST(PreprocessText, UrlVariantsAndInnerPunctuation) {
  EXPECT_EQ(preprocess_text("HTTPS://foo.bar/x www.site.com don't e.g.", {}, 10), (Tokens{"dont", "eg"}));
}

TEST(PreprocessText, StripsUnicodePunctuationButKeepsLetters) {
  // "Café" with an em dash, CJK full stop and fullwidth exclamation attached.
  EXPECT_EQ(preprocess_text("Caf\xc3\xa9\xe2\x80\x94 \xe5\x92\x96\xe5\x95\xa1\xe3\x80\x82 \xef\xbc\x81", {}, 10),
            (Tokens{"caf\xc3\xa9", "\xe5\x92\x96\xe5\x95\xa1"}));
}

TEST(PreprocessText, ZeroMaxLengthIsRejected) { EXPECT_THROW(preprocess_text("a", {}, 0), UsageError); }

TEST(Stopwords, LoadsOnePerLineNormalized) {
  test::TempDir dir;
  test::write_file(dir.file("stop.txt"), "The\n  at \n\nof\r\n");
  const auto words = load_stopwords(dir.file("stop.txt"));
  EXPECT_EQ(words, (StopwordSet{"the", "at", "of"}));
  EXPECT_EQ(preprocess_text("The view OF the bay", words, 10), (Tokens{"view", "bay"}));
}

TEST(Stopwords, MissingFileThrows) { EXPECT_THROW(load_stopwords("/nonexistent/stop.txt"), Error); }

}  // namespace
}  // namespace geolink
