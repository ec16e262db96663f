#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "geolink/correlation.hpp"
#include "geolink/error.hpp"
#include "test_util.hpp"

namespace geolink {
namespace {

// Independent evaluation of the correlation formula from raw counts.
double oracle(double c, double total, double eps) {
  if (c == 0) return 0.0;
  return std::log(1.0 + c) * std::log(1.0 + total / (eps + c));
}

TextPlatform one_doc(const std::vector<std::string>& tokens, std::int64_t t) {
  return {{"t", {"t", {{"t", t, tokens}}}}};
}

LocationPlatform one_checkin(const std::string& category, std::int64_t t) {
  return {{"l", {"l", {{"l", t, "venue", category}}}}};
}

TEST(CountCooccurrences, SingleEventInsideWindow) {
  const auto c = count_cooccurrences({{"t", "l"}}, one_doc({"pizza"}, 100), one_checkin("food", 200), {"food"}, 3600);
  EXPECT_EQ(c.count("pizza", "food"), 1);
}

TEST(CountCooccurrences, OutsideWindow) {
  const auto c = count_cooccurrences({{"t", "l"}}, one_doc({"pizza"}, 100), one_checkin("food", 200), {"food"}, 50);
  EXPECT_EQ(c.count("pizza", "food"), 0);
}

TEST(CountCooccurrences, WindowBoundaryIsInclusive) {
  const auto c = count_cooccurrences({{"t", "l"}}, one_doc({"pizza"}, 100), one_checkin("food", 200), {"food"}, 100);
  EXPECT_EQ(c.count("pizza", "food"), 1);
}

TEST(CountCooccurrences, CountsEveryOccurrence) {
  const auto c =
      count_cooccurrences({{"t", "l"}}, one_doc({"pizza", "pizza"}, 100), one_checkin("food", 200), {"food"}, 3600);
  EXPECT_EQ(c.count("pizza", "food"), 2);
  EXPECT_EQ(c.word_total(*c.vocab().find("pizza")), 2);
}

TEST(CountCooccurrences, UnlinkedUsersContributeNothing) {
  const auto c = count_cooccurrences({}, one_doc({"pizza"}, 100), one_checkin("food", 200), {"food"}, 3600);
  EXPECT_EQ(c.nonzeros(), 0u);
  const auto m = build_matrix(c, 1.0);
  EXPECT_EQ(m.values.cwiseAbs().sum(), 0.0);
}

TEST(CountCooccurrences, BruteForceAgreesOnRandomSequences) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int64_t> when(0, 10000);
  std::uniform_int_distribution<int> word(0, 4), cat(0, 2);
  const std::vector<std::string> cats{"a", "b", "c"};
  TextSequence text{"t", {}};
  LocationSequence loc{"l", {}};
  for (int i = 0; i < 30; ++i) text.records.push_back({"t", when(rng), {"w" + std::to_string(word(rng)), "w" + std::to_string(word(rng))}});
  for (int i = 0; i < 30; ++i) loc.records.push_back({"l", when(rng), "v", cats[static_cast<std::size_t>(cat(rng))]});
  std::ranges::sort(text.records, {}, &TextRecord::time);
  std::ranges::sort(loc.records, {}, &LocationRecord::time);
  const std::int64_t window = 700;
  const auto c = count_cooccurrences({{"t", "l"}}, {{"t", text}}, {{"l", loc}}, cats, window);
  for (int w = 0; w < 5; ++w)
    for (const auto& category : cats) {
      std::int64_t expected = 0;
      for (const auto& d : text.records)
        for (const auto& r : loc.records)
          if (std::llabs(d.time - r.time) <= window && r.category == category)
            for (const auto& tok : d.tokens) expected += tok == "w" + std::to_string(w);
      EXPECT_EQ(c.count("w" + std::to_string(w), category), expected);
    }
}

TEST(CountCooccurrences, InstanceKeyUsesVenueIds) {
  const auto c = count_cooccurrences({{"t", "l"}}, one_doc({"pizza"}, 100), one_checkin("food", 100), {"venue"}, 10,
                                     LocationKey::instance);
  EXPECT_EQ(c.count("pizza", "venue"), 1);
}

TEST(CountCooccurrences, RejectsNonPositiveWindow) {
  EXPECT_THROW(count_cooccurrences({}, {}, {}, {"a"}, 0), UsageError);
}

TEST(Vocabulary, ReservedIndices) {
  Vocabulary v;
  EXPECT_EQ(v.word(kPadIndex), kPadToken);
  EXPECT_EQ(v.word(kUnkIndex), kUnkToken);
  EXPECT_EQ(v.add("pizza"), 2u);
  EXPECT_EQ(v.add("pizza"), 2u);
  EXPECT_EQ(v.index_or_unk("sushi"), kUnkIndex);
}

TEST(ExternalPairs, IncrementsEachToken) {
  const auto d = ingest_external_pairs({{{"great", "pizza"}, "food"}}, {"food", "bar"});
  EXPECT_EQ(d.skipped, 0u);
  EXPECT_EQ(d.delta.count("great", "food"), 1);
  EXPECT_EQ(d.delta.count("pizza", "food"), 1);
  EXPECT_EQ(d.delta.nonzeros(), 2u);
}

TEST(ExternalPairs, UnknownCategorySkipped) {
  const auto d = ingest_external_pairs({{{"relax"}, "spa"}, {{"beer"}, "bar"}}, {"food", "bar"});
  EXPECT_EQ(d.skipped, 1u);
  EXPECT_EQ(d.delta.count("relax", "spa"), 0);
  EXPECT_EQ(d.delta.count("beer", "bar"), 1);
}

TEST(ExternalPairs, MergeEqualsPooledRecount) {
  const std::vector<std::string> cats{"bar", "food"};
  CoocCounts base(cats);
  base.add("pizza", 1, 3);
  base.add("beer", 0, 2);
  base.add("pizza", 0, 1);
  const std::vector<TokenizedPair> ext{{{"pizza", "great"}, "food"}, {{"beer", "beer"}, "bar"}};

  auto merged = base;
  merged.merge(ingest_external_pairs(ext, cats).delta);

  CoocCounts pooled(cats);
  pooled.add("pizza", 1, 3);
  pooled.add("beer", 0, 2);
  pooled.add("pizza", 0, 1);
  for (const auto& p : ext)
    for (const auto& t : p.tokens) pooled.add(t, *pooled.category_index(p.category));

  EXPECT_EQ(build_matrix(merged.compacted(1), 1.0), build_matrix(pooled.compacted(1), 1.0));
}

TEST(ExternalPairs, LoadsJsonlThroughPreprocessing) {
  test::TempDir dir;
  test::write_file(dir.file("ext.jsonl"), R"({"text":"Great PIZZA!","category":"food"}
{"category":"food"}
{"text":"!!!","category":"food"}
)");
  const auto pairs = load_external_pairs(dir.file("ext.jsonl"), {}, 50);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].tokens, (std::vector<std::string>{"great", "pizza"}));
}

CorrelationMatrix single_cell(std::int64_t count, std::int64_t total, double eps) {
  CoocCounts c({"l", "other"});
  c.add("w", 0, count);
  if (total > count) c.add("w", 1, total - count);
  return build_matrix(c, eps);
}

TEST(BuildMatrix, FrozenValues) {
  EXPECT_NEAR(single_cell(1, 1, 1.0).values(2, 0), 0.28104, 1e-5);
  EXPECT_NEAR(single_cell(1, 1, 1.0).values(2, 0), std::log(2.0) * std::log(1.5), 1e-15);
  EXPECT_NEAR(single_cell(3, 10, 1.0).values(2, 0), 1.7367, 1e-4);
  EXPECT_NEAR(single_cell(3, 10, 1.0).values(2, 0), std::log(4.0) * std::log(3.5), 1e-15);
}

TEST(BuildMatrix, ZeroCountGivesZero) {
  CoocCounts c({"a", "b"});
  c.add("w", 0, 4);
  const auto m = build_matrix(c, 1.0);
  EXPECT_EQ(m.values(2, 1), 0.0);
}

TEST(BuildMatrix, RandomTablesMatchOracleAndAreNonNegative) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> dims_w(1, 20), dims_c(1, 5), cnt(0, 50);
    const int nw = dims_w(rng), nc = dims_c(rng);
    std::vector<std::string> cats;
    for (int c = 0; c < nc; ++c) cats.push_back("c" + std::to_string(c));
    CoocCounts counts(cats);
    std::vector<std::vector<int>> table(static_cast<std::size_t>(nw), std::vector<int>(static_cast<std::size_t>(nc)));
    for (int w = 0; w < nw; ++w)
      for (int c = 0; c < nc; ++c) {
        table[w][c] = cnt(rng);
        counts.add("w" + std::to_string(w), static_cast<std::size_t>(c), table[w][c]);
      }
    const auto m = build_matrix(counts, 1.0);
    EXPECT_TRUE((m.values.array() >= 0.0).all());
    for (int w = 0; w < nw; ++w) {
      double total = 0;
      for (int c = 0; c < nc; ++c) total += table[w][c];
      const auto row = m.word_row("w" + std::to_string(w));
      for (int c = 0; c < nc; ++c) {
        const double got = row == kUnkIndex ? 0.0 : m.values(static_cast<Eigen::Index>(row), c);
        EXPECT_NEAR(got, oracle(table[w][c], total, 1.0), 1e-12);
      }
    }
  }
}

TEST(BuildMatrix, PadRowIsZeroAndPadNeverCounted) {
  CoocCounts c({"a"});
  c.add(kPadToken, 0, 5);
  c.add("w", 0, 1);
  const auto m = build_matrix(c, 1.0);
  EXPECT_EQ(m.values.row(kPadIndex).sum(), 0.0);
}

TEST(BuildMatrix, RejectsNonPositiveEpsilon) {
  EXPECT_THROW(build_matrix(CoocCounts({"a"}), 0.0), UsageError);
}

TEST(Compacted, FoldsRareWordsIntoUnk) {
  CoocCounts c({"a", "b"});
  c.add("zeta", 0, 5);
  c.add("rare", 1, 1);
  c.add("alpha", 1, 2);
  const auto k = c.compacted(2);
  EXPECT_EQ(k.vocab().words(), (std::vector<std::string>{"<pad>", "<unk>", "alpha", "zeta"}));
  EXPECT_EQ(k.count(kUnkIndex, 1), 1);
  EXPECT_EQ(k.count("zeta", "a"), 5);
}

CorrelationMatrix sample_matrix() {
  CoocCounts c({"bar", "food"});
  c.add("pizza", 1, 3);
  c.add("beer", 0, 7);
  c.add("pizza", 0, 1);
  return build_matrix(c.compacted(1), 0.5);
}

TEST(MatrixIo, RoundTripIsLossless) {
  test::TempDir dir;
  const auto m = sample_matrix();
  save_matrix(m, dir.file("m.bin"));
  const auto back = load_matrix(dir.file("m.bin"));
  EXPECT_EQ(back, m);
  EXPECT_EQ(back.content_hash(), m.content_hash());
}

TEST(MatrixIo, EmptyMatrixRoundTrip) {
  test::TempDir dir;
  const auto m = build_matrix(CoocCounts(std::vector<std::string>{}), 1.0);
  save_matrix(m, dir.file("m.bin"));
  const auto back = load_matrix(dir.file("m.bin"));
  EXPECT_EQ(back, m);
  EXPECT_EQ(back.values.cols(), 0);
}

TEST(MatrixIo, TruncatedFileIsFormatError) {
  test::TempDir dir;
  save_matrix(sample_matrix(), dir.file("m.bin"));
  const auto bytes = test::read_file(dir.file("m.bin"));
  for (std::size_t cut : {std::size_t{0}, std::size_t{5}, bytes.size() / 2, bytes.size() - 1}) {
    test::write_file(dir.file("cut.bin"), bytes.substr(0, cut));
    EXPECT_THROW(load_matrix(dir.file("cut.bin")), FormatError) << "cut at " << cut;
  }
}

TEST(MatrixIo, CorruptedByteIsDetected) {
  test::TempDir dir;
  save_matrix(sample_matrix(), dir.file("m.bin"));
  auto bytes = test::read_file(dir.file("m.bin"));
  bytes[bytes.size() - 20] ^= 0x40;
  test::write_file(dir.file("bad.bin"), bytes);
  EXPECT_THROW(load_matrix(dir.file("bad.bin")), FormatError);
}

TEST(MatrixIo, WrongVersionIsRejected) {
  test::TempDir dir;
  save_matrix(sample_matrix(), dir.file("m.bin"));
  auto bytes = test::read_file(dir.file("m.bin"));
  bytes[12] = 9;  // first byte of the version field after the magic
  test::write_file(dir.file("v.bin"), bytes);
  EXPECT_THROW(load_matrix(dir.file("v.bin")), FormatError);
}

TEST(MatrixIo, CsvExportListsNonzeroCells) {
  test::TempDir dir;
  export_matrix_csv(sample_matrix(), dir.file("m.csv"));
  const auto csv = test::read_file(dir.file("m.csv"));
  EXPECT_EQ(csv.rfind("word,category,value\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(ContentHash, ChangesWithValues) {
  auto m = sample_matrix();
  const auto h = m.content_hash();
  m.values(2, 0) += 1e-12;
  EXPECT_NE(m.content_hash(), h);
}

}  // namespace
}  // namespace geolink
