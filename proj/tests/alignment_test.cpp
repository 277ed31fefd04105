#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "simulmt/alignment.hpp"

namespace simulmt {
namespace {

TEST(Tokenize, CollapsesWhitespaceRuns) {
  EXPECT_EQ(tokenize("  Ich  bin\tda \r"), (Words{"Ich", "bin", "da"}));
  EXPECT_TRUE(tokenize(" \t ").empty());
}

TEST(SentencePair, RejectsEmptySides) {
  EXPECT_THROW(make_sentence_pair("", "a", 4), AlignmentError);
  EXPECT_THROW(make_sentence_pair("a", "  ", 4), AlignmentError);
  EXPECT_NO_THROW(make_sentence_pair("a b", "c", 4));
}

TEST(ParsePharaoh, DiagonalConvertsToOneBased) {
  const auto a = parse_pharaoh("0-0 1-1", 2, 2);
  EXPECT_EQ(a.links(), (std::vector<Link>{{1, 1}, {2, 2}}));
}

TEST(ParsePharaoh, FanIn) {
  const auto a = parse_pharaoh("0-0 1-0", 2, 1);
  EXPECT_EQ(a.links(), (std::vector<Link>{{1, 1}, {2, 1}}));
}

TEST(ParsePharaoh, OutOfRangeNamesPairAndRecord) {
  try {
    parse_pharaoh("0-0 5-0", 2, 1, 17);
    FAIL() << "expected a bounds error";
  } catch (const AlignmentError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("(5,0)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("record 17"), std::string::npos) << msg;
  }
}

TEST(ParsePharaoh, MalformedTokens) {
  for (const char* bad : {"0-", "-1", "a-1", "0_1", "0-1-2", "1--2", "+1-0"}) {
    EXPECT_THROW(parse_pharaoh(bad, 5, 5), AlignmentError) << bad;
  }
}

TEST(ParsePharaoh, BlankLineIsEmptyAndDuplicatesCollapse) {
  EXPECT_TRUE(parse_pharaoh("", 3, 3).empty());
  EXPECT_TRUE(parse_pharaoh("   ", 3, 3).empty());
  EXPECT_EQ(parse_pharaoh("1-1 1-1 0-0", 3, 3).size(), 2u);
}

TEST(ParsePharaoh, RenderRoundTrip) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const auto rc = oracle::random_case(rng, 9, 0.3);
    const auto text = render_pharaoh(rc.alignment);
    EXPECT_EQ(parse_pharaoh(text, rc.pair.source_len(), rc.pair.target_len()), rc.alignment)
        << text;
  }
}

TEST(SufficientSets, WorkedExample) {
  const AlignmentSet a({{1, 1}, {2, 1}, {1, 2}});
  const auto s = sufficient_sets(a, 2, 2);
  EXPECT_EQ(s.at(1), (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(s.at(2), (std::vector<std::size_t>{1}));
}

TEST(SufficientSets, DiagonalAndEmpty) {
  const auto diag = sufficient_sets(AlignmentSet({{1, 1}, {2, 2}, {3, 3}}), 3, 3);
  for (std::size_t j = 1; j <= 3; ++j) EXPECT_EQ(diag.at(j), std::vector<std::size_t>{j});
  const auto none = sufficient_sets(AlignmentSet(), 2, 2);
  EXPECT_TRUE(none.at(1).empty());
  EXPECT_TRUE(none.at(2).empty());
}

TEST(SufficientSets, InverseImageAndPure) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto rc = oracle::random_case(rng, 8, 0.25);
    const auto s = sufficient_sets(rc.pair, rc.alignment);
    EXPECT_EQ(s, sufficient_sets(rc.pair, rc.alignment));
    for (std::size_t j = 1; j <= rc.pair.target_len(); ++j) {
      for (std::size_t i = 1; i <= rc.pair.source_len(); ++i) {
        const bool in_set = std::binary_search(s.at(j).begin(), s.at(j).end(), i);
        EXPECT_EQ(in_set, rc.alignment.contains({i, j}));
      }
    }
  }
}

TEST(IsMonotonic, Examples) {
  EXPECT_FALSE(is_monotonic(SufficientSets({{1, 2}, {1}})));
  EXPECT_TRUE(is_monotonic(SufficientSets({{1}, {2}, {3}})));
  EXPECT_TRUE(is_monotonic(SufficientSets({{2}, {}, {2}})));
}

TEST(IsMonotonic, AgreesWithPairwiseDefinition) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 5000; ++trial) {
    const auto rc = oracle::random_case(rng, 8, 0.2);
    const auto s = sufficient_sets(rc.pair, rc.alignment);
    EXPECT_EQ(is_monotonic(s), oracle::monotonic_pairwise(s.sets()));
  }
}

}  // namespace
}  // namespace simulmt
