#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "simulmt/monotonic.hpp"

namespace simulmt {
namespace {

using Sets = std::vector<std::vector<std::size_t>>;

TEST(Monotonicize, WorkedExample) {
  const auto plan = monotonicize(SufficientSets(Sets{{1, 2}, {1}}), 2);
  EXPECT_EQ(plan.prefix_req, (std::vector<std::size_t>{2, 2}));
  EXPECT_EQ(plan.added_edges, (std::vector<Link>{{2, 2}}));
}

TEST(Monotonicize, DiagonalAddsNothing) {
  const auto plan = monotonicize(SufficientSets(Sets{{1}, {2}, {3}}), 3);
  EXPECT_EQ(plan.prefix_req, (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_TRUE(plan.added_edges.empty());
}

TEST(Monotonicize, UnalignedFirstTargetAnchorsToFirstSource) {
  const SufficientSets sets(Sets{{}, {2}});
  const auto plan = monotonicize(sets, 2);
  EXPECT_EQ(plan.prefix_req, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(plan.added_edges, (std::vector<Link>{{1, 1}}));
  EXPECT_TRUE(is_monotonic(with_added_edges(sets, plan)));
}

TEST(Monotonicize, RejectsBadShapes) {
  EXPECT_THROW(monotonicize(SufficientSets(Sets{{1}}), 0), std::invalid_argument);
  EXPECT_THROW(monotonicize(SufficientSets(), 3), std::invalid_argument);
  EXPECT_THROW(monotonicize(SufficientSets(Sets{{4}}), 3), std::invalid_argument);
}

TEST(Monotonicize, Properties) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 3000; ++trial) {
    const auto rc = oracle::random_case(rng, 10, 0.2);
    const auto sets = sufficient_sets(rc.pair, rc.alignment);
    const auto plan = monotonicize(sets, rc.pair.source_len());
    const auto augmented = with_added_edges(sets, plan);
    ASSERT_TRUE(is_monotonic(augmented));
    ASSERT_TRUE(std::is_sorted(plan.prefix_req.begin(), plan.prefix_req.end()));
    for (std::size_t j = 1; j <= plan.target_len(); ++j) {
      ASSERT_GE(plan.requirement(j), 1u);
      ASSERT_LE(plan.requirement(j), rc.pair.source_len());
      ASSERT_FALSE(augmented.at(j).empty());
      ASSERT_EQ(augmented.max_at(j), plan.requirement(j));
    }
    for (const auto& e : plan.added_edges) ASSERT_FALSE(rc.alignment.contains(e));
  }
}

TEST(Monotonicize, IdempotentOnMonotonicInput) {
  std::mt19937_64 rng(8);
  int checked = 0;
  for (int trial = 0; trial < 5000; ++trial) {
    const auto rc = oracle::random_case(rng, 6, 0.5);
    const auto sets = sufficient_sets(rc.pair, rc.alignment);
    if (!is_monotonic(sets)) continue;
    bool all_aligned = true;
    for (const auto& s : sets.sets()) all_aligned = all_aligned && !s.empty();
    const auto plan = monotonicize(sets, rc.pair.source_len());
    if (all_aligned) {
      ++checked;
      EXPECT_TRUE(plan.added_edges.empty());
    }
    for (std::size_t j = 1; j <= sets.target_len(); ++j) {
      if (!sets.at(j).empty()) {
        EXPECT_EQ(plan.requirement(j), sets.max_at(j));
      }
    }
    // A second pass over the augmented graph adds nothing.
    EXPECT_TRUE(monotonicize(with_added_edges(sets, plan), rc.pair.source_len())
                    .added_edges.empty());
  }
  EXPECT_GT(checked, 50);
}

// Removing any single added edge breaks monotonicity or leaves a target
// without any incoming edge.
TEST(Monotonicize, AddedEdgesAreLocallyMinimal) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 3000; ++trial) {
    const auto rc = oracle::random_case(rng, 6, 0.25);
    const auto sets = sufficient_sets(rc.pair, rc.alignment);
    const auto plan = monotonicize(sets, rc.pair.source_len());
    for (std::size_t drop = 0; drop < plan.added_edges.size(); ++drop) {
      auto graph = sets.sets();
      for (std::size_t k = 0; k < plan.added_edges.size(); ++k) {
        if (k == drop) continue;
        graph[plan.added_edges[k].target - 1].push_back(plan.added_edges[k].source);
      }
      const bool orphan = graph[plan.added_edges[drop].target - 1].empty();
      EXPECT_TRUE(orphan || !oracle::monotonic_pairwise(graph));
    }
  }
}

TEST(ExportDot, MarksAddedEdgesDashed) {
  const SentencePair pair{{"Ich", "bin"}, {"I", "am"}, 0};
  const SufficientSets sets(Sets{{1, 2}, {1}});
  const auto dot = export_dot(monotonicize(sets, 2), sets, pair);
  EXPECT_NE(dot.find("x2 -> y2 [style=dashed]"), std::string::npos) << dot;
  EXPECT_NE(dot.find("x1 -> y2;"), std::string::npos);
  EXPECT_EQ(dot, export_dot(monotonicize(sets, 2), sets, pair));
}

TEST(ExportDot, DiagonalHasNoDashedEdges) {
  const SentencePair pair{{"a", "b"}, {"c", "d"}, 0};
  const SufficientSets sets(Sets{{1}, {2}});
  EXPECT_EQ(export_dot(monotonicize(sets, 2), sets, pair).find("dashed"), std::string::npos);
}

TEST(ExportDot, EmptyAlignmentSingleTarget) {
  const SentencePair pair{{"a", "\"q\""}, {"c"}, 0};
  const SufficientSets sets(Sets{{}});
  const auto dot = export_dot(monotonicize(sets, 2), sets, pair);
  EXPECT_NE(dot.find("x1 -> y1 [style=dashed]"), std::string::npos) << dot;
  EXPECT_NE(dot.find("label=\"\\\"q\\\"\""), std::string::npos) << dot;
}

}  // namespace
}  // namespace simulmt
