#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "simulmt/augment.hpp"
#include "simulmt/metrics.hpp"

namespace simulmt {
namespace {

using Schedule = std::vector<std::size_t>;

Schedule wait_k(std::size_t k, std::size_t I, std::size_t J) {
  Schedule g;
  for (std::size_t t = 1; t <= J; ++t) g.push_back(std::min(k + t - 1, I));
  return g;
}

struct EchoModel {
  std::vector<Candidate> generate(const ModelContext& ctx, std::size_t beam) const {
    Words rest(ctx.source_read.begin() + static_cast<std::ptrdiff_t>(ctx.committed.size()),
               ctx.source_read.end());
    return std::vector<Candidate>(beam, Candidate{rest, false});
  }
};

TEST(AverageLagging, WaitK) {
  for (std::size_t k = 1; k <= 8; ++k) {
    EXPECT_NEAR(average_lagging(wait_k(k, 10, 10), 10, 10), static_cast<double>(k), 1e-9);
  }
}

TEST(AverageLagging, FullReadFirst) {
  EXPECT_EQ(average_lagging(Schedule(7, 10), 10, 7), 10.0);
  EXPECT_EQ(average_lagging(Schedule{2, 2}, 2, 2), 2.0);
}

TEST(AverageLagging, UnequalLengths) {
  // I=4, J=2: g=[1,4], tau=2, lags 1 and 4-2.
  EXPECT_DOUBLE_EQ(average_lagging(Schedule{1, 4}, 4, 2), 1.5);
}

TEST(AverageLagging, RejectsBadSchedules) {
  EXPECT_THROW(average_lagging(Schedule{2, 1}, 2, 2), std::invalid_argument);
  EXPECT_THROW(average_lagging(Schedule{0, 1}, 2, 2), std::invalid_argument);
  EXPECT_THROW(average_lagging(Schedule{1}, 2, 2), std::invalid_argument);
  EXPECT_THROW(average_lagging(Schedule{}, 0, 0), std::invalid_argument);
}

TEST(AverageLagging, MatchesOracleOnRandomSchedules) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 5000; ++trial) {
    const std::size_t I = 1 + rng() % 15;
    const std::size_t J = 1 + rng() % 15;
    Schedule g;
    for (std::size_t t = 0; t < J; ++t) g.push_back(1 + rng() % I);
    std::sort(g.begin(), g.end());
    ASSERT_NEAR(average_lagging(g, I, J), oracle::average_lagging(g, I, J), 1e-9);
  }
}

TEST(AverageLagging, WaitKUnderLengthScaling) {
  for (std::size_t scale = 1; scale <= 6; ++scale) {
    const std::size_t n = 10 * scale;
    for (std::size_t k = 1; k < 8; ++k) {
      EXPECT_NEAR(average_lagging(wait_k(k, n, n), n, n), static_cast<double>(k), 1e-9);
    }
  }
}

TEST(Schedules, RunAndRealizedTrajectoryAgree) {
  std::mt19937_64 rng(12);
  EchoModel model;
  for (int trial = 0; trial < 500; ++trial) {
    const Words source = oracle::random_words(rng, 1 + rng() % 15, 20, "s");
    SimOptions opt;
    opt.chunk = 1 + rng() % 5;
    const auto sim = run(source, model, opt);
    const auto traj = trajectory_from_run(sim, source);
    ASSERT_TRUE(verify(traj).empty());
    const auto g = schedule_from_run(sim);
    ASSERT_EQ(schedule_from_trajectory(traj), g);
    ASSERT_DOUBLE_EQ(average_lagging(g, source.size(), sim.target_len()),
                     average_lagging(schedule_from_trajectory(traj), source.size(),
                                     traj.target_len()));
  }
}

TEST(Schedules, EmptyRoundReadsCarryForward) {
  SimRun sim;
  sim.finished = true;
  sim.events = {{0, {"a"}, {}, {}, 0, 0, 1, false, "", ""},
                {1, {"b"}, {}, {"x", "y"}, 0, 0, 2, true, "", ""}};
  const auto traj = trajectory_from_run(sim, {"a", "b"});
  ASSERT_EQ(traj.chunks.size(), 1u);
  EXPECT_EQ(traj.chunks[0].read, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(schedule_from_run(sim), (Schedule{2, 2}));
}

TEST(SimulatedWwt, CostModel) {
  EchoModel model;
  SimOptions opt;
  opt.chunk = 2;
  const auto sim = run(Words{"a", "b", "c", "d"}, model, opt);
  // Conversational recompute 4+4, offline 4+6, four committed words.
  EXPECT_DOUBLE_EQ(simulated_wwt(sim, {1.0, 1.0}, PromptMode::conversational), 3.0);
  EXPECT_DOUBLE_EQ(simulated_wwt(sim, {1.0, 1.0}, PromptMode::offline), 3.5);
  EXPECT_DOUBLE_EQ(simulated_wwt(sim, {0.0, 2.0}, PromptMode::offline), 2.0);
  EXPECT_LE(simulated_wwt(sim, {1.0, 0.0}, PromptMode::conversational),
            simulated_wwt(sim, {1.0, 0.0}, PromptMode::offline));
  const auto report = latency_report(sim, {}, PromptMode::offline);
  EXPECT_EQ(report.rounds, 2u);
  EXPECT_DOUBLE_EQ(report.al, average_lagging(Schedule{2, 2, 4, 4}, 4, 4));
  EXPECT_EQ(report.recompute_totals, (CacheSavings{8, 10}));
}

TEST(SimulatedWwt, SingleRoundSameUnderBothModes) {
  EchoModel model;
  SimOptions opt;
  opt.chunk = 8;
  const auto sim = run(Words{"a", "b", "c"}, model, opt);
  ASSERT_EQ(sim.events.size(), 1u);
  EXPECT_DOUBLE_EQ(simulated_wwt(sim, {}, PromptMode::conversational),
                   simulated_wwt(sim, {}, PromptMode::offline));
  SimRun unfinished = sim;
  unfinished.finished = false;
  EXPECT_THROW(simulated_wwt(unfinished, {}, PromptMode::offline), std::invalid_argument);
}

TEST(CorpusStats, SmallCorpus) {
  Trajectory a;
  a.source = {"1", "2", "3"};
  a.target = {"x", "y", "z"};
  a.chunks = {{{1}, {1}, 0}, {{2, 3}, {2, 3}, 0}};
  Trajectory b = a;
  b.chunks = {{{1, 2, 3}, {1, 2, 3}, 0}};
  b.provenance = Provenance::merged;
  const std::vector<Trajectory> corpus{a, b};
  const auto stats = corpus_stats(corpus);
  const auto& meta = stats.by_provenance.at(Provenance::meta);
  EXPECT_EQ(meta.trajectories, 1u);
  EXPECT_EQ(meta.chunks, 2u);
  EXPECT_DOUBLE_EQ(meta.chunks_per_trajectory.mean, 2.0);
  EXPECT_DOUBLE_EQ(meta.chunks_per_trajectory.std, 0.0);
  EXPECT_DOUBLE_EQ(meta.source_words_per_chunk.mean, 1.5);
  EXPECT_DOUBLE_EQ(meta.source_words_per_chunk.std, 0.5);
  EXPECT_DOUBLE_EQ(stats.by_provenance.at(Provenance::merged).target_words_per_chunk.mean, 3.0);
  EXPECT_THROW(corpus_stats(std::vector<Trajectory>{}), std::invalid_argument);
}

TEST(CorpusStats, DoublingCorpusChangesNothing) {
  std::mt19937_64 rng(13);
  std::vector<Trajectory> corpus;
  for (int k = 0; k < 200; ++k) {
    const auto rc = oracle::random_case(rng, 12, 0.2, k);
    const auto meta =
        build_meta(monotonicize(sufficient_sets(rc.pair, rc.alignment), rc.pair.source_len()),
                   rc.pair);
    corpus.push_back(meta);
    corpus.push_back(augment_pipeline(meta, AugmentConfig{}));
  }
  auto doubled = corpus;
  doubled.insert(doubled.end(), corpus.begin(), corpus.end());
  const auto once = corpus_stats(corpus);
  const auto twice = corpus_stats(doubled);
  for (const auto& [prov, s] : once.by_provenance) {
    const auto& t = twice.by_provenance.at(prov);
    EXPECT_EQ(t.trajectories, 2 * s.trajectories);
    EXPECT_EQ(t.chunks_per_trajectory.mean, s.chunks_per_trajectory.mean);
    EXPECT_EQ(t.chunks_per_trajectory.std, s.chunks_per_trajectory.std);
    EXPECT_EQ(t.source_words_per_chunk.mean, s.source_words_per_chunk.mean);
    EXPECT_EQ(t.target_words_per_chunk.std, s.target_words_per_chunk.std);
  }
  EXPECT_LE(once.by_provenance.at(Provenance::merged_shifted).chunks_per_trajectory.mean,
            once.by_provenance.at(Provenance::meta).chunks_per_trajectory.mean);
}

}  // namespace
}  // namespace simulmt
