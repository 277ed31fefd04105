// Latency metrics and trajectory corpus statistics.
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "simulmt/simulator.hpp"
#include "simulmt/trajectory.hpp"

namespace simulmt {

/// Word-level Average Lagging. g[t-1] is the number of source words read when
/// target word t was written. Averages g[t] - (t-1)*I/J over t up to the first
/// word written after the full source was read.
inline double average_lagging(std::span<const std::size_t> g, std::size_t source_len,
                              std::size_t target_len) {
  if (source_len == 0 || target_len == 0) {
    throw std::invalid_argument("average_lagging: empty source or target");
  }
  if (g.size() != target_len) {
    throw std::invalid_argument("average_lagging: schedule length " + std::to_string(g.size()) +
                                " != target length " + std::to_string(target_len));
  }
  for (std::size_t t = 0; t < g.size(); ++t) {
    if (g[t] < 1 || g[t] > source_len || (t > 0 && g[t] < g[t - 1])) {
      throw std::invalid_argument("average_lagging: schedule must be nondecreasing in [1, I]");
    }
  }
  const double rate = static_cast<double>(target_len) / static_cast<double>(source_len);
  std::size_t tau = target_len;
  for (std::size_t t = 0; t < g.size(); ++t) {
    if (g[t] == source_len) {
      tau = t + 1;
      break;
    }
  }
  double sum = 0.0;
  for (std::size_t t = 1; t <= tau; ++t) {
    sum += static_cast<double>(g[t - 1]) - static_cast<double>(t - 1) / rate;
  }
  return sum / static_cast<double>(tau);
}

/// Schedule of a trajectory; see write_schedule.
inline std::vector<std::size_t> schedule_from_trajectory(const Trajectory& traj) {
  return write_schedule(traj);
}

/// Words committed in one round all share that round's cumulative source count.
inline std::vector<std::size_t> schedule_from_run(const SimRun& sim) {
  std::vector<std::size_t> g;
  for (const auto& e : sim.events) {
    g.insert(g.end(), e.committed_words.size(), e.cumulative_source_read);
  }
  return g;
}

/// The READ/WRITE trajectory a run realized. Reads of rounds that committed
/// nothing are carried into the next committing round.
inline Trajectory trajectory_from_run(const SimRun& sim, const Words& source) {
  Trajectory traj;
  traj.pair_id = sim.pair_id;
  traj.provenance = Provenance::merged;
  traj.source = source;
  traj.target = sim.committed();
  std::vector<std::size_t> pending;
  std::size_t read = 0;
  std::size_t written = 0;
  for (const auto& e : sim.events) {
    for (std::size_t k = 0; k < e.read_words.size(); ++k) pending.push_back(++read);
    if (e.committed_words.empty()) continue;
    Chunk chunk;
    chunk.read = std::move(pending);
    pending.clear();
    for (std::size_t k = 0; k < e.committed_words.size(); ++k) chunk.write.push_back(++written);
    traj.chunks.push_back(std::move(chunk));
  }
  if (!pending.empty() && !traj.chunks.empty()) {
    auto& last = traj.chunks.back().read;
    last.insert(last.end(), pending.begin(), pending.end());
  }
  return traj;
}

/// Costs of the simulated word wall time. This is a cost-model proxy, not a
/// hardware measurement.
struct CostModel {
  double per_recomputed_token = 1.0;
  double per_generated_word = 1.0;
};

/// Simulated cost per committed target word under one prompt mode.
inline double simulated_wwt(const SimRun& sim, const CostModel& cost, PromptMode mode) {
  if (!sim.finished) throw std::invalid_argument("simulated_wwt: run did not finish");
  const std::size_t target_len = sim.target_len();
  if (target_len == 0) throw std::invalid_argument("simulated_wwt: run committed no words");
  double total = 0.0;
  for (const auto& e : sim.events) {
    const std::size_t recomputed = mode == PromptMode::conversational
                                       ? e.recompute_tokens_conversational
                                       : e.recompute_tokens_offline;
    total += static_cast<double>(recomputed) * cost.per_recomputed_token +
             static_cast<double>(e.committed_words.size()) * cost.per_generated_word;
  }
  return total / static_cast<double>(target_len);
}

struct LatencyReport {
  double al = 0.0;
  /// Simulated word wall time under `mode`.
  double wwt = 0.0;
  PromptMode mode = PromptMode::conversational;
  std::size_t rounds = 0;
  CacheSavings recompute_totals;
};

inline LatencyReport latency_report(const SimRun& sim, const CostModel& cost, PromptMode mode) {
  LatencyReport report;
  const auto g = schedule_from_run(sim);
  report.al = average_lagging(g, sim.source_len(), sim.target_len());
  report.wwt = simulated_wwt(sim, cost, mode);
  report.mode = mode;
  report.rounds = sim.events.size();
  report.recompute_totals = cache_savings(sim);
  return report;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Single-pass accumulator over integer observations. Sums are exact, so the
/// result depends only on the multiset of observations.
class IntMoments {
 public:
  void add(std::uint64_t x) {
    ++count_;
    sum_ += x;
    sum_sq_ += static_cast<unsigned __int128>(x) * x;
  }

  std::uint64_t count() const { return count_; }

  /// Mean and population standard deviation.
  MeanStd finish() const {
    if (count_ == 0) return {};
    const auto n = static_cast<unsigned __int128>(count_);
    const double mean = static_cast<double>(sum_) / static_cast<double>(count_);
    const unsigned __int128 num = n * sum_sq_ - static_cast<unsigned __int128>(sum_) * sum_;
    const double var = static_cast<double>(num) / static_cast<double>(n * n);
    return {mean, std::sqrt(var)};
  }

 private:
  std::uint64_t count_ = 0;
  std::uint64_t sum_ = 0;
  unsigned __int128 sum_sq_ = 0;
};

struct ProvenanceStats {
  std::size_t trajectories = 0;
  std::size_t chunks = 0;
  MeanStd chunks_per_trajectory;
  MeanStd source_words_per_chunk;
  MeanStd target_words_per_chunk;
};

struct CorpusStats {
  std::map<Provenance, ProvenanceStats> by_provenance;
};

class StatsAccumulator {
 public:
  void add(const Trajectory& traj) {
    auto& acc = groups_[traj.provenance];
    acc.chunks.add(traj.chunks.size());
    for (const auto& chunk : traj.chunks) {
      acc.source.add(chunk.read.size());
      acc.target.add(chunk.write.size());
    }
  }

  bool empty() const { return groups_.empty(); }

  CorpusStats finish() const {
    if (groups_.empty()) throw std::invalid_argument("corpus_stats: empty corpus");
    CorpusStats stats;
    for (const auto& [prov, acc] : groups_) {
      ProvenanceStats& s = stats.by_provenance[prov];
      s.trajectories = acc.chunks.count();
      s.chunks = acc.source.count();
      s.chunks_per_trajectory = acc.chunks.finish();
      s.source_words_per_chunk = acc.source.finish();
      s.target_words_per_chunk = acc.target.finish();
    }
    return stats;
  }

 private:
  struct Group {
    IntMoments chunks;
    IntMoments source;
    IntMoments target;
  };
  std::map<Provenance, Group> groups_;
};

/// Mean and population standard deviation of chunk counts and of words per
/// chunk, grouped by provenance. Words per chunk are pooled over all chunks.
inline CorpusStats corpus_stats(std::span<const Trajectory> trajectories) {
  StatsAccumulator acc;
  for (const auto& t : trajectories) acc.add(t);
  return acc.finish();
}

}  // namespace simulmt
