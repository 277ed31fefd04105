// Merge and shift augmentation of meta trajectories.
//
// Sampling order (fixed, relied on by golden outputs):
//   merge: one delta draw per group, left to right;
//   shift: per chunk except the last, one Bernoulli(beta) draw, then one rho
//          draw only if the Bernoulli draw succeeded.
#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "simulmt/trajectory.hpp"

namespace simulmt {

inline constexpr double kRhoMax = 0.9;

struct AugmentConfig {
  std::size_t delta_min = 2;
  std::size_t delta_max = 10;
  double beta = 0.5;
  double rho_min = 0.5;
  std::uint64_t seed = 0;

  void validate() const {
    if (delta_min < 1) throw std::invalid_argument("delta_min must be >= 1");
    if (delta_max < delta_min) throw std::invalid_argument("delta_max must be >= delta_min");
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
    if (!(rho_min > 0.0 && rho_min < kRhoMax)) {
      throw std::invalid_argument("rho_min must lie in (0, 0.9)");
    }
  }
};

template <class S>
concept AugmentSampler = requires(S& s, std::size_t lo, std::size_t hi, double p, double a,
                                  double b) {
  { s.uniform_int(lo, hi) } -> std::convertible_to<std::size_t>;
  { s.bernoulli(p) } -> std::convertible_to<bool>;
  { s.uniform_real(a, b) } -> std::convertible_to<double>;
};

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the generator used for one sentence pair.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t pair_id) {
  return mix64(mix64(seed) ^ pair_id);
}

/// mt19937_64 with hand-written distributions, so draws are identical on every
/// standard library (std:: distributions are implementation-defined).
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform integer in [lo, hi] by rejection sampling.
  std::size_t uniform_int(std::size_t lo, std::size_t hi) {
    if (hi <= lo) return lo;
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return lo + static_cast<std::size_t>(engine_());
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t draw = engine_();
    while (draw >= limit) draw = engine_();
    return lo + static_cast<std::size_t>(draw % span);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform_real(double lo, double hi) { return lo + (hi - lo) * unit(); }

  bool bernoulli(double p) { return unit() < p; }

 private:
  std::mt19937_64 engine_;
};

/// Number of leading write words kept in place when splitting at proportion rho.
inline std::size_t split_index(double rho, std::size_t write_len) {
  const auto k = static_cast<std::size_t>(std::floor(rho * static_cast<double>(write_len)));
  return std::max<std::size_t>(1, k);
}

/// Groups consecutive chunks, each group of a freshly sampled size, into single chunks.
template <AugmentSampler Sampler>
Trajectory merge(const Trajectory& traj, const AugmentConfig& cfg, Sampler& rng) {
  if (traj.provenance != Provenance::meta) {
    throw std::invalid_argument("merge expects a meta trajectory (record " +
                                std::to_string(traj.pair_id) + ")");
  }
  Trajectory out = traj;
  out.provenance = Provenance::merged;
  out.chunks.clear();
  std::size_t next = 0;
  while (next < traj.chunks.size()) {
    const std::size_t delta = rng.uniform_int(cfg.delta_min, cfg.delta_max);
    const std::size_t stop = std::min(traj.chunks.size(), next + std::max<std::size_t>(delta, 1));
    Chunk group;
    for (; next < stop; ++next) {
      const auto& chunk = traj.chunks[next];
      group.read.insert(group.read.end(), chunk.read.begin(), chunk.read.end());
      group.write.insert(group.write.end(), chunk.write.begin(), chunk.write.end());
    }
    out.chunks.push_back(std::move(group));
  }
  return out;
}

/// Moves the tail of some WRITE chunks to the front of the following chunk.
template <AugmentSampler Sampler>
Trajectory shift(const Trajectory& traj, const AugmentConfig& cfg, Sampler& rng) {
  if (traj.provenance != Provenance::merged) {
    throw std::invalid_argument("shift expects a merged trajectory (record " +
                                std::to_string(traj.pair_id) + ")");
  }
  Trajectory out = traj;
  out.provenance = Provenance::merged_shifted;
  for (std::size_t c = 0; c + 1 < out.chunks.size(); ++c) {
    if (!rng.bernoulli(cfg.beta)) continue;
    const double rho = rng.uniform_real(cfg.rho_min, kRhoMax);
    auto& here = out.chunks[c];
    if (here.write.size() < 2) continue;
    auto& succ = out.chunks[c + 1];
    const std::size_t keep = split_index(rho, here.write.size());
    const std::size_t moved = here.write.size() - keep;
    succ.write.insert(succ.write.begin(), here.write.begin() + static_cast<std::ptrdiff_t>(keep),
                      here.write.end());
    succ.shifted_prefix_len += moved;
    here.write.resize(keep);
    here.shifted_prefix_len = std::min(here.shifted_prefix_len, keep);
  }
  return out;
}

/// shift(merge(traj)) with a generator seeded from (cfg.seed, pair id).
inline Trajectory augment_pipeline(const Trajectory& traj, const AugmentConfig& cfg) {
  PortableRng rng(derive_seed(cfg.seed, traj.pair_id));
  const Trajectory merged = merge(traj, cfg, rng);
  return shift(merged, cfg, rng);
}

}  // namespace simulmt
