// READ/WRITE trajectories and the minimum-latency segmentation of a plan.
#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "simulmt/alignment.hpp"
#include "simulmt/monotonic.hpp"

namespace simulmt {

enum class Provenance { meta, merged, merged_shifted };

inline std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::meta:
      return "meta";
    case Provenance::merged:
      return "merged";
    case Provenance::merged_shifted:
      return "merged+shifted";
  }
  return "meta";
}

inline Provenance provenance_from_string(std::string_view s) {
  if (s == "meta") return Provenance::meta;
  if (s == "merged") return Provenance::merged;
  if (s == "merged+shifted") return Provenance::merged_shifted;
  throw std::invalid_argument("unknown provenance '" + std::string(s) + "'");
}

/// One READ/WRITE pair. Positions are 1-based. The first `shifted_prefix_len`
/// write positions were moved in from the previous chunk by augmentation.
struct Chunk {
  std::vector<std::size_t> read;
  std::vector<std::size_t> write;
  std::size_t shifted_prefix_len = 0;

  bool operator==(const Chunk&) const = default;
};

struct Trajectory {
  std::size_t pair_id = 0;
  Provenance provenance = Provenance::meta;
  std::vector<Chunk> chunks;
  Words source;
  Words target;
  /// Per-target prefix requirement of the originating plan; empty when unknown.
  std::vector<std::size_t> prefix_req;

  std::size_t source_len() const { return source.size(); }
  std::size_t target_len() const { return target.size(); }

  bool operator==(const Trajectory&) const = default;
};

inline std::vector<std::size_t> position_range(std::size_t first, std::size_t last) {
  std::vector<std::size_t> out;
  if (last >= first) out.reserve(last - first + 1);
  for (std::size_t p = first; p <= last; ++p) out.push_back(p);
  return out;
}

/// Opens a new chunk whenever the requirement grows, reading exactly the
/// positions up to the new requirement; target words with an unchanged
/// requirement join the current chunk. Unread trailing source words go into the
/// last chunk's read.
inline Trajectory build_meta(const MonotonicPlan& plan, const SentencePair& pair) {
  if (plan.target_len() != pair.target_len() || plan.source_len != pair.source_len()) {
    throw std::invalid_argument("build_meta: plan shape does not match sentence pair " +
                                std::to_string(pair.id));
  }
  Trajectory traj;
  traj.pair_id = pair.id;
  traj.provenance = Provenance::meta;
  traj.source = pair.source;
  traj.target = pair.target;
  traj.prefix_req = plan.prefix_req;

  std::size_t read_so_far = 0;
  for (std::size_t j = 1; j <= plan.target_len(); ++j) {
    const std::size_t need = plan.requirement(j);
    if (need > read_so_far) {
      traj.chunks.push_back({position_range(read_so_far + 1, need), {}, 0});
      read_so_far = need;
    }
    traj.chunks.back().write.push_back(j);
  }
  for (std::size_t i = read_so_far + 1; i <= plan.source_len; ++i) {
    traj.chunks.back().read.push_back(i);
  }
  return traj;
}

namespace detail {

inline void check_side(const std::vector<Chunk>& chunks, bool source_side, std::size_t length,
                       std::vector<std::string>& out) {
  const char* name = source_side ? "source" : "target";
  std::vector<std::size_t> all;
  std::size_t last = 0;
  bool ordered = true;
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    const auto& positions = source_side ? chunks[c].read : chunks[c].write;
    bool chunk_ordered = true;
    for (std::size_t k = 0; k < positions.size(); ++k) {
      if (ordered && positions[k] <= last) {
        out.push_back(std::string(name) + " order violated @chunk " + std::to_string(c));
        ordered = false;
        chunk_ordered = false;
      }
      last = positions[k];
      all.push_back(positions[k]);
    }
    if (chunk_ordered && !positions.empty() &&
        positions.back() - positions.front() + 1 != positions.size()) {
      out.push_back(std::string(name) + " span not contiguous @chunk " + std::to_string(c));
    }
  }
  std::sort(all.begin(), all.end());
  if (all != position_range(1, length)) {
    out.push_back(std::string(name) + " coverage violated");
  }
}

inline std::vector<std::string> verify_impl(const Trajectory& traj,
                                            const std::vector<std::size_t>* prefix_req) {
  std::vector<std::string> out;
  const std::size_t source_len = traj.source_len();
  const std::size_t target_len = traj.target_len();
  if (traj.chunks.empty()) {
    out.push_back("trajectory has no chunks");
    return out;
  }
  for (std::size_t c = 0; c < traj.chunks.size(); ++c) {
    const auto& chunk = traj.chunks[c];
    const std::string at = " @chunk " + std::to_string(c);
    if (chunk.write.empty()) out.push_back("empty write" + at);
    if (chunk.read.empty() && traj.provenance == Provenance::meta) out.push_back("empty read" + at);
    if (chunk.shifted_prefix_len > chunk.write.size()) {
      out.push_back("shifted prefix exceeds write" + at);
    }
    if (chunk.shifted_prefix_len != 0 && traj.provenance != Provenance::merged_shifted) {
      out.push_back("unexpected shifted prefix" + at);
    }
  }
  check_side(traj.chunks, true, source_len, out);
  check_side(traj.chunks, false, target_len, out);
  if (traj.chunks.size() > source_len) out.push_back("chunk count exceeds source length");

  if (prefix_req != nullptr) {
    if (prefix_req->size() != target_len) {
      out.push_back("plan length mismatch");
    } else {
      std::size_t max_read = 0;
      for (std::size_t c = 0; c < traj.chunks.size(); ++c) {
        for (std::size_t i : traj.chunks[c].read) max_read = std::max(max_read, i);
        for (std::size_t j : traj.chunks[c].write) {
          if (j >= 1 && j <= target_len && (*prefix_req)[j - 1] > max_read) {
            out.push_back("sufficiency violated @chunk " + std::to_string(c));
            break;
          }
        }
      }
    }
  }
  return out;
}

}  // namespace detail

/// Audits every trajectory invariant; an empty result means the trajectory is sound.
/// Sufficiency is checked against the embedded requirement when present.
inline std::vector<std::string> verify(const Trajectory& traj) {
  return detail::verify_impl(traj, traj.prefix_req.empty() ? nullptr : &traj.prefix_req);
}

inline std::vector<std::string> verify(const Trajectory& traj, const MonotonicPlan& plan) {
  return detail::verify_impl(traj, &plan.prefix_req);
}

/// Source words read before each target word is written. Reads happen before
/// the writes of their chunk, except that when the plan requirement is known,
/// last-chunk reads beyond every requirement of its writes are the
/// end-of-sentence flush and count as read after them.
inline std::vector<std::size_t> write_schedule(const Trajectory& traj) {
  std::vector<std::size_t> g;
  std::size_t read = 0;
  for (std::size_t c = 0; c < traj.chunks.size(); ++c) {
    const auto& chunk = traj.chunks[c];
    const std::size_t before = read;
    read += chunk.read.size();
    std::size_t at_write = read;
    if (c + 1 == traj.chunks.size() && traj.prefix_req.size() == traj.target_len()) {
      std::size_t need = before;
      for (std::size_t j : chunk.write) need = std::max(need, traj.prefix_req.at(j - 1));
      at_write = std::min(read, need);
    }
    g.insert(g.end(), chunk.write.size(), at_write);
  }
  return g;
}

/// Words of chunk positions, materialized from the trajectory's sentences.
inline Words read_words(const Trajectory& traj, const Chunk& chunk) {
  Words out;
  for (std::size_t i : chunk.read) out.push_back(traj.source.at(i - 1));
  return out;
}

inline Words write_words(const Trajectory& traj, const Chunk& chunk) {
  Words out;
  for (std::size_t j : chunk.write) out.push_back(traj.target.at(j - 1));
  return out;
}

}  // namespace simulmt
