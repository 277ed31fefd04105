// Record-level pipeline stages and an order-preserving parallel map.
#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "simulmt/alignment.hpp"
#include "simulmt/augment.hpp"
#include "simulmt/io.hpp"
#include "simulmt/monotonic.hpp"
#include "simulmt/sftformat.hpp"
#include "simulmt/trajectory.hpp"

namespace simulmt {

/// Applies `fn` to every input on up to `workers` threads. out[k] == fn(in[k])
/// regardless of the worker count. The first exception thrown is rethrown.
template <class In, class Fn>
auto parallel_map(std::span<const In> in, Fn fn, std::size_t workers)
    -> std::vector<std::invoke_result_t<Fn&, const In&>> {
  using Out = std::invoke_result_t<Fn&, const In&>;
  std::vector<Out> out(in.size());
  workers = std::max<std::size_t>(1, std::min(workers, in.size()));
  if (workers == 1) {
    for (std::size_t k = 0; k < in.size(); ++k) out[k] = fn(in[k]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (std::size_t k = next++; k < in.size(); k = next++) {
      try {
        out[k] = fn(in[k]);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Output line of one record, or the reason it was rejected.
struct RecordResult {
  std::string line;
  std::string error;

  bool ok() const { return error.empty(); }
};

struct BitextRecord {
  std::size_t id = 0;
  std::string source;
  std::string target;
  std::string alignment;
};

/// Splits `source<TAB>target`.
inline std::pair<std::string, std::string> split_tsv(std::string_view line, std::size_t id) {
  const auto tab = line.find('\t');
  if (tab == std::string_view::npos) {
    throw AlignmentError("record " + std::to_string(id) + ": TSV line has no tab separator");
  }
  return {std::string(line.substr(0, tab)), std::string(line.substr(tab + 1))};
}

/// Alignment to meta trajectory for one sentence pair.
inline Trajectory curate_pair(const SentencePair& pair, const AlignmentSet& alignment) {
  const auto sets = sufficient_sets(pair, alignment);
  const auto plan = monotonicize(sets, pair.source_len());
  return build_meta(plan, pair);
}

inline RecordResult curate_record(const BitextRecord& rec, bool debug = false) {
  try {
    const auto pair = make_sentence_pair(rec.source, rec.target, rec.id);
    const auto alignment =
        parse_pharaoh(rec.alignment, pair.source_len(), pair.target_len(), rec.id);
    const auto traj = curate_pair(pair, alignment);
    if (const auto violations = verify(traj); !violations.empty()) {
      return {"", "record " + std::to_string(rec.id) + ": " + violations.front()};
    }
    return {trajectory_to_jsonl(traj, debug), ""};
  } catch (const std::exception& e) {
    return {"", e.what()};
  }
}

inline RecordResult augment_record(const std::string& line, const AugmentConfig& cfg,
                                   bool debug = false) {
  try {
    const auto meta = trajectory_from_jsonl(line);
    const auto out = augment_pipeline(meta, cfg);
    if (const auto violations = verify(out); !violations.empty()) {
      return {"", "record " + std::to_string(out.pair_id) + ": " + violations.front()};
    }
    return {trajectory_to_jsonl(out, debug), ""};
  } catch (const std::exception& e) {
    return {"", e.what()};
  }
}

inline RecordResult format_record(const std::string& line, std::string_view system_msg,
                                  const ChatTemplate& tmpl) {
  try {
    const auto traj = trajectory_from_jsonl(line);
    if (const auto violations = verify(traj); !violations.empty()) {
      return {"", "record " + std::to_string(traj.pair_id) + ": " + violations.front()};
    }
    return {sft_record_to_json(render_conversational(traj, system_msg, tmpl)).dump() + "\n", ""};
  } catch (const std::exception& e) {
    return {"", e.what()};
  }
}

inline ordered_json augment_config_json(const AugmentConfig& cfg) {
  ordered_json j;
  j["delta_min"] = cfg.delta_min;
  j["delta_max"] = cfg.delta_max;
  j["beta"] = cfg.beta;
  j["rho_min"] = cfg.rho_min;
  j["rho_max"] = kRhoMax;
  j["seed"] = cfg.seed;
  return j;
}

}  // namespace simulmt
