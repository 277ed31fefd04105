// Discrete simulation of chunked incremental decoding with prefix selection.
#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "simulmt/alignment.hpp"
#include "simulmt/sftformat.hpp"

namespace simulmt {

enum class SelectKind { lcp, ralcp, greedy };

struct SelectStrategy {
  SelectKind kind = SelectKind::ralcp;
  /// Minimum vote share accepted by RALCP.
  double gamma = 0.6;

  static SelectStrategy lcp() { return {SelectKind::lcp, 1.0}; }
  static SelectStrategy ralcp(double gamma = 0.6) { return {SelectKind::ralcp, gamma}; }
  static SelectStrategy greedy() { return {SelectKind::greedy, 1.0}; }

  void validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  }
};

inline std::string_view to_string(SelectKind kind) {
  switch (kind) {
    case SelectKind::lcp:
      return "lcp";
    case SelectKind::ralcp:
      return "ralcp";
    case SelectKind::greedy:
      return "greedy";
  }
  return "lcp";
}

inline SelectKind select_kind_from_string(std::string_view s) {
  if (s == "lcp") return SelectKind::lcp;
  if (s == "ralcp") return SelectKind::ralcp;
  if (s == "greedy") return SelectKind::greedy;
  throw std::invalid_argument("unknown selection strategy '" + std::string(s) + "'");
}

/// Stable prefix of a beam. LCP requires unanimity at each position; RALCP
/// accepts the plurality word when its vote share reaches gamma and it is not
/// tied; GREEDY returns the first candidate. LCP and RALCP stop at the first
/// rejected position or at the end of the shortest candidate.
inline Words select_prefix(std::span<const Words> candidates, const SelectStrategy& strategy) {
  if (candidates.empty()) throw std::invalid_argument("select_prefix: no candidates");
  if (strategy.kind == SelectKind::greedy) return candidates.front();

  const double beam = static_cast<double>(candidates.size());
  Words prefix;
  for (std::size_t pos = 0;; ++pos) {
    std::map<std::string_view, std::size_t> votes;
    for (const auto& cand : candidates) {
      if (pos >= cand.size()) return prefix;
      ++votes[cand[pos]];
    }
    std::string_view best;
    std::size_t best_votes = 0;
    bool tied = false;
    for (const auto& [word, count] : votes) {
      if (count > best_votes) {
        best = word;
        best_votes = count;
        tied = false;
      } else if (count == best_votes) {
        tied = true;
      }
    }
    if (strategy.kind == SelectKind::lcp) {
      if (votes.size() != 1) return prefix;
    } else if (tied || static_cast<double>(best_votes) / beam < strategy.gamma) {
      return prefix;
    }
    prefix.emplace_back(best);
  }
}

enum class PromptMode { conversational, offline };

inline std::string_view to_string(PromptMode mode) {
  return mode == PromptMode::conversational ? "conversational" : "offline";
}

inline PromptMode prompt_mode_from_string(std::string_view s) {
  if (s == "conversational") return PromptMode::conversational;
  if (s == "offline") return PromptMode::offline;
  throw std::invalid_argument("unknown prompt mode '" + std::string(s) + "'");
}

struct Candidate {
  Words words;
  /// The model declared the translation complete after these words.
  bool end = false;

  bool operator==(const Candidate&) const = default;
};

/// What a model sees in one round.
struct ModelContext {
  std::size_t round = 0;
  const PromptText& prompt;
  const Words& source_read;
  const Words& committed;
};

template <class M>
concept ModelPort = requires(M& model, const ModelContext& ctx, std::size_t beam) {
  { model.generate(ctx, beam) } -> std::convertible_to<std::vector<Candidate>>;
};

/// Replays a fixed beam per round; rounds past the script yield no candidates.
class ScriptedModel {
 public:
  ScriptedModel() = default;
  explicit ScriptedModel(std::vector<std::vector<Candidate>> rounds) : rounds_(std::move(rounds)) {}

  std::vector<Candidate> generate(const ModelContext& ctx, std::size_t beam) const {
    if (ctx.round >= rounds_.size()) return {};
    const auto& all = rounds_[ctx.round];
    return {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(std::min(beam, all.size()))};
  }

  const std::vector<std::vector<Candidate>>& rounds() const { return rounds_; }

 private:
  std::vector<std::vector<Candidate>> rounds_;
};

struct SimOptions {
  std::size_t chunk = 5;
  std::size_t beam = 5;
  SelectStrategy strategy = SelectStrategy::ralcp();
  PromptMode mode = PromptMode::conversational;
  ChatTemplate tmpl = llama2_template();
  std::string system_msg;
  /// Keep each round's prompt text and prompt+commit text in the event log.
  bool record_prompts = false;
};

struct SimEvent {
  std::size_t round = 0;
  Words read_words;
  std::vector<Words> candidates;
  Words committed_words;
  std::size_t recompute_tokens_conversational = 0;
  std::size_t recompute_tokens_offline = 0;
  std::size_t cumulative_source_read = 0;
  /// Source was exhausted this round and the top candidate was taken whole.
  bool flush = false;
  std::string prompt;
  std::string context;

  bool operator==(const SimEvent&) const = default;
};

struct SimRun {
  std::size_t pair_id = 0;
  std::size_t chunk = 0;
  PromptMode mode = PromptMode::conversational;
  std::vector<SimEvent> events;
  bool finished = false;

  std::size_t source_len() const {
    return events.empty() ? 0 : events.back().cumulative_source_read;
  }

  std::size_t target_len() const {
    std::size_t n = 0;
    for (const auto& e : events) n += e.committed_words.size();
    return n;
  }

  Words committed() const {
    Words out;
    for (const auto& e : events) {
      out.insert(out.end(), e.committed_words.begin(), e.committed_words.end());
    }
    return out;
  }

  bool operator==(const SimRun&) const = default;
};

/// Reads `chunk` source words per round, asks the model for a beam, commits the
/// selected prefix and repeats; the round that exhausts the source commits the
/// top candidate whole. Recompute counts are measured for both prompt modes
/// against the previous round's prompt plus its commit. In conversational mode
/// an empty commit still closes the turn, so the dialogue stays append-only.
template <ModelPort Model>
SimRun run(const Words& source, Model& model, const SimOptions& opt, std::size_t pair_id = 0) {
  if (opt.chunk < 1) throw std::invalid_argument("chunk size must be >= 1");
  if (opt.beam < 1) throw std::invalid_argument("beam size must be >= 1");
  if (source.empty()) throw std::invalid_argument("cannot simulate an empty source");
  opt.strategy.validate();

  SimRun sim;
  sim.pair_id = pair_id;
  sim.chunk = opt.chunk;
  sim.mode = opt.mode;
  PromptText conv_context;
  PromptText offline_context;
  Words source_read;
  Words committed;

  for (std::size_t round = 0; !sim.finished; ++round) {
    SimEvent event;
    event.round = round;
    const std::size_t take = std::min(opt.chunk, source.size() - source_read.size());
    for (std::size_t k = 0; k < take; ++k) {
      event.read_words.push_back(source[source_read.size()]);
      source_read.push_back(source[source_read.size()]);
    }
    event.cumulative_source_read = source_read.size();
    event.flush = source_read.size() == source.size();

    PromptText conv_prompt = conv_context;
    append_user_turn(conv_prompt, event.read_words, round == 0 ? opt.system_msg : "", opt.tmpl);
    const PromptText offline_prompt =
        render_offline(source, source_read.size(), committed, opt.tmpl, opt.system_msg);
    const PromptText& prompt =
        opt.mode == PromptMode::conversational ? conv_prompt : offline_prompt;

    const std::vector<Candidate> beam =
        model.generate(ModelContext{round, prompt, source_read, committed}, opt.beam);
    if (beam.empty()) {
      throw std::runtime_error("model returned no candidates in round " + std::to_string(round) +
                               " of record " + std::to_string(pair_id));
    }
    for (std::size_t k = 0; k < beam.size() && k < opt.beam; ++k) {
      event.candidates.push_back(beam[k].words);
    }
    event.committed_words =
        event.flush ? event.candidates.front() : select_prefix(event.candidates, opt.strategy);

    PromptText conv_next = conv_prompt;
    append_assistant_turn(conv_next, event.committed_words, opt.tmpl);
    committed.insert(committed.end(), event.committed_words.begin(),
                     event.committed_words.end());
    PromptText offline_next =
        render_offline(source, source_read.size(), committed, opt.tmpl, opt.system_msg);

    event.recompute_tokens_conversational = recompute_units(conv_next, conv_context);
    event.recompute_tokens_offline = recompute_units(offline_next, offline_context);
    if (opt.record_prompts) {
      event.prompt = prompt.text();
      event.context =
          opt.mode == PromptMode::conversational ? conv_next.text() : offline_next.text();
    }
    conv_context = std::move(conv_next);
    offline_context = std::move(offline_next);
    sim.events.push_back(std::move(event));
    sim.finished = sim.events.back().flush;
  }
  return sim;
}

template <ModelPort Model>
SimRun run(const SentencePair& pair, Model& model, const SimOptions& opt) {
  return run(pair.source, model, opt, pair.id);
}

struct CacheSavings {
  std::size_t total_conversational = 0;
  std::size_t total_offline = 0;

  bool operator==(const CacheSavings&) const = default;
};

inline CacheSavings cache_savings(const SimRun& sim) {
  if (!sim.finished) throw std::invalid_argument("cache_savings: run did not finish");
  CacheSavings out;
  for (const auto& e : sim.events) {
    out.total_conversational += e.recompute_tokens_conversational;
    out.total_offline += e.recompute_tokens_offline;
  }
  return out;
}

}  // namespace simulmt
