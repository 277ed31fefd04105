// Conversational and offline prompt rendering with loss-mask spans.
//
// A rendered prompt is kept both as text and as a sequence of units. Source,
// target and system-message words are content units; template markers and the
// offline instruction are not. Prompt lengths and KV-cache accounting count
// content units only.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "simulmt/alignment.hpp"
#include "simulmt/trajectory.hpp"

namespace simulmt {

/// Byte range [begin, end) into rendered text.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return end == begin; }
  bool operator==(const Span&) const = default;
};

struct ChatTemplate {
  std::string id;
  std::string bos;
  std::string eos;
  std::string user_open;
  std::string user_close;
  std::string system_open;
  std::string system_close;
  std::string offline_instruction;
};

inline ChatTemplate llama2_template() {
  return {"llama2",       "<s>",       "</s>",
          "[INST]",       "[/INST]",   "<<SYS>>",
          "<</SYS>>",     "Translate the following sentence into the target language:"};
}

inline ChatTemplate builtin_template(std::string_view id) {
  if (id == "llama2") return llama2_template();
  throw std::invalid_argument("unknown template id '" + std::string(id) + "'");
}

struct PromptUnit {
  std::string glue;
  std::string text;
  bool content = false;

  bool operator==(const PromptUnit&) const = default;
};

class PromptText {
 public:
  /// Appends `glue` then `unit`; returns the byte span of `unit`.
  Span append(std::string_view glue, std::string_view unit, bool content) {
    text_ += glue;
    const std::size_t begin = text_.size();
    text_ += unit;
    units_.push_back({std::string(glue), std::string(unit), content});
    if (content) ++content_units_;
    return {begin, text_.size()};
  }

  const std::string& text() const { return text_; }
  const std::vector<PromptUnit>& units() const { return units_; }
  std::size_t content_units() const { return content_units_; }
  std::size_t size() const { return text_.size(); }

 private:
  std::string text_;
  std::vector<PromptUnit> units_;
  std::size_t content_units_ = 0;
};

inline std::size_t common_prefix_units(const PromptText& a, const PromptText& b) {
  const auto& ua = a.units();
  const auto& ub = b.units();
  std::size_t k = 0;
  while (k < ua.size() && k < ub.size() && ua[k] == ub[k]) ++k;
  return k;
}

/// Content units of `current` that lie past its common prefix with `previous`,
/// i.e. what a KV cache holding `previous` would still have to compute.
inline std::size_t recompute_units(const PromptText& current, const PromptText& previous) {
  const std::size_t shared = common_prefix_units(current, previous);
  std::size_t n = 0;
  for (std::size_t k = shared; k < current.units().size(); ++k) {
    if (current.units()[k].content) ++n;
  }
  return n;
}

namespace detail {

// Appends words separated by single spaces; the first word gets `first_glue`.
inline Span append_words(PromptText& prompt, std::string_view first_glue, const Words& words,
                         std::size_t masked_prefix = 0, std::vector<Span>* loss = nullptr) {
  Span whole{prompt.size(), prompt.size()};
  Span trainable{0, 0};
  for (std::size_t k = 0; k < words.size(); ++k) {
    const Span s = prompt.append(k == 0 ? first_glue : std::string_view(" "), words[k], true);
    if (k == 0) whole.begin = s.begin;
    whole.end = s.end;
    if (k == masked_prefix) trainable.begin = s.begin;
    if (k >= masked_prefix) trainable.end = s.end;
  }
  if (loss != nullptr && masked_prefix < words.size()) loss->push_back(trainable);
  return whole;
}

inline void open_instruction(PromptText& prompt, std::string_view system_msg,
                             const ChatTemplate& tmpl) {
  prompt.append("", tmpl.bos, false);
  prompt.append("", tmpl.user_open, false);
  const Words sys = tokenize(system_msg);
  if (!sys.empty()) {
    prompt.append(" ", tmpl.system_open, false);
    append_words(prompt, "\n", sys);
    prompt.append("\n", tmpl.system_close, false);
  }
}

inline std::string_view body_glue(std::string_view system_msg) {
  return tokenize(system_msg).empty() ? " " : "\n\n";
}

}  // namespace detail

/// Appends `<s>[INST] words [/INST]`, with the system block when `system_msg`
/// is non-empty. Returns the span of the user words.
inline Span append_user_turn(PromptText& prompt, const Words& words, std::string_view system_msg,
                             const ChatTemplate& tmpl) {
  detail::open_instruction(prompt, system_msg, tmpl);
  const Span user = detail::append_words(prompt, detail::body_glue(system_msg), words);
  prompt.append(" ", tmpl.user_close, false);
  return user;
}

/// Appends ` words</s>`. The first `masked_prefix` words are excluded from the
/// loss span pushed onto `loss`. Returns the span of the assistant words.
inline Span append_assistant_turn(PromptText& prompt, const Words& words,
                                  const ChatTemplate& tmpl, std::size_t masked_prefix = 0,
                                  std::vector<Span>* loss = nullptr) {
  const Span assistant = detail::append_words(prompt, " ", words, masked_prefix, loss);
  prompt.append("", tmpl.eos, false);
  return assistant;
}

struct TurnSpans {
  Span user;
  Span assistant;

  bool operator==(const TurnSpans&) const = default;
};

struct SftRecord {
  std::size_t id = 0;
  std::string text;
  std::vector<TurnSpans> turns;
  std::vector<Span> loss_mask_spans;
  std::string template_id;
  Provenance provenance = Provenance::meta;
};

/// One dialogue turn per chunk: the chunk's source words as the user message and
/// its target words as the response. Loss covers response words except a
/// chunk's shifted-in prefix.
inline SftRecord render_conversational(const Trajectory& traj, std::string_view system_msg,
                                       const ChatTemplate& tmpl) {
  SftRecord record;
  record.id = traj.pair_id;
  record.template_id = tmpl.id;
  record.provenance = traj.provenance;
  PromptText prompt;
  for (std::size_t c = 0; c < traj.chunks.size(); ++c) {
    const auto& chunk = traj.chunks[c];
    TurnSpans turn;
    turn.user = append_user_turn(prompt, read_words(traj, chunk), c == 0 ? system_msg : "", tmpl);
    turn.assistant = append_assistant_turn(prompt, write_words(traj, chunk), tmpl,
                                           chunk.shifted_prefix_len, &record.loss_mask_spans);
    record.turns.push_back(turn);
  }
  record.text = prompt.text();
  return record;
}

inline SftRecord render_conversational(const Trajectory& traj, std::string_view system_msg,
                                       std::string_view template_id) {
  return render_conversational(traj, system_msg, builtin_template(template_id));
}

/// Single-instruction prompt: instruction and the first `partial_source_len`
/// source words inside the user turn, the target history after it. New source
/// words therefore land before the history.
inline PromptText render_offline(const Words& source, std::size_t partial_source_len,
                                 const Words& target_history, const ChatTemplate& tmpl,
                                 std::string_view system_msg = {}) {
  if (partial_source_len > source.size()) {
    throw std::invalid_argument("render_offline: source prefix longer than the source");
  }
  PromptText prompt;
  detail::open_instruction(prompt, system_msg, tmpl);
  std::string_view glue = detail::body_glue(system_msg);
  for (const auto& w : tokenize(tmpl.offline_instruction)) {
    prompt.append(glue, w, false);
    glue = " ";
  }
  Words prefix(source.begin(), source.begin() + static_cast<std::ptrdiff_t>(partial_source_len));
  detail::append_words(prompt, glue, prefix);
  prompt.append(" ", tmpl.user_close, false);
  detail::append_words(prompt, " ", target_history);
  return prompt;
}

inline std::string render_offline(const SentencePair& pair, std::size_t partial_source_len,
                                  const Words& target_history, std::string_view template_id) {
  return render_offline(pair.source, partial_source_len, target_history,
                        builtin_template(template_id))
      .text();
}

}  // namespace simulmt
