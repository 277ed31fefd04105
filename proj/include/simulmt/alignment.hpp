// Sentence pairs, Pharaoh word alignments and per-target sufficient source sets.
//
// Positions are 1-based throughout the library. Pharaoh text is 0-based and is
// converted on the way in and out.
#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace simulmt {

using Words = std::vector<std::string>;

class AlignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

/// Splits on ASCII whitespace; runs of whitespace never produce empty words.
inline Words tokenize(std::string_view line) {
  Words words;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && is_space(line[pos])) ++pos;
    std::size_t end = pos;
    while (end < line.size() && !is_space(line[end])) ++end;
    if (end > pos) words.emplace_back(line.substr(pos, end - pos));
    pos = end;
  }
  return words;
}

inline std::string join(const Words& words, std::string_view sep = " ") {
  std::string out;
  for (std::size_t k = 0; k < words.size(); ++k) {
    if (k) out += sep;
    out += words[k];
  }
  return out;
}

struct SentencePair {
  Words source;
  Words target;
  std::size_t id = 0;

  std::size_t source_len() const { return source.size(); }
  std::size_t target_len() const { return target.size(); }
};

/// Throws AlignmentError if a side is empty or a word is empty or contains whitespace.
inline void validate(const SentencePair& pair) {
  auto check_side = [&](const Words& side, const char* name) {
    if (side.empty()) {
      throw AlignmentError("record " + std::to_string(pair.id) + ": empty " + name + " sentence");
    }
    for (const auto& w : side) {
      if (w.empty() || std::any_of(w.begin(), w.end(), is_space)) {
        throw AlignmentError("record " + std::to_string(pair.id) + ": invalid " + name +
                             " word '" + w + "'");
      }
    }
  };
  check_side(pair.source, "source");
  check_side(pair.target, "target");
}

inline SentencePair make_sentence_pair(std::string_view source_line, std::string_view target_line,
                                       std::size_t id) {
  SentencePair pair{tokenize(source_line), tokenize(target_line), id};
  validate(pair);
  return pair;
}

/// One alignment link between source position `source` and target position `target` (1-based).
struct Link {
  std::size_t source = 0;
  std::size_t target = 0;

  auto operator<=>(const Link&) const = default;
};

/// A deduplicated set of links, kept sorted by (source, target).
class AlignmentSet {
 public:
  AlignmentSet() = default;
  explicit AlignmentSet(std::vector<Link> links) : links_(std::move(links)) {
    std::sort(links_.begin(), links_.end());
    links_.erase(std::unique(links_.begin(), links_.end()), links_.end());
  }

  const std::vector<Link>& links() const { return links_; }
  std::size_t size() const { return links_.size(); }
  bool empty() const { return links_.empty(); }
  bool contains(Link link) const { return std::binary_search(links_.begin(), links_.end(), link); }

  bool operator==(const AlignmentSet&) const = default;

 private:
  std::vector<Link> links_;
};

/// Parses a line of 0-based `i-j` tokens. Blank lines give an empty set.
inline AlignmentSet parse_pharaoh(std::string_view line, std::size_t source_len,
                                  std::size_t target_len, std::size_t record_id = 0) {
  const std::string prefix = "record " + std::to_string(record_id) + ": ";
  std::vector<Link> links;
  for (const auto& token : tokenize(line)) {
    const auto dash = token.find('-');
    auto parse_index = [&](std::string_view digits, std::size_t& out) {
      const char* first = digits.data();
      const char* last = digits.data() + digits.size();
      auto [ptr, ec] = std::from_chars(first, last, out);
      return !digits.empty() && ec == std::errc{} && ptr == last;
    };
    std::size_t i = 0;
    std::size_t j = 0;
    if (dash == std::string::npos ||
        !parse_index(std::string_view(token).substr(0, dash), i) ||
        !parse_index(std::string_view(token).substr(dash + 1), j)) {
      throw AlignmentError(prefix + "malformed alignment token '" + token + "'");
    }
    if (i >= source_len || j >= target_len) {
      throw AlignmentError(prefix + "alignment pair (" + std::to_string(i) + "," +
                           std::to_string(j) + ") out of bounds for I=" +
                           std::to_string(source_len) + ", J=" + std::to_string(target_len));
    }
    links.push_back({i + 1, j + 1});
  }
  return AlignmentSet(std::move(links));
}

inline std::string render_pharaoh(const AlignmentSet& alignment) {
  std::string out;
  for (const auto& link : alignment.links()) {
    if (!out.empty()) out += ' ';
    out += std::to_string(link.source - 1);
    out += '-';
    out += std::to_string(link.target - 1);
  }
  return out;
}

/// For every target position j, the source positions aligned to it.
class SufficientSets {
 public:
  SufficientSets() = default;
  explicit SufficientSets(std::vector<std::vector<std::size_t>> sets) : sets_(std::move(sets)) {
    for (auto& s : sets_) {
      std::sort(s.begin(), s.end());
      s.erase(std::unique(s.begin(), s.end()), s.end());
    }
  }

  std::size_t target_len() const { return sets_.size(); }

  /// The set for target position j (1-based).
  const std::vector<std::size_t>& at(std::size_t j) const { return sets_.at(j - 1); }

  /// Largest source position in the set for j, or 0 when the set is empty.
  std::size_t max_at(std::size_t j) const {
    const auto& s = at(j);
    return s.empty() ? 0 : s.back();
  }

  const std::vector<std::vector<std::size_t>>& sets() const { return sets_; }

  bool operator==(const SufficientSets&) const = default;

 private:
  std::vector<std::vector<std::size_t>> sets_;
};

inline SufficientSets sufficient_sets(const AlignmentSet& alignment, std::size_t source_len,
                                      std::size_t target_len) {
  std::vector<std::size_t> counts(target_len, 0);
  for (const auto& link : alignment.links()) {
    if (link.source < 1 || link.source > source_len || link.target < 1 ||
        link.target > target_len) {
      throw AlignmentError("link (" + std::to_string(link.source) + "," +
                           std::to_string(link.target) + ") outside the sentence pair");
    }
    ++counts[link.target - 1];
  }
  std::vector<std::vector<std::size_t>> sets(target_len);
  for (std::size_t j = 0; j < target_len; ++j) sets[j].reserve(counts[j]);
  for (const auto& link : alignment.links()) sets[link.target - 1].push_back(link.source);
  return SufficientSets(std::move(sets));
}

inline SufficientSets sufficient_sets(const SentencePair& pair, const AlignmentSet& alignment) {
  return sufficient_sets(alignment, pair.source_len(), pair.target_len());
}

/// True iff the maxima of the non-empty sets never decrease with j.
inline bool is_monotonic(const SufficientSets& sets) {
  std::size_t running = 0;
  for (const auto& s : sets.sets()) {
    if (s.empty()) continue;
    if (s.back() < running) return false;
    running = s.back();
  }
  return true;
}

}  // namespace simulmt
