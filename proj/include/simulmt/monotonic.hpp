// Monotonic dependency plans built from sufficient source sets.
#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "simulmt/alignment.hpp"

namespace simulmt {

/// prefix_req[j-1] is the number of source words that must be read before
/// target word j may be written. It never decreases with j.
struct MonotonicPlan {
  std::vector<std::size_t> prefix_req;
  std::vector<Link> added_edges;
  std::size_t source_len = 0;

  std::size_t target_len() const { return prefix_req.size(); }
  std::size_t requirement(std::size_t j) const { return prefix_req.at(j - 1); }

  bool operator==(const MonotonicPlan&) const = default;
};

/// Adds an edge from the last required source word to every target word whose
/// own requirement would fall behind (or that has no alignment at all).
/// Before the first target word the requirement is one source word.
inline MonotonicPlan monotonicize(const SufficientSets& sets, std::size_t source_len) {
  if (source_len == 0 || sets.target_len() == 0) {
    throw std::invalid_argument("monotonicize: empty sentence");
  }
  MonotonicPlan plan;
  plan.source_len = source_len;
  plan.prefix_req.reserve(sets.target_len());
  std::size_t previous = 1;
  for (std::size_t j = 1; j <= sets.target_len(); ++j) {
    const std::size_t last = sets.max_at(j);
    if (last > source_len) {
      throw std::invalid_argument("monotonicize: source position " + std::to_string(last) +
                                  " exceeds source length " + std::to_string(source_len));
    }
    if (last < previous) {
      plan.added_edges.push_back({previous, j});
    } else {
      previous = last;
    }
    plan.prefix_req.push_back(previous);
  }
  return plan;
}

/// The sufficient sets with the plan's added edges folded in.
inline SufficientSets with_added_edges(const SufficientSets& sets, const MonotonicPlan& plan) {
  auto merged = sets.sets();
  for (const auto& edge : plan.added_edges) merged.at(edge.target - 1).push_back(edge.source);
  return SufficientSets(std::move(merged));
}

namespace detail {

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace detail

/// Graphviz text of the dependency graph. Alignment links are solid, added edges dashed.
inline std::string export_dot(const MonotonicPlan& plan, const SufficientSets& sets,
                              const SentencePair& pair) {
  std::string out = "digraph alignment {\n  rankdir=TB;\n";
  out += "  { rank=same;";
  for (std::size_t i = 1; i <= pair.source_len(); ++i) out += " x" + std::to_string(i) + ";";
  out += " }\n  { rank=same;";
  for (std::size_t j = 1; j <= pair.target_len(); ++j) out += " y" + std::to_string(j) + ";";
  out += " }\n";
  for (std::size_t i = 1; i <= pair.source_len(); ++i) {
    out += "  x" + std::to_string(i) + " [label=\"" + detail::dot_escape(pair.source[i - 1]) +
           "\"];\n";
  }
  for (std::size_t j = 1; j <= pair.target_len(); ++j) {
    out += "  y" + std::to_string(j) + " [label=\"" + detail::dot_escape(pair.target[j - 1]) +
           "\"];\n";
  }
  for (std::size_t j = 1; j <= sets.target_len(); ++j) {
    for (std::size_t i : sets.at(j)) {
      out += "  x" + std::to_string(i) + " -> y" + std::to_string(j) + ";\n";
    }
  }
  for (const auto& edge : plan.added_edges) {
    out += "  x" + std::to_string(edge.source) + " -> y" + std::to_string(edge.target) +
           " [style=dashed];\n";
  }
  out += "}\n";
  return out;
}

}  // namespace simulmt
