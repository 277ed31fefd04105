// JSON and JSONL encodings of trajectories, SFT records, event logs, scripted
// models and chat templates.
#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "simulmt/metrics.hpp"
#include "simulmt/sftformat.hpp"
#include "simulmt/simulator.hpp"
#include "simulmt/trajectory.hpp"

namespace simulmt {

using ordered_json = nlohmann::ordered_json;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- trajectories ---------------------------------------------------------

/// `{"id","provenance","chunks":[{"read","write","shifted"}]}`, plus a `debug`
/// object with positions and the plan requirement when `debug` is set.
inline ordered_json trajectory_to_json(const Trajectory& traj, bool debug = false) {
  ordered_json j;
  j["id"] = traj.pair_id;
  j["provenance"] = std::string(to_string(traj.provenance));
  ordered_json chunks = ordered_json::array();
  for (const auto& chunk : traj.chunks) {
    ordered_json c;
    c["read"] = read_words(traj, chunk);
    c["write"] = write_words(traj, chunk);
    c["shifted"] = chunk.shifted_prefix_len;
    chunks.push_back(std::move(c));
  }
  j["chunks"] = std::move(chunks);
  if (debug) {
    ordered_json d;
    ordered_json reads = ordered_json::array();
    ordered_json writes = ordered_json::array();
    for (const auto& chunk : traj.chunks) {
      reads.push_back(chunk.read);
      writes.push_back(chunk.write);
    }
    d["read_idx"] = std::move(reads);
    d["write_idx"] = std::move(writes);
    d["prefix_req"] = traj.prefix_req;
    j["debug"] = std::move(d);
  }
  return j;
}

/// Positions are rebuilt from word counts: chunks cover both sentences in order.
inline Trajectory trajectory_from_json(const nlohmann::json& j) {
  try {
    Trajectory traj;
    traj.pair_id = j.at("id").get<std::size_t>();
    traj.provenance = provenance_from_string(j.at("provenance").get<std::string>());
    for (const auto& c : j.at("chunks")) {
      Chunk chunk;
      for (const auto& w : c.at("read")) {
        traj.source.push_back(w.get<std::string>());
        chunk.read.push_back(traj.source.size());
      }
      for (const auto& w : c.at("write")) {
        traj.target.push_back(w.get<std::string>());
        chunk.write.push_back(traj.target.size());
      }
      chunk.shifted_prefix_len = c.value("shifted", std::size_t{0});
      traj.chunks.push_back(std::move(chunk));
    }
    if (j.contains("debug") && j["debug"].contains("prefix_req")) {
      traj.prefix_req = j["debug"]["prefix_req"].get<std::vector<std::size_t>>();
    }
    return traj;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad trajectory record: ") + e.what());
  }
}

inline std::string trajectory_to_jsonl(const Trajectory& traj, bool debug = false) {
  return trajectory_to_json(traj, debug).dump() + "\n";
}

inline Trajectory trajectory_from_jsonl(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("malformed JSON line: ") + e.what());
  }
  return trajectory_from_json(j);
}

// --- SFT records ----------------------------------------------------------

/// Maps byte offsets of UTF-8 text to code point offsets.
class CodepointIndex {
 public:
  explicit CodepointIndex(const std::string& text) : offsets_(text.size() + 1, 0) {
    std::size_t cp = 0;
    for (std::size_t b = 0; b < text.size(); ++b) {
      offsets_[b] = cp;
      if ((static_cast<unsigned char>(text[b]) & 0xC0) != 0x80) ++cp;
      offsets_[b + 1] = cp;
    }
  }

  std::size_t operator()(std::size_t byte) const { return offsets_.at(byte); }

 private:
  std::vector<std::size_t> offsets_;
};

/// Field order is fixed: id, text, turns, loss_mask_spans, template, provenance.
/// Span offsets count Unicode code points of `text`.
inline ordered_json sft_record_to_json(const SftRecord& record) {
  const CodepointIndex cp(record.text);
  auto span = [&](const Span& s) { return ordered_json::array({cp(s.begin), cp(s.end)}); };
  ordered_json j;
  j["id"] = record.id;
  j["text"] = record.text;
  ordered_json turns = ordered_json::array();
  for (const auto& t : record.turns) {
    ordered_json turn;
    turn["user"] = span(t.user);
    turn["assistant"] = span(t.assistant);
    turns.push_back(std::move(turn));
  }
  j["turns"] = std::move(turns);
  ordered_json loss = ordered_json::array();
  for (const auto& s : record.loss_mask_spans) loss.push_back(span(s));
  j["loss_mask_spans"] = std::move(loss);
  j["template"] = record.template_id;
  j["provenance"] = std::string(to_string(record.provenance));
  return j;
}

inline void emit_jsonl(const std::vector<SftRecord>& records, std::ostream& out) {
  for (const auto& r : records) out << sft_record_to_json(r).dump() << '\n';
  if (!out) throw std::runtime_error("failed to write SFT records");
}

inline ChatTemplate template_from_json(const nlohmann::json& j) {
  try {
    ChatTemplate t = llama2_template();
    t.id = j.at("id").get<std::string>();
    t.bos = j.value("bos", t.bos);
    t.eos = j.value("eos", t.eos);
    t.user_open = j.value("user_open", t.user_open);
    t.user_close = j.value("user_close", t.user_close);
    t.system_open = j.value("system_open", t.system_open);
    t.system_close = j.value("system_close", t.system_close);
    t.offline_instruction = j.value("offline_instruction", t.offline_instruction);
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad template: ") + e.what());
  }
}

// --- simulator ------------------------------------------------------------

/// Accepts `{"rounds":[[cand, ...], ...]}` where each candidate is either an
/// array of words or `{"words":[...],"end":bool}`.
inline ScriptedModel scripted_model_from_json(const nlohmann::json& j) {
  try {
    std::vector<std::vector<Candidate>> rounds;
    for (const auto& r : j.at("rounds")) {
      std::vector<Candidate> beam;
      for (const auto& c : r) {
        if (c.is_object()) {
          beam.push_back({c.at("words").get<Words>(), c.value("end", false)});
        } else {
          beam.push_back({c.get<Words>(), false});
        }
      }
      rounds.push_back(std::move(beam));
    }
    return ScriptedModel(std::move(rounds));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad scripted model: ") + e.what());
  }
}

inline ordered_json sim_event_to_json(const SimRun& sim, const SimEvent& e) {
  ordered_json j;
  j["id"] = sim.pair_id;
  j["chunk"] = sim.chunk;
  j["prompt_mode"] = std::string(to_string(sim.mode));
  j["round"] = e.round;
  j["read_words"] = e.read_words;
  j["candidates"] = e.candidates;
  j["committed_words"] = e.committed_words;
  j["recompute_tokens_conversational"] = e.recompute_tokens_conversational;
  j["recompute_tokens_offline"] = e.recompute_tokens_offline;
  j["cumulative_source_read"] = e.cumulative_source_read;
  j["flush"] = e.flush;
  if (!e.prompt.empty()) {
    j["prompt"] = e.prompt;
    j["context"] = e.context;
  }
  return j;
}

inline void write_events(const SimRun& sim, std::ostream& out) {
  for (const auto& e : sim.events) out << sim_event_to_json(sim, e).dump() << '\n';
}

/// Groups event lines into runs keyed by consecutive (id, chunk, prompt_mode).
/// A run is finished when its last event is a flush.
inline std::vector<SimRun> read_events(std::istream& in) {
  std::vector<SimRun> runs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto id = j.at("id").get<std::size_t>();
      const auto chunk = j.value("chunk", std::size_t{0});
      const auto mode = prompt_mode_from_string(j.value("prompt_mode", std::string("conversational")));
      if (runs.empty() || runs.back().finished || runs.back().pair_id != id ||
          runs.back().chunk != chunk || runs.back().mode != mode) {
        runs.push_back({id, chunk, mode, {}, false});
      }
      SimEvent e;
      e.round = j.at("round").get<std::size_t>();
      e.read_words = j.at("read_words").get<Words>();
      e.candidates = j.at("candidates").get<std::vector<Words>>();
      e.committed_words = j.at("committed_words").get<Words>();
      e.recompute_tokens_conversational = j.at("recompute_tokens_conversational").get<std::size_t>();
      e.recompute_tokens_offline = j.at("recompute_tokens_offline").get<std::size_t>();
      e.cumulative_source_read = j.at("cumulative_source_read").get<std::size_t>();
      e.flush = j.value("flush", false);
      e.prompt = j.value("prompt", std::string());
      e.context = j.value("context", std::string());
      runs.back().finished = e.flush;
      runs.back().events.push_back(std::move(e));
    } catch (const std::exception& e) {
      throw FormatError("event log line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return runs;
}

// --- metrics --------------------------------------------------------------

inline ordered_json mean_std_json(const MeanStd& m) {
  ordered_json j;
  j["mean"] = m.mean;
  j["std"] = m.std;
  return j;
}

inline ordered_json corpus_stats_to_json(const CorpusStats& stats) {
  ordered_json j = ordered_json::object();
  for (const auto& [prov, s] : stats.by_provenance) {
    ordered_json p;
    p["trajectories"] = s.trajectories;
    p["chunks"] = s.chunks;
    p["chunks_per_trajectory"] = mean_std_json(s.chunks_per_trajectory);
    p["source_words_per_chunk"] = mean_std_json(s.source_words_per_chunk);
    p["target_words_per_chunk"] = mean_std_json(s.target_words_per_chunk);
    j[std::string(to_string(prov))] = std::move(p);
  }
  return j;
}

}  // namespace simulmt
