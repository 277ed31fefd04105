// simulmt: curate, augment, format, inspect and simulate conversational
// simultaneous-translation data.
//
// Exit status: 0 when every record passed validation, 1 when some records were
// rejected (they are reported on stderr and skipped), 2 on usage or I/O errors.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <tuple>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "simulmt/simulmt.hpp"

namespace {

using simulmt::ordered_json;

constexpr std::size_t kBatch = 4096;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  return out;
}

std::size_t count_lines(const std::string& path) {
  auto in = open_in(path);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

void print_config(const std::string& command, ordered_json cfg) {
  ordered_json j;
  j["command"] = command;
  j["config"] = std::move(cfg);
  std::cerr << "config " << j.dump() << '\n';
}

// Writes results in order, reports rejects; returns the number rejected.
std::size_t flush_results(const std::vector<simulmt::RecordResult>& results, std::ostream& out) {
  std::size_t rejected = 0;
  for (const auto& r : results) {
    if (r.ok()) {
      out << r.line;
    } else {
      ++rejected;
      std::cerr << "rejected: " << r.error << '\n';
    }
  }
  if (!out) throw UsageError("write failed");
  return rejected;
}

// Runs `fn` over `in` in bounded batches; returns the number rejected.
template <class Fn>
std::size_t map_jsonl(const char* command, std::istream& in, std::ostream& out,
                      std::size_t workers, Fn fn) {
  std::size_t rejected = 0;
  std::size_t total = 0;
  std::vector<std::string> batch;
  std::string line;
  auto drain = [&] {
    rejected += flush_results(
        simulmt::parallel_map<std::string>(std::span<const std::string>(batch), fn, workers), out);
    batch.clear();
  };
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    batch.push_back(line);
    ++total;
    if (batch.size() == kBatch) drain();
  }
  drain();
  std::cerr << command << ": " << total - rejected << " records written, " << rejected
            << " rejected\n";
  return rejected;
}

struct CurateArgs {
  std::string src, tgt, tsv, align, out;
  std::size_t workers = 1;
  bool debug = false;
};

int run_curate(const CurateArgs& a) {
  const bool use_tsv = !a.tsv.empty();
  if (use_tsv == (!a.src.empty() || !a.tgt.empty()) || (!use_tsv && (a.src.empty() || a.tgt.empty()))) {
    throw UsageError("curate needs either --src and --tgt, or --tsv");
  }
  ordered_json cfg;
  if (use_tsv) {
    cfg["tsv"] = a.tsv;
  } else {
    cfg["src"] = a.src;
    cfg["tgt"] = a.tgt;
  }
  cfg["align"] = a.align;
  cfg["out"] = a.out;
  cfg["workers"] = a.workers;
  cfg["debug"] = a.debug;
  print_config("curate", cfg);

  const std::size_t n_align = count_lines(a.align);
  const std::size_t n_src = count_lines(use_tsv ? a.tsv : a.src);
  const std::size_t n_tgt = use_tsv ? n_src : count_lines(a.tgt);
  if (n_src != n_tgt || n_src != n_align) {
    throw UsageError("line count mismatch: source " + std::to_string(n_src) + ", target " +
                     std::to_string(n_tgt) + ", alignments " + std::to_string(n_align));
  }

  auto src = open_in(use_tsv ? a.tsv : a.src);
  std::ifstream tgt;
  if (!use_tsv) tgt = open_in(a.tgt);
  auto align = open_in(a.align);
  auto out = open_out(a.out);

  std::size_t rejected = 0;
  std::size_t id = 0;
  std::vector<simulmt::BitextRecord> batch;
  auto curate = [&](const simulmt::BitextRecord& r) { return simulmt::curate_record(r, a.debug); };
  auto drain = [&] {
    rejected += flush_results(simulmt::parallel_map<simulmt::BitextRecord>(
                                  std::span<const simulmt::BitextRecord>(batch), curate, a.workers),
                              out);
    batch.clear();
  };
  std::string s, t, al;
  while (std::getline(src, s) && std::getline(align, al)) {
    simulmt::BitextRecord rec;
    rec.id = id++;
    rec.alignment = al;
    if (use_tsv) {
      try {
        std::tie(rec.source, rec.target) = simulmt::split_tsv(s, rec.id);
      } catch (const std::exception& e) {
        ++rejected;
        std::cerr << "rejected: " << e.what() << '\n';
        continue;
      }
    } else {
      std::getline(tgt, t);
      rec.source = s;
      rec.target = t;
    }
    batch.push_back(std::move(rec));
    if (batch.size() == kBatch) drain();
  }
  drain();
  std::cerr << "curate: " << id - rejected << " records written, " << rejected << " rejected\n";
  return rejected == 0 ? 0 : 1;
}

struct AugmentArgs {
  std::string in, out;
  simulmt::AugmentConfig cfg;
  std::size_t workers = 1;
  bool debug = false;
};

int run_augment(const AugmentArgs& a) {
  a.cfg.validate();
  auto cfg = simulmt::augment_config_json(a.cfg);
  cfg["in"] = a.in;
  cfg["out"] = a.out;
  cfg["workers"] = a.workers;
  print_config("augment", cfg);
  auto in = open_in(a.in);
  auto out = open_out(a.out);
  const std::size_t rejected = map_jsonl("augment", in, out, a.workers, [&](const std::string& line) {
    return simulmt::augment_record(line, a.cfg, a.debug);
  });
  return rejected == 0 ? 0 : 1;
}

struct FormatArgs {
  std::string in, out, template_id = "llama2", template_file, system_msg;
  std::size_t workers = 1;
};

int run_format(const FormatArgs& a) {
  simulmt::ChatTemplate tmpl;
  if (!a.template_file.empty()) {
    auto f = open_in(a.template_file);
    tmpl = simulmt::template_from_json(nlohmann::json::parse(f));
  } else {
    tmpl = simulmt::builtin_template(a.template_id);
  }
  ordered_json cfg;
  cfg["in"] = a.in;
  cfg["out"] = a.out;
  cfg["template"] = tmpl.id;
  cfg["system_msg"] = a.system_msg;
  cfg["workers"] = a.workers;
  print_config("format", cfg);
  auto in = open_in(a.in);
  auto out = open_out(a.out);
  const std::size_t rejected = map_jsonl("format", in, out, a.workers, [&](const std::string& line) {
    return simulmt::format_record(line, a.system_msg, tmpl);
  });
  return rejected == 0 ? 0 : 1;
}

std::string fmt_mean_std(const simulmt::MeanStd& m) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << m.mean << " +- " << m.std;
  return os.str();
}

struct StatsArgs {
  std::string in;
  bool json = false;
};

int run_stats(const StatsArgs& a) {
  ordered_json cfg;
  cfg["in"] = a.in;
  cfg["std"] = "population";
  print_config("stats", cfg);
  auto in = open_in(a.in);
  simulmt::StatsAccumulator acc;
  std::size_t rejected = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      acc.add(simulmt::trajectory_from_jsonl(line));
    } catch (const std::exception& e) {
      ++rejected;
      std::cerr << "rejected: " << e.what() << '\n';
    }
  }
  if (acc.empty()) throw UsageError("stats: no trajectories in " + a.in);
  const auto stats = acc.finish();
  if (a.json) {
    std::cout << simulmt::corpus_stats_to_json(stats).dump(2) << '\n';
  } else {
    std::cout << std::left << std::setw(16) << "provenance" << std::setw(8) << "trajs"
              << std::setw(18) << "#chunk" << std::setw(18) << "#src/chunk" << "#tgt/chunk\n";
    for (const auto& [prov, s] : stats.by_provenance) {
      std::cout << std::left << std::setw(16) << simulmt::to_string(prov) << std::setw(8)
                << s.trajectories << std::setw(18) << fmt_mean_std(s.chunks_per_trajectory)
                << std::setw(18) << fmt_mean_std(s.source_words_per_chunk)
                << fmt_mean_std(s.target_words_per_chunk) << '\n';
    }
  }
  return rejected == 0 ? 0 : 1;
}

struct SimulateArgs {
  std::string src, model, out, select = "ralcp", prompt = "conversational", system_msg;
  std::string template_id = "llama2";
  std::vector<std::size_t> chunks;
  std::size_t beam = 5;
  double gamma = 0.6;
  bool record_prompts = false;
};

// A single JSON document applies to every sentence; otherwise one JSON object per line.
std::vector<simulmt::ScriptedModel> load_models(const std::string& path, std::size_t sentences) {
  auto f = open_in(path);
  std::stringstream buf;
  buf << f.rdbuf();
  const std::string text = buf.str();
  std::vector<simulmt::ScriptedModel> models;
  try {
    models.push_back(simulmt::scripted_model_from_json(nlohmann::json::parse(text)));
    return models;
  } catch (const nlohmann::json::parse_error&) {
  }
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    models.push_back(simulmt::scripted_model_from_json(nlohmann::json::parse(line)));
  }
  if (models.size() != sentences) {
    throw UsageError("model file has " + std::to_string(models.size()) + " scripts for " +
                     std::to_string(sentences) + " source sentences");
  }
  return models;
}

int run_simulate(SimulateArgs a) {
  if (a.chunks.empty()) a.chunks = {3, 5, 7, 9, 11, 13};
  simulmt::SimOptions opt;
  opt.beam = a.beam;
  opt.strategy.kind = simulmt::select_kind_from_string(a.select);
  opt.strategy.gamma = opt.strategy.kind == simulmt::SelectKind::ralcp ? a.gamma : 1.0;
  opt.mode = simulmt::prompt_mode_from_string(a.prompt);
  opt.tmpl = simulmt::builtin_template(a.template_id);
  opt.system_msg = a.system_msg;
  opt.record_prompts = a.record_prompts;
  opt.strategy.validate();

  ordered_json cfg;
  cfg["src"] = a.src;
  cfg["model"] = a.model;
  cfg["out"] = a.out;
  cfg["chunk"] = a.chunks;
  cfg["beam"] = opt.beam;
  cfg["select"] = std::string(simulmt::to_string(opt.strategy.kind));
  cfg["gamma"] = opt.strategy.gamma;
  cfg["prompt"] = std::string(simulmt::to_string(opt.mode));
  cfg["template"] = opt.tmpl.id;
  print_config("simulate", cfg);

  std::vector<simulmt::Words> sources;
  {
    auto in = open_in(a.src);
    std::string line;
    while (std::getline(in, line)) sources.push_back(simulmt::tokenize(line));
  }
  const auto models = load_models(a.model, sources.size());
  auto out = open_out(a.out);
  std::size_t rejected = 0;
  for (std::size_t id = 0; id < sources.size(); ++id) {
    const auto& model = models.size() == 1 ? models.front() : models[id];
    for (std::size_t n : a.chunks) {
      opt.chunk = n;
      try {
        const auto sim = simulmt::run(sources[id], model, opt, id);
        simulmt::write_events(sim, out);
      } catch (const std::exception& e) {
        ++rejected;
        std::cerr << "rejected: record " << id << " (chunk " << n << "): " << e.what() << '\n';
      }
    }
  }
  if (!out) throw UsageError("write failed");
  return rejected == 0 ? 0 : 1;
}

struct EvalArgs {
  std::string events, csv;
  simulmt::CostModel cost;
  bool json = false;
};

int run_eval(const EvalArgs& a) {
  ordered_json cfg;
  cfg["events"] = a.events;
  cfg["cost_recompute"] = a.cost.per_recomputed_token;
  cfg["cost_word"] = a.cost.per_generated_word;
  cfg["wwt"] = "simulated cost-model proxy";
  print_config("eval", cfg);
  auto in = open_in(a.events);
  const auto runs = simulmt::read_events(in);
  if (runs.empty()) throw UsageError("eval: no events in " + a.events);

  ordered_json reports = ordered_json::array();
  std::ofstream csv;
  if (!a.csv.empty()) {
    csv = open_out(a.csv);
    csv << "id,chunk,prompt_mode,rounds,al,simulated_wwt,simulated_wwt_conversational,"
           "simulated_wwt_offline,recompute_conversational,recompute_offline\n";
  }
  if (!a.json) {
    std::cout << std::left << std::setw(6) << "id" << std::setw(7) << "chunk" << std::setw(16)
              << "prompt" << std::setw(8) << "rounds" << std::setw(10) << "AL" << std::setw(12)
              << "simWWT" << std::setw(12) << "recomp-CP" << "recomp-OP\n";
  }
  std::size_t rejected = 0;
  for (const auto& sim : runs) {
    try {
      const auto report = simulmt::latency_report(sim, a.cost, sim.mode);
      const double wwt_cp =
          simulmt::simulated_wwt(sim, a.cost, simulmt::PromptMode::conversational);
      const double wwt_op = simulmt::simulated_wwt(sim, a.cost, simulmt::PromptMode::offline);
      ordered_json r;
      r["id"] = sim.pair_id;
      r["chunk"] = sim.chunk;
      r["prompt_mode"] = std::string(simulmt::to_string(sim.mode));
      r["rounds"] = report.rounds;
      r["al"] = report.al;
      r["simulated_wwt"] = report.wwt;
      r["simulated_wwt_conversational"] = wwt_cp;
      r["simulated_wwt_offline"] = wwt_op;
      r["recompute_conversational"] = report.recompute_totals.total_conversational;
      r["recompute_offline"] = report.recompute_totals.total_offline;
      if (csv.is_open()) {
        csv << sim.pair_id << ',' << sim.chunk << ',' << simulmt::to_string(sim.mode) << ','
            << report.rounds << ',' << report.al << ',' << report.wwt << ',' << wwt_cp << ','
            << wwt_op << ',' << report.recompute_totals.total_conversational << ','
            << report.recompute_totals.total_offline << '\n';
      }
      if (!a.json) {
        std::cout << std::left << std::setw(6) << sim.pair_id << std::setw(7) << sim.chunk
                  << std::setw(16) << simulmt::to_string(sim.mode) << std::setw(8)
                  << report.rounds << std::setw(10) << std::fixed << std::setprecision(3)
                  << report.al << std::setw(12) << report.wwt << std::setw(12)
                  << report.recompute_totals.total_conversational
                  << report.recompute_totals.total_offline << '\n';
      }
      reports.push_back(std::move(r));
    } catch (const std::exception& e) {
      ++rejected;
      std::cerr << "rejected: run " << sim.pair_id << " (chunk " << sim.chunk
                << "): " << e.what() << '\n';
    }
  }
  if (a.json) std::cout << reports.dump(2) << '\n';
  return rejected == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conversational simultaneous-translation data and decoding simulation"};
  app.require_subcommand(1);

  CurateArgs curate;
  auto* c = app.add_subcommand("curate", "Alignments to meta trajectories (JSONL)");
  c->add_option("--src", curate.src, "Source sentences, one per line");
  c->add_option("--tgt", curate.tgt, "Target sentences, one per line");
  c->add_option("--tsv", curate.tsv, "Bitext as source<TAB>target lines");
  c->add_option("--align", curate.align, "Pharaoh alignments, one line per pair")->required();
  c->add_option("--out", curate.out, "Output JSONL")->required();
  c->add_option("--workers", curate.workers, "Worker threads")->check(CLI::PositiveNumber);
  c->add_flag("--debug", curate.debug, "Keep positions and prefix requirements");

  AugmentArgs augment;
  auto* g = app.add_subcommand("augment", "Merge and shift augmentation");
  g->add_option("--in", augment.in, "Meta trajectory JSONL")->required();
  g->add_option("--out", augment.out, "Output JSONL")->required();
  g->add_option("--delta-min", augment.cfg.delta_min, "Smallest merge group")->capture_default_str();
  g->add_option("--delta-max", augment.cfg.delta_max, "Largest merge group")->capture_default_str();
  g->add_option("--beta", augment.cfg.beta, "Shift probability")->capture_default_str();
  g->add_option("--rho-min", augment.cfg.rho_min, "Smallest split proportion")->capture_default_str();
  g->add_option("--seed", augment.cfg.seed, "Base seed")->capture_default_str();
  g->add_option("--workers", augment.workers, "Worker threads")->check(CLI::PositiveNumber);
  g->add_flag("--debug", augment.debug, "Keep positions and prefix requirements");

  FormatArgs format;
  auto* f = app.add_subcommand("format", "Trajectories to conversational SFT JSONL");
  f->add_option("--in", format.in, "Trajectory JSONL")->required();
  f->add_option("--out", format.out, "Output JSONL")->required();
  f->add_option("--template", format.template_id, "Built-in template id")->capture_default_str();
  f->add_option("--template-file", format.template_file, "Template definition (JSON)");
  f->add_option("--system-msg", format.system_msg, "System message");
  f->add_option("--workers", format.workers, "Worker threads")->check(CLI::PositiveNumber);

  StatsArgs stats;
  auto* s = app.add_subcommand("stats", "Chunk statistics per provenance");
  s->add_option("--in", stats.in, "Trajectory JSONL")->required();
  s->add_flag("--json", stats.json, "Print JSON instead of a table");

  SimulateArgs simulate;
  auto* m = app.add_subcommand("simulate", "Incremental decoding with a scripted model");
  m->add_option("--src", simulate.src, "Source sentences, one per line")->required();
  m->add_option("--model", simulate.model, "Scripted model JSON (or JSONL, one per sentence)")
      ->required();
  m->add_option("--chunk", simulate.chunks, "Source words read per round (default: 3 5 7 9 11 13)");
  m->add_option("--beam", simulate.beam, "Beam size")->capture_default_str();
  m->add_option("--select", simulate.select, "Prefix selection")
      ->check(CLI::IsMember({"lcp", "ralcp", "greedy"}))
      ->capture_default_str();
  m->add_option("--gamma", simulate.gamma, "RALCP agreement threshold")->capture_default_str();
  m->add_option("--prompt", simulate.prompt, "Prompt mode")
      ->check(CLI::IsMember({"conversational", "offline"}))
      ->capture_default_str();
  m->add_option("--template", simulate.template_id, "Built-in template id")->capture_default_str();
  m->add_option("--system-msg", simulate.system_msg, "System message");
  m->add_flag("--record-prompts", simulate.record_prompts, "Store round prompts in the log");
  m->add_option("--out", simulate.out, "Event log JSONL")->required();

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "AL and simulated word wall time from an event log");
  e->add_option("--events", eval.events, "Event log JSONL")->required();
  e->add_option("--cost-recompute", eval.cost.per_recomputed_token, "Cost per recomputed word")
      ->capture_default_str();
  e->add_option("--cost-word", eval.cost.per_generated_word, "Cost per generated word")
      ->capture_default_str();
  e->add_option("--csv", eval.csv, "Also write a CSV table");
  e->add_flag("--json", eval.json, "Print JSON instead of a table");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c->parsed()) return run_curate(curate);
    if (g->parsed()) return run_augment(augment);
    if (f->parsed()) return run_format(format);
    if (s->parsed()) return run_stats(stats);
    if (m->parsed()) return run_simulate(simulate);
    if (e->parsed()) return run_eval(eval);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 2;
  }
  return 2;
}
