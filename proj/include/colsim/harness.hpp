// Copyright (c) 2026 The colsim authors
// SPDX-License-Identifier: Apache-2.0

#ifndef COLSIM_HARNESS_HPP
#define COLSIM_HARNESS_HPP

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "colsim/d2color.hpp"
#include "colsim/ecolor.hpp"
#include "colsim/graph.hpp"
#include "colsim/vcolor.hpp"

namespace colsim {

constexpr int kReportSchemaVersion = 1;

enum class ColoringKind { vertex, edge, distance2 };

struct HarnessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Verdict {
  bool proper = false;
  bool budget_ok = false;
  bool completed = false;   // no element left uncolored
  std::uint64_t colors_used = 0;
  std::uint64_t rounds = 0;  // filled by the caller from the run report
  bool pass() const { return proper && budget_ok && completed; }
};

/// Properness, distinct-color count, and budget check of a (possibly
/// partial) coloring against ground-truth adjacency of the chosen kind.
inline Verdict verify_coloring(const Graph& g, const std::vector<std::uint32_t>& coloring,
                               ColoringKind kind, std::uint64_t budget) {
  const std::size_t want =
      kind == ColoringKind::edge ? g.num_edges() : g.num_vertices();
  if (coloring.size() != want)
    throw HarnessError("verify_coloring: coloring size " + std::to_string(coloring.size()) +
                       " does not match " + std::to_string(want) + " elements");

  Verdict v;
  v.proper = true;
  v.budget_ok = true;
  v.completed = true;
  std::set<std::uint32_t> used;
  for (std::uint32_t c : coloring) {
    if (c == kNoColor) {
      v.completed = false;
      continue;
    }
    used.insert(c);
    if (c >= budget) v.budget_ok = false;
  }
  v.colors_used = used.size();

  auto clash = [&](std::uint32_t a, std::uint32_t b) {
    return a != kNoColor && a == b;
  };
  switch (kind) {
    case ColoringKind::vertex:
      for (const auto& [a, b] : g.edges())
        if (clash(coloring[a], coloring[b])) v.proper = false;
      break;
    case ColoringKind::edge: {
      // Edges sharing an endpoint must differ: check each vertex's star.
      std::vector<std::vector<std::uint32_t>> at(g.num_vertices());
      for (std::size_t i = 0; i < g.edges().size(); ++i) {
        if (coloring[i] == kNoColor) continue;
        at[g.edges()[i].first].push_back(coloring[i]);
        at[g.edges()[i].second].push_back(coloring[i]);
      }
      for (auto& star : at) {
        std::sort(star.begin(), star.end());
        if (std::adjacent_find(star.begin(), star.end()) != star.end()) v.proper = false;
      }
      break;
    }
    case ColoringKind::distance2:
      // Any two vertices at distance <= 2 share a closed neighborhood.
      for (VertexId u = 0; u < g.num_vertices(); ++u) {
        std::vector<std::uint32_t> hood;
        if (coloring[u] != kNoColor) hood.push_back(coloring[u]);
        for (VertexId w : g.neighbors(u))
          if (coloring[w] != kNoColor) hood.push_back(coloring[w]);
        std::sort(hood.begin(), hood.end());
        if (std::adjacent_find(hood.begin(), hood.end()) != hood.end()) v.proper = false;
      }
      break;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Experiment runner

struct ExperimentConfig {
  GraphModel model = GraphModel::gnp;
  GenParams gen;
  std::uint64_t graph_seed = 1;
  std::string graph_file;  // overrides the generator when non-empty
  std::string variant = "vertex";  // vertex | vertex_sparse | edge_2plus |
                                   // edge_2dminus1 | edge_1plus |
                                   // d2_1plus | d2_sparse | d2_logc
  double eps = 1.0;
  double c_c = 8.0;
  int t_eps = 0;
  int c = 1;
  int reps_a = 4;
  int reps_b = 4;
  double bandwidth_mult = 1.0;
  int round_cap = 0;
  std::vector<std::uint64_t> seeds;
  std::string out_json;
  std::string out_csv;
};

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.seeds.empty()) throw HarnessError("config: seed list is empty");
  if (cfg.bandwidth_mult < 1.0)
    throw HarnessError("config: bandwidth multiplier below 1 violates the round budget");
  if (cfg.eps <= 0.0) throw HarnessError("config: eps must be positive");
  static const std::set<std::string> variants = {
      "vertex", "vertex_sparse", "edge_2plus", "edge_2dminus1",
      "edge_1plus", "d2_1plus", "d2_sparse", "d2_logc"};
  if (!variants.count(cfg.variant)) throw HarnessError("config: unknown variant " + cfg.variant);
  if (cfg.graph_file.empty() && cfg.gen.n == 0) throw HarnessError("config: graph size missing");
}

struct RunRecord {
  std::uint64_t seed = 0;
  std::string variant;
  std::uint64_t palette = 0;
  Verdict verdict;
  RunReport report;
  std::uint64_t prefix_rounds = 0;
};

struct ExperimentResults {
  ExperimentConfig config;
  std::vector<RunRecord> runs;
  bool all_pass = false;
};

inline Graph experiment_graph(const ExperimentConfig& cfg) {
  if (!cfg.graph_file.empty()) {
    std::ifstream in(cfg.graph_file);
    if (!in) throw HarnessError("cannot open graph file " + cfg.graph_file);
    return load_graph(in);
  }
  return generate_graph(cfg.model, cfg.gen, cfg.graph_seed);
}

inline RunRecord run_one(const Graph& g, const ExperimentConfig& cfg, std::uint64_t seed) {
  RunRecord rec;
  rec.seed = seed;
  rec.variant = cfg.variant;
  const int bmult = static_cast<int>(cfg.bandwidth_mult);
  if (cfg.variant == "vertex" || cfg.variant == "vertex_sparse") {
    VColorOptions o;
    o.eps = cfg.eps;
    o.c_c = cfg.c_c;
    o.reps_a = cfg.reps_a;
    o.reps_b = cfg.reps_b;
    o.sparse_plus1 = cfg.variant == "vertex_sparse";
    o.round_cap = cfg.round_cap;
    o.bandwidth_mult = bmult;
    o.seed = seed;
    auto r = color_vertices(g, o);
    rec.palette = r.palette;
    rec.verdict = verify_coloring(g, r.colors, ColoringKind::vertex, r.palette);
    rec.report = std::move(r.report);
    rec.prefix_rounds = r.prefix_rounds;
  } else if (cfg.variant == "edge_2plus" || cfg.variant == "edge_2dminus1") {
    EColorOptions o;
    o.eps = cfg.eps;
    o.c_c = cfg.c_c;
    o.reps_a = cfg.reps_a;
    o.reps_b = cfg.reps_b;
    o.round_cap = cfg.round_cap;
    o.bandwidth_mult = bmult;
    o.seed = seed;
    auto r = cfg.variant == "edge_2plus" ? color_edges_2plus(g, o)
                                         : color_edges_2delta_minus1(g, o);
    rec.palette = r.palette;
    rec.verdict = verify_coloring(g, r.colors, ColoringKind::edge, r.palette);
    rec.report = std::move(r.report);
    rec.prefix_rounds = r.prefix_rounds;
  } else if (cfg.variant == "edge_1plus") {
    EColorOptions o;
    o.eps = cfg.eps;
    o.c_c = cfg.c_c;
    o.t_eps = cfg.t_eps;
    o.round_cap = cfg.round_cap;
    o.bandwidth_mult = bmult;
    o.seed = seed;
    auto r = color_edges_1plus(g, o);
    rec.palette = r.budget;
    rec.verdict = verify_coloring(g, r.colors, ColoringKind::edge,
                                  r.budget_met ? r.budget
                                               : g.max_degree() + r.residual.palette);
    rec.verdict.budget_ok = rec.verdict.budget_ok && r.budget_met;
    rec.report = r.nibble.report;
    rec.report.rounds_used = r.rounds_total;
    rec.report.timed_out = r.nibble.report.timed_out || r.residual.report.timed_out;
  } else {
    D2Options o;
    o.mode = cfg.variant == "d2_1plus"
                 ? D2Mode::budget_1plus_eps
                 : (cfg.variant == "d2_sparse" ? D2Mode::budget_delta2_plus1_sparse
                                               : D2Mode::budget_log_c);
    o.eps = cfg.eps;
    o.c = cfg.c;
    o.c_c = cfg.c_c;
    o.reps_a = cfg.reps_a;
    o.reps_b = cfg.reps_b;
    o.round_cap = cfg.round_cap;
    o.bandwidth_mult = bmult;
    o.seed = seed;
    auto r = color_d2(g, o);
    rec.palette = r.palette;
    rec.verdict = verify_coloring(g, r.colors, ColoringKind::distance2, r.palette);
    rec.report = std::move(r.report);
    rec.prefix_rounds = r.prefix_rounds;
  }
  rec.verdict.rounds = rec.report.rounds_used;
  return rec;
}

// ---------------------------------------------------------------------------
// Reports

inline nlohmann::json config_json(const ExperimentConfig& cfg) {
  const char* model_name = "gnp";
  switch (cfg.model) {
    case GraphModel::gnp: model_name = "gnp"; break;
    case GraphModel::random_regular: model_name = "random_regular"; break;
    case GraphModel::triangle_free: model_name = "triangle_free"; break;
    case GraphModel::clique: model_name = "clique"; break;
    case GraphModel::path: model_name = "path"; break;
    case GraphModel::cycle: model_name = "cycle"; break;
  }
  return nlohmann::json{{"model", model_name},
                        {"n", cfg.gen.n},
                        {"p", cfg.gen.p},
                        {"d", cfg.gen.d},
                        {"graph_seed", cfg.graph_seed},
                        {"graph_file", cfg.graph_file},
                        {"variant", cfg.variant},
                        {"eps", cfg.eps},
                        {"c_c", cfg.c_c},
                        {"t_eps", cfg.t_eps},
                        {"c", cfg.c},
                        {"bandwidth_mult", cfg.bandwidth_mult},
                        {"round_cap", cfg.round_cap},
                        {"seeds", cfg.seeds}};
}

inline nlohmann::json run_json(const RunRecord& rec) {
  nlohmann::json traj = nlohmann::json::array();
  for (const auto& pt : rec.report.trajectory)
    traj.push_back({{"round", pt.round},
                    {"uncolored", pt.uncolored},
                    {"max_d_star", pt.max_d_star},
                    {"max_bits", pt.max_bits}});
  nlohmann::json phases = nlohmann::json::array();
  for (const auto& ph : rec.report.phases)
    phases.push_back(
        {{"label", ph.label}, {"first_round", ph.first_round}, {"last_round", ph.last_round}});
  return nlohmann::json{{"seed", rec.seed},
                        {"variant", rec.variant},
                        {"palette", rec.palette},
                        {"rounds", rec.report.rounds_used},
                        {"prefix_rounds", rec.prefix_rounds},
                        {"max_bits_per_edge_round", rec.report.max_bits_per_edge_round},
                        {"total_messages", rec.report.total_messages},
                        {"timed_out", rec.report.timed_out},
                        {"proper", rec.verdict.proper},
                        {"budget_ok", rec.verdict.budget_ok},
                        {"completed", rec.verdict.completed},
                        {"colors_used", rec.verdict.colors_used},
                        {"trajectory", traj},
                        {"phases", phases}};
}

inline std::string emit_report(const ExperimentResults& res, const std::string& format) {
  if (format == "json") {
    nlohmann::json doc{{"schema_version", kReportSchemaVersion},
                       {"config", config_json(res.config)},
                       {"all_pass", res.all_pass},
                       {"runs", nlohmann::json::array()}};
    for (const auto& rec : res.runs) doc["runs"].push_back(run_json(rec));
    return doc.dump(2) + "\n";
  }
  if (format == "csv") {
    std::ostringstream out;
    out << "seed,variant,palette,rounds,prefix_rounds,max_bits,total_messages,"
           "timed_out,proper,budget_ok,completed,colors_used\n";
    for (const auto& rec : res.runs)
      out << rec.seed << ',' << rec.variant << ',' << rec.palette << ','
          << rec.report.rounds_used << ',' << rec.prefix_rounds << ','
          << rec.report.max_bits_per_edge_round << ',' << rec.report.total_messages << ','
          << rec.report.timed_out << ',' << rec.verdict.proper << ','
          << rec.verdict.budget_ok << ',' << rec.verdict.completed << ','
          << rec.verdict.colors_used << '\n';
    return out.str();
  }
  throw HarnessError("unknown report format " + format);
}

inline ExperimentResults run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const Graph g = experiment_graph(cfg);
  ExperimentResults res;
  res.config = cfg;
  res.runs.resize(cfg.seeds.size());
  std::vector<std::future<RunRecord>> futs;
  futs.reserve(cfg.seeds.size());
  for (std::uint64_t seed : cfg.seeds)
    futs.push_back(std::async(std::launch::async | std::launch::deferred,
                              [&g, &cfg, seed] { return run_one(g, cfg, seed); }));
  res.all_pass = true;
  for (std::size_t i = 0; i < futs.size(); ++i) {
    res.runs[i] = futs[i].get();
    res.all_pass = res.all_pass && res.runs[i].verdict.pass();
  }
  if (!cfg.out_json.empty()) {
    std::ofstream out(cfg.out_json);
    if (!out) throw HarnessError("cannot write " + cfg.out_json);
    out << emit_report(res, "json");
  }
  if (!cfg.out_csv.empty()) {
    std::ofstream out(cfg.out_csv);
    if (!out) throw HarnessError("cannot write " + cfg.out_csv);
    out << emit_report(res, "csv");
  }
  return res;
}

// ---------------------------------------------------------------------------
// Flat key-value config files:  one "key = value" per line, '#' comments.

inline std::map<std::string, std::string> parse_kv(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw HarnessError("config line without '=': " + line);
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

inline ExperimentConfig config_from_kv(const std::map<std::string, std::string>& kv) {
  ExperimentConfig cfg;
  auto get = [&](const std::string& key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (const auto* v = get("model")) {
    auto m = parse_model(*v);
    if (!m) throw HarnessError("config: unknown model " + *v);
    cfg.model = *m;
  }
  if (const auto* v = get("n")) cfg.gen.n = static_cast<VertexId>(std::stoul(*v));
  if (const auto* v = get("p")) cfg.gen.p = std::stod(*v);
  if (const auto* v = get("d")) cfg.gen.d = static_cast<VertexId>(std::stoul(*v));
  if (const auto* v = get("graph_seed")) cfg.graph_seed = std::stoull(*v);
  if (const auto* v = get("graph_file")) cfg.graph_file = *v;
  if (const auto* v = get("variant")) cfg.variant = *v;
  if (const auto* v = get("eps")) cfg.eps = std::stod(*v);
  if (const auto* v = get("c_c")) cfg.c_c = std::stod(*v);
  if (const auto* v = get("t_eps")) cfg.t_eps = std::stoi(*v);
  if (const auto* v = get("c")) cfg.c = std::stoi(*v);
  if (const auto* v = get("bandwidth_mult")) cfg.bandwidth_mult = std::stod(*v);
  if (const auto* v = get("round_cap")) cfg.round_cap = std::stoi(*v);
  if (const auto* v = get("out_json")) cfg.out_json = *v;
  if (const auto* v = get("out_csv")) cfg.out_csv = *v;
  if (const auto* v = get("seeds")) {
    std::istringstream ss(*v);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) cfg.seeds.push_back(std::stoull(tok));
  }
  return cfg;
}

/// Default seed: COLSIM_SEED from the environment, else 1.
inline std::uint64_t default_seed() {
  if (const char* env = std::getenv("COLSIM_SEED")) return std::strtoull(env, nullptr, 10);
  return 1;
}

}  // namespace colsim

#endif  // COLSIM_HARNESS_HPP
