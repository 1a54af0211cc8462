// Copyright (c) 2026 The colsim authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "colsim/harness.hpp"
#include "colsim/repset.hpp"

namespace {

int cmd_gen(const std::string& model, std::uint32_t n, double p, std::uint32_t d,
            std::uint64_t seed, const std::string& out_path) {
  auto m = colsim::parse_model(model);
  if (!m) {
    std::cerr << "unknown model: " << model << "\n";
    return 2;
  }
  colsim::Graph g = colsim::generate_graph(*m, {.n = n, .p = p, .d = d}, seed);
  if (out_path.empty() || out_path == "-") {
    colsim::save_graph(g, std::cout);
  } else {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "cannot write " << out_path << "\n";
      return 2;
    }
    colsim::save_graph(g, out);
  }
  std::cerr << "n=" << g.num_vertices() << " m=" << g.num_edges()
            << " max_degree=" << g.max_degree() << "\n";
  return 0;
}

int cmd_run(colsim::ExperimentConfig cfg, bool quiet) {
  if (cfg.seeds.empty()) cfg.seeds.push_back(colsim::default_seed());
  auto res = colsim::run_experiment(cfg);
  if (!quiet) {
    for (const auto& rec : res.runs)
      std::cout << "seed=" << rec.seed << " variant=" << rec.variant
                << " rounds=" << rec.report.rounds_used << " colors=" << rec.verdict.colors_used
                << " palette=" << rec.palette << " proper=" << rec.verdict.proper
                << " budget_ok=" << rec.verdict.budget_ok
                << " completed=" << rec.verdict.completed << "\n";
    std::cout << (res.all_pass ? "PASS" : "FAIL") << " (" << res.runs.size() << " runs)\n";
  }
  return res.all_pass ? 0 : 1;
}

std::vector<std::uint32_t> load_colors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw colsim::HarnessError("cannot open colors file " + path);
  std::vector<std::uint32_t> colors;
  long long v;
  while (in >> v)
    colors.push_back(v < 0 ? colsim::kNoColor : static_cast<std::uint32_t>(v));
  return colors;
}

int cmd_verify(const std::string& graph_path, const std::string& colors_path,
               const std::string& kind_name, std::uint64_t budget) {
  std::ifstream gin(graph_path);
  if (!gin) {
    std::cerr << "cannot open graph file " << graph_path << "\n";
    return 2;
  }
  colsim::Graph g = colsim::load_graph(gin);
  colsim::ColoringKind kind;
  if (kind_name == "vertex")
    kind = colsim::ColoringKind::vertex;
  else if (kind_name == "edge")
    kind = colsim::ColoringKind::edge;
  else if (kind_name == "distance2")
    kind = colsim::ColoringKind::distance2;
  else {
    std::cerr << "unknown kind: " << kind_name << "\n";
    return 2;
  }
  if (budget == 0) budget = g.num_vertices() + 2ull * g.num_edges();
  auto v = colsim::verify_coloring(g, load_colors(colors_path), kind, budget);
  std::cout << "proper=" << v.proper << " budget_ok=" << v.budget_ok
            << " completed=" << v.completed << " colors_used=" << v.colors_used << "\n";
  return v.pass() ? 0 : 1;
}

int cmd_check_family(std::uint64_t k, double alpha, double delta, double nu,
                     std::uint64_t seed, const std::string& load_path,
                     const std::string& save_path, std::size_t probes_per_class,
                     bool allow_clamp) {
  using namespace colsim;
  RepFamily family = [&] {
    if (!load_path.empty()) {
      std::ifstream in(load_path, std::ios::binary);
      if (!in) throw RepsetError("cannot open family file " + load_path);
      return RepFamily::load(in);
    }
    const auto params = allow_clamp ? family_params_clamped(k, alpha, delta, nu)
                                    : family_params(k, alpha, delta, nu);
    return RepFamily::draw_explicit(params, seed);
  }();
  const auto& p = family.params();
  std::cerr << "k=" << p.k << " alpha=" << p.alpha << " delta=" << p.delta << " nu=" << p.nu
            << " s=" << p.s << " t=" << p.t << (p.clamped ? " (clamped)" : "") << "\n";
  auto probes = default_probe_sets(family, seed + 1, probes_per_class);
  auto rep = check_family(family, probes);
  for (const auto& r : rep.per_t)
    if (!r.pass)
      std::cout << "unusual T size=" << r.t_size << " fraction=" << r.unusual_fraction << "\n";
  std::cout << "probe_sets=" << probes.size() << " sets=" << rep.sets_probed
            << " elem_freq=[" << rep.elem_freq_min_ratio << "," << rep.elem_freq_max_ratio
            << "] elem_pass=" << rep.elem_freq_pass << " pass=" << rep.pass << "\n";
  if (!save_path.empty()) {
    std::ofstream out(save_path, std::ios::binary);
    if (!out) throw RepsetError("cannot write " + save_path);
    family.save(out);
  }
  return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CONGEST-model graph coloring simulator"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a graph file");
  std::string gen_model = "gnp", gen_out;
  std::uint32_t gen_n = 0, gen_d = 0;
  double gen_p = 0.0;
  std::uint64_t gen_seed = colsim::default_seed();
  gen->add_option("--model", gen_model, "gnp|random_regular|triangle_free|clique|path|cycle");
  gen->add_option("--n", gen_n, "vertex count")->required();
  gen->add_option("--p", gen_p, "edge probability (gnp, triangle_free)");
  gen->add_option("--d", gen_d, "degree (random_regular)");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output path ('-' for stdout)");

  // run
  auto* run = app.add_subcommand("run", "run a coloring experiment");
  colsim::ExperimentConfig rcfg;
  std::string run_config, run_seeds;
  bool run_quiet = false;
  run->add_option("--config", run_config, "key=value config file");
  run->add_option("--variant", rcfg.variant,
                  "vertex|vertex_sparse|edge_2plus|edge_2dminus1|edge_1plus|"
                  "d2_1plus|d2_sparse|d2_logc");
  std::string run_model;
  run->add_option("--model", run_model, "graph model");
  run->add_option("--n", rcfg.gen.n, "vertex count");
  run->add_option("--p", rcfg.gen.p, "edge probability");
  run->add_option("--d", rcfg.gen.d, "degree");
  run->add_option("--graph-seed", rcfg.graph_seed, "graph generator seed");
  run->add_option("--graph", rcfg.graph_file, "graph file (overrides the generator)");
  run->add_option("--eps", rcfg.eps, "palette slack parameter");
  run->add_option("--c-c", rcfg.c_c, "cleanup-stage degree constant");
  run->add_option("--t-eps", rcfg.t_eps, "nibble iteration count (0 = default)");
  run->add_option("--c", rcfg.c, "iterated-log depth (d2_logc)");
  run->add_option("--bandwidth-mult", rcfg.bandwidth_mult, "bandwidth multiplier (>= 1)");
  run->add_option("--round-cap", rcfg.round_cap, "round cap (0 = derived)");
  run->add_option("--seeds", run_seeds, "comma-separated run seeds");
  run->add_option("--out-json", rcfg.out_json, "JSON report path");
  run->add_option("--out-csv", rcfg.out_csv, "CSV report path");
  run->add_flag("--quiet", run_quiet, "suppress per-run output");

  // verify
  auto* verify = app.add_subcommand("verify", "verify a coloring file against a graph");
  std::string v_graph, v_colors, v_kind = "vertex";
  std::uint64_t v_budget = 0;
  verify->add_option("--graph", v_graph, "graph file")->required();
  verify->add_option("--colors", v_colors, "one color per line, -1 = uncolored")->required();
  verify->add_option("--kind", v_kind, "vertex|edge|distance2");
  verify->add_option("--budget", v_budget, "color budget (0 = unbounded)");

  // check-family
  auto* fam = app.add_subcommand("check-family", "build or load a set family and verify it");
  std::uint64_t f_k = 1024, f_seed = colsim::default_seed();
  double f_alpha = 0.5, f_delta = 0.125, f_nu = 0.125;
  std::string f_load, f_save;
  std::size_t f_probes = 200;
  bool f_clamp = false;
  fam->add_option("--k", f_k, "universe size");
  fam->add_option("--alpha", f_alpha, "intersection tolerance");
  fam->add_option("--delta", f_delta, "small-set threshold fraction");
  fam->add_option("--nu", f_nu, "failure fraction");
  fam->add_option("--seed", f_seed, "construction seed");
  fam->add_option("--load", f_load, "load a serialized family instead of drawing one");
  fam->add_option("--save", f_save, "serialize the family after checking");
  fam->add_option("--probes", f_probes, "random probe sets per size class");
  fam->add_flag("--allow-clamp", f_clamp, "clamp s to k when the universe is too small");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(gen_model, gen_n, gen_p, gen_d, gen_seed, gen_out);
    if (run->parsed()) {
      if (!run_config.empty()) {
        std::ifstream in(run_config);
        if (!in) throw colsim::HarnessError("cannot open config file " + run_config);
        rcfg = colsim::config_from_kv(colsim::parse_kv(in));
      }
      if (!run_model.empty()) {
        auto m = colsim::parse_model(run_model);
        if (!m) throw colsim::HarnessError("unknown model " + run_model);
        rcfg.model = *m;
      }
      if (!run_seeds.empty()) {
        rcfg.seeds.clear();
        std::istringstream ss(run_seeds);
        std::string tok;
        while (std::getline(ss, tok, ','))
          if (!tok.empty()) rcfg.seeds.push_back(std::stoull(tok));
      }
      return cmd_run(rcfg, run_quiet);
    }
    if (verify->parsed()) return cmd_verify(v_graph, v_colors, v_kind, v_budget);
    if (fam->parsed())
      return cmd_check_family(f_k, f_alpha, f_delta, f_nu, f_seed, f_load, f_save, f_probes,
                              f_clamp);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
