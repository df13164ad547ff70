#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trellis_astar/bench.hpp"
#include "trellis_astar/bits.hpp"
#include "trellis_astar/errors.hpp"
#include "trellis_astar/ginkgo.hpp"
#include "trellis_astar/io.hpp"
#include "trellis_astar/pipeline.hpp"

namespace trellis_astar::cli {

using nlohmann::json;

/// Process exit codes, one per failure class.
enum ExitCode : int {
  kOk = 0,
  kUnexpected = 1,
  kUsage = 2,
  kInput = 3,
  kDomain = 4,
  kCapacity = 5,
  kObjectiveMismatch = 6,
  kSearchExhausted = 7,
  kMissingNode = 8,
};

struct Options {
  std::string command;
  std::string mode;
  std::string cost = "hcc";
  std::string heuristic;
  std::string in;
  std::string out;
  std::string points;
  std::string trellis_out;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::size_t pool = 1000;
  std::size_t top_k = 5;
  std::string sampler = "best-k";
  std::size_t rounds = 1;
  std::string init = "beam";
  std::size_t width = 0;
  std::optional<std::size_t> node_budget;
  JetGeneratorParams gen;
};

inline json config_json(const Options& o) {
  json j;
  j["command"] = o.command;
  j["mode"] = o.mode;
  j["cost"] = o.cost;
  j["heuristic"] = o.heuristic;
  j["in"] = o.in;
  j["out"] = o.out;
  j["points"] = o.points;
  j["trellis_out"] = o.trellis_out;
  j["seed"] = o.seed;
  j["workers"] = o.workers;
  j["pool"] = o.pool;
  j["top_k"] = o.top_k;
  j["sampler"] = o.sampler;
  j["rounds"] = o.rounds;
  j["init"] = o.init;
  j["width"] = o.width;
  if (o.node_budget) j["node_budget"] = *o.node_budget;
  else j["node_budget"] = nullptr;
  return j;
}

namespace detail {

inline void emit(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out.empty()) out << text;
  else io::write_file(o.out, text);
}

inline int run_search_command(Options& o, const std::string& algorithm, std::ostream& out) {
  const auto cost = pipeline::parse_cost(o.cost);
  const auto inst = pipeline::load_instance(cost, o.in, o.points);
  o.heuristic = pipeline::resolve_heuristic(cost, o.heuristic);

  pipeline::AlgorithmOptions opt;
  opt.heuristic = o.heuristic;
  opt.seed = o.seed;
  opt.beam_width = o.width;
  opt.init = o.init == "none" ? pipeline::InitKind::kNone
             : o.init == "greedy" ? pipeline::InitKind::kGreedy
                                  : pipeline::InitKind::kBeam;
  opt.extender.mode = o.sampler == "importance" ? SamplerMode::kImportance : SamplerMode::kBestK;
  opt.extender.k = o.top_k;
  opt.extender.pool = o.pool;
  if (o.node_budget) opt.extender.node_budget = *o.node_budget;
  opt.extender.validate();
  opt.rounds = o.rounds;
  opt.limits = pipeline::limits_from_env();
  opt.want_trellis = !o.trellis_out.empty();

  const json config = config_json(o);
  json doc;
  json trellis;
  std::optional<std::uint64_t> tree_count;
  double result_cost = 0.0;
  pipeline::with_model(inst, o.heuristic, [&](auto& model) {
    const auto outcome = pipeline::run_algorithm(algorithm, model, opt);
    doc = pipeline::outcome_to_json(outcome, model, config);
    trellis = outcome.trellis;
    tree_count = outcome.tree_count;
    result_cost = outcome.cost;
  });
  // h1 is not known to be admissible: rerun with h0 and report whether h1 lost.
  if (o.heuristic == "h1" && (algorithm == "exact" || algorithm == "approx")) {
    pipeline::AlgorithmOptions h0_opt = opt;
    h0_opt.heuristic = "h0";
    h0_opt.want_trellis = false;
    const double h0_cost = pipeline::with_model(
        inst, "h0", [&](auto& model) { return pipeline::run_algorithm(algorithm, model, h0_opt).cost; });
    doc["h1_diagnostic"] = {{"h0_cost", io::cost_to_json(h0_cost)},
                            {"h1_exceeds_h0", result_cost > h0_cost && !costs_close(result_cost, h0_cost)}};
  }
  emit(o, io::dump(doc), out);
  if (!o.trellis_out.empty()) io::write_file(o.trellis_out, io::dump(trellis));
  if (!o.out.empty()) {
    out << algorithm << " cost " << io::cost_to_json(result_cost).dump();
    if (tree_count) out << " tree_count " << *tree_count;
    out << " -> " << o.out << '\n';
  }
  return kOk;
}

inline int run_gen(Options& o, std::ostream& out) {
  JetGeneratorParams p = o.gen;
  p.seed = pipeline::derive_seed(o.seed, "generator");
  const JetEvent jet = generate_jet(p);
  emit(o, io::dump(io::jet_to_json(jet)), out);
  if (!o.out.empty()) out << "generated jet with " << jet.size() << " leaves -> " << o.out << '\n';
  return kOk;
}

inline int run_bench(Options& o, std::ostream& out) {
  if (o.in.empty()) throw InputError("bench needs a manifest via --in");
  const json doc = io::parse_json(io::read_file(o.in), o.in);
  auto manifest = bench::parse_manifest(doc, std::filesystem::path(o.in).parent_path());
  manifest.options.limits = pipeline::limits_from_env();
  const auto rows = bench::run(manifest, o.workers);
  emit(o, bench::format_report(rows), out);
  return kOk;
}

}  // namespace detail

/// Entry point shared by the executable and the tests. Diagnostics go to err.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Exact and approximate minimum-cost hierarchical clustering by A* over cluster trellises",
               "trellis-astar"};
  app.require_subcommand(1, 1);
  Options o;

  const std::vector<std::string> costs{"hcc", "dasgupta", "ginkgo"};
  const std::vector<std::string> heuristics{"zero", "hcc", "dasgupta", "h0", "h1"};
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--cost", o.cost, "Cost model")->check(CLI::IsMember(costs))->capture_default_str();
    sub->add_option("--heuristic", o.heuristic, "Heuristic (default: the cost's admissible one)")
        ->check(CLI::IsMember(heuristics));
    sub->add_option("--in", o.in, "Input file (graph, jet JSON, or bench manifest)");
    sub->add_option("--out", o.out, "Output file (default: stdout)");
    sub->add_option("--points", o.points, "Points CSV; builds a mean-centered cosine similarity graph");
    sub->add_option("--seed", o.seed, "Run seed")->capture_default_str();
    sub->add_option("--workers", o.workers, "Concurrent bench instances")->check(CLI::PositiveNumber)->capture_default_str();
  };
  auto add_search = [&](CLI::App* sub) {
    sub->add_option("--pool", o.pool, "Candidate splits sampled per explored node")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--top-k", o.top_k, "Splits kept per explored node")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--sampler", o.sampler, "Split sampler")->check(CLI::IsMember({"best-k", "importance"}))->capture_default_str();
    sub->add_option("--rounds", o.rounds, "Iterative search rounds")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--init", o.init, "Sparse trellis initialization")->check(CLI::IsMember({"none", "greedy", "beam"}))->capture_default_str();
    sub->add_option("--width", o.width, "Beam width for beam initialization (0: default rule)")->capture_default_str();
    sub->add_option("--node-budget", o.node_budget, "New trellis nodes a search may sample before falling back to best splits");
    sub->add_option("--trellis-out", o.trellis_out, "Write a trellis snapshot JSON");
  };

  auto* cluster = app.add_subcommand("cluster", "A* search: exact (full trellis) or approx (sparse trellis)");
  cluster->add_option("mode", o.mode, "exact or approx")->required()->check(CLI::IsMember({"exact", "approx"}));
  add_common(cluster);
  add_search(cluster);

  auto* baseline = app.add_subcommand("baseline", "Greedy or beam-search baseline");
  baseline->add_option("mode", o.mode, "greedy or beam")->required()->check(CLI::IsMember({"greedy", "beam"}));
  add_common(baseline);
  baseline->add_option("--width", o.width, "Beam width (0: default rule)")->capture_default_str();

  auto* oracle = app.add_subcommand("oracle", "Exhaustive enumeration of all hierarchies (n <= 10)");
  add_common(oracle);

  auto* gen = app.add_subcommand("gen", "Generate a synthetic instance");
  gen->add_option("kind", o.mode, "ginkgo")->required()->check(CLI::IsMember({"ginkgo"}));
  add_common(gen);
  gen->add_option("--lambda", o.gen.lambda, "Splitting rate")->capture_default_str();
  gen->add_option("--t-root", o.gen.t_root, "Root squared mass")->capture_default_str();
  gen->add_option("--t-cut", o.gen.t_cut, "Leaf squared-mass cutoff")->capture_default_str();
  gen->add_option("--max-leaves", o.gen.max_leaves, "Upper bound on leaves")->capture_default_str();
  gen->add_option("--min-leaves", o.gen.min_leaves, "Lower bound on leaves")->capture_default_str();
  gen->add_option("--root-pz", o.gen.root_pz, "Root momentum along z")->capture_default_str();

  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark manifest and write a CSV report");
  add_common(bench_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (cluster->parsed()) {
      o.command = "cluster";
      return detail::run_search_command(o, o.mode, out);
    }
    if (baseline->parsed()) {
      o.command = "baseline";
      return detail::run_search_command(o, o.mode, out);
    }
    if (oracle->parsed()) {
      o.command = "oracle";
      return detail::run_search_command(o, "oracle", out);
    }
    if (gen->parsed()) {
      o.command = "gen";
      return detail::run_gen(o, out);
    }
    o.command = "bench";
    return detail::run_bench(o, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const CapacityError& e) {
    err << "capacity error: " << e.what() << '\n';
    return kCapacity;
  } catch (const ObjectiveMismatchError& e) {
    err << "objective mismatch: " << e.what() << '\n';
    return kObjectiveMismatch;
  } catch (const DomainError& e) {
    err << "invalid parameters: " << e.what() << '\n';
    return kDomain;
  } catch (const SearchExhaustedError& e) {
    err << "search failed: " << e.what() << '\n';
    return kSearchExhausted;
  } catch (const MissingNodeError& e) {
    err << "missing trellis node: " << e.what() << '\n';
    return kMissingNode;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUnexpected;
  }
}

}  // namespace trellis_astar::cli
