// marlmap command-line front end.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 invalid mapping
// (evaluate only), 3 numeric failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <json.hpp>

#include "marlmap/agents.hpp"
#include "marlmap/clustering.hpp"
#include "marlmap/cost_model.hpp"
#include "marlmap/environment.hpp"
#include "marlmap/harness.hpp"
#include "marlmap/io.hpp"
#include "marlmap/mapspace.hpp"
#include "marlmap/presets.hpp"
#include "marlmap/trace.hpp"

namespace fs = std::filesystem;
using namespace marlmap;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInvalidMapping = 2;
constexpr int kExitNumeric = 3;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> threads;

  std::uint64_t seed_or(std::uint64_t fallback) const { return seed.value_or(fallback); }
  fs::path out_or(const fs::path& fallback) const { return out_dir ? fs::path(*out_dir) : fallback; }
};

struct ProblemArgs {
  std::string layer = "tiny";
  std::string accelerator = "default";
  std::string objective = "latency";
};

void add_problem_options(CLI::App* cmd, ProblemArgs& args) {
  cmd->add_option("--layer", args.layer, "Layer preset name or JSON file")->capture_default_str();
  cmd->add_option("--accel", args.accelerator, "Accelerator preset name or JSON file")->capture_default_str();
  cmd->add_option("--objective", args.objective, "latency, edp or area")->capture_default_str();
}

std::string text_or_file(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[')) return arg;
  return read_text_file(arg);
}

// evaluate ------------------------------------------------------------------

struct EvaluateArgs {
  ProblemArgs problem;
  std::string mapping;
};

int run_evaluate(const EvaluateArgs& args) {
  const LayerShape layer = resolve_layer(args.problem.layer);
  const AcceleratorConfig accel = resolve_accelerator(args.problem.accelerator);
  const Mapping mapping = mapping_from_json(text_or_file(args.mapping));
  const CostReport report = evaluate(layer, accel, mapping);
  std::cout << report_to_json(report);
  return report.valid ? kExitOk : kExitInvalidMapping;
}

// enumerate -----------------------------------------------------------------

struct EnumerateArgs {
  ProblemArgs problem;
  std::uint64_t limit = 1'000'000;
  bool write_all = false;
};

int run_enumerate(const EnumerateArgs& args, const GlobalOptions& global) {
  auto space = std::make_shared<const MapSpace>(resolve_layer(args.problem.layer),
                                                resolve_accelerator(args.problem.accelerator));
  const Objective objective = objective_from_string(args.problem.objective);
  const fs::path out = global.out_or("marlmap-out");

  std::ostringstream all;
  if (args.write_all) {
    for (const auto& p : space->parameters()) all << p.name << ',';
    all << "valid,objective,reward\n";
  }
  std::uint64_t visited = 0;
  std::uint64_t valid = 0;
  double best_reward = 0.0;
  IndexVector best;
  enumerate(*space, args.limit, [&](std::span<const std::size_t> idx, const Mapping& m) {
    ++visited;
    const StepResult r = MappingEnvironment::score(evaluate(space->layer(), space->accelerator(), m), objective);
    if (r.valid) ++valid;
    if (best.empty() || r.reward > best_reward) {
      best_reward = r.reward;
      best.assign(idx.begin(), idx.end());
    }
    if (args.write_all) {
      for (auto i : idx) all << i << ',';
      all << (r.valid ? 1 : 0) << ',' << (r.valid ? format_double(objective_value(r.report, objective)) : "")
          << ',' << format_double(r.reward) << '\n';
    }
  });

  nlohmann::ordered_json j;
  j["objective"] = to_string(objective);
  j["space_size"] = visited;
  j["valid_mappings"] = valid;
  j["best_reward"] = best_reward;
  j["best_objective"] = best_reward > 0.0 ? nlohmann::ordered_json(objective_from_reward(best_reward))
                                          : nlohmann::ordered_json();
  j["best_index"] = best;
  const Mapping best_mapping = space->decode(best);
  j["best_mapping"] = nlohmann::ordered_json::parse(mapping_to_json(best_mapping));
  j["best_report"] = nlohmann::ordered_json::parse(
      report_to_json(evaluate(space->layer(), space->accelerator(), best_mapping)));
  write_text_file(out / "enumeration.json", j.dump(2) + "\n");
  if (args.write_all) write_text_file(out / "enumeration.csv", all.str());
  fmt::print("{} mappings, {} valid; best {} = {}\n", visited, valid, to_string(objective),
             best_reward > 0.0 ? format_double(objective_from_reward(best_reward)) : "n/a");
  return kExitOk;
}

// collect -------------------------------------------------------------------

struct CollectArgs {
  ProblemArgs problem;
  std::string policy = "random";
  std::size_t samples = 20'000;
};

int run_collect(const CollectArgs& args, const GlobalOptions& global) {
  MappingEnvironment env(resolve_layer(args.problem.layer), resolve_accelerator(args.problem.accelerator),
                         objective_from_string(args.problem.objective), global.seed_or(0));
  const Dataset data = collect(env, collect_policy_from_string(args.policy), args.samples, global.seed_or(0));
  std::ostringstream csv;
  write_dataset_csv(csv, data);
  const fs::path out = global.out_or("marlmap-out");
  write_text_file(out / "dataset.csv", csv.str());
  fmt::print("collected {} samples over {} parameters into {}\n", data.rows(), data.arity(),
             (out / "dataset.csv").string());
  return kExitOk;
}

// cluster -------------------------------------------------------------------

struct ClusterArgs {
  ProblemArgs problem;
  bool layer_given = false;
  std::optional<std::string> dataset;
  std::string policy = "random";
  std::size_t samples = 20'000;
  std::size_t budget = 4;
  double top_percent = 15.0;
  std::string transform = "1-r";
};

DistanceTransform transform_from_string(const std::string& s) {
  if (s == "1-r") return DistanceTransform::OneMinusR;
  if (s == "1-|r|") return DistanceTransform::OneMinusAbsR;
  throw ConfigError("--transform: expected 1-r or 1-|r|");
}

void print_membership(const AgentAssignment& a) {
  fmt::print("{:<6} {}\n", "agent", "parameters");
  const auto groups = a.groups();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::string members;
    for (const auto& name : groups[g]) members += (members.empty() ? "" : " ") + name;
    fmt::print("{:<6} {}\n", g, members);
  }
}

int run_cluster(const ClusterArgs& args, const GlobalOptions& global) {
  ClusteringSource source;
  source.policy = collect_policy_from_string(args.policy);
  source.samples = args.samples;
  source.top_percent = args.top_percent;
  source.seed = global.seed_or(0);
  source.transform = transform_from_string(args.transform);
  const fs::path out = global.out_or("marlmap-out");

  ClusteringOutcome outcome;
  std::vector<std::string> categorical;
  if (args.dataset && !args.layer_given) {
    // Free-standing dataset: every column is treated as an integer parameter.
    std::ifstream in(*args.dataset);
    if (!in) throw ConfigError("cannot open dataset " + *args.dataset);
    outcome.dataset = read_dataset_csv(in);
    outcome.selected = select_top(outcome.dataset, source.top_percent);
    outcome.matrix = correlation(outcome.selected);
    outcome.dendrogram = agglomerate(outcome.matrix, source.transform);
  } else {
    if (args.dataset) source.dataset = *args.dataset;
    MappingEnvironment env(resolve_layer(args.problem.layer), resolve_accelerator(args.problem.accelerator),
                           objective_from_string(args.problem.objective), source.seed);
    outcome = run_clustering(env, source);
    categorical = categorical_names(env.parameters());
  }
  if (args.budget < 1 || args.budget > outcome.dendrogram.leaves.size()) {
    throw ConfigError(fmt::format("--budget must be between 1 and {}", outcome.dendrogram.leaves.size()));
  }
  const AgentAssignment assignment = assign(outcome.dendrogram, args.budget, categorical);
  write_clustering_outputs(out, outcome, assignment, !args.dataset.has_value());
  print_membership(assignment);
  if (outcome.collection_samples > 0) {
    fmt::print("clustering collection: {} samples (not part of any search budget)\n", outcome.collection_samples);
  }
  return kExitOk;
}

// search / benchmark ----------------------------------------------------------

struct SearchArgs {
  std::optional<std::string> config;
  std::optional<std::string> layer;
  std::optional<std::string> accelerator;
  std::optional<std::string> objective;
  std::vector<std::string> methods;
  std::optional<std::uint64_t> budget;
  std::vector<std::uint64_t> seeds;
  std::optional<std::string> assignment;
  std::optional<std::string> dataset;
  std::optional<std::string> from_dir;
};

void add_search_options(CLI::App* cmd, SearchArgs& args) {
  cmd->add_option("--config", args.config, "Experiment JSON file");
  cmd->add_option("--layer", args.layer, "Layer preset name or JSON file");
  cmd->add_option("--accel", args.accelerator, "Accelerator preset name or JSON file");
  cmd->add_option("--objective", args.objective, "latency, edp or area");
  cmd->add_option("--methods", args.methods, "marl-full, marl-clustered(B), single-agent, random, ga, bo")
      ->delimiter(',');
  cmd->add_option("--budget", args.budget, "Environment evaluations per method and seed");
  cmd->add_option("--seeds", args.seeds, "Seed list")->delimiter(',');
  cmd->add_option("--assignment", args.assignment, "Agent assignment JSON for marl-clustered");
  cmd->add_option("--dataset", args.dataset, "Pre-collected dataset CSV for clustering");
}

ExperimentConfig build_experiment(const SearchArgs& args, const GlobalOptions& global) {
  ExperimentConfig cfg = args.config ? experiment_from_json(read_text_file(*args.config)) : ExperimentConfig{};
  if (args.layer) {
    cfg.layer = *args.layer;
    cfg.layer_shape.reset();
  }
  if (args.accelerator) {
    cfg.accelerator = *args.accelerator;
    cfg.accelerator_config.reset();
  }
  if (args.objective) cfg.objective = objective_from_string(*args.objective);
  if (!args.methods.empty()) {
    cfg.methods.clear();
    for (const auto& m : args.methods) cfg.methods.push_back(MethodSpec::parse(m));
  }
  if (cfg.methods.empty()) {
    for (const char* m : {"marl-full", "marl-clustered(4)", "single-agent", "random", "ga", "bo"}) {
      cfg.methods.push_back(MethodSpec::parse(m));
    }
  }
  if (args.budget) cfg.budget = *args.budget;
  if (!args.seeds.empty()) {
    cfg.seeds = args.seeds;
  } else if (global.seed) {
    cfg.seeds = {*global.seed};
  }
  if (global.seed) cfg.clustering.seed = *global.seed;
  if (args.assignment) cfg.clustering.assignment = *args.assignment;
  if (args.dataset) cfg.clustering.dataset = *args.dataset;
  if (global.out_dir) cfg.out_dir = *global.out_dir;
  if (global.threads) cfg.threads = *global.threads;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

int run_search_command(const SearchArgs& args, const GlobalOptions& global) {
  const ExperimentConfig cfg = build_experiment(args, global);
  const SearchOutcome outcome = run_search(cfg);
  for (const auto& run : outcome.runs) {
    fmt::print("{:<20} seed {:<6} evaluations {:<7} best {} {}\n", run.method.name(), run.seed,
               run.trace.rows.size(), to_string(cfg.objective),
               run.trace.best_reward > 0.0 ? format_double(objective_from_reward(run.trace.best_reward)) : "n/a");
  }
  return kExitOk;
}

std::size_t manifest_collection_samples(const fs::path& dir) {
  const auto path = dir / "run_manifest.json";
  if (!fs::exists(path)) return 0;
  const auto j = nlohmann::json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded() || !j.contains("clustering_collection_samples")) return 0;
  return j["clustering_collection_samples"].get<std::size_t>();
}

int run_benchmark_command(const SearchArgs& args, const GlobalOptions& global) {
  ExperimentConfig cfg = build_experiment(args, global);
  std::size_t collection = 0;
  if (args.from_dir) {
    cfg.out_dir = *args.from_dir;
    collection = manifest_collection_samples(cfg.out_dir);
  } else {
    collection = run_search(cfg).collection_samples;
  }
  const BenchmarkSummary summary = summarize(cfg.out_dir, cfg.methods, cfg.seeds, cfg.epsilon, collection);
  write_summary(cfg.out_dir, summary, cfg.methods, cfg.seeds);
  fmt::print("{:<22} {:>14} {:>12} {:>10} {:>10}\n", "method", "best " + to_string(cfg.objective), "steps-to-eps",
             "obj ratio", "step ratio");
  for (const auto& m : summary.methods) {
    fmt::print("{:<22} {:>14} {:>12} {:>10.2f} {:>10.2f}\n", m.method, format_double(m.median_best_objective),
               format_double(m.median_steps_to_eps), m.objective_ratio, m.steps_ratio);
  }
  fmt::print("clustering collection overhead: {} samples (reported separately)\n", summary.collection_samples);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"marlmap: accelerator mapping search with clustered multi-agent reinforcement learning"};
  app.require_subcommand(1);
  GlobalOptions global;
  app.add_option("--seed", global.seed, "Random seed");
  app.add_option("--out-dir", global.out_dir, "Output directory");
  app.add_option("--threads", global.threads, "Worker threads for method x seed runs")->check(CLI::PositiveNumber);

  EvaluateArgs evaluate_args;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate one mapping and print its cost report as JSON");
  add_problem_options(evaluate_cmd, evaluate_args.problem);
  evaluate_cmd->add_option("--mapping", evaluate_args.mapping, "Mapping JSON file or inline JSON")->required();

  EnumerateArgs enumerate_args;
  auto* enumerate_cmd = app.add_subcommand("enumerate", "Exhaustively evaluate a small map space");
  add_problem_options(enumerate_cmd, enumerate_args.problem);
  enumerate_cmd->add_option("--limit", enumerate_args.limit, "Refuse spaces larger than this")->capture_default_str();
  enumerate_cmd->add_flag("--all", enumerate_args.write_all, "Also write every point to enumeration.csv");

  CollectArgs collect_args;
  auto* collect_cmd = app.add_subcommand("collect", "Sample a dataset of (mapping, reward) rows");
  add_problem_options(collect_cmd, collect_args.problem);
  collect_cmd->add_option("--policy", collect_args.policy, "random or ga")->capture_default_str();
  collect_cmd->add_option("--samples", collect_args.samples, "Rows to collect")->capture_default_str();

  ClusterArgs cluster_args;
  auto* cluster_cmd = app.add_subcommand("cluster", "Correlation clustering of parameters into agents");
  add_problem_options(cluster_cmd, cluster_args.problem);
  cluster_cmd->add_option("--dataset", cluster_args.dataset, "Dataset CSV (collected fresh when omitted)");
  cluster_cmd->add_option("--policy", cluster_args.policy, "Collection policy: random or ga")->capture_default_str();
  cluster_cmd->add_option("--samples", cluster_args.samples, "Collection size")->capture_default_str();
  cluster_cmd->add_option("--budget,-B", cluster_args.budget, "Number of clusters B")->capture_default_str();
  cluster_cmd->add_option("--top-percent", cluster_args.top_percent, "Rows kept by reward")->capture_default_str();
  cluster_cmd->add_option("--transform", cluster_args.transform, "Distance: 1-r or 1-|r|")->capture_default_str();

  SearchArgs search_args;
  auto* search_cmd = app.add_subcommand("search", "Run every method x seed for the sample budget");
  add_search_options(search_cmd, search_args);

  SearchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("benchmark", "Run a search and summarize it against the MARL row");
  add_search_options(bench_cmd, bench_args);
  bench_cmd->add_option("--from-dir", bench_args.from_dir, "Summarize existing traces instead of searching");

  for (auto* cmd : app.get_subcommands({})) cmd->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*evaluate_cmd) return run_evaluate(evaluate_args);
    if (*enumerate_cmd) return run_enumerate(enumerate_args, global);
    if (*collect_cmd) return run_collect(collect_args, global);
    if (*cluster_cmd) {
      cluster_args.layer_given = cluster_cmd->count("--layer") > 0;
      return run_cluster(cluster_args, global);
    }
    if (*search_cmd) return run_search_command(search_args, global);
    if (*bench_cmd) return run_benchmark_command(bench_args, global);
  } catch (const NumericError& e) {
    fmt::print(stderr, "numeric failure: {}\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
