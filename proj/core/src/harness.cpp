#include "marlmap/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "marlmap/io.hpp"
#include "marlmap/presets.hpp"

namespace marlmap {

using nlohmann::json;
using nlohmann::ordered_json;

std::string MethodSpec::name() const {
  switch (kind) {
    case MethodKind::MarlFull:
      return "marl-full";
    case MethodKind::MarlClustered:
      return "marl-clustered(" + std::to_string(agent_budget) + ")";
    case MethodKind::SingleAgent:
      return "single-agent";
    case MethodKind::Random:
      return "random";
    case MethodKind::Genetic:
      return "ga";
    case MethodKind::Bayesian:
      return "bo";
  }
  return "unknown";
}

std::string MethodSpec::slug() const {
  if (kind == MethodKind::MarlClustered) return "marl-clustered-B" + std::to_string(agent_budget);
  return name();
}

bool MethodSpec::is_marl() const {
  return kind == MethodKind::MarlFull || kind == MethodKind::MarlClustered || kind == MethodKind::SingleAgent;
}

MethodSpec MethodSpec::parse(std::string_view text) {
  const std::string s(text);
  if (s == "marl-full") return {MethodKind::MarlFull, 0};
  if (s == "single-agent") return {MethodKind::SingleAgent, 0};
  if (s == "random") return {MethodKind::Random, 0};
  if (s == "ga") return {MethodKind::Genetic, 0};
  if (s == "bo") return {MethodKind::Bayesian, 0};
  const std::string prefix = "marl-clustered";
  if (s.rfind(prefix, 0) == 0) {
    std::string rest = s.substr(prefix.size());
    if (!rest.empty() && (rest.front() == '(' || rest.front() == ':' || rest.front() == '-')) {
      rest.erase(0, 1);
      if (!rest.empty() && rest.back() == ')') rest.pop_back();
      if (!rest.empty() && (rest.front() == 'B' || rest.front() == 'b')) rest.erase(0, 1);
      try {
        std::size_t used = 0;
        const auto b = std::stoull(rest, &used);
        if (used == rest.size() && b >= 1) return {MethodKind::MarlClustered, static_cast<std::size_t>(b)};
      } catch (const std::logic_error&) {
      }
    }
  }
  throw std::invalid_argument("unknown method '" + s +
                              "'; expected marl-full, marl-clustered(B), single-agent, random, ga or bo");
}

void ExperimentConfig::validate() const {
  if (budget < 1) throw std::invalid_argument("budget must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
  if (methods.empty()) throw std::invalid_argument("methods must not be empty");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must be in [0,1)");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  agents.validate();
  ga.validate();
  bo.validate();
}

LayerShape ExperimentConfig::resolved_layer() const { return layer_shape ? *layer_shape : resolve_layer(layer); }

AcceleratorConfig ExperimentConfig::resolved_accelerator() const {
  return accelerator_config ? *accelerator_config : resolve_accelerator(accelerator);
}

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

}  // namespace

ExperimentConfig experiment_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("experiment config: expected a JSON object");
  ExperimentConfig cfg;
  const std::string where = "config";
  if (j.contains("layer")) {
    if (j["layer"].is_object()) {
      cfg.layer_shape = layer_from_json(j["layer"].dump());
    } else {
      read_opt(j, "layer", cfg.layer, where);
    }
  }
  if (j.contains("accelerator")) {
    if (j["accelerator"].is_object()) {
      cfg.accelerator_config = accelerator_from_json(j["accelerator"].dump());
    } else {
      read_opt(j, "accelerator", cfg.accelerator, where);
    }
  }
  if (j.contains("objective")) {
    std::string obj;
    read_opt(j, "objective", obj, where);
    try {
      cfg.objective = objective_from_string(obj);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config.objective: ") + e.what());
    }
  }
  if (j.contains("methods")) {
    std::vector<std::string> names;
    read_opt(j, "methods", names, where);
    for (const auto& n : names) {
      try {
        cfg.methods.push_back(MethodSpec::parse(n));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config.methods: ") + e.what());
      }
    }
  }
  read_opt(j, "budget", cfg.budget, where);
  read_opt(j, "seeds", cfg.seeds, where);
  if (j.contains("out_dir")) {
    std::string dir;
    read_opt(j, "out_dir", dir, where);
    cfg.out_dir = dir;
  }
  read_opt(j, "threads", cfg.threads, where);
  read_opt(j, "wall_clock", cfg.wall_clock, where);
  read_opt(j, "snapshot_period", cfg.snapshot_period, where);
  read_opt(j, "epsilon", cfg.epsilon, where);

  if (j.contains("clustering")) {
    const json& c = j["clustering"];
    const std::string cw = "config.clustering";
    if (c.contains("dataset")) cfg.clustering.dataset = c["dataset"].get<std::string>();
    if (c.contains("assignment")) cfg.clustering.assignment = c["assignment"].get<std::string>();
    if (c.contains("policy")) {
      try {
        cfg.clustering.policy = collect_policy_from_string(c["policy"].get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw ConfigError(cw + ".policy: " + e.what());
      }
    }
    read_opt(c, "samples", cfg.clustering.samples, cw);
    read_opt(c, "top_percent", cfg.clustering.top_percent, cw);
    read_opt(c, "seed", cfg.clustering.seed, cw);
    if (c.contains("transform")) {
      const auto t = c["transform"].get<std::string>();
      if (t == "1-r") {
        cfg.clustering.transform = DistanceTransform::OneMinusR;
      } else if (t == "1-|r|") {
        cfg.clustering.transform = DistanceTransform::OneMinusAbsR;
      } else {
        throw ConfigError(cw + ".transform: expected \"1-r\" or \"1-|r|\"");
      }
    }
  }
  if (j.contains("agents")) {
    const json& a = j["agents"];
    const std::string aw = "config.agents";
    read_opt(a, "learning_rate", cfg.agents.learning_rate, aw);
    read_opt(a, "baseline_decay", cfg.agents.baseline_decay, aw);
    read_opt(a, "temperature", cfg.agents.temperature, aw);
    read_opt(a, "entropy_weight", cfg.agents.entropy_weight, aw);
    read_opt(a, "max_joint_size", cfg.agents.max_joint_size, aw);
    read_opt(a, "normalize_advantage", cfg.agents.normalize_advantage, aw);
  }
  if (j.contains("ga")) {
    const json& g = j["ga"];
    read_opt(g, "population", cfg.ga.population, "config.ga");
    read_opt(g, "tournament", cfg.ga.tournament, "config.ga");
    read_opt(g, "crossover_rate", cfg.ga.crossover_rate, "config.ga");
    read_opt(g, "mutation_rate", cfg.ga.mutation_rate, "config.ga");
    read_opt(g, "elitism", cfg.ga.elitism, "config.ga");
  }
  if (j.contains("bo")) {
    const json& b = j["bo"];
    read_opt(b, "initial_samples", cfg.bo.initial_samples, "config.bo");
    read_opt(b, "pool_size", cfg.bo.pool_size, "config.bo");
    read_opt(b, "length_scale", cfg.bo.length_scale, "config.bo");
    read_opt(b, "noise", cfg.bo.noise, "config.bo");
    read_opt(b, "max_observations", cfg.bo.max_observations, "config.bo");
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

ClusteringOutcome run_clustering(MappingEnvironment& env, const ClusteringSource& source) {
  ClusteringOutcome out;
  if (source.dataset) {
    std::ifstream in(*source.dataset);
    if (!in) throw ConfigError("cannot open dataset " + source.dataset->string());
    out.dataset = read_dataset_csv(in, env.parameters());
    if (out.dataset.names.size() != env.parameters().size()) {
      throw ConfigError("dataset " + source.dataset->string() + " has " + std::to_string(out.dataset.names.size()) +
                        " parameter columns, the layer's map space has " + std::to_string(env.parameters().size()));
    }
    for (std::size_t i = 0; i < out.dataset.names.size(); ++i) {
      if (out.dataset.names[i] != env.parameters()[i].name) {
        throw ConfigError("dataset column " + std::to_string(i + 1) + " is '" + out.dataset.names[i] +
                          "', expected '" + env.parameters()[i].name + "' for this layer");
      }
    }
  } else {
    out.dataset = collect(env, source.policy, source.samples, source.seed);
    out.collection_samples = source.samples;
  }
  out.selected = select_top(out.dataset, source.top_percent);
  out.matrix = correlation(out.selected);
  out.dendrogram = agglomerate(out.matrix, source.transform);
  return out;
}

void write_clustering_outputs(const std::filesystem::path& dir, const ClusteringOutcome& outcome,
                              const AgentAssignment& assignment, bool include_dataset) {
  std::filesystem::create_directories(dir);
  if (include_dataset) {
    std::ostringstream ds;
    write_dataset_csv(ds, outcome.dataset);
    write_text_file(dir / "dataset.csv", ds.str());
  }
  std::ostringstream cm;
  write_correlation_csv(cm, outcome.matrix);
  write_text_file(dir / "correlation.csv", cm.str());
  write_text_file(dir / "dendrogram.json", dendrogram_to_json(outcome.dendrogram));
  write_text_file(dir / "assignment.json", assignment_to_json(assignment));
}

RunOutput run_method(const MethodSpec& method, std::uint64_t seed, std::size_t run_index, Environment& env,
                     const ExperimentConfig& cfg, const AgentAssignment* assignment) {
  RunOutput out;
  out.method = method;
  out.seed = seed;
  const std::uint64_t stream = seed ^ (static_cast<std::uint64_t>(run_index) << 32);
  SearchOptions options{cfg.wall_clock};
  const auto& params = env.parameters();
  try {
    switch (method.kind) {
      case MethodKind::Random:
        out.trace = random_search(env, cfg.budget, stream, options);
        return out;
      case MethodKind::Genetic:
        out.trace = ga_search(env, cfg.ga, cfg.budget, stream, options);
        return out;
      case MethodKind::Bayesian:
        out.trace = bo_search(env, cfg.bo, cfg.budget, stream, options);
        return out;
      case MethodKind::MarlFull:
      case MethodKind::MarlClustered:
      case MethodKind::SingleAgent:
        break;
    }
    AgentAssignment chosen;
    if (method.kind == MethodKind::MarlFull) {
      chosen = one_agent_per_parameter(params);
    } else if (method.kind == MethodKind::SingleAgent) {
      chosen = single_cluster(params);
    } else {
      if (!assignment) throw std::invalid_argument(method.name() + " needs an agent assignment");
      chosen = *assignment;
    }
    AgentTeam team = make_team(params, chosen, cfg.agents);
    TrainConfig tc;
    tc.total_samples = cfg.budget;
    tc.seed = stream;
    tc.snapshot_period = cfg.snapshot_period;
    tc.wall_clock = cfg.wall_clock;
    TrainResult result = train(team, env, tc);
    out.trace = std::move(result.trace);
    out.snapshots = std::move(result.snapshots);
  } catch (const JointTooLargeError& e) {
    throw JointTooLargeError(method.name() + ": " + e.what() + " (increase B or max_joint_size)");
  }
  return out;
}

std::filesystem::path trace_path(const std::filesystem::path& dir, const MethodSpec& method, std::uint64_t seed) {
  return dir / "traces" / (method.slug() + "__seed" + std::to_string(seed) + ".csv");
}

namespace {

std::string now_iso8601() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

std::string sidecar_json(const RunOutput& run, const MappingEnvironment& env, const ExperimentConfig& cfg) {
  ordered_json j;
  j["method"] = run.method.name();
  j["seed"] = run.seed;
  j["budget"] = cfg.budget;
  j["evaluations"] = run.trace.rows.size();
  j["objective"] = to_string(cfg.objective);
  j["best_reward"] = run.trace.best_reward;
  j["best_step"] = run.trace.best_step;
  const Mapping best = env.space().decode(run.trace.best_index);
  const CostReport report = evaluate(env.space().layer(), env.space().accelerator(), best);
  j["best_objective"] = report.valid ? ordered_json(objective_value(report, cfg.objective)) : ordered_json(nullptr);
  j["best_index"] = run.trace.best_index;
  j["best_mapping"] = ordered_json::parse(mapping_to_json(best));
  j["best_report"] = ordered_json::parse(report_to_json(report));
  if (!run.trace.final_marginals.empty()) {
    ordered_json marg = ordered_json::object();
    const auto& params = env.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) marg[params[i].name] = run.trace.final_marginals[i];
    j["final_marginals"] = marg;
  }
  if (!run.snapshots.empty()) {
    j["greedy_snapshots"] = ordered_json::array();
    for (const auto& [step, idx] : run.snapshots) j["greedy_snapshots"].push_back({{"step", step}, {"index", idx}});
  }
  return j.dump(2) + "\n";
}

}  // namespace

SearchOutcome run_search(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto wall_start = std::chrono::steady_clock::now();
  const std::string started = now_iso8601();
  auto space = std::make_shared<const MapSpace>(cfg.resolved_layer(), cfg.resolved_accelerator());
  std::filesystem::create_directories(cfg.out_dir / "traces");

  SearchOutcome outcome;
  std::vector<std::optional<AgentAssignment>> assignments(cfg.methods.size());
  const bool needs_clustering = std::any_of(cfg.methods.begin(), cfg.methods.end(),
                                            [](const MethodSpec& m) { return m.kind == MethodKind::MarlClustered; });
  if (needs_clustering) {
    if (cfg.clustering.assignment) {
      const AgentAssignment fixed = assignment_from_json(read_text_file(*cfg.clustering.assignment));
      for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        if (cfg.methods[m].kind != MethodKind::MarlClustered) continue;
        if (cfg.methods[m].agent_budget != fixed.budget) {
          throw ConfigError(cfg.methods[m].name() + " does not match the assignment file's budget B=" +
                            std::to_string(fixed.budget));
        }
        assignments[m] = fixed;
      }
    } else {
      MappingEnvironment collect_env(space, cfg.objective, cfg.clustering.seed);
      const ClusteringOutcome clustered = run_clustering(collect_env, cfg.clustering);
      outcome.collection_samples = clustered.collection_samples;
      const auto categorical = categorical_names(space->parameters());
      for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        if (cfg.methods[m].kind != MethodKind::MarlClustered) continue;
        const std::size_t b = cfg.methods[m].agent_budget;
        if (b > clustered.dendrogram.leaves.size()) {
          throw ConfigError(cfg.methods[m].name() + ": B exceeds the " +
                            std::to_string(clustered.dendrogram.leaves.size()) + " clusterable parameters");
        }
        assignments[m] = assign(clustered.dendrogram, b, categorical);
        write_clustering_outputs(cfg.out_dir / "clustering" / cfg.methods[m].slug(), clustered, *assignments[m],
                                 !cfg.clustering.dataset.has_value());
      }
    }
  }

  struct Job {
    std::size_t method;
    std::size_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    for (std::size_t s = 0; s < cfg.seeds.size(); ++s) jobs.push_back({m, s});
  }
  outcome.runs.resize(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::vector<double> job_seconds(jobs.size(), 0.0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const Job job = jobs[j];
        MappingEnvironment env(space, cfg.objective, cfg.seeds[job.seed]);
        const auto* a = assignments[job.method] ? &*assignments[job.method] : nullptr;
        RunOutput run = run_method(cfg.methods[job.method], cfg.seeds[job.seed], job.method, env, cfg, a);
        std::ostringstream csv;
        write_trace_csv(csv, run.trace);
        const auto path = trace_path(cfg.out_dir, run.method, run.seed);
        write_text_file(path, csv.str());
        write_text_file(std::filesystem::path(path).replace_extension(".json"), sidecar_json(run, env, cfg));
        outcome.runs[j] = std::move(run);
      } catch (...) {
        errors[j] = std::current_exception();
      }
      job_seconds[j] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  const std::size_t workers = std::min(cfg.threads, jobs.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ordered_json manifest;
  manifest["started_utc"] = started;
  manifest["finished_utc"] = now_iso8601();
  manifest["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  manifest["threads"] = cfg.threads;
  manifest["budget"] = cfg.budget;
  manifest["clustering_collection_samples"] = outcome.collection_samples;
  manifest["runs"] = ordered_json::array();
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    manifest["runs"].push_back({{"method", cfg.methods[jobs[j].method].name()},
                                {"seed", cfg.seeds[jobs[j].seed]},
                                {"seconds", job_seconds[j]}});
  }
  write_text_file(cfg.out_dir / "run_manifest.json", manifest.dump(2) + "\n");
  return outcome;
}

double objective_from_reward(double reward) {
  if (!(reward > 0.0)) return std::numeric_limits<double>::infinity();
  // 1/(1/x) is not exact in binary floating point; 12 significant digits
  // recover the integral cycle counts the cost model produces.
  return std::stod(fmt::format("{:.12g}", 1.0 / reward));
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

std::vector<SearchTrace> load_traces(const std::filesystem::path& dir, const MethodSpec& method,
                                     const std::vector<std::uint64_t>& seeds) {
  std::vector<SearchTrace> out;
  for (auto seed : seeds) {
    const auto path = trace_path(dir, method, seed);
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing trace " + path.string());
    out.push_back(read_trace_csv(in));
  }
  return out;
}

}  // namespace

BenchmarkSummary summarize(const std::filesystem::path& dir, const std::vector<MethodSpec>& methods,
                           const std::vector<std::uint64_t>& seeds, double epsilon, std::size_t collection_samples) {
  if (methods.empty()) throw std::invalid_argument("summarize: no methods");
  BenchmarkSummary summary;
  summary.collection_samples = collection_samples;
  std::size_t reference = 0;
  const auto full = std::find_if(methods.begin(), methods.end(),
                                 [](const MethodSpec& m) { return m.kind == MethodKind::MarlFull; });
  const auto any_marl = std::find_if(methods.begin(), methods.end(), [](const MethodSpec& m) { return m.is_marl(); });
  if (full != methods.end()) {
    reference = static_cast<std::size_t>(full - methods.begin());
  } else if (any_marl != methods.end()) {
    reference = static_cast<std::size_t>(any_marl - methods.begin());
  }
  summary.reference_method = methods[reference].name();

  for (const auto& method : methods) {
    const auto traces = load_traces(dir, method, seeds);
    MethodSummary ms;
    ms.method = method.name();
    ms.seeds = traces.size();
    ms.evaluations_per_seed = traces.front().rows.size();
    std::vector<double> objective, reward, steps;
    for (const auto& t : traces) {
      if (t.rows.size() != ms.evaluations_per_seed) {
        throw std::runtime_error("traces of " + method.name() + " have unequal lengths");
      }
      const double best = t.rows.empty() ? 0.0 : t.rows.back().best_reward;
      reward.push_back(best);
      objective.push_back(objective_from_reward(best));
      steps.push_back(static_cast<double>(steps_to_within(t, epsilon)));
    }
    ms.median_best_objective = median(objective);
    ms.median_best_reward = median(reward);
    ms.median_steps_to_eps = median(steps);
    summary.methods.push_back(ms);
  }
  const auto& ref = summary.methods[reference];
  for (auto& ms : summary.methods) {
    ms.objective_ratio = ms.median_best_objective / ref.median_best_objective;
    ms.steps_ratio = ms.median_steps_to_eps / ref.median_steps_to_eps;
  }
  return summary;
}

void write_summary(const std::filesystem::path& dir, const BenchmarkSummary& summary,
                   const std::vector<MethodSpec>& methods, const std::vector<std::uint64_t>& seeds) {
  std::ostringstream out;
  out << "kind,method,seeds,evaluations_per_seed,median_best_objective,median_best_reward,"
         "median_steps_to_eps,objective_ratio_vs_marl,steps_ratio_vs_marl\n";
  for (const auto& ms : summary.methods) {
    out << "search," << ms.method << ',' << ms.seeds << ',' << ms.evaluations_per_seed << ','
        << format_double(ms.median_best_objective) << ',' << format_double(ms.median_best_reward) << ','
        << format_double(ms.median_steps_to_eps) << ',' << format_double(ms.objective_ratio) << ','
        << format_double(ms.steps_ratio) << '\n';
  }
  out << "overhead,clustering-collection,1," << summary.collection_samples << ",,,,,\n";
  write_text_file(dir / "summary.csv", out.str());

  for (const auto& method : methods) {
    const auto traces = load_traces(dir, method, seeds);
    std::ostringstream conv;
    conv << "step";
    for (auto seed : seeds) conv << ",best_reward_seed" << seed;
    conv << ",median_best_reward\n";
    const std::size_t rows = traces.front().rows.size();
    std::vector<double> at_step(traces.size());
    for (std::size_t r = 0; r < rows; ++r) {
      conv << (r + 1);
      for (std::size_t s = 0; s < traces.size(); ++s) {
        at_step[s] = traces[s].rows[r].best_reward;
        conv << ',' << format_double(at_step[s]);
      }
      conv << ',' << format_double(median(at_step)) << '\n';
    }
    write_text_file(dir / "convergence" / (method.slug() + ".csv"), conv.str());
  }
}

}  // namespace marlmap
