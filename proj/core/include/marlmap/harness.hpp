#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "marlmap/agents.hpp"
#include "marlmap/baselines.hpp"
#include "marlmap/clustering.hpp"
#include "marlmap/environment.hpp"

namespace marlmap {

enum class MethodKind : std::uint8_t { MarlFull, MarlClustered, SingleAgent, Random, Genetic, Bayesian };

struct MethodSpec {
  MethodKind kind = MethodKind::MarlFull;
  std::size_t agent_budget = 0;  // B, marl-clustered only

  // marl-full, marl-clustered(B), single-agent, random, ga, bo
  std::string name() const;
  // File-system safe variant of name(): marl-clustered-B4.
  std::string slug() const;
  bool is_marl() const;
  // Accepts "marl-clustered(4)" and "marl-clustered:4".
  static MethodSpec parse(std::string_view text);

  bool operator==(const MethodSpec&) const = default;
};

struct ClusteringSource {
  std::optional<std::filesystem::path> dataset;     // pre-collected CSV
  std::optional<std::filesystem::path> assignment;  // used as-is by marl-clustered
  CollectPolicy policy = CollectPolicy::Random;
  std::size_t samples = 20'000;
  double top_percent = 15.0;
  std::uint64_t seed = 0;
  DistanceTransform transform = DistanceTransform::OneMinusR;
};

struct ExperimentConfig {
  std::string layer = "resnet18_l2";      // preset name or JSON path
  std::string accelerator = "default";    // preset name or JSON path
  std::optional<LayerShape> layer_shape;  // inline layer, overrides `layer`
  std::optional<AcceleratorConfig> accelerator_config;
  Objective objective = Objective::Latency;
  std::vector<MethodSpec> methods;
  std::uint64_t budget = 20'000;
  std::vector<std::uint64_t> seeds = {0};
  ClusteringSource clustering;
  std::filesystem::path out_dir = "marlmap-out";
  AgentHyper agents;
  GAConfig ga;
  BOConfig bo;
  std::size_t threads = 1;
  bool wall_clock = false;
  std::uint64_t snapshot_period = 0;
  double epsilon = 0.05;

  void validate() const;
  LayerShape resolved_layer() const;
  AcceleratorConfig resolved_accelerator() const;
};

// Keys mirror the struct: layer, accelerator, objective, methods, budget,
// seeds, clustering{dataset,assignment,policy,samples,top_percent,seed,transform},
// out_dir, agents{...}, ga{...}, bo{...}, threads, wall_clock, snapshot_period, epsilon.
ExperimentConfig experiment_from_json(const std::string& text);

// Clustering artifacts for one environment.
struct ClusteringOutcome {
  Dataset dataset;   // as collected or loaded
  Dataset selected;  // top-n% rows
  CorrelationMatrix matrix;
  Dendrogram dendrogram;
  std::size_t collection_samples = 0;  // environment evaluations spent collecting
};

ClusteringOutcome run_clustering(MappingEnvironment& env, const ClusteringSource& source);
void write_clustering_outputs(const std::filesystem::path& dir, const ClusteringOutcome& outcome,
                              const AgentAssignment& assignment, bool include_dataset);

struct RunOutput {
  MethodSpec method;
  std::uint64_t seed = 0;
  SearchTrace trace;
  std::vector<std::pair<std::uint64_t, IndexVector>> snapshots;
};

// One method at one seed for exactly cfg.budget evaluations. `assignment` is
// required for marl-clustered. A JointTooLargeError is re-thrown with a
// remediation hint.
RunOutput run_method(const MethodSpec& method, std::uint64_t seed, std::size_t run_index, Environment& env,
                     const ExperimentConfig& cfg, const AgentAssignment* assignment);

struct SearchOutcome {
  std::vector<RunOutput> runs;  // methods x seeds, in config order
  std::size_t collection_samples = 0;
};

// Runs every method x seed, writes traces/<method>__seed<seed>.csv plus a JSON
// sidecar, the clustering artifacts when a clustered method is requested, and
// run_manifest.json (the only file carrying timestamps).
SearchOutcome run_search(const ExperimentConfig& cfg);

struct MethodSummary {
  std::string method;
  std::size_t seeds = 0;
  std::uint64_t evaluations_per_seed = 0;
  double median_best_objective = 0.0;
  double median_best_reward = 0.0;
  double median_steps_to_eps = 0.0;
  double objective_ratio = 1.0;  // method / reference MARL row
  double steps_ratio = 1.0;
};

struct BenchmarkSummary {
  std::string reference_method;
  std::vector<MethodSummary> methods;
  std::size_t collection_samples = 0;  // reported separately, never in traces
};

// Pure function of the trace files under dir/traces. Throws std::runtime_error
// naming any trace that is missing.
BenchmarkSummary summarize(const std::filesystem::path& dir, const std::vector<MethodSpec>& methods,
                           const std::vector<std::uint64_t>& seeds, double epsilon, std::size_t collection_samples);
void write_summary(const std::filesystem::path& dir, const BenchmarkSummary& summary,
                   const std::vector<MethodSpec>& methods, const std::vector<std::uint64_t>& seeds);

double median(std::vector<double> values);
// Objective value X recovered from a reward 1/X; +inf for reward 0.
double objective_from_reward(double reward);
std::filesystem::path trace_path(const std::filesystem::path& dir, const MethodSpec& method, std::uint64_t seed);

}  // namespace marlmap
