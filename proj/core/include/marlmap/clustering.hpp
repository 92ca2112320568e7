#pragma once

// Correlation-driven agent assignment:
//   collect -> select_top -> correlation -> agglomerate -> assign
// Integer-valued parameters (tile sizes) take part in the correlation
// analysis. Categorical ones (loop order, parallel dim) are carried through
// the dataset but each gets a dedicated agent after the B clusters.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "marlmap/environment.hpp"

namespace marlmap {

struct Dataset {
  std::vector<std::string> names;
  std::vector<bool> integer_valued;  // per column
  std::vector<double> values;        // row-major, rows() x names.size()
  std::vector<double> rewards;

  std::size_t rows() const { return rewards.size(); }
  std::size_t arity() const { return names.size(); }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * arity(), arity()}; }
  double at(std::size_t row, std::size_t col) const { return values[row * arity() + col]; }

  void add_row(std::span<const double> row, double reward);
};

enum class CollectPolicy : std::uint8_t { Random, Genetic };
CollectPolicy collect_policy_from_string(const std::string& text);

// Exactly `samples` rows. Tile parameters are stored as tile values,
// categorical parameters as option indices.
Dataset collect(Environment& env, CollectPolicy policy, std::size_t samples, std::uint64_t seed);

// Keeps ceil(rows * n_percent / 100) highest-reward rows, descending reward,
// ties by original row order.
Dataset select_top(const Dataset& data, double n_percent);

struct CorrelationMatrix {
  std::vector<std::string> names;
  std::vector<double> r;  // row-major N x N

  std::size_t size() const { return names.size(); }
  double operator()(std::size_t i, std::size_t j) const { return r[i * names.size() + j]; }
};

// Pearson r between every pair of integer-valued columns. Zero-variance
// columns correlate 0 with everything else; the diagonal is always 1.
CorrelationMatrix correlation(const Dataset& data);

enum class DistanceTransform : std::uint8_t { OneMinusR, OneMinusAbsR };

struct Merge {
  std::size_t a = 0;  // cluster ids: leaves are 0..N-1, merge m creates N+m
  std::size_t b = 0;
  double height = 0.0;
  std::size_t size = 0;
};

struct Dendrogram {
  std::vector<std::string> leaves;
  std::vector<Merge> merges;
};

// Average-linkage agglomeration on d = 1 - r (or 1 - |r|). Equal-distance
// ties merge the pair whose smallest member names sort first.
Dendrogram agglomerate(const CorrelationMatrix& m, DistanceTransform transform = DistanceTransform::OneMinusR);

struct AgentAssignment {
  std::vector<std::string> names;  // parameter names
  std::vector<std::size_t> agent;  // agent id per name
  std::size_t budget = 0;          // B: number of correlation clusters
  std::size_t num_agents = 0;      // B plus one per categorical parameter

  // Throws std::out_of_range for a name that is not assigned.
  std::size_t agent_of(const std::string& name) const;
  std::vector<std::vector<std::string>> groups() const;
};

// Cuts the dendrogram into exactly `budget` clusters by undoing its last
// budget-1 merges. Cluster ids follow the order of each cluster's first leaf.
// `categorical` names receive ids budget, budget+1, ... in the given order.
AgentAssignment assign(const Dendrogram& dendrogram, std::size_t budget,
                       std::span<const std::string> categorical = {});

// Identity partition (fully decentralized) or single cluster, for any
// parameter list, without running the data pipeline.
AgentAssignment one_agent_per_parameter(std::span<const ParameterSpec> params);
AgentAssignment single_cluster(std::span<const ParameterSpec> params);

// Names of categorical parameters, in parameter order.
std::vector<std::string> categorical_names(std::span<const ParameterSpec> params);

// Persistence.
void write_dataset_csv(std::ostream& out, const Dataset& data);
// `params` supplies the integer/categorical split; pass {} to treat all as integer.
Dataset read_dataset_csv(std::istream& in, std::span<const ParameterSpec> params = {});
void write_correlation_csv(std::ostream& out, const CorrelationMatrix& m);
std::string dendrogram_to_json(const Dendrogram& d);
std::string assignment_to_json(const AgentAssignment& a);
AgentAssignment assignment_from_json(const std::string& text);

}  // namespace marlmap
