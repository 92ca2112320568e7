#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "marlmap/cost_model.hpp"
#include "marlmap/mapspace.hpp"

namespace marlmap {

enum class Objective : std::uint8_t { Latency, Edp, Area };

std::string to_string(Objective objective);
// Throws std::invalid_argument for anything but latency / edp / area.
Objective objective_from_string(std::string_view text);

// X_objective for a valid report: latency, latency * energy, or area.
double objective_value(const CostReport& report, Objective objective);

struct Observation {
  double latency = 0.0;
  double power = 0.0;
  double energy = 0.0;
  double area = 0.0;

  bool operator==(const Observation&) const = default;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = true;
  bool valid = false;
  CostReport report;
};

// One-step episodic search problem over a finite index space. Instances are
// single-threaded; make one per worker.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const std::vector<ParameterSpec>& parameters() const = 0;
  virtual Observation reset() = 0;
  // Throws std::out_of_range for an index outside the space.
  virtual StepResult step(std::span<const std::size_t> index) = 0;

  std::vector<std::size_t> option_counts() const;
};

class MappingEnvironment final : public Environment {
 public:
  MappingEnvironment(std::shared_ptr<const MapSpace> space, Objective objective, std::uint64_t seed = 0);
  MappingEnvironment(const LayerShape& layer, const AcceleratorConfig& accel, Objective objective,
                     std::uint64_t seed = 0);

  const std::vector<ParameterSpec>& parameters() const override { return space_->parameters(); }
  Observation reset() override;
  StepResult step(std::span<const std::size_t> index) override;

  const MapSpace& space() const { return *space_; }
  std::shared_ptr<const MapSpace> shared_space() const { return space_; }
  Objective objective() const { return objective_; }
  std::uint64_t seed() const { return seed_; }

  // Observation/reward for an explicit report; shared by step() and tests.
  static StepResult score(const CostReport& report, Objective objective);

 private:
  std::shared_ptr<const MapSpace> space_;
  Objective objective_;
  std::uint64_t seed_;
};

// Environment over an arbitrary reward function; used for synthetic spaces
// with known structure (separable products, coordination games).
class FunctionEnvironment final : public Environment {
 public:
  using RewardFn = std::function<double(std::span<const std::size_t>)>;

  FunctionEnvironment(std::vector<std::size_t> option_counts, RewardFn reward);

  const std::vector<ParameterSpec>& parameters() const override { return params_; }
  Observation reset() override { return {}; }
  StepResult step(std::span<const std::size_t> index) override;

 private:
  std::vector<ParameterSpec> params_;
  RewardFn reward_;
};

// reward = prod_j factors[j][index[j]].
FunctionEnvironment make_separable_environment(std::vector<std::vector<double>> factors);

// Two parameters with `options` choices each; reward 1 iff both indices are equal.
FunctionEnvironment make_matching_environment(std::size_t options);
// Two binary parameters; reward 1 iff they differ.
FunctionEnvironment make_xor_environment();

}  // namespace marlmap
