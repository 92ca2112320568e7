#include "marlmap/environment.hpp"

#include <cmath>
#include <stdexcept>

namespace marlmap {

std::string to_string(Objective objective) {
  switch (objective) {
    case Objective::Latency:
      return "latency";
    case Objective::Edp:
      return "edp";
    case Objective::Area:
      return "area";
  }
  return "latency";
}

Objective objective_from_string(std::string_view text) {
  if (text == "latency") return Objective::Latency;
  if (text == "edp") return Objective::Edp;
  if (text == "area") return Objective::Area;
  throw std::invalid_argument("objective must be one of latency, edp, area; got \"" + std::string(text) + "\"");
}

double objective_value(const CostReport& report, Objective objective) {
  switch (objective) {
    case Objective::Latency:
      return report.latency;
    case Objective::Edp:
      return report.latency * report.energy;
    case Objective::Area:
      return report.area;
  }
  return report.latency;
}

std::vector<std::size_t> Environment::option_counts() const {
  std::vector<std::size_t> out;
  for (const auto& p : parameters()) out.push_back(p.option_count());
  return out;
}

MappingEnvironment::MappingEnvironment(std::shared_ptr<const MapSpace> space, Objective objective,
                                       std::uint64_t seed)
    : space_(std::move(space)), objective_(objective), seed_(seed) {
  if (!space_) throw std::invalid_argument("MappingEnvironment: null map space");
}

MappingEnvironment::MappingEnvironment(const LayerShape& layer, const AcceleratorConfig& accel,
                                       Objective objective, std::uint64_t seed)
    : MappingEnvironment(std::make_shared<const MapSpace>(layer, accel), objective, seed) {}

StepResult MappingEnvironment::score(const CostReport& report, Objective objective) {
  StepResult result;
  result.done = true;
  result.valid = report.valid;
  result.report = report;
  if (report.valid) {
    result.observation = {report.latency, report.power, report.energy, report.area};
    result.reward = 1.0 / objective_value(report, objective);
  }
  return result;
}

Observation MappingEnvironment::reset() {
  const IndexVector reference(space_->size(), 0);
  return step(reference).observation;
}

StepResult MappingEnvironment::step(std::span<const std::size_t> index) {
  const Mapping mapping = space_->decode(index);
  return score(evaluate(space_->layer(), space_->accelerator(), mapping), objective_);
}

FunctionEnvironment::FunctionEnvironment(std::vector<std::size_t> option_counts, RewardFn reward)
    : reward_(std::move(reward)) {
  for (std::size_t i = 0; i < option_counts.size(); ++i) {
    if (option_counts[i] == 0) throw std::invalid_argument("FunctionEnvironment: empty option set");
    ParameterSpec p;
    p.name = "x" + std::to_string(i);
    p.kind = ParameterKind::Integer;
    for (std::size_t o = 0; o < option_counts[i]; ++o) p.values.push_back(static_cast<std::int64_t>(o));
    params_.push_back(std::move(p));
  }
}

StepResult FunctionEnvironment::step(std::span<const std::size_t> index) {
  if (index.size() != params_.size()) throw std::out_of_range("index vector arity mismatch");
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= params_[i].option_count()) throw std::out_of_range("index out of range for " + params_[i].name);
  }
  StepResult result;
  result.reward = reward_(index);
  if (!std::isfinite(result.reward) || result.reward < 0.0) {
    throw NumericError("FunctionEnvironment: reward must be finite and non-negative");
  }
  result.valid = true;
  result.done = true;
  return result;
}

FunctionEnvironment make_separable_environment(std::vector<std::vector<double>> factors) {
  std::vector<std::size_t> counts;
  for (const auto& f : factors) counts.push_back(f.size());
  return FunctionEnvironment(std::move(counts), [factors = std::move(factors)](std::span<const std::size_t> idx) {
    double r = 1.0;
    for (std::size_t j = 0; j < idx.size(); ++j) r *= factors[j][idx[j]];
    return r;
  });
}

FunctionEnvironment make_matching_environment(std::size_t options) {
  return FunctionEnvironment({options, options},
                             [](std::span<const std::size_t> idx) { return idx[0] == idx[1] ? 1.0 : 0.0; });
}

FunctionEnvironment make_xor_environment() {
  return FunctionEnvironment({2, 2}, [](std::span<const std::size_t> idx) { return idx[0] != idx[1] ? 1.0 : 0.0; });
}

}  // namespace marlmap
