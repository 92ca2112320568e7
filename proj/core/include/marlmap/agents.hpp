#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "marlmap/clustering.hpp"
#include "marlmap/environment.hpp"
#include "marlmap/trace.hpp"

namespace marlmap {

class JointTooLargeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Softmax policy over a finite option set, p = softmax(logits / temperature).
class CategoricalPolicy {
 public:
  CategoricalPolicy(std::size_t options, double temperature);

  std::size_t size() const { return logits_.size(); }
  double temperature() const { return temperature_; }
  const std::vector<double>& logits() const { return logits_; }
  void set_logits(std::vector<double> logits);

  const std::vector<double>& probabilities() const { return probs_; }
  std::size_t sample(std::mt19937_64& rng) const;
  std::size_t argmax() const;

  double log_prob(std::size_t option) const;
  // d log p(option) / d logits = (onehot(option) - p) / temperature
  std::vector<double> log_prob_gradient(std::size_t option) const;
  double entropy() const;
  // dH / d logits_j = -p_j (log p_j + H) / temperature
  std::vector<double> entropy_gradient() const;

  // logits += lr * (advantage * grad log p(option) + entropy_weight * grad H)
  void step(std::size_t option, double advantage, double learning_rate, double entropy_weight);

 private:
  void refresh();

  std::vector<double> logits_;
  std::vector<double> probs_;
  std::vector<double> log_probs_;
  double temperature_;
};

struct AgentHyper {
  double learning_rate = 0.1;
  double baseline_decay = 0.99;
  double temperature = 1.0;
  double entropy_weight = 0.01;
  std::uint64_t max_joint_size = 1'000'000;
  // Divide the advantage by the running RMS of (reward - baseline) so the step
  // size does not depend on the objective's units.
  bool normalize_advantage = true;

  void validate() const;
};

// One learner owning a group of parameters through a joint categorical over
// the cartesian product of their options (last parameter varies fastest).
struct Agent {
  std::vector<std::size_t> params;
  std::vector<std::size_t> radices;
  CategoricalPolicy policy;

  std::size_t joint_option(std::span<const std::size_t> index) const;
  void scatter(std::size_t joint, std::span<std::size_t> index) const;
};

class AgentTeam {
 public:
  AgentTeam(std::vector<Agent> agents, std::size_t num_params, AgentHyper hyper);

  const std::vector<Agent>& agents() const { return agents_; }
  std::vector<Agent>& agents() { return agents_; }
  const AgentHyper& hyper() const { return hyper_; }
  std::size_t num_parameters() const { return num_params_; }
  double baseline() const { return baseline_; }

  // Each agent samples independently; the sub-choices concatenate into one
  // complete index vector.
  IndexVector sample_joint(std::mt19937_64& rng) const;
  IndexVector greedy() const;

  // REINFORCE with an EMA baseline and entropy bonus, applied to every agent
  // with the shared reward. Throws NumericError for a non-finite reward.
  void update(std::span<const std::size_t> index, double reward);

  // Probability of a complete index vector under the product of agent policies.
  double probability(std::span<const std::size_t> index) const;
  // Marginal distribution of every parameter.
  std::vector<std::vector<double>> marginals() const;

 private:
  std::vector<Agent> agents_;
  std::size_t num_params_;
  AgentHyper hyper_;
  bool has_baseline_ = false;
  double baseline_ = 0.0;
  double spread_ = 0.0;  // EMA of (reward - baseline)^2
};

// One policy per agent of `assignment`. Throws JointTooLargeError naming the
// cluster whose joint option count exceeds hyper.max_joint_size, and
// std::invalid_argument when a parameter has no agent.
AgentTeam make_team(std::span<const ParameterSpec> params, const AgentAssignment& assignment,
                    const AgentHyper& hyper = {});

struct TrainConfig {
  std::uint64_t total_samples = 20'000;
  std::uint64_t seed = 0;
  std::uint64_t snapshot_period = 0;  // 0 disables greedy-vector snapshots
  bool wall_clock = false;

  void validate() const;
};

struct TrainResult {
  SearchTrace trace;
  // (step, greedy index vector) every snapshot_period steps.
  std::vector<std::pair<std::uint64_t, IndexVector>> snapshots;
};

// Exactly cfg.total_samples environment steps, one synchronous update each.
TrainResult train(AgentTeam& team, Environment& env, const TrainConfig& cfg, SampleObserver observer = {});

// Expected reward of the team's current policy, by enumerating the space.
// Throws SpaceTooLargeError if the space has more than `limit` points.
double expected_reward(const AgentTeam& team, Environment& env, std::uint64_t limit = 1'000'000);

}  // namespace marlmap
