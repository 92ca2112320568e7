#include "marlmap/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace marlmap {

CategoricalPolicy::CategoricalPolicy(std::size_t options, double temperature)
    : logits_(options, 0.0), temperature_(temperature) {
  if (options == 0) throw std::invalid_argument("CategoricalPolicy: empty option set");
  if (!(temperature > 0.0)) throw std::invalid_argument("CategoricalPolicy: temperature must be > 0");
  refresh();
}

void CategoricalPolicy::set_logits(std::vector<double> logits) {
  if (logits.size() != logits_.size()) throw std::invalid_argument("CategoricalPolicy: logit count mismatch");
  for (double v : logits) {
    if (!std::isfinite(v)) throw NumericError("CategoricalPolicy: non-finite logit");
  }
  logits_ = std::move(logits);
  refresh();
}

void CategoricalPolicy::refresh() {
  probs_.resize(logits_.size());
  log_probs_.resize(logits_.size());
  const double top = *std::max_element(logits_.begin(), logits_.end());
  double z = 0.0;
  for (std::size_t i = 0; i < logits_.size(); ++i) {
    log_probs_[i] = (logits_[i] - top) / temperature_;
    probs_[i] = std::exp(log_probs_[i]);
    z += probs_[i];
  }
  const double log_z = std::log(z);
  for (std::size_t i = 0; i < logits_.size(); ++i) {
    probs_[i] /= z;
    log_probs_[i] -= log_z;
  }
}

std::size_t CategoricalPolicy::sample(std::mt19937_64& rng) const {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (probs_[i] <= 0.0) continue;
    acc += probs_[i];
    last_positive = i;
    if (u < acc) return i;
  }
  return last_positive;
}

std::size_t CategoricalPolicy::argmax() const {
  return static_cast<std::size_t>(std::max_element(logits_.begin(), logits_.end()) - logits_.begin());
}

double CategoricalPolicy::log_prob(std::size_t option) const { return log_probs_.at(option); }

std::vector<double> CategoricalPolicy::log_prob_gradient(std::size_t option) const {
  std::vector<double> g(probs_.size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = ((j == option ? 1.0 : 0.0) - probs_[j]) / temperature_;
  return g;
}

double CategoricalPolicy::entropy() const {
  double h = 0.0;
  for (std::size_t j = 0; j < probs_.size(); ++j) {
    if (probs_[j] > 0.0) h -= probs_[j] * log_probs_[j];
  }
  return h;
}

std::vector<double> CategoricalPolicy::entropy_gradient() const {
  const double h = entropy();
  std::vector<double> g(probs_.size(), 0.0);
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (probs_[j] > 0.0) g[j] = -probs_[j] * (log_probs_[j] + h) / temperature_;
  }
  return g;
}

void CategoricalPolicy::step(std::size_t option, double advantage, double learning_rate, double entropy_weight) {
  if (option >= logits_.size()) throw std::out_of_range("CategoricalPolicy::step: option out of range");
  if (advantage == 0.0 && entropy_weight == 0.0) return;
  const double inv_t = 1.0 / temperature_;
  const double h = entropy_weight != 0.0 ? entropy() : 0.0;
  for (std::size_t j = 0; j < logits_.size(); ++j) {
    const double p = probs_[j];
    double g = -advantage * p;
    if (entropy_weight != 0.0 && p > 0.0) g -= entropy_weight * p * (log_probs_[j] + h);
    logits_[j] += learning_rate * inv_t * g;
  }
  logits_[option] += learning_rate * inv_t * advantage;
  refresh();
}

void AgentHyper::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw std::invalid_argument("learning rate must be > 0");
  if (!(baseline_decay >= 0.0 && baseline_decay < 1.0)) throw std::invalid_argument("baseline decay must be in [0,1)");
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be > 0");
  if (!(entropy_weight >= 0.0)) throw std::invalid_argument("entropy weight must be >= 0");
  if (max_joint_size < 1) throw std::invalid_argument("max_joint_size must be >= 1");
}

std::size_t Agent::joint_option(std::span<const std::size_t> index) const {
  std::size_t joint = 0;
  for (std::size_t i = 0; i < params.size(); ++i) joint = joint * radices[i] + index[params[i]];
  return joint;
}

void Agent::scatter(std::size_t joint, std::span<std::size_t> index) const {
  for (std::size_t i = params.size(); i-- > 0;) {
    index[params[i]] = joint % radices[i];
    joint /= radices[i];
  }
}

AgentTeam::AgentTeam(std::vector<Agent> agents, std::size_t num_params, AgentHyper hyper)
    : agents_(std::move(agents)), num_params_(num_params), hyper_(hyper) {
  hyper_.validate();
}

IndexVector AgentTeam::sample_joint(std::mt19937_64& rng) const {
  IndexVector index(num_params_, 0);
  for (const auto& agent : agents_) agent.scatter(agent.policy.sample(rng), index);
  return index;
}

IndexVector AgentTeam::greedy() const {
  IndexVector index(num_params_, 0);
  for (const auto& agent : agents_) agent.scatter(agent.policy.argmax(), index);
  return index;
}

void AgentTeam::update(std::span<const std::size_t> index, double reward) {
  if (!std::isfinite(reward)) throw NumericError("AgentTeam::update: non-finite reward");
  if (index.size() != num_params_) throw std::out_of_range("AgentTeam::update: index arity mismatch");
  if (!has_baseline_) {
    baseline_ = reward;
    has_baseline_ = true;
  }
  const double raw = reward - baseline_;
  double advantage = raw;
  if (hyper_.normalize_advantage && raw != 0.0) {
    const double scale = spread_ > 0.0 ? std::sqrt(spread_) : std::abs(raw);
    advantage = raw / scale;
  }
  for (auto& agent : agents_) {
    agent.policy.step(agent.joint_option(index), advantage, hyper_.learning_rate, hyper_.entropy_weight);
  }
  const double d = hyper_.baseline_decay;
  baseline_ = d * baseline_ + (1.0 - d) * reward;
  spread_ = d * spread_ + (1.0 - d) * raw * raw;
}

double AgentTeam::probability(std::span<const std::size_t> index) const {
  double p = 1.0;
  for (const auto& agent : agents_) p *= agent.policy.probabilities()[agent.joint_option(index)];
  return p;
}

std::vector<std::vector<double>> AgentTeam::marginals() const {
  std::vector<std::vector<double>> out(num_params_);
  IndexVector scratch(num_params_, 0);
  for (const auto& agent : agents_) {
    for (std::size_t i = 0; i < agent.params.size(); ++i) out[agent.params[i]].assign(agent.radices[i], 0.0);
    const auto& probs = agent.policy.probabilities();
    for (std::size_t joint = 0; joint < probs.size(); ++joint) {
      agent.scatter(joint, scratch);
      for (auto param : agent.params) out[param][scratch[param]] += probs[joint];
    }
  }
  return out;
}

AgentTeam make_team(std::span<const ParameterSpec> params, const AgentAssignment& assignment, const AgentHyper& hyper) {
  hyper.validate();
  std::map<std::size_t, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::size_t id = 0;
    try {
      id = assignment.agent_of(params[i].name);
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("make_team: parameter '" + params[i].name + "' is not covered by the assignment");
    }
    members[id].push_back(i);
  }
  std::vector<Agent> agents;
  for (const auto& [id, group] : members) {
    std::uint64_t joint = 1;
    bool overflow = false;
    std::vector<std::size_t> radices;
    for (auto i : group) {
      radices.push_back(params[i].option_count());
      overflow = overflow || __builtin_mul_overflow(joint, static_cast<std::uint64_t>(params[i].option_count()), &joint);
    }
    if (overflow || joint > hyper.max_joint_size) {
      std::string names;
      for (auto i : group) names += (names.empty() ? "" : ", ") + params[i].name;
      const BigInt exact = exact_size(radices);
      throw JointTooLargeError("agent " + std::to_string(id) + " {" + names + "} needs a joint policy over " +
                               exact.str() + " options, above max_joint_size = " +
                               std::to_string(hyper.max_joint_size));
    }
    agents.push_back(Agent{group, std::move(radices), CategoricalPolicy(static_cast<std::size_t>(joint), hyper.temperature)});
  }
  return AgentTeam(std::move(agents), params.size(), hyper);
}

void TrainConfig::validate() const {
  if (total_samples < 1) throw std::invalid_argument("TrainConfig: total_samples must be >= 1");
}

TrainResult train(AgentTeam& team, Environment& env, const TrainConfig& cfg, SampleObserver observer) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  TraceRecorder rec(env, cfg.total_samples, cfg.wall_clock, std::move(observer));
  TrainResult out;
  while (!rec.exhausted()) {
    const IndexVector index = team.sample_joint(rng);
    const StepResult result = rec.evaluate(index);
    team.update(index, result.reward);
    if (cfg.snapshot_period > 0 && rec.used() % cfg.snapshot_period == 0) {
      out.snapshots.emplace_back(rec.used(), team.greedy());
    }
  }
  out.trace = rec.release();
  out.trace.final_marginals = team.marginals();
  return out;
}

double expected_reward(const AgentTeam& team, Environment& env, std::uint64_t limit) {
  const auto counts = env.option_counts();
  const BigInt total = exact_size(counts);
  if (total > limit) throw SpaceTooLargeError("expected_reward: space has " + total.str() + " points");
  IndexVector index(counts.size(), 0);
  double expectation = 0.0;
  while (true) {
    const double p = team.probability(index);
    if (p > 0.0) expectation += p * env.step(index).reward;
    std::size_t pos = counts.size();
    bool done = true;
    while (pos > 0) {
      --pos;
      if (++index[pos] < counts[pos]) {
        done = false;
        break;
      }
      index[pos] = 0;
    }
    if (done) break;
  }
  return expectation;
}

}  // namespace marlmap
