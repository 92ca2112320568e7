#include "marlmap/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "marlmap/baselines.hpp"

namespace marlmap {

using nlohmann::json;

void Dataset::add_row(std::span<const double> row, double reward) {
  if (row.size() != arity()) throw std::invalid_argument("Dataset: row arity mismatch");
  if (!std::isfinite(reward) || reward < 0.0) throw std::invalid_argument("Dataset: rewards must be finite and >= 0");
  values.insert(values.end(), row.begin(), row.end());
  rewards.push_back(reward);
}

CollectPolicy collect_policy_from_string(const std::string& text) {
  if (text == "random") return CollectPolicy::Random;
  if (text == "ga") return CollectPolicy::Genetic;
  throw std::invalid_argument("collection policy must be random or ga; got \"" + text + "\"");
}

namespace {

Dataset empty_dataset_for(std::span<const ParameterSpec> params) {
  Dataset data;
  for (const auto& p : params) {
    data.names.push_back(p.name);
    data.integer_valued.push_back(p.kind == ParameterKind::Integer);
  }
  return data;
}

}  // namespace

Dataset collect(Environment& env, CollectPolicy policy, std::size_t samples, std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("collect: need at least 2 samples");
  const auto& params = env.parameters();
  Dataset data = empty_dataset_for(params);
  data.values.reserve(samples * params.size());
  data.rewards.reserve(samples);
  std::vector<double> row(params.size());
  SampleObserver record = [&](std::span<const std::size_t> index, const StepResult& result) {
    for (std::size_t j = 0; j < params.size(); ++j) row[j] = params[j].numeric(index[j]);
    data.add_row(row, result.reward);
  };
  switch (policy) {
    case CollectPolicy::Random:
      random_search(env, samples, seed, {}, record);
      break;
    case CollectPolicy::Genetic: {
      GAConfig cfg;
      cfg.population = std::min<std::size_t>(cfg.population, samples);
      cfg.elitism = std::min(cfg.elitism, cfg.population - 1);
      cfg.tournament = std::min(cfg.tournament, cfg.population);
      ga_search(env, cfg, samples, seed, {}, record);
      break;
    }
  }
  return data;
}

Dataset select_top(const Dataset& data, double n_percent) {
  if (data.rows() == 0) throw std::invalid_argument("select_top: empty dataset");
  if (!(n_percent > 0.0 && n_percent <= 100.0)) {
    throw std::invalid_argument("select_top: n_percent must be in (0, 100]");
  }
  const auto keep = static_cast<std::size_t>(std::ceil(static_cast<double>(data.rows()) * n_percent / 100.0 - 1e-9));
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return data.rewards[a] > data.rewards[b]; });
  Dataset out;
  out.names = data.names;
  out.integer_valued = data.integer_valued;
  const std::size_t n = std::clamp<std::size_t>(keep, 1, data.rows());
  for (std::size_t i = 0; i < n; ++i) out.add_row(data.row(order[i]), data.rewards[order[i]]);
  return out;
}

CorrelationMatrix correlation(const Dataset& data) {
  if (data.rows() < 2) throw std::invalid_argument("correlation: need at least 2 rows");
  std::vector<std::size_t> cols;
  CorrelationMatrix m;
  for (std::size_t j = 0; j < data.arity(); ++j) {
    if (data.integer_valued[j]) {
      cols.push_back(j);
      m.names.push_back(data.names[j]);
    }
  }
  const std::size_t n = cols.size();
  const std::size_t rows = data.rows();

  // Centered columns; two-pass for accuracy.
  std::vector<std::vector<double>> centered(n, std::vector<double>(rows));
  std::vector<double> norm(n);
  for (std::size_t a = 0; a < n; ++a) {
    double mean = 0.0;
    for (std::size_t i = 0; i < rows; ++i) mean += data.at(i, cols[a]);
    mean /= static_cast<double>(rows);
    double ss = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      const double d = data.at(i, cols[a]) - mean;
      centered[a][i] = d;
      ss += d * d;
    }
    norm[a] = std::sqrt(ss);
  }

  m.r.assign(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    m.r[a * n + a] = 1.0;
    for (std::size_t b = a + 1; b < n; ++b) {
      double value = 0.0;
      if (norm[a] > 0.0 && norm[b] > 0.0) {
        double cross = 0.0;
        for (std::size_t i = 0; i < rows; ++i) cross += centered[a][i] * centered[b][i];
        value = std::clamp(cross / (norm[a] * norm[b]), -1.0, 1.0);
      }
      m.r[a * n + b] = value;
      m.r[b * n + a] = value;
    }
  }
  return m;
}

Dendrogram agglomerate(const CorrelationMatrix& m, DistanceTransform transform) {
  const std::size_t n = m.size();
  if (n < 2) throw std::invalid_argument("agglomerate: need at least 2 parameters");

  struct Cluster {
    std::size_t id;
    std::vector<std::size_t> members;
    std::string key;  // lexicographically smallest member name
  };
  std::vector<Cluster> active;
  for (std::size_t i = 0; i < n; ++i) active.push_back({i, {i}, m.names[i]});

  auto leaf_distance = [&](std::size_t i, std::size_t j) {
    const double r = m(i, j);
    return transform == DistanceTransform::OneMinusR ? 1.0 - r : 1.0 - std::abs(r);
  };
  auto linkage = [&](const Cluster& x, const Cluster& y) {
    double sum = 0.0;
    for (auto i : x.members)
      for (auto j : y.members) sum += leaf_distance(i, j);
    return sum / static_cast<double>(x.members.size() * y.members.size());
  };

  Dendrogram d;
  d.leaves = m.names;
  double last_height = -std::numeric_limits<double>::infinity();
  while (active.size() > 1) {
    std::size_t best_a = 0, best_b = 1;
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::string, std::string> best_key;
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        const double dist = linkage(active[a], active[b]);
        auto key = std::minmax(active[a].key, active[b].key);
        std::pair<std::string, std::string> k{key.first, key.second};
        if (dist < best || (dist == best && k < best_key)) {
          best = dist;
          best_a = a;
          best_b = b;
          best_key = std::move(k);
        }
      }
    }
    Cluster merged;
    merged.id = n + d.merges.size();
    merged.members = active[best_a].members;
    merged.members.insert(merged.members.end(), active[best_b].members.begin(), active[best_b].members.end());
    std::sort(merged.members.begin(), merged.members.end());
    merged.key = std::min(active[best_a].key, active[best_b].key);
    // Average linkage is monotone in exact arithmetic; absorb rounding.
    const double height = std::max(best, last_height);
    last_height = height;
    d.merges.push_back({std::min(active[best_a].id, active[best_b].id), std::max(active[best_a].id, active[best_b].id),
                        height, merged.members.size()});
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_a));
    active.push_back(std::move(merged));
  }
  return d;
}

std::size_t AgentAssignment::agent_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return agent[i];
  }
  throw std::out_of_range("parameter '" + name + "' has no agent");
}

std::vector<std::vector<std::string>> AgentAssignment::groups() const {
  std::vector<std::vector<std::string>> out(num_agents);
  for (std::size_t i = 0; i < names.size(); ++i) out[agent[i]].push_back(names[i]);
  return out;
}

AgentAssignment assign(const Dendrogram& dendrogram, std::size_t budget, std::span<const std::string> categorical) {
  const std::size_t n = dendrogram.leaves.size();
  if (budget < 1 || budget > n) {
    throw std::out_of_range("assign: agent budget B=" + std::to_string(budget) + " must be in [1, " +
                            std::to_string(n) + "]");
  }
  // Union-find over the first n - budget merges.
  std::vector<std::size_t> parent(2 * n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t m = 0; m < n - budget; ++m) {
    const auto& merge = dendrogram.merges[m];
    const std::size_t node = n + m;
    parent[find(merge.a)] = node;
    parent[find(merge.b)] = node;
  }

  AgentAssignment out;
  out.budget = budget;
  std::vector<std::size_t> root_to_agent(2 * n, SIZE_MAX);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto root = find(i);
    if (root_to_agent[root] == SIZE_MAX) root_to_agent[root] = next++;
    out.names.push_back(dendrogram.leaves[i]);
    out.agent.push_back(root_to_agent[root]);
  }
  for (const auto& name : categorical) {
    out.names.push_back(name);
    out.agent.push_back(next++);
  }
  out.num_agents = next;
  return out;
}

std::vector<std::string> categorical_names(std::span<const ParameterSpec> params) {
  std::vector<std::string> out;
  for (const auto& p : params) {
    if (p.kind == ParameterKind::Categorical) out.push_back(p.name);
  }
  return out;
}

AgentAssignment one_agent_per_parameter(std::span<const ParameterSpec> params) {
  AgentAssignment out;
  std::size_t clusters = 0;
  for (const auto& p : params) {
    if (p.kind == ParameterKind::Integer) {
      out.names.push_back(p.name);
      out.agent.push_back(clusters++);
    }
  }
  out.budget = clusters;
  std::size_t next = clusters;
  for (const auto& name : categorical_names(params)) {
    out.names.push_back(name);
    out.agent.push_back(next++);
  }
  out.num_agents = next;
  return out;
}

AgentAssignment single_cluster(std::span<const ParameterSpec> params) {
  AgentAssignment out;
  bool any_integer = false;
  for (const auto& p : params) {
    if (p.kind == ParameterKind::Integer) {
      out.names.push_back(p.name);
      out.agent.push_back(0);
      any_integer = true;
    }
  }
  out.budget = any_integer ? 1 : 0;
  std::size_t next = out.budget;
  for (const auto& name : categorical_names(params)) {
    out.names.push_back(name);
    out.agent.push_back(next++);
  }
  out.num_agents = next;
  return out;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  for (const auto& name : data.names) out << name << ',';
  out << "reward\n";
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (double v : data.row(i)) out << format_double(v) << ',';
    out << format_double(data.rewards[i]) << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in, std::span<const ParameterSpec> params) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dataset CSV: empty file");
  std::vector<std::string> header;
  {
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header.back() != "reward") {
    throw std::runtime_error("dataset CSV line 1: header must end with a 'reward' column");
  }
  header.pop_back();
  Dataset data;
  data.names = header;
  for (const auto& name : header) {
    bool integer = true;
    for (const auto& p : params) {
      if (p.name == name) integer = p.kind == ParameterKind::Integer;
    }
    data.integer_valued.push_back(integer);
  }
  std::size_t line_no = 1;
  std::vector<double> row;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    row.clear();
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::logic_error&) {
        throw std::runtime_error("dataset CSV line " + std::to_string(line_no) + ": malformed number '" + cell + "'");
      }
    }
    if (row.size() != header.size() + 1) {
      throw std::runtime_error("dataset CSV line " + std::to_string(line_no) + ": expected " +
                               std::to_string(header.size() + 1) + " fields, got " + std::to_string(row.size()));
    }
    const double reward = row.back();
    row.pop_back();
    data.add_row(row, reward);
  }
  return data;
}

void write_correlation_csv(std::ostream& out, const CorrelationMatrix& m) {
  out << "parameter";
  for (const auto& name : m.names) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << m.names[i];
    for (std::size_t j = 0; j < m.size(); ++j) out << ',' << format_double(m(i, j));
    out << '\n';
  }
}

std::string dendrogram_to_json(const Dendrogram& d) {
  json j;
  j["leaves"] = d.leaves;
  j["merges"] = json::array();
  for (const auto& m : d.merges) {
    j["merges"].push_back({{"a", m.a}, {"b", m.b}, {"height", m.height}, {"size", m.size}});
  }
  return j.dump(2) + "\n";
}

std::string assignment_to_json(const AgentAssignment& a) {
  json j;
  j["budget"] = a.budget;
  j["num_agents"] = a.num_agents;
  j["index"] = json::object();
  for (std::size_t i = 0; i < a.names.size(); ++i) j["index"][a.names[i]] = a.agent[i];
  j["order"] = a.names;
  return j.dump(2) + "\n";
}

AgentAssignment assignment_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("assignment JSON: ") + e.what());
  }
  AgentAssignment a;
  try {
    a.budget = j.at("budget").get<std::size_t>();
    const auto& index = j.at("index");
    std::vector<std::string> order;
    if (j.contains("order")) {
      order = j.at("order").get<std::vector<std::string>>();
    } else {
      for (auto it = index.begin(); it != index.end(); ++it) order.push_back(it.key());
    }
    std::size_t max_id = 0;
    for (const auto& name : order) {
      a.names.push_back(name);
      a.agent.push_back(index.at(name).get<std::size_t>());
      max_id = std::max(max_id, a.agent.back());
    }
    a.num_agents = a.names.empty() ? 0 : max_id + 1;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("assignment JSON: ") + e.what());
  }
  std::vector<bool> used(a.num_agents, false);
  for (auto id : a.agent) used[id] = true;
  if (std::find(used.begin(), used.end(), false) != used.end()) {
    throw std::runtime_error("assignment JSON: agent ids must be contiguous from 0");
  }
  return a;
}

}  // namespace marlmap
