// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset, e.g. `acceptance 1 6 7`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <sys/wait.h>

#include <fmt/core.h>

#include "marlmap/agents.hpp"
#include "marlmap/baselines.hpp"
#include "marlmap/clustering.hpp"
#include "marlmap/cost_model.hpp"
#include "marlmap/gaussian_process.hpp"
#include "marlmap/harness.hpp"
#include "marlmap/io.hpp"
#include "marlmap/mapspace.hpp"
#include "marlmap/presets.hpp"
#include "oracles.hpp"

using namespace marlmap;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double time_limit_s;  // 0 = no limit
  std::function<Verdict()> run;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "marlmap-acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Steps until the trace first reaches `target`; the budget if it never does.
std::uint64_t steps_to_reach(const SearchTrace& t, double target) {
  for (const auto& row : t.rows) {
    if (row.best_reward >= target) return row.step;
  }
  return t.rows.size();
}

// --- 1 ----------------------------------------------------------------------

Verdict counting_fidelity() {
  const bool two = loop_order_count(7, 2) == BigInt("25401600");
  const bool three = loop_order_count(7, 3) == BigInt("128024064000");
  const bool ten = exact_size(std::vector<std::size_t>(10, 10)) == BigInt("10000000000");
  return {two && three && ten, fmt::format("(7!)^2={} (7!)^3={} 10^10={}", loop_order_count(7, 2).str(),
                                           loop_order_count(7, 3).str(),
                                           exact_size(std::vector<std::size_t>(10, 10)).str())};
}

// --- 2 ----------------------------------------------------------------------

Verdict oracle_equivalence() {
  auto space = std::make_shared<const MapSpace>(layer_preset("micro"), accelerator_preset("micro"));
  const BigInt size = exact_size(*space);
  if (size > 100'000) return {false, "micro space exceeds 1e5 points"};

  double best_objective = std::numeric_limits<double>::infinity();
  std::uint64_t points = 0;
  enumerate(*space, 100'000, [&](std::span<const std::size_t>, const Mapping& m) {
    ++points;
    const CostReport r = evaluate(space->layer(), space->accelerator(), m);
    if (r.valid) best_objective = std::min(best_objective, r.latency);
  });

  const std::uint64_t budget = 10 * points;
  MappingEnvironment env(space, Objective::Latency);
  const auto objective_of = [&](const SearchTrace& t) {
    const CostReport r = evaluate(space->layer(), space->accelerator(), space->decode(t.best_index));
    return r.valid ? r.latency : std::numeric_limits<double>::infinity();
  };
  const double random_best = objective_of(random_search(env, budget, 1));
  const double ga_best = objective_of(ga_search(env, GAConfig{}, budget, 1));
  return {random_best == best_objective && ga_best == best_objective,
          fmt::format("{} points, optimum latency {}, random {}, ga {} (budget {})", points, best_objective,
                      random_best, ga_best, budget)};
}

// --- 3 ----------------------------------------------------------------------

Verdict algorithm1_recovery() {
  int together = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    std::mt19937_64 rng(1000 + trial);
    std::uniform_int_distribution<int> value(1, 64);
    std::uniform_real_distribution<double> reward(0.0, 1.0);
    const double sigma_a = std::sqrt((64.0 * 64.0 - 1.0) / 12.0);
    std::normal_distribution<double> noise(0.0, 0.05 * sigma_a);
    Dataset d;
    d.names = {"a", "b", "c", "d", "e"};
    d.integer_valued.assign(5, true);
    for (int i = 0; i < 20'000; ++i) {
      const double a = value(rng);
      const std::vector<double> row = {a, a + noise(rng), static_cast<double>(value(rng)),
                                       static_cast<double>(value(rng)), static_cast<double>(value(rng))};
      d.add_row(row, reward(rng));
    }
    const AgentAssignment assignment = assign(agglomerate(correlation(select_top(d, 15.0))), 4);
    if (assignment.agent_of("a") == assignment.agent_of("b")) ++together;
  }
  return {together >= 95, fmt::format("a and b share a cluster in {}/100 trials", together)};
}

// --- 4 ----------------------------------------------------------------------

std::vector<std::vector<double>> separable_factors(std::size_t params, std::size_t options, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 0.9);
  std::vector<std::vector<double>> f(params, std::vector<double>(options));
  for (auto& row : f) {
    for (auto& v : row) v = u(rng);
    row[std::uniform_int_distribution<std::size_t>(0, options - 1)(rng)] = 1.0;
  }
  return f;
}

Verdict sample_efficiency() {
  const std::vector<std::uint64_t> seeds = {0, 1, 2};
  const std::vector<MethodSpec> methods = {MethodSpec::parse("marl-full"), MethodSpec::parse("marl-clustered(4)"),
                                           MethodSpec::parse("single-agent")};
  ExperimentConfig cfg;
  cfg.budget = 20'000;
  cfg.methods = methods;

  bool pass = true;
  std::string detail;
  for (const auto& layer : cnn_layer_preset_names()) {
    MappingEnvironment env(layer_preset(layer), accelerator_preset("default"), Objective::Latency);
    ClusteringSource source;
    const ClusteringOutcome clustering = run_clustering(env, source);
    const AgentAssignment clustered =
        assign(clustering.dendrogram, 4, categorical_names(env.parameters()));

    std::vector<double> med(methods.size());
    for (std::size_t m = 0; m < methods.size(); ++m) {
      std::vector<double> steps;
      for (std::size_t s = 0; s < seeds.size(); ++s) {
        MappingEnvironment run_env(env.shared_space(), Objective::Latency);
        const RunOutput out = run_method(methods[m], seeds[s], s, run_env, cfg, &clustered);
        steps.push_back(static_cast<double>(steps_to_within(out.trace, cfg.epsilon)));
      }
      med[m] = median(steps);
    }
    const bool ordered = med[0] <= med[1] && med[1] <= med[2];
    pass = pass && ordered;
    detail += fmt::format("{}: full {} <= clustered(4) {} <= single {} {}; ", layer, med[0], med[1], med[2],
                          ordered ? "ok" : "VIOLATED");
  }

  // Separable product reward: 6 parameters x 8 options, unique optimum 1.0.
  FunctionEnvironment sep = make_separable_environment(separable_factors(6, 8, 17));
  std::vector<double> full_steps, single_steps;
  for (std::uint64_t seed : seeds) {
    TrainConfig tc;
    tc.total_samples = 20'000;
    tc.seed = seed;
    AgentTeam full = make_team(sep.parameters(), one_agent_per_parameter(sep.parameters()));
    full_steps.push_back(static_cast<double>(steps_to_reach(train(full, sep, tc).trace, 0.95)));
    AgentTeam single = make_team(sep.parameters(), single_cluster(sep.parameters()));
    single_steps.push_back(static_cast<double>(steps_to_reach(train(single, sep, tc).trace, 0.95)));
  }
  const double f = median(full_steps), s = median(single_steps);
  const bool separable_ok = f <= 0.2 * s;
  pass = pass && separable_ok;
  detail += fmt::format("separable 8^6: full {} vs single {} ({})", f, s, separable_ok ? "ok" : "VIOLATED");
  return {pass, detail};
}

// --- 5 ----------------------------------------------------------------------

Verdict expressiveness() {
  FunctionEnvironment x = make_xor_environment();
  std::vector<double> joint, factored;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TrainConfig tc;
    tc.total_samples = 5'000;
    tc.seed = seed;
    AgentTeam one = make_team(x.parameters(), single_cluster(x.parameters()));
    train(one, x, tc);
    joint.push_back(expected_reward(one, x));
    AgentTeam two = make_team(x.parameters(), one_agent_per_parameter(x.parameters()));
    train(two, x, tc);
    factored.push_back(expected_reward(two, x));
  }
  const double min_joint = *std::min_element(joint.begin(), joint.end());
  const double med_factored = median(factored);
  return {min_joint >= 0.99 && med_factored <= 0.6,
          fmt::format("B=1 min expected reward {:.6f} (need >= 0.99); B=2 median {:.6f} (need <= 0.6)", min_joint,
                      med_factored)};
}

// --- 6 ----------------------------------------------------------------------

Verdict reward_definitions() {
  auto space = std::make_shared<const MapSpace>(layer_preset("resnet18_l2"), accelerator_preset("default"));
  double worst = 0.0;
  for (Objective o : {Objective::Latency, Objective::Edp, Objective::Area}) {
    MappingEnvironment env(space, o);
    std::mt19937_64 rng(6);
    int valid = 0;
    while (valid < 1000) {
      const StepResult r = env.step(oracle::random_index(space->option_counts(), rng));
      if (!r.valid) continue;
      ++valid;
      double x = r.report.latency;
      if (o == Objective::Edp) x = r.report.latency * r.report.energy;
      if (o == Objective::Area) x = r.report.area;
      worst = std::max(worst, std::abs(r.reward * x - 1.0));
    }
  }
  return {worst <= 1e-12, fmt::format("max |reward*X - 1| = {:.3g} over 3x1000 valid mappings", worst)};
}

// --- 7 ----------------------------------------------------------------------

Verdict numerical_checks() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);

  double pearson_err = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Dataset d;
    d.names = {"u", "v", "w"};
    d.integer_valued.assign(3, true);
    std::vector<std::vector<double>> cols(3);
    for (int i = 0; i < 2000; ++i) {
      const double u = 100.0 + 10.0 * g(rng);
      const std::vector<double> row = {u, 0.5 * u + g(rng), g(rng)};
      for (int c = 0; c < 3; ++c) cols[c].push_back(row[c]);
      d.add_row(row, 1.0);
    }
    const CorrelationMatrix m = correlation(d);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = i + 1; j < 3; ++j) {
        pearson_err = std::max(pearson_err, std::abs(m(i, j) - oracle::pearson(cols[i], cols[j])));
      }
    }
  }

  double grad_err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 11);
    CategoricalPolicy p(n, 0.5 + 0.02 * trial);
    std::vector<double> logits(n);
    for (auto& l : logits) l = 2.0 * g(rng);
    p.set_logits(logits);
    const std::size_t option = static_cast<std::size_t>(trial) % n;
    const auto analytic = p.log_prob_gradient(option);
    double diff = 0.0, norm = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double h = 1e-5;
      auto plus = logits, minus = logits;
      plus[j] += h;
      minus[j] -= h;
      CategoricalPolicy q(n, p.temperature());
      q.set_logits(plus);
      const double fp = q.log_prob(option);
      q.set_logits(minus);
      const double fd = (fp - q.log_prob(option)) / (2.0 * h);
      diff += (analytic[j] - fd) * (analytic[j] - fd);
      norm += analytic[j] * analytic[j];
    }
    grad_err = std::max(grad_err, std::sqrt(diff / norm));
  }

  const MapSpace space(layer_preset("alexnet_l2"), accelerator_preset("default"));
  const FeatureEncoder enc(space.parameters());
  std::vector<FeatureVector> xs;
  std::vector<double> ys;
  std::set<IndexVector> seen;
  while (xs.size() < 40) {
    IndexVector idx = oracle::random_index(space.option_counts(), rng);
    if (!seen.insert(idx).second) continue;
    xs.push_back(enc.encode(idx));
    ys.push_back(g(rng));
  }
  GaussianProcess gp(0.5, 1e-8);
  gp.fit(xs, ys);
  double gp_err = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) gp_err = std::max(gp_err, std::abs(gp.predict(xs[i]).mean - ys[i]));

  return {pearson_err <= 1e-12 && grad_err <= 1e-5 && gp_err <= 1e-6,
          fmt::format("pearson {:.3g}, gradient rel {:.3g}, GP interpolation {:.3g}", pearson_err, grad_err, gp_err)};
}

// --- 8 ----------------------------------------------------------------------

int run_cli(const std::string& args, const fs::path& stdout_file) {
  const std::string cmd =
      fmt::format("\"{}\" {} > \"{}\" 2>/dev/null", MARLMAP_CLI_PATH, args, stdout_file.string());
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Byte-compares every file under a and b except run manifests; returns the
// names of mismatches.
std::vector<std::string> compare_trees(const fs::path& a, const fs::path& b, std::size_t& files) {
  std::vector<std::string> bad;
  std::set<fs::path> rel_a, rel_b;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file() && e.path().filename() != "run_manifest.json") rel_a.insert(fs::relative(e.path(), a));
  }
  for (const auto& e : fs::recursive_directory_iterator(b)) {
    if (e.is_regular_file() && e.path().filename() != "run_manifest.json") rel_b.insert(fs::relative(e.path(), b));
  }
  if (rel_a != rel_b) bad.push_back("file sets differ");
  for (const auto& r : rel_a) {
    ++files;
    if (!rel_b.count(r) || slurp(a / r) != slurp(b / r)) bad.push_back(r.string());
  }
  return bad;
}

Verdict determinism() {
  const fs::path root = work_dir() / "cli";
  fs::create_directories(root);
  const fs::path mapping = root / "mapping.json";
  {
    const MapSpace space(layer_preset("tiny"), accelerator_preset("golden"));
    std::ofstream(mapping) << mapping_to_json(space.decode(IndexVector(space.size(), 0)));
  }
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"evaluate", fmt::format("evaluate --layer tiny --accel golden --mapping \"{}\"", mapping.string())},
      {"enumerate", "enumerate --layer micro --accel micro --all"},
      {"collect", "collect --layer resnet18_l2 --samples 2000 --policy ga"},
      {"cluster", "cluster --layer resnet18_l2 --samples 3000 -B 4"},
      {"search", "search --layer resnet18_l2 --methods marl-full,marl-clustered(4),single-agent,random,ga,bo "
                 "--budget 300 --seeds 0,1"},
      {"benchmark", "benchmark --layer alexnet_l2 --methods marl-full,marl-clustered(3),random --budget 500 "
                    "--seeds 0,1,2"},
  };
  bool pass = true;
  std::string detail;
  for (const auto& [name, args] : commands) {
    std::vector<fs::path> dirs;
    bool ran = true;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path dir = root / fmt::format("{}-{}", name, rep);
      fs::create_directories(dir);
      // Quoting keeps the shell away from the parentheses in method names.
      std::string quoted = args;
      if (const auto pos = quoted.find("--methods "); pos != std::string::npos) {
        const auto start = pos + 10;
        const auto end = quoted.find(' ', start);
        quoted = quoted.substr(0, start) + "'" + quoted.substr(start, end - start) + "'" + quoted.substr(end);
      }
      const int code = run_cli(fmt::format("--seed 3 --out-dir \"{}\" {}", (dir / "out").string(), quoted),
                               dir / "stdout.txt");
      if (code != 0) ran = false;
      dirs.push_back(dir);
    }
    std::size_t files = 0;
    std::vector<std::string> bad;
    if (name == "evaluate" || name == "cluster") {
      ++files;
      if (slurp(dirs[0] / "stdout.txt") != slurp(dirs[1] / "stdout.txt")) bad.push_back("stdout");
    }
    if (fs::exists(dirs[0] / "out")) {
      for (auto& b : compare_trees(dirs[0] / "out", dirs[1] / "out", files)) bad.push_back(b);
    }
    const bool ok = ran && bad.empty() && files > 0;
    pass = pass && ok;
    detail += fmt::format("{} {} file(s) {}; ", name, files,
                          ok ? "identical" : (ran ? "DIFFER: " + (bad.empty() ? "" : bad.front()) : "EXIT FAILURE"));
  }
  return {pass, detail};
}

// --- 9 ----------------------------------------------------------------------

Verdict iso_sample_ledger() {
  ExperimentConfig cfg;
  cfg.layer = "resnet18_l2";
  cfg.methods = {MethodSpec::parse("marl-full"),    MethodSpec::parse("marl-clustered(4)"),
                 MethodSpec::parse("single-agent"), MethodSpec::parse("random"),
                 MethodSpec::parse("ga"),           MethodSpec::parse("bo")};
  cfg.budget = 20'000;
  cfg.seeds = {0};
  cfg.bo.max_observations = 256;
  cfg.bo.pool_size = 64;
  cfg.out_dir = work_dir() / "benchmark";
  cfg.threads = std::max(1u, std::thread::hardware_concurrency());
  const SearchOutcome outcome = run_search(cfg);
  const BenchmarkSummary summary = summarize(cfg.out_dir, cfg.methods, cfg.seeds, cfg.epsilon,
                                             outcome.collection_samples);
  write_summary(cfg.out_dir, summary, cfg.methods, cfg.seeds);

  bool pass = true;
  std::string lengths;
  for (const auto& method : cfg.methods) {
    std::ifstream in(trace_path(cfg.out_dir, method, 0));
    const SearchTrace t = read_trace_csv(in);
    pass = pass && t.rows.size() == cfg.budget;
    lengths += fmt::format("{}={} ", method.name(), t.rows.size());
  }
  for (const auto& m : summary.methods) pass = pass && m.evaluations_per_seed == cfg.budget;

  const std::string csv = slurp(cfg.out_dir / "summary.csv");
  const std::string overhead = fmt::format("overhead,clustering-collection,1,{},", outcome.collection_samples);
  const bool reported = outcome.collection_samples == 20'000 && csv.find(overhead) != std::string::npos;
  pass = pass && reported;
  return {pass, fmt::format("trace lengths {}; overhead line {}", lengths,
                            reported ? "'" + overhead + "' present" : "MISSING")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "counting fidelity", 1.0, counting_fidelity},
      {2, "oracle equivalence", 120.0, oracle_equivalence},
      {3, "clustering recovers planted correlation", 60.0, algorithm1_recovery},
      {4, "sample-efficiency ordering", 900.0, sample_efficiency},
      {5, "expressiveness dichotomy", 60.0, expressiveness},
      {6, "reward definitions", 0.0, reward_definitions},
      {7, "numerical checks", 0.0, numerical_checks},
      {8, "CLI determinism", 0.0, determinism},
      {9, "iso-sample ledger", 0.0, iso_sample_ledger},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit_s > 0.0 && seconds >= c.time_limit_s) {
      v.pass = false;
      v.detail += fmt::format(" [over the {} s limit]", c.time_limit_s);
    }
    if (!v.pass) ++failures;
    fmt::print("AC{} {} {} ({:.1f} s): {}\n", c.id, v.pass ? "PASS" : "FAIL", c.title, seconds, v.detail);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
