#include "marlmap/baselines.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "marlmap/gaussian_process.hpp"

namespace marlmap {

void GAConfig::validate() const {
  if (population < 2) throw std::invalid_argument("GAConfig: population must be >= 2");
  if (tournament < 1 || tournament > population) {
    throw std::invalid_argument("GAConfig: tournament size must be in [1, population]");
  }
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) throw std::invalid_argument("GAConfig: crossover rate must be in [0,1]");
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) throw std::invalid_argument("GAConfig: mutation rate must be in [0,1]");
  if (elitism >= population) throw std::invalid_argument("GAConfig: elitism must be < population");
}

void BOConfig::validate() const {
  if (initial_samples < 2) throw std::invalid_argument("BOConfig: initial samples must be >= 2");
  if (pool_size < 1) throw std::invalid_argument("BOConfig: pool size must be >= 1");
  if (!(length_scale > 0.0)) throw std::invalid_argument("BOConfig: length scale must be > 0");
  if (!(noise > 0.0)) throw std::invalid_argument("BOConfig: noise must be > 0");
  if (max_observations < 4) throw std::invalid_argument("BOConfig: max observations must be >= 4");
}

namespace {

IndexVector random_index(const std::vector<std::size_t>& counts, std::mt19937_64& rng) {
  IndexVector v(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    v[i] = std::uniform_int_distribution<std::size_t>(0, counts[i] - 1)(rng);
  }
  return v;
}

}  // namespace

SearchTrace random_search(Environment& env, std::uint64_t budget, std::uint64_t seed, SearchOptions options,
                          SampleObserver observer) {
  if (budget < 1) throw std::invalid_argument("random_search: budget must be >= 1");
  const auto counts = env.option_counts();
  std::mt19937_64 rng(seed);
  TraceRecorder rec(env, budget, options.wall_clock, std::move(observer));
  while (!rec.exhausted()) rec.evaluate(random_index(counts, rng));
  return rec.release();
}

SearchTrace ga_search(Environment& env, const GAConfig& cfg, std::uint64_t budget, std::uint64_t seed,
                      SearchOptions options, SampleObserver observer) {
  cfg.validate();
  if (budget < cfg.population) {
    throw std::invalid_argument("ga_search: budget " + std::to_string(budget) + " is smaller than the population " +
                                std::to_string(cfg.population));
  }
  const auto counts = env.option_counts();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, cfg.population - 1);
  TraceRecorder rec(env, budget, options.wall_clock, std::move(observer));

  struct Individual {
    IndexVector genes;
    double fitness;
  };
  std::vector<Individual> population;
  population.reserve(cfg.population);
  for (std::size_t i = 0; i < cfg.population; ++i) {
    IndexVector genes = random_index(counts, rng);
    const double fitness = rec.evaluate(genes).reward;
    population.push_back({std::move(genes), fitness});
  }

  auto tournament = [&]() -> const Individual& {
    std::size_t best = pick(rng);
    for (std::size_t t = 1; t < cfg.tournament; ++t) {
      const std::size_t challenger = pick(rng);
      const auto& b = population[best];
      const auto& c = population[challenger];
      if (c.fitness > b.fitness || (c.fitness == b.fitness && challenger < best)) best = challenger;
    }
    return population[best];
  };

  while (!rec.exhausted()) {
    std::vector<std::size_t> ranked(population.size());
    std::iota(ranked.begin(), ranked.end(), 0);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](std::size_t a, std::size_t b) { return population[a].fitness > population[b].fitness; });
    std::vector<Individual> next;
    next.reserve(cfg.population);
    for (std::size_t e = 0; e < cfg.elitism; ++e) next.push_back(population[ranked[e]]);
    while (next.size() < cfg.population && !rec.exhausted()) {
      const Individual& mother = tournament();
      const Individual& father = tournament();
      IndexVector child = mother.genes;
      if (coin(rng) < cfg.crossover_rate) {
        for (std::size_t g = 0; g < child.size(); ++g) {
          if (coin(rng) < 0.5) child[g] = father.genes[g];
        }
      }
      for (std::size_t g = 0; g < child.size(); ++g) {
        if (coin(rng) < cfg.mutation_rate) child[g] = std::uniform_int_distribution<std::size_t>(0, counts[g] - 1)(rng);
      }
      const double fitness = rec.evaluate(child).reward;
      next.push_back({std::move(child), fitness});
    }
    if (next.size() < cfg.population) break;  // budget ran out mid-generation
    population = std::move(next);
  }
  return rec.release();
}

SearchTrace bo_search(Environment& env, const BOConfig& cfg, std::uint64_t budget, std::uint64_t seed,
                      SearchOptions options, SampleObserver observer) {
  cfg.validate();
  if (budget <= cfg.initial_samples) {
    throw std::invalid_argument("bo_search: budget must exceed the " + std::to_string(cfg.initial_samples) +
                                " initial samples");
  }
  const auto counts = env.option_counts();
  const FeatureEncoder encoder(env.parameters());
  std::mt19937_64 rng(seed);
  TraceRecorder rec(env, budget, options.wall_clock, std::move(observer));

  std::vector<FeatureVector> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < cfg.initial_samples; ++i) {
    const IndexVector idx = random_index(counts, rng);
    ys.push_back(rec.evaluate(idx).reward);
    xs.push_back(encoder.encode(idx));
  }
  GaussianProcess gp(cfg.length_scale, cfg.noise);
  gp.fit(xs, ys);
  double incumbent = *std::max_element(ys.begin(), ys.end());

  std::vector<IndexVector> pool(cfg.pool_size);
  std::vector<FeatureVector> pool_features(cfg.pool_size);
  while (!rec.exhausted()) {
    for (std::size_t c = 0; c < cfg.pool_size; ++c) {
      pool[c] = random_index(counts, rng);
      pool_features[c] = encoder.encode(pool[c]);
    }
    const auto posterior = gp.predict(pool_features);
    std::size_t chosen = 0;
    double best_ei = -1.0;
    for (std::size_t c = 0; c < cfg.pool_size; ++c) {
      const double ei = expected_improvement(posterior[c], incumbent);
      if (ei > best_ei) {
        best_ei = ei;
        chosen = c;
      }
    }
    const double reward = rec.evaluate(pool[chosen]).reward;
    incumbent = std::max(incumbent, reward);

    if (gp.size() >= cfg.max_observations) {
      // Keep the newest quarter, the best point, and a uniform sample of the
      // older points, for half of the cap in total.
      const std::size_t n = gp.size();
      const std::size_t target = cfg.max_observations / 2;
      const std::size_t recent = cfg.max_observations / 4;
      const auto& targets = gp.targets();
      const std::size_t best =
          static_cast<std::size_t>(std::max_element(targets.begin(), targets.end()) - targets.begin());
      std::vector<std::size_t> older;
      for (std::size_t i = 0; i + recent < n; ++i) {
        if (i != best) older.push_back(i);
      }
      std::vector<std::size_t> keep;
      std::sample(older.begin(), older.end(), std::back_inserter(keep), target - recent - 1, rng);
      keep.push_back(best);
      for (std::size_t i = n - recent; i < n; ++i) {
        if (i != best) keep.push_back(i);
      }
      std::sort(keep.begin(), keep.end());
      gp.retain(keep);
    }
    gp.add(pool_features[chosen], reward);
  }
  return rec.release();
}

}  // namespace marlmap
