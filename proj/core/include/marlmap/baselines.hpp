#pragma once

#include <cstddef>
#include <cstdint>

#include "marlmap/environment.hpp"
#include "marlmap/trace.hpp"

namespace marlmap {

struct SearchOptions {
  bool wall_clock = false;  // fill TraceRow::elapsed_ns
};

struct GAConfig {
  std::size_t population = 50;
  std::size_t tournament = 3;
  double crossover_rate = 0.9;
  double mutation_rate = 0.1;
  std::size_t elitism = 2;

  void validate() const;
};

struct BOConfig {
  std::size_t initial_samples = 20;
  std::size_t pool_size = 128;
  double length_scale = 0.5;
  double noise = 1e-6;
  std::size_t max_observations = 2000;

  void validate() const;
};

// Uniform samples over the index space.
SearchTrace random_search(Environment& env, std::uint64_t budget, std::uint64_t seed, SearchOptions options = {},
                          SampleObserver observer = {});

// Generational GA on index vectors: tournament selection, uniform crossover,
// per-parameter resampling mutation, elitism. Elites carry their fitness and
// are not re-evaluated, so evaluations == budget exactly.
SearchTrace ga_search(Environment& env, const GAConfig& cfg, std::uint64_t budget, std::uint64_t seed,
                      SearchOptions options = {}, SampleObserver observer = {});

// Pool-based expected-improvement BO with an exact GP over encoded index
// vectors. Once max_observations is reached the older half is subsampled.
SearchTrace bo_search(Environment& env, const BOConfig& cfg, std::uint64_t budget, std::uint64_t seed,
                      SearchOptions options = {}, SampleObserver observer = {});

}  // namespace marlmap
