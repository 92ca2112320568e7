#include <random>

#include <benchmark/benchmark.h>

#include "marlmap/agents.hpp"
#include "marlmap/clustering.hpp"
#include "marlmap/cost_model.hpp"
#include "marlmap/gaussian_process.hpp"
#include "marlmap/presets.hpp"

using namespace marlmap;

namespace {

IndexVector random_index(const std::vector<std::size_t>& counts, std::mt19937_64& rng) {
  IndexVector idx;
  for (auto c : counts) idx.push_back(std::uniform_int_distribution<std::size_t>(0, c - 1)(rng));
  return idx;
}

void BM_Decode(benchmark::State& state) {
  const MapSpace space(layer_preset("resnet18_l2"), accelerator_preset("default"));
  std::mt19937_64 rng(1);
  const IndexVector idx = random_index(space.option_counts(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(space.decode(idx));
}
BENCHMARK(BM_Decode);

void BM_Evaluate(benchmark::State& state) {
  const MapSpace space(layer_preset("resnet18_l2"), accelerator_preset("default"));
  std::mt19937_64 rng(2);
  std::vector<Mapping> mappings;
  for (int i = 0; i < 256; ++i) mappings.push_back(space.decode(random_index(space.option_counts(), rng)));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate(space.layer(), space.accelerator(), mappings[i++ & 255]));
  }
}
BENCHMARK(BM_Evaluate);

void BM_SampleJoint(benchmark::State& state) {
  const MapSpace space(layer_preset("resnet18_l2"), accelerator_preset("default"));
  const bool joint = state.range(0) == 1;
  const AgentTeam team = make_team(space.parameters(), joint ? single_cluster(space.parameters())
                                                              : one_agent_per_parameter(space.parameters()));
  std::mt19937_64 rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(team.sample_joint(rng));
}
BENCHMARK(BM_SampleJoint)->Arg(0)->Arg(1);

void BM_TeamUpdate(benchmark::State& state) {
  const MapSpace space(layer_preset("resnet18_l2"), accelerator_preset("default"));
  AgentTeam team = make_team(space.parameters(), one_agent_per_parameter(space.parameters()));
  std::mt19937_64 rng(4);
  const IndexVector idx = team.sample_joint(rng);
  double reward = 1.0;
  for (auto _ : state) {
    team.update(idx, reward);
    reward = reward > 1.5 ? 1.0 : reward + 0.01;
  }
}
BENCHMARK(BM_TeamUpdate);

void BM_Correlation(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  Dataset d;
  for (int c = 0; c < 16; ++c) d.names.push_back("x" + std::to_string(c));
  d.integer_valued.assign(16, true);
  std::vector<double> row(16);
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    for (auto& v : row) v = g(rng);
    d.add_row(row, 1.0);
  }
  for (auto _ : state) benchmark::DoNotOptimize(correlation(d));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Correlation)->Arg(3000)->Arg(20000);

void BM_GpPredictPool(benchmark::State& state) {
  const MapSpace space(layer_preset("resnet18_l2"), accelerator_preset("default"));
  const FeatureEncoder enc(space.parameters());
  std::mt19937_64 rng(6);
  GaussianProcess gp(0.5, 1e-6);
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    gp.add(enc.encode(random_index(space.option_counts(), rng)), std::normal_distribution<double>()(rng));
  }
  std::vector<FeatureVector> pool;
  for (int i = 0; i < 64; ++i) pool.push_back(enc.encode(random_index(space.option_counts(), rng)));
  for (auto _ : state) benchmark::DoNotOptimize(gp.predict(pool));
}
BENCHMARK(BM_GpPredictPool)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
