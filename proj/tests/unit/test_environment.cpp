#include <random>
#include <sstream>

#include <catch_amalgamated.hpp>

#include "marlmap/environment.hpp"
#include "marlmap/presets.hpp"
#include "marlmap/trace.hpp"
#include "oracles.hpp"

using namespace marlmap;

TEST_CASE("objective names round-trip", "[env]") {
  for (Objective o : {Objective::Latency, Objective::Edp, Objective::Area}) {
    CHECK(objective_from_string(to_string(o)) == o);
  }
  CHECK_THROWS_AS(objective_from_string("power"), std::invalid_argument);
}

TEST_CASE("reward is the inverse of the objective", "[env]") {
  auto space = std::make_shared<const MapSpace>(layer_preset("resnet18_l2"), accelerator_preset("default"));
  std::mt19937_64 rng(1);
  for (Objective o : {Objective::Latency, Objective::Edp, Objective::Area}) {
    MappingEnvironment env(space, o);
    int valid = 0;
    for (int i = 0; i < 300; ++i) {
      const auto idx = oracle::random_index(space->option_counts(), rng);
      const StepResult r = env.step(idx);
      CHECK(r.done);
      if (!r.valid) {
        CHECK(r.reward == 0.0);
        continue;
      }
      ++valid;
      double x = r.report.latency;
      if (o == Objective::Edp) x = r.report.latency * r.report.energy;
      if (o == Objective::Area) x = r.report.area;
      CHECK(std::abs(r.reward * x - 1.0) <= 1e-12);
      CHECK(r.observation.latency == r.report.latency);
      CHECK(r.observation.energy == r.report.energy);
      CHECK(r.observation.power == r.report.power);
      CHECK(r.observation.area == r.report.area);
    }
    CHECK(valid > 50);
  }
}

TEST_CASE("reset evaluates the all-zero mapping", "[env]") {
  MappingEnvironment env(layer_preset("tiny"), accelerator_preset("golden"), Objective::Latency);
  const Observation obs = env.reset();
  const StepResult zero = env.step(IndexVector(env.parameters().size(), 0));
  CHECK(obs == zero.observation);
  CHECK_THROWS_AS(env.step(IndexVector(2, 0)), std::out_of_range);
}

TEST_CASE("invalid mappings earn zero reward", "[env]") {
  MappingEnvironment env(layer_preset("micro"), accelerator_preset("micro"), Objective::Edp);
  // L1.k = 2 puts 5 bytes into a 4-byte buffer.
  IndexVector idx(env.parameters().size(), 0);
  idx[0] = 1;
  const StepResult r = env.step(idx);
  CHECK_FALSE(r.valid);
  CHECK(r.reward == 0.0);
  CHECK(r.observation == Observation{});
}

TEST_CASE("synthetic environments", "[env]") {
  FunctionEnvironment sep = make_separable_environment({{0.5, 1.0}, {0.2, 0.4, 0.8}});
  CHECK(sep.option_counts() == std::vector<std::size_t>{2, 3});
  CHECK(sep.step(IndexVector{1, 2}).reward == 0.8);
  CHECK(sep.step(IndexVector{0, 0}).reward == 0.1);
  FunctionEnvironment match = make_matching_environment(3);
  CHECK(match.step(IndexVector{2, 2}).reward == 1.0);
  CHECK(match.step(IndexVector{2, 1}).reward == 0.0);
  FunctionEnvironment x = make_xor_environment();
  CHECK(x.step(IndexVector{0, 1}).reward == 1.0);
  CHECK(x.step(IndexVector{1, 1}).reward == 0.0);
}

TEST_CASE("trace recorder counts every evaluation", "[trace]") {
  FunctionEnvironment env = make_separable_environment({{1.0, 3.0, 2.0}});
  TraceRecorder rec(env, 3);
  rec.evaluate(IndexVector{0});
  rec.evaluate(IndexVector{1});
  CHECK(rec.remaining() == 1);
  rec.evaluate(IndexVector{2});
  CHECK(rec.exhausted());
  const SearchTrace t = rec.release();
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0].step == 1);
  CHECK(t.rows[2].best_reward == 3.0);
  CHECK(t.best_step == 2);
  CHECK(t.best_index == IndexVector{1});
  CHECK(t.rows[2].elapsed_ns == 0);
}

TEST_CASE("trace CSV round-trips", "[trace]") {
  SearchTrace t;
  for (std::uint64_t i = 1; i <= 5; ++i) {
    t.rows.push_back({i, 1.0 / static_cast<double>(i + 2), 0.1 * static_cast<double>(i), 0});
  }
  std::ostringstream out;
  write_trace_csv(out, t);
  CHECK(out.str().rfind("step,reward,best_reward,elapsed_ns\n", 0) == 0);
  std::istringstream in(out.str());
  const SearchTrace back = read_trace_csv(in);
  REQUIRE(back.rows.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(back.rows[i].reward == t.rows[i].reward);
    CHECK(back.rows[i].best_reward == t.rows[i].best_reward);
  }
  std::istringstream bad("step,reward\n1,2\n");
  CHECK_THROWS(read_trace_csv(bad));
}

TEST_CASE("steps to within epsilon of the final best", "[trace]") {
  SearchTrace t;
  for (std::uint64_t i = 1; i <= 100; ++i) {
    t.rows.push_back({i, static_cast<double>(i), static_cast<double>(i), 0});
  }
  CHECK(steps_to_within(t, 0.05) == 95);
  CHECK(steps_to_within(t, 0.0) == 100);
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(3.0) == "3");
}
