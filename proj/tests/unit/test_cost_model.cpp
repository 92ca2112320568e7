#include <algorithm>
#include <numeric>
#include <random>

#include <catch_amalgamated.hpp>

#include "marlmap/cost_model.hpp"
#include "marlmap/mapping.hpp"
#include "marlmap/mapspace.hpp"
#include "marlmap/presets.hpp"
#include "oracles.hpp"

using namespace marlmap;
using Catch::Approx;

namespace {

LevelMapping full_tile(const LayerShape& l, Dim parallel) {
  LevelMapping lvl;
  lvl.tile = l.extents();
  lvl.order = kAllDims;
  lvl.parallel = parallel;
  return lvl;
}

AcceleratorConfig three_level() {
  AcceleratorConfig a;
  a.num_pes = 8;
  a.mac_energy = 0.5;
  a.pe_area = 10.0;
  a.levels = {MemoryLevel{std::nullopt, 4.0, 50.0, 0.001}, MemoryLevel{1 << 16, 16.0, 4.0, 0.1},
              MemoryLevel{1 << 12, 64.0, 1.0, 0.5}};
  return a;
}

Mapping random_mapping(const LayerShape& layer, std::size_t levels, std::mt19937_64& rng) {
  Mapping m;
  DimArray parent = layer.extents();
  auto orders = all_loop_orders();
  for (std::size_t i = 0; i < levels; ++i) {
    LevelMapping lvl;
    for (Dim d : kAllDims) {
      const auto divs = divisors(parent[d]);
      lvl.tile[d] = divs[std::uniform_int_distribution<std::size_t>(0, divs.size() - 1)(rng)];
    }
    lvl.order = orders[std::uniform_int_distribution<std::size_t>(0, orders.size() - 1)(rng)];
    lvl.parallel = kAllDims[std::uniform_int_distribution<std::size_t>(0, 6)(rng)];
    parent = lvl.tile;
    m.levels.push_back(lvl);
  }
  return m;
}

}  // namespace

TEST_CASE("count_macs multiplies all seven extents", "[cost]") {
  CHECK(count_macs(LayerShape{1, 1, 1, 1, 1, 1, 1}) == 1);
  CHECK(count_macs(LayerShape{1, 2, 2, 1, 1, 2, 2}) == 16);
  CHECK(count_macs(layer_preset("resnet18_l2")) == 115'605'504ULL);
  const LayerShape huge{1 << 20, 1 << 20, 1 << 20, 1, 1, 1 << 10, 1};
  CHECK_THROWS_AS(count_macs(huge), std::overflow_error);
}

TEST_CASE("golden tiny layer on a compute-bound accelerator", "[cost]") {
  const LayerShape tiny = layer_preset("tiny");
  const AcceleratorConfig golden = accelerator_preset("golden");
  const Mapping m{{full_tile(tiny, Dim::K)}};
  const CostReport r = evaluate(tiny, golden, m);
  REQUIRE(r.valid);
  CHECK(r.macs == 16);
  CHECK(r.pes_used == 2);
  CHECK(r.compute_cycles == 8.0);
  CHECK(r.latency == 8.0);
  // One load per tensor: weights 4, inputs 8, outputs 8 bytes at 10 pJ/byte.
  CHECK(r.per_level_traffic[0].weights == 4.0);
  CHECK(r.per_level_traffic[0].inputs == 8.0);
  CHECK(r.per_level_traffic[0].outputs == 8.0);
  CHECK(r.energy == 16.0 + 20.0 * 10.0);
  CHECK(r.area == 2 * 100.0 + 20 * 0.5);
  CHECK(r.edp == r.energy * r.latency);
  CHECK(r.power == r.energy / r.latency);
}

TEST_CASE("over-capacity tiles produce an invalid report", "[cost]") {
  const LayerShape micro = layer_preset("micro");
  const AcceleratorConfig accel = accelerator_preset("micro");
  const Mapping m{{full_tile(micro, Dim::K)}};  // 2 + 1 + 2 = 5 bytes > 4
  const CostReport r = evaluate(micro, accel, m);
  CHECK_FALSE(r.valid);
  CHECK(r.latency == 0.0);
  CHECK(r.energy == 0.0);
  CHECK(r.edp == 0.0);
}

TEST_CASE("structural mistakes throw instead of returning invalid", "[cost]") {
  const LayerShape tiny = layer_preset("tiny");
  const AcceleratorConfig golden = accelerator_preset("golden");
  SECTION("wrong level count") {
    CHECK_THROWS_AS(evaluate(tiny, golden, Mapping{}), MalformedMappingError);
  }
  SECTION("tile that does not divide its parent") {
    Mapping m{{full_tile(tiny, Dim::K)}};
    m.levels[0].tile[Dim::K] = 3;
    CHECK_THROWS_AS(evaluate(tiny, golden, m), MalformedMappingError);
  }
  SECTION("order that is not a permutation") {
    Mapping m{{full_tile(tiny, Dim::K)}};
    m.levels[0].order[0] = Dim::Q;
    CHECK_THROWS_AS(evaluate(tiny, golden, m), MalformedMappingError);
  }
  SECTION("order strings") {
    CHECK(order_to_string(order_from_string("QPSRCKN")) == "QPSRCKN");
    CHECK_THROWS_AS(order_from_string("NKCRSP"), MalformedMappingError);
    CHECK_THROWS_AS(order_from_string("NKCRSPX"), MalformedMappingError);
  }
}

TEST_CASE("traffic matches a loop-nest simulation", "[cost][oracle]") {
  std::mt19937_64 rng(7);
  const LayerShape layer{2, 4, 2, 3, 1, 4, 2};
  SECTION("one tiled level") {
    AcceleratorConfig accel = accelerator_preset("golden");
    for (int trial = 0; trial < 300; ++trial) {
      const Mapping m = random_mapping(layer, 1, rng);
      const CostReport r = evaluate(layer, accel, m);
      REQUIRE(r.valid);
      const auto sim = oracle::simulate_traffic(layer, m);
      CHECK(r.per_level_traffic[0].weights == sim[0][0]);
      CHECK(r.per_level_traffic[0].inputs == sim[0][1]);
      CHECK(r.per_level_traffic[0].outputs == sim[0][2]);
    }
  }
  SECTION("two tiled levels") {
    const AcceleratorConfig accel = three_level();
    for (int trial = 0; trial < 150; ++trial) {
      const Mapping m = random_mapping(layer, 2, rng);
      const CostReport r = evaluate(layer, accel, m);
      REQUIRE(r.valid);
      const auto sim = oracle::simulate_traffic(layer, m);
      for (std::size_t lvl = 0; lvl < 2; ++lvl) {
        CHECK(r.per_level_traffic[lvl].weights == sim[lvl][0]);
        CHECK(r.per_level_traffic[lvl].inputs == sim[lvl][1]);
        CHECK(r.per_level_traffic[lvl].outputs == sim[lvl][2]);
      }
      CHECK(r.per_level_traffic[2].total() == 0.0);
    }
  }
}

TEST_CASE("cost model invariants on random mappings", "[cost][property]") {
  std::mt19937_64 rng(11);
  const LayerShape layer = layer_preset("resnet18_l2");
  const AcceleratorConfig accel = accelerator_preset("default");
  int valid_seen = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const Mapping m = random_mapping(layer, 1, rng);
    const CostReport r = evaluate(layer, accel, m);
    CHECK(r == evaluate(layer, accel, m));
    if (!r.valid) continue;
    ++valid_seen;
    CHECK(r.latency > 0.0);
    CHECK(r.energy > 0.0);
    CHECK(r.edp == r.energy * r.latency);

    // Each datum enters at least once.
    for (Tensor t : kAllTensors) {
      CHECK(r.per_level_traffic[0][t] >= static_cast<double>(footprint_elements(t, layer.extents())));
    }

    // Shrinking one tile dimension keeps the mapping valid.
    for (Dim d : kAllDims) {
      Mapping smaller = m;
      smaller.levels[0].tile[d] = 1;
      CHECK(evaluate(layer, accel, smaller).valid);
    }

    AcceleratorConfig faster = accel;
    for (auto& lvl : faster.levels) lvl.bandwidth *= 2.0;
    CHECK(evaluate(layer, faster, m).latency <= r.latency);

    if (m.levels[0].tile[m.levels[0].parallel] >= accel.num_pes) {
      AcceleratorConfig wider = accel;
      wider.num_pes *= 2;
      CHECK(evaluate(layer, wider, m).latency <= r.latency);
    }
  }
  CHECK(valid_seen > 100);
}

TEST_CASE("parallelism counts each distinct dim once", "[cost]") {
  const LayerShape layer{1, 8, 4, 1, 1, 4, 4};
  const AcceleratorConfig accel = three_level();
  Mapping m;
  LevelMapping outer = full_tile(layer, Dim::K);
  LevelMapping inner = outer;
  inner.tile[Dim::K] = 4;
  inner.tile[Dim::P] = 2;
  inner.parallel = Dim::K;
  m.levels = {outer, inner};
  CHECK(evaluate(layer, accel, m).pes_used == 4);
  m.levels[0].parallel = Dim::P;
  CHECK(evaluate(layer, accel, m).pes_used == 8);  // K tile 4 times P tile 2
  m.levels[1].parallel = Dim::C;
  CHECK(evaluate(layer, accel, m).pes_used == 8);  // C tile 4 times P tile 2
}

TEST_CASE("accelerator and layer validation", "[cost]") {
  CHECK_THROWS_AS(LayerShape({1, 0, 1, 1, 1, 1, 1}).validate(), std::invalid_argument);
  AcceleratorConfig a = accelerator_preset("default");
  a.levels[0].capacity = 1024;
  CHECK_THROWS_AS(a.validate(), std::invalid_argument);
  a = accelerator_preset("default");
  a.levels[1].capacity.reset();
  CHECK_THROWS_AS(a.validate(), std::invalid_argument);
  a = accelerator_preset("default");
  a.levels.clear();
  CHECK_THROWS_AS(a.validate(), std::invalid_argument);
  a = three_level();
  a.levels.push_back(a.levels.back());
  CHECK_THROWS_AS(a.validate(), std::invalid_argument);
  a = accelerator_preset("default");
  a.levels[1].bandwidth = 0.0;
  CHECK_THROWS_AS(a.validate(), std::invalid_argument);
}
