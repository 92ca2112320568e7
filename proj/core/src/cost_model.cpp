#include "marlmap/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace marlmap {

bool indexes(Tensor t, Dim d) {
  switch (t) {
    case Tensor::Weights:
      return d == Dim::K || d == Dim::C || d == Dim::R || d == Dim::S;
    case Tensor::Inputs:
      return d != Dim::K;
    case Tensor::Outputs:
      return d == Dim::N || d == Dim::K || d == Dim::P || d == Dim::Q;
  }
  return false;
}

std::int64_t footprint_elements(Tensor t, const DimArray& tile) {
  switch (t) {
    case Tensor::Weights:
      return tile[Dim::K] * tile[Dim::C] * tile[Dim::R] * tile[Dim::S];
    case Tensor::Inputs:
      return tile[Dim::N] * tile[Dim::C] * (tile[Dim::P] + tile[Dim::R] - 1) *
             (tile[Dim::Q] + tile[Dim::S] - 1);
    case Tensor::Outputs:
      return tile[Dim::N] * tile[Dim::K] * tile[Dim::P] * tile[Dim::Q];
  }
  return 0;
}

double& TensorTraffic::operator[](Tensor t) {
  switch (t) {
    case Tensor::Weights:
      return weights;
    case Tensor::Inputs:
      return inputs;
    case Tensor::Outputs:
      break;
  }
  return outputs;
}

double TensorTraffic::operator[](Tensor t) const { return const_cast<TensorTraffic&>(*this)[t]; }

std::uint64_t count_macs(const LayerShape& layer) {
  layer.validate();
  std::uint64_t product = 1;
  for (Dim d : kAllDims) {
    const auto e = static_cast<std::uint64_t>(layer.extent(d));
    if (__builtin_mul_overflow(product, e, &product)) {
      throw std::overflow_error("count_macs: MAC count overflows 64 bits");
    }
  }
  return product;
}

namespace {

// Number of times a tile of `t` is (re)loaded while one pass of this level's
// loop nest walks the parent tile. Loops with a single trip are ignored.
double fetch_count(Tensor t, const LoopOrder& order, const DimArray& trips) {
  std::size_t innermost = kNumDims;
  for (std::size_t pos = 0; pos < kNumDims; ++pos) {
    const Dim d = order[pos];
    if (indexes(t, d) && trips[d] > 1) innermost = pos;
  }
  if (innermost == kNumDims) return 1.0;
  double fetches = 1.0;
  for (std::size_t pos = 0; pos <= innermost; ++pos) {
    fetches *= static_cast<double>(trips[order[pos]]);
  }
  return fetches;
}

}  // namespace

CostReport evaluate(const LayerShape& layer, const AcceleratorConfig& accel, const Mapping& mapping) {
  layer.validate();
  accel.validate();
  check_structure(mapping, layer, accel);

  const std::size_t tiled = accel.tiled_levels();
  const auto bytes = static_cast<double>(accel.element_bytes);

  for (std::size_t i = 0; i < tiled; ++i) {
    std::int64_t held = 0;
    for (Tensor t : kAllTensors) held += footprint_elements(t, mapping.levels[i].tile);
    const auto capacity = *accel.levels[i + 1].capacity;
    if (static_cast<double>(held) * bytes > static_cast<double>(capacity)) {
      CostReport invalid;
      invalid.per_level_traffic.assign(accel.levels.size(), TensorTraffic{});
      return invalid;
    }
  }

  CostReport report;
  report.valid = true;
  report.macs = count_macs(layer);
  report.per_level_traffic.assign(accel.levels.size(), TensorTraffic{});

  DimArray parent = layer.extents();
  double outer_iterations = 1.0;
  for (std::size_t i = 0; i < tiled; ++i) {
    const auto& lvl = mapping.levels[i];
    DimArray trips;
    double level_iterations = 1.0;
    for (Dim d : kAllDims) {
      trips[d] = parent[d] / lvl.tile[d];
      level_iterations *= static_cast<double>(trips[d]);
    }
    for (Tensor t : kAllTensors) {
      const double tile_bytes = static_cast<double>(footprint_elements(t, lvl.tile)) * bytes;
      report.per_level_traffic[i][t] = outer_iterations * fetch_count(t, lvl.order, trips) * tile_bytes;
    }
    outer_iterations *= level_iterations;
    parent = lvl.tile;
  }

  // Spatial unrolling: each distinct parallel dim spreads its innermost tile
  // across the PE array.
  std::int64_t spread = 1;
  if (tiled > 0) {
    const DimArray& innermost = mapping.levels.back().tile;
    std::array<bool, kNumDims> counted{};
    for (const auto& lvl : mapping.levels) {
      const auto idx = index_of(lvl.parallel);
      if (counted[idx]) continue;
      counted[idx] = true;
      spread *= innermost[lvl.parallel];
    }
  }
  report.pes_used = std::min(accel.num_pes, spread);
  const auto pes = static_cast<std::uint64_t>(report.pes_used);
  report.compute_cycles = static_cast<double>((report.macs + pes - 1) / pes);

  double latency = report.compute_cycles;
  double energy = static_cast<double>(report.macs) * accel.mac_energy;
  for (std::size_t i = 0; i < accel.levels.size(); ++i) {
    const double moved = report.per_level_traffic[i].total();
    latency = std::max(latency, std::ceil(moved / accel.levels[i].bandwidth));
    energy += moved * accel.levels[i].access_energy;
  }

  double area = static_cast<double>(report.pes_used) * accel.pe_area;
  for (std::size_t i = 0; i < tiled; ++i) {
    double held = 0.0;
    for (Tensor t : kAllTensors) held += static_cast<double>(footprint_elements(t, mapping.levels[i].tile));
    area += held * bytes * accel.levels[i + 1].area_per_byte;
  }

  report.latency = latency;
  report.energy = energy;
  report.area = area;
  report.edp = energy * latency;
  report.power = energy / (latency * accel.cycle_time);
  return report;
}

}  // namespace marlmap
