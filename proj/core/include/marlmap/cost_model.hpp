#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "marlmap/mapping.hpp"
#include "marlmap/types.hpp"

namespace marlmap {

enum class Tensor : std::uint8_t { Weights = 0, Inputs, Outputs };
inline constexpr std::array<Tensor, 3> kAllTensors = {Tensor::Weights, Tensor::Inputs, Tensor::Outputs};

// Whether loop `d` indexes tensor `t`. Inputs are indexed by N, C and the
// four spatial loops (H = P + R - 1, W = Q + S - 1).
bool indexes(Tensor t, Dim d);

// Elements in a tensor tile whose loop extents are `tile`.
std::int64_t footprint_elements(Tensor t, const DimArray& tile);

struct TensorTraffic {
  double weights = 0.0;
  double inputs = 0.0;
  double outputs = 0.0;

  double total() const { return weights + inputs + outputs; }
  double& operator[](Tensor t);
  double operator[](Tensor t) const;

  bool operator==(const TensorTraffic&) const = default;
};

struct CostReport {
  double latency = 0.0;  // cycles
  double energy = 0.0;   // pJ
  double power = 0.0;    // pJ/ns
  double area = 0.0;     // um^2 exercised by the mapping
  double edp = 0.0;      // pJ * cycles
  bool valid = false;

  // Bytes read out of accelerator level i toward the PEs.
  std::vector<TensorTraffic> per_level_traffic;

  std::uint64_t macs = 0;
  std::int64_t pes_used = 0;
  double compute_cycles = 0.0;

  bool operator==(const CostReport&) const = default;
};

// n*k*c*r*s*p*q. Throws std::overflow_error if the product does not fit.
std::uint64_t count_macs(const LayerShape& layer);

// Pure analytical model. Throws MalformedMappingError on structural mismatch;
// capacity violations produce a report with valid == false and zeroed metrics.
CostReport evaluate(const LayerShape& layer, const AcceleratorConfig& accel, const Mapping& mapping);

}  // namespace marlmap
