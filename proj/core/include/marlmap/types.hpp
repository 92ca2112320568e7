#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace marlmap {

// The seven loops of a stride-1 convolution. Enum order is also the
// lexicographic order used for loop-order permutations and parallel options.
enum class Dim : std::uint8_t { N = 0, K, C, R, S, P, Q };

inline constexpr std::size_t kNumDims = 7;
inline constexpr std::array<Dim, kNumDims> kAllDims = {Dim::N, Dim::K, Dim::C, Dim::R,
                                                       Dim::S, Dim::P, Dim::Q};

constexpr std::size_t index_of(Dim d) { return static_cast<std::size_t>(d); }
char dim_letter(Dim d);
std::optional<Dim> dim_from_letter(char c);

// Per-dimension integer array indexed by Dim.
struct DimArray {
  std::array<std::int64_t, kNumDims> v{};

  std::int64_t& operator[](Dim d) { return v[index_of(d)]; }
  std::int64_t operator[](Dim d) const { return v[index_of(d)]; }
  bool operator==(const DimArray&) const = default;
};

using LoopOrder = std::array<Dim, kNumDims>;

struct LayerShape {
  std::int64_t n = 1;
  std::int64_t k = 1;
  std::int64_t c = 1;
  std::int64_t r = 1;
  std::int64_t s = 1;
  std::int64_t p = 1;
  std::int64_t q = 1;

  // Input spatial extent for stride 1 and no padding.
  std::int64_t h() const { return p + r - 1; }
  std::int64_t w() const { return q + s - 1; }

  DimArray extents() const { return DimArray{{n, k, c, r, s, p, q}}; }
  std::int64_t extent(Dim d) const { return extents()[d]; }

  // Throws std::invalid_argument if any dimension is < 1.
  void validate() const;

  bool operator==(const LayerShape&) const = default;
};

struct MemoryLevel {
  std::optional<std::int64_t> capacity;  // bytes; nullopt marks unbounded storage
  double bandwidth = 1.0;                // bytes per cycle
  double access_energy = 1.0;            // pJ per byte
  double area_per_byte = 1.0;            // um^2 per byte

  bool unbounded() const { return !capacity.has_value(); }
  bool operator==(const MemoryLevel&) const = default;
};

struct AcceleratorConfig {
  std::int64_t num_pes = 1;
  double mac_energy = 1.0;  // pJ per MAC
  double pe_area = 1.0;     // um^2 per PE
  double cycle_time = 1.0;  // ns per cycle
  std::int64_t element_bytes = 1;
  std::vector<MemoryLevel> levels;  // outermost (DRAM) first

  // Number of levels that hold a tile chosen by the mapping.
  std::size_t tiled_levels() const { return levels.empty() ? 0 : levels.size() - 1; }

  // Throws std::invalid_argument on a config that breaks the 1..3 level rule,
  // has a bounded DRAM, an unbounded inner level, or a non-positive field.
  void validate() const;

  bool operator==(const AcceleratorConfig&) const = default;
};

class MalformedMappingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SpaceTooLargeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace marlmap
