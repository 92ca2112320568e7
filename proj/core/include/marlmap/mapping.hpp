#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "marlmap/types.hpp"

namespace marlmap {

// Choices for one tiled memory level: the tile held at this level, the loop
// order (outermost first) that walks the parent tile in steps of this tile,
// and the loop spread across the PE array.
struct LevelMapping {
  DimArray tile{{1, 1, 1, 1, 1, 1, 1}};
  LoopOrder order = kAllDims;
  Dim parallel = Dim::N;

  bool operator==(const LevelMapping&) const = default;
};

// levels[i] is the tile stored in accelerator level i + 1.
struct Mapping {
  std::vector<LevelMapping> levels;

  bool operator==(const Mapping&) const = default;
};

// "KCRSPQN"-style string, outermost loop first.
std::string order_to_string(const LoopOrder& order);

// Throws MalformedMappingError unless `text` names every dim exactly once.
LoopOrder order_from_string(std::string_view text);

bool is_permutation(const LoopOrder& order);

// Structural check against a layer and accelerator: level count, tile >= 1,
// tile divides the parent tile, order is a permutation. Throws
// MalformedMappingError naming the offending field.
void check_structure(const Mapping& mapping, const LayerShape& layer, const AcceleratorConfig& accel);

}  // namespace marlmap
