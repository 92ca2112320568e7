#include "marlmap/mapping.hpp"

#include <bitset>

namespace marlmap {

std::string order_to_string(const LoopOrder& order) {
  std::string out;
  out.reserve(kNumDims);
  for (Dim d : order) out.push_back(dim_letter(d));
  return out;
}

bool is_permutation(const LoopOrder& order) {
  std::bitset<kNumDims> seen;
  for (Dim d : order) {
    const auto i = index_of(d);
    if (i >= kNumDims || seen.test(i)) return false;
    seen.set(i);
  }
  return seen.all();
}

LoopOrder order_from_string(std::string_view text) {
  if (text.size() != kNumDims) {
    throw MalformedMappingError("order: expected a permutation of the 7 letters NKCRSPQ, got \"" +
                                std::string(text) + "\"");
  }
  LoopOrder order{};
  for (std::size_t i = 0; i < kNumDims; ++i) {
    auto d = dim_from_letter(text[i]);
    if (!d) {
      throw MalformedMappingError("order: unknown loop letter '" + std::string(1, text[i]) +
                                  "' in \"" + std::string(text) + "\"");
    }
    order[i] = *d;
  }
  if (!is_permutation(order)) {
    throw MalformedMappingError("order: \"" + std::string(text) +
                                "\" repeats a loop; every dim must appear exactly once");
  }
  return order;
}

void check_structure(const Mapping& mapping, const LayerShape& layer, const AcceleratorConfig& accel) {
  if (mapping.levels.size() != accel.tiled_levels()) {
    throw MalformedMappingError("levels: mapping has " + std::to_string(mapping.levels.size()) +
                                " tiled levels but the accelerator needs " +
                                std::to_string(accel.tiled_levels()));
  }
  DimArray parent = layer.extents();
  for (std::size_t i = 0; i < mapping.levels.size(); ++i) {
    const auto& lvl = mapping.levels[i];
    const std::string where = "levels[" + std::to_string(i) + "]";
    if (!is_permutation(lvl.order)) {
      throw MalformedMappingError(where + ".order is not a permutation of the 7 dims");
    }
    if (index_of(lvl.parallel) >= kNumDims) {
      throw MalformedMappingError(where + ".parallel is not a loop dim");
    }
    for (Dim d : kAllDims) {
      const auto t = lvl.tile[d];
      if (t < 1 || parent[d] % t != 0) {
        throw MalformedMappingError(where + ".tiles." + std::string(1, static_cast<char>(dim_letter(d) - 'A' + 'a')) +
                                    " = " + std::to_string(t) + " does not divide the enclosing extent " +
                                    std::to_string(parent[d]));
      }
    }
    parent = lvl.tile;
  }
}

}  // namespace marlmap
