#include "marlmap/types.hpp"

#include <cmath>
#include <string>

namespace marlmap {

namespace {
constexpr std::string_view kLetters = "NKCRSPQ";
}

char dim_letter(Dim d) { return kLetters[index_of(d)]; }

std::optional<Dim> dim_from_letter(char c) {
  const char upper = (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
  const auto pos = kLetters.find(upper);
  if (pos == std::string_view::npos) return std::nullopt;
  return static_cast<Dim>(pos);
}

void LayerShape::validate() const {
  const auto e = extents();
  for (Dim d : kAllDims) {
    if (e[d] < 1) {
      throw std::invalid_argument(std::string("layer dimension '") +
                                  static_cast<char>(dim_letter(d) - 'A' + 'a') +
                                  "' must be >= 1, got " + std::to_string(e[d]));
    }
  }
}

void AcceleratorConfig::validate() const {
  if (levels.empty() || levels.size() > 3) {
    throw std::invalid_argument("accelerator must have between 1 and 3 memory levels, got " +
                                std::to_string(levels.size()));
  }
  if (num_pes < 1) throw std::invalid_argument("num_pes must be >= 1");
  if (element_bytes < 1) throw std::invalid_argument("element_bytes must be >= 1");
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!positive(mac_energy)) throw std::invalid_argument("mac_energy must be > 0");
  if (!positive(pe_area)) throw std::invalid_argument("pe_area must be > 0");
  if (!positive(cycle_time)) throw std::invalid_argument("cycle_time must be > 0");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& lvl = levels[i];
    const std::string where = "levels[" + std::to_string(i) + "]";
    if (i == 0 && !lvl.unbounded()) {
      throw std::invalid_argument(where + ".capacity: the outermost level must be unbounded (\"inf\")");
    }
    if (i > 0) {
      if (lvl.unbounded()) {
        throw std::invalid_argument(where + ".capacity: \"inf\" is only allowed at level 0");
      }
      if (*lvl.capacity <= 0) throw std::invalid_argument(where + ".capacity must be > 0");
    }
    if (!positive(lvl.bandwidth)) throw std::invalid_argument(where + ".bandwidth must be > 0");
    if (!positive(lvl.access_energy)) {
      throw std::invalid_argument(where + ".access_energy must be > 0");
    }
    if (!positive(lvl.area_per_byte)) {
      throw std::invalid_argument(where + ".area_per_byte must be > 0");
    }
  }
}

}  // namespace marlmap
