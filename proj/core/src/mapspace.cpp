#include "marlmap/mapspace.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace marlmap {

double ParameterSpec::numeric(std::size_t option) const {
  if (kind == ParameterKind::Integer) return static_cast<double>(values.at(option));
  if (option >= labels.size()) throw std::out_of_range("option index out of range for " + name);
  return static_cast<double>(option);
}

std::string ParameterSpec::label(std::size_t option) const {
  if (kind == ParameterKind::Integer) return std::to_string(values.at(option));
  return labels.at(option);
}

namespace {

BigInt factorial(std::uint64_t x) {
  BigInt out = 1;
  for (std::uint64_t i = 2; i <= x; ++i) out *= i;
  return out;
}

constexpr std::array<Dim, kNumDims> kTileParameterOrder = {Dim::K, Dim::C, Dim::R, Dim::S,
                                                           Dim::P, Dim::Q, Dim::N};

std::string level_prefix(std::size_t level) { return "L" + std::to_string(level + 1) + "."; }

}  // namespace

BigInt complexity(const SearchSpaceSpec& spec) {
  if (spec.n == 0 || spec.d == 0 || spec.k == 0 || spec.l == 0) {
    throw std::invalid_argument("complexity: n, d, k, l must all be >= 1");
  }
  if (spec.k > spec.d) throw std::invalid_argument("complexity: k must not exceed d");
  BigInt tiling = boost::multiprecision::pow(BigInt(spec.n), static_cast<unsigned>(spec.d));
  BigInt orders = factorial(spec.d);
  BigInt parallel = orders / factorial(spec.d - spec.k);
  BigInt per_level = tiling * orders * parallel;
  return boost::multiprecision::pow(per_level, static_cast<unsigned>(spec.l));
}

BigInt loop_order_count(std::uint64_t d, std::uint64_t l) {
  if (d == 0 || l == 0) throw std::invalid_argument("loop_order_count: d and l must be >= 1");
  return boost::multiprecision::pow(factorial(d), static_cast<unsigned>(l));
}

const std::vector<LoopOrder>& all_loop_orders() {
  static const std::vector<LoopOrder> orders = [] {
    std::vector<LoopOrder> out;
    LoopOrder current = kAllDims;
    do {
      out.push_back(current);
    } while (std::next_permutation(current.begin(), current.end()));
    return out;
  }();
  return orders;
}

std::size_t loop_order_rank(const LoopOrder& order) {
  if (!is_permutation(order)) throw MalformedMappingError("order is not a permutation of the 7 dims");
  // Lehmer code.
  std::size_t rank = 0;
  for (std::size_t i = 0; i < kNumDims; ++i) {
    std::size_t smaller_after = 0;
    for (std::size_t j = i + 1; j < kNumDims; ++j) {
      if (order[j] < order[i]) ++smaller_after;
    }
    std::size_t fact = 1;
    for (std::size_t f = 2; f < kNumDims - i; ++f) fact *= f;
    rank += smaller_after * fact;
  }
  return rank;
}

std::vector<std::int64_t> divisors(std::int64_t x) {
  if (x < 1) throw std::invalid_argument("divisors: argument must be >= 1");
  std::vector<std::int64_t> small, large;
  for (std::int64_t i = 1; i * i <= x; ++i) {
    if (x % i == 0) {
      small.push_back(i);
      if (i != x / i) large.push_back(x / i);
    }
  }
  small.insert(small.end(), large.rbegin(), large.rend());
  return small;
}

MapSpace::MapSpace(LayerShape layer, AcceleratorConfig accel)
    : layer_(std::move(layer)), accel_(std::move(accel)) {
  layer_.validate();
  accel_.validate();
  const std::size_t tiled = accel_.tiled_levels();

  for (std::size_t lvl = 0; lvl < tiled; ++lvl) {
    for (Dim d : kTileParameterOrder) {
      ParameterSpec p;
      p.name = level_prefix(lvl) + static_cast<char>(dim_letter(d) - 'A' + 'a');
      p.kind = ParameterKind::Integer;
      p.values = divisors(layer_.extent(d));
      params_.push_back(std::move(p));
      slots_.push_back({lvl, Role::Tile, d});
    }
  }
  for (std::size_t lvl = 0; lvl < tiled; ++lvl) {
    ParameterSpec p;
    p.name = level_prefix(lvl) + "order";
    p.kind = ParameterKind::Categorical;
    for (const auto& order : all_loop_orders()) p.labels.push_back(order_to_string(order));
    params_.push_back(std::move(p));
    slots_.push_back({lvl, Role::Order, Dim::N});
  }
  for (std::size_t lvl = 0; lvl < tiled; ++lvl) {
    ParameterSpec p;
    p.name = level_prefix(lvl) + "parallel";
    p.kind = ParameterKind::Categorical;
    for (Dim d : kAllDims) p.labels.emplace_back(1, dim_letter(d));
    params_.push_back(std::move(p));
    slots_.push_back({lvl, Role::Parallel, Dim::N});
  }
  for (const auto& p : params_) counts_.push_back(p.option_count());
}

void MapSpace::check_index(std::span<const std::size_t> index) const {
  if (index.size() != params_.size()) {
    throw std::out_of_range("index vector has " + std::to_string(index.size()) + " entries, space has " +
                            std::to_string(params_.size()) + " parameters");
  }
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= counts_[i]) {
      throw std::out_of_range("index " + std::to_string(index[i]) + " out of range for parameter " +
                              params_[i].name + " (" + std::to_string(counts_[i]) + " options)");
    }
  }
}

Mapping MapSpace::decode(std::span<const std::size_t> index) const {
  check_index(index);
  Mapping mapping;
  mapping.levels.resize(accel_.tiled_levels());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Slot& slot = slots_[i];
    auto& lvl = mapping.levels[slot.level];
    switch (slot.role) {
      case Role::Tile:
        lvl.tile[slot.dim] = params_[i].values[index[i]];
        break;
      case Role::Order:
        lvl.order = all_loop_orders()[index[i]];
        break;
      case Role::Parallel:
        lvl.parallel = kAllDims[index[i]];
        break;
    }
  }
  // Deeper levels must divide their parent; clamp to the largest divisor of
  // the parent that does not exceed the chosen option.
  DimArray parent = layer_.extents();
  for (auto& lvl : mapping.levels) {
    for (Dim d : kAllDims) {
      auto& t = lvl.tile[d];
      while (parent[d] % t != 0) --t;
    }
    parent = lvl.tile;
  }
  return mapping;
}

IndexVector MapSpace::encode(const Mapping& mapping) const {
  if (mapping.levels.size() != accel_.tiled_levels()) {
    throw MalformedMappingError("levels: mapping level count does not match the map space");
  }
  IndexVector index(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Slot& slot = slots_[i];
    const auto& lvl = mapping.levels[slot.level];
    switch (slot.role) {
      case Role::Tile: {
        const auto& vals = params_[i].values;
        auto it = std::find(vals.begin(), vals.end(), lvl.tile[slot.dim]);
        if (it == vals.end()) {
          throw MalformedMappingError(params_[i].name + ": tile " + std::to_string(lvl.tile[slot.dim]) +
                                      " is not a divisor of the layer extent");
        }
        index[i] = static_cast<std::size_t>(it - vals.begin());
        break;
      }
      case Role::Order:
        index[i] = loop_order_rank(lvl.order);
        break;
      case Role::Parallel:
        index[i] = index_of(lvl.parallel);
        break;
    }
  }
  return index;
}

MapSpace build_mapspace(const LayerShape& layer, const AcceleratorConfig& accel) {
  return MapSpace(layer, accel);
}

BigInt exact_size(std::span<const std::size_t> option_counts) {
  BigInt out = 1;
  for (auto c : option_counts) out *= c;
  return out;
}

BigInt exact_size(const MapSpace& space) { return exact_size(space.option_counts()); }

void enumerate(const MapSpace& space, std::uint64_t limit, const MappingVisitor& visit) {
  const BigInt total = exact_size(space);
  if (total > limit) {
    throw SpaceTooLargeError("enumerate: space has " + total.str() + " mappings, limit is " +
                             std::to_string(limit));
  }
  const auto& counts = space.option_counts();
  IndexVector index(counts.size(), 0);
  if (std::any_of(counts.begin(), counts.end(), [](std::size_t c) { return c == 0; })) return;
  while (true) {
    visit(index, space.decode(index));
    std::size_t pos = counts.size();
    while (pos > 0) {
      --pos;
      if (++index[pos] < counts[pos]) break;
      index[pos] = 0;
      if (pos == 0) return;
    }
    if (counts.empty()) return;
  }
}

}  // namespace marlmap
