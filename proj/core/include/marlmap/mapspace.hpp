#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "marlmap/mapping.hpp"
#include "marlmap/types.hpp"

namespace marlmap {

using BigInt = boost::multiprecision::cpp_int;
using IndexVector = std::vector<std::size_t>;

enum class ParameterKind : std::uint8_t { Integer, Categorical };

// One searchable decision. Integer parameters carry numeric option values
// (tile sizes); categorical parameters carry opaque labels.
struct ParameterSpec {
  std::string name;
  ParameterKind kind = ParameterKind::Integer;
  std::vector<std::int64_t> values;  // Integer kind
  std::vector<std::string> labels;   // Categorical kind

  std::size_t option_count() const {
    return kind == ParameterKind::Integer ? values.size() : labels.size();
  }
  // Tile value for integer parameters, option index for categorical ones.
  double numeric(std::size_t option) const;
  std::string label(std::size_t option) const;
};

// Closed-form sizing: n settings per dim, d dims, k parallel dims,
// l memory levels.
struct SearchSpaceSpec {
  std::uint64_t n = 1;
  std::uint64_t d = 1;
  std::uint64_t k = 1;
  std::uint64_t l = 1;
};

// (n^d * d! * d!/(d-k)!)^l, exact. Throws std::invalid_argument when a
// field is zero or k > d.
BigInt complexity(const SearchSpaceSpec& spec);
// Loop-order factor alone: (d!)^l.
BigInt loop_order_count(std::uint64_t d, std::uint64_t l);

// All 7! loop orders in lexicographic order of Dim; index 0 is N,K,C,R,S,P,Q.
const std::vector<LoopOrder>& all_loop_orders();
std::size_t loop_order_rank(const LoopOrder& order);

// Sorted divisors of x (x >= 1).
std::vector<std::int64_t> divisors(std::int64_t x);

class MapSpace {
 public:
  enum class Role : std::uint8_t { Tile, Order, Parallel };
  struct Slot {
    std::size_t level = 0;
    Role role = Role::Tile;
    Dim dim = Dim::N;
  };

  MapSpace(LayerShape layer, AcceleratorConfig accel);

  const LayerShape& layer() const { return layer_; }
  const AcceleratorConfig& accelerator() const { return accel_; }
  const std::vector<ParameterSpec>& parameters() const { return params_; }
  const std::vector<Slot>& slots() const { return slots_; }
  const std::vector<std::size_t>& option_counts() const { return counts_; }
  std::size_t size() const { return params_.size(); }

  // Throws std::out_of_range on arity mismatch or an index past its option count.
  Mapping decode(std::span<const std::size_t> index) const;
  // Throws MalformedMappingError when the mapping is not expressible in this space.
  IndexVector encode(const Mapping& mapping) const;

  void check_index(std::span<const std::size_t> index) const;

 private:
  LayerShape layer_;
  AcceleratorConfig accel_;
  std::vector<ParameterSpec> params_;
  std::vector<Slot> slots_;
  std::vector<std::size_t> counts_;
};

// Parameter order: tiles k,c,r,s,p,q,n for each tiled level, then one loop
// order per level, then one parallel dim per level.
MapSpace build_mapspace(const LayerShape& layer, const AcceleratorConfig& accel);

BigInt exact_size(std::span<const std::size_t> option_counts);
BigInt exact_size(const MapSpace& space);

using MappingVisitor = std::function<void(std::span<const std::size_t> index, const Mapping& mapping)>;

// Visits every mapping once, lexicographically in index space (last parameter
// fastest). Throws SpaceTooLargeError if exact_size(space) > limit.
void enumerate(const MapSpace& space, std::uint64_t limit, const MappingVisitor& visit);

}  // namespace marlmap
