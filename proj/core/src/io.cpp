#include "marlmap/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "marlmap/trace.hpp"

namespace marlmap {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json parse(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

const json& field(const json& obj, const std::string& name, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected a JSON object");
  auto it = obj.find(name);
  if (it == obj.end()) throw ConfigError(where + ": missing field '" + name + "'");
  return *it;
}

std::int64_t get_int(const json& obj, const std::string& name, const std::string& where) {
  const json& v = field(obj, name, where);
  if (!v.is_number_integer()) throw ConfigError(where + "." + name + ": expected an integer");
  return v.get<std::int64_t>();
}

double get_number(const json& obj, const std::string& name, const std::string& where) {
  const json& v = field(obj, name, where);
  if (!v.is_number()) throw ConfigError(where + "." + name + ": expected a number");
  return v.get<double>();
}

LevelMapping level_from_json(const json& j, const std::string& where) {
  LevelMapping lvl;
  const json& tiles = field(j, "tiles", where);
  for (Dim d : kAllDims) {
    const std::string key(1, static_cast<char>(dim_letter(d) - 'A' + 'a'));
    lvl.tile[d] = get_int(tiles, key, where + ".tiles");
  }
  const json& order = field(j, "order", where);
  if (!order.is_string()) throw ConfigError(where + ".order: expected a string like \"KCRSPQN\"");
  try {
    lvl.order = order_from_string(order.get<std::string>());
  } catch (const MalformedMappingError& e) {
    throw ConfigError(where + "." + e.what());
  }
  const json& par = field(j, "parallel", where);
  if (!par.is_string() || par.get<std::string>().size() != 1 || !dim_from_letter(par.get<std::string>()[0])) {
    throw ConfigError(where + ".parallel: expected one loop letter of NKCRSPQ");
  }
  lvl.parallel = *dim_from_letter(par.get<std::string>()[0]);
  return lvl;
}

}  // namespace

LayerShape layer_from_json(const std::string& text) {
  const json j = parse(text, "layer");
  LayerShape l;
  l.n = get_int(j, "n", "layer");
  l.k = get_int(j, "k", "layer");
  l.c = get_int(j, "c", "layer");
  l.r = get_int(j, "r", "layer");
  l.s = get_int(j, "s", "layer");
  l.p = get_int(j, "p", "layer");
  l.q = get_int(j, "q", "layer");
  try {
    l.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return l;
}

std::string layer_to_json(const LayerShape& l) {
  ordered_json j = {{"n", l.n}, {"k", l.k}, {"c", l.c}, {"r", l.r}, {"s", l.s}, {"p", l.p}, {"q", l.q}};
  return j.dump(2) + "\n";
}

AcceleratorConfig accelerator_from_json(const std::string& text) {
  const json j = parse(text, "accelerator");
  AcceleratorConfig a;
  a.num_pes = get_int(j, "num_pes", "accelerator");
  a.mac_energy = get_number(j, "mac_energy", "accelerator");
  a.pe_area = get_number(j, "pe_area", "accelerator");
  if (j.contains("cycle_time")) a.cycle_time = get_number(j, "cycle_time", "accelerator");
  if (j.contains("element_bytes")) a.element_bytes = get_int(j, "element_bytes", "accelerator");
  const json& levels = field(j, "levels", "accelerator");
  if (!levels.is_array()) throw ConfigError("accelerator.levels: expected an array");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const std::string where = "accelerator.levels[" + std::to_string(i) + "]";
    const json& lj = levels[i];
    MemoryLevel lvl;
    const json& cap = field(lj, "capacity", where);
    if (cap.is_string()) {
      if (cap.get<std::string>() != "inf") throw ConfigError(where + ".capacity: expected bytes or \"inf\"");
      if (i != 0) throw ConfigError(where + ".capacity: \"inf\" is only permitted at level 0");
    } else if (cap.is_number_integer()) {
      lvl.capacity = cap.get<std::int64_t>();
    } else {
      throw ConfigError(where + ".capacity: expected an integer byte count or \"inf\"");
    }
    lvl.bandwidth = get_number(lj, "bandwidth", where);
    lvl.access_energy = get_number(lj, "access_energy", where);
    lvl.area_per_byte = get_number(lj, "area_per_byte", where);
    a.levels.push_back(lvl);
  }
  try {
    a.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("accelerator.") + e.what());
  }
  return a;
}

std::string accelerator_to_json(const AcceleratorConfig& a) {
  ordered_json j;
  j["num_pes"] = a.num_pes;
  j["mac_energy"] = a.mac_energy;
  j["pe_area"] = a.pe_area;
  j["cycle_time"] = a.cycle_time;
  j["element_bytes"] = a.element_bytes;
  j["levels"] = ordered_json::array();
  for (const auto& l : a.levels) {
    ordered_json lj;
    if (l.capacity) {
      lj["capacity"] = *l.capacity;
    } else {
      lj["capacity"] = "inf";
    }
    lj["bandwidth"] = l.bandwidth;
    lj["access_energy"] = l.access_energy;
    lj["area_per_byte"] = l.area_per_byte;
    j["levels"].push_back(lj);
  }
  return j.dump(2) + "\n";
}

Mapping mapping_from_json(const std::string& text) {
  const json j = parse(text, "mapping");
  const json* levels = &j;
  Mapping m;
  if (j.is_object() && j.contains("levels")) {
    levels = &j["levels"];
  } else if (j.is_object()) {
    m.levels.push_back(level_from_json(j, "mapping"));
    return m;
  }
  if (!levels->is_array()) throw ConfigError("mapping.levels: expected an array");
  for (std::size_t i = 0; i < levels->size(); ++i) {
    m.levels.push_back(level_from_json((*levels)[i], "mapping.levels[" + std::to_string(i) + "]"));
  }
  return m;
}

std::string mapping_to_json(const Mapping& m) {
  ordered_json j;
  j["levels"] = ordered_json::array();
  for (const auto& lvl : m.levels) {
    ordered_json tiles;
    for (Dim d : {Dim::N, Dim::K, Dim::C, Dim::R, Dim::S, Dim::P, Dim::Q}) {
      tiles[std::string(1, static_cast<char>(dim_letter(d) - 'A' + 'a'))] = lvl.tile[d];
    }
    j["levels"].push_back({{"tiles", tiles}, {"order", order_to_string(lvl.order)},
                           {"parallel", std::string(1, dim_letter(lvl.parallel))}});
  }
  return j.dump(2) + "\n";
}

std::string report_to_json(const CostReport& r) {
  ordered_json j;
  j["valid"] = r.valid;
  j["latency"] = r.latency;
  j["energy"] = r.energy;
  j["power"] = r.power;
  j["area"] = r.area;
  j["edp"] = r.edp;
  j["macs"] = r.macs;
  j["pes_used"] = r.pes_used;
  j["compute_cycles"] = r.compute_cycles;
  j["per_level_traffic"] = ordered_json::array();
  for (const auto& t : r.per_level_traffic) {
    j["per_level_traffic"].push_back({{"weights", t.weights}, {"inputs", t.inputs}, {"outputs", t.outputs}});
  }
  return j.dump(2) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace marlmap
