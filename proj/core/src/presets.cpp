#include "marlmap/presets.hpp"

#include <map>
#include <stdexcept>

#include "marlmap/io.hpp"

namespace marlmap {

namespace {

const std::map<std::string, LayerShape>& layers() {
  static const std::map<std::string, LayerShape> table = {
      {"tiny", {1, 2, 2, 1, 1, 2, 2}},
      {"micro", {1, 2, 1, 1, 1, 1, 1}},
      {"mobilenet_v2_l2", {1, 32, 1, 3, 3, 112, 112}},
      {"resnet18_l2", {1, 64, 64, 3, 3, 56, 56}},
      {"vgg16_l2", {1, 64, 64, 3, 3, 224, 224}},
      {"alexnet_l2", {1, 256, 96, 5, 5, 27, 27}},
  };
  return table;
}

AcceleratorConfig make_default() {
  AcceleratorConfig a;
  a.num_pes = 256;
  a.mac_energy = 1.0;
  a.pe_area = 1000.0;
  a.cycle_time = 1.0;
  a.levels = {
      MemoryLevel{std::nullopt, 1.0, 100.0, 0.001},
      MemoryLevel{108 * 1024, 256.0, 2.0, 0.5},
  };
  return a;
}

AcceleratorConfig make_golden() {
  AcceleratorConfig a;
  a.num_pes = 4;
  a.mac_energy = 1.0;
  a.pe_area = 100.0;
  a.cycle_time = 1.0;
  a.levels = {
      MemoryLevel{std::nullopt, 64.0, 10.0, 0.001},
      MemoryLevel{1 << 20, 64.0, 1.0, 0.5},
  };
  return a;
}

AcceleratorConfig make_micro() {
  AcceleratorConfig a;
  a.num_pes = 2;
  a.mac_energy = 1.0;
  a.pe_area = 100.0;
  a.cycle_time = 1.0;
  a.levels = {
      MemoryLevel{std::nullopt, 1.0, 10.0, 0.001},
      MemoryLevel{4, 4.0, 1.0, 0.5},
  };
  return a;
}

bool looks_like_path(const std::string& s) {
  return s.find('/') != std::string::npos || s.find('.') != std::string::npos;
}

}  // namespace

std::vector<std::string> layer_preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : layers()) out.push_back(name);
  return out;
}

std::vector<std::string> cnn_layer_preset_names() {
  return {"mobilenet_v2_l2", "resnet18_l2", "vgg16_l2", "alexnet_l2"};
}

bool has_layer_preset(const std::string& name) { return layers().count(name) > 0; }

LayerShape layer_preset(const std::string& name) {
  auto it = layers().find(name);
  if (it == layers().end()) throw std::invalid_argument("unknown layer preset '" + name + "'");
  return it->second;
}

std::vector<std::string> accelerator_preset_names() { return {"default", "golden", "micro"}; }

bool has_accelerator_preset(const std::string& name) {
  return name == "default" || name == "golden" || name == "micro";
}

AcceleratorConfig accelerator_preset(const std::string& name) {
  if (name == "default") return make_default();
  if (name == "golden") return make_golden();
  if (name == "micro") return make_micro();
  throw std::invalid_argument("unknown accelerator preset '" + name + "'");
}

LayerShape resolve_layer(const std::string& preset_or_path) {
  if (has_layer_preset(preset_or_path)) return layer_preset(preset_or_path);
  if (!looks_like_path(preset_or_path)) {
    throw ConfigError("unknown layer preset '" + preset_or_path + "' (and not a file path)");
  }
  return layer_from_json(read_text_file(preset_or_path));
}

AcceleratorConfig resolve_accelerator(const std::string& preset_or_path) {
  if (has_accelerator_preset(preset_or_path)) return accelerator_preset(preset_or_path);
  if (!looks_like_path(preset_or_path)) {
    throw ConfigError("unknown accelerator preset '" + preset_or_path + "' (and not a file path)");
  }
  return accelerator_from_json(read_text_file(preset_or_path));
}

}  // namespace marlmap
