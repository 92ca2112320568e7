#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "marlmap/cost_model.hpp"
#include "marlmap/mapping.hpp"
#include "marlmap/types.hpp"

namespace marlmap {

// Parse or schema failure in an input file; the message names the field or
// the line/column of the syntax error.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// {"n":1,"k":64,"c":64,"r":3,"s":3,"p":56,"q":56}
LayerShape layer_from_json(const std::string& text);
std::string layer_to_json(const LayerShape& layer);

// {"num_pes":256,"mac_energy":1,"pe_area":1000,"cycle_time":1,
//  "levels":[{"capacity":"inf","bandwidth":32,"access_energy":100,"area_per_byte":0.01}, ...]}
AcceleratorConfig accelerator_from_json(const std::string& text);
std::string accelerator_to_json(const AcceleratorConfig& accel);

// {"levels":[{"tiles":{"n":1,...},"order":"KCRSPQN","parallel":"K"}]}; a bare
// level array or a single level object is accepted on input.
Mapping mapping_from_json(const std::string& text);
std::string mapping_to_json(const Mapping& mapping);

std::string report_to_json(const CostReport& report);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace marlmap
