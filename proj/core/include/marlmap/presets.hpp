#pragma once

#include <string>
#include <vector>

#include "marlmap/types.hpp"

namespace marlmap {

// Built-in layer shapes:
//   tiny            (1,2,2,1,1,2,2)
//   micro           (1,2,1,1,1,1,1), small enough to enumerate exhaustively
//   mobilenet_v2_l2 first bottleneck 3x3 depthwise conv, 32 ch @ 112x112 (one channel per group)
//   resnet18_l2     conv2_x 3x3, 64->64 @ 56x56
//   vgg16_l2        conv1_2 3x3, 64->64 @ 224x224
//   alexnet_l2      conv2 5x5, 96->256 @ 27x27
std::vector<std::string> layer_preset_names();
// The four CNN layers used by the benchmark suite.
std::vector<std::string> cnn_layer_preset_names();
bool has_layer_preset(const std::string& name);
LayerShape layer_preset(const std::string& name);

// Built-in accelerators:
//   default  256 PEs; DRAM (unbounded, 1 byte/cycle) + 108 KiB L1 (256 bytes/cycle).
//            The narrow DRAM port keeps typical mappings memory-bound, so tiling
//            and loop order both move latency.
//   golden   4 PEs; DRAM + 1 MiB L1 with wide ports (compute-bound reference)
//   micro    2 PEs; DRAM + 4-byte L1 (full tiles of the micro layer overflow)
std::vector<std::string> accelerator_preset_names();
bool has_accelerator_preset(const std::string& name);
AcceleratorConfig accelerator_preset(const std::string& name);

// A preset name, or a path to a JSON file.
LayerShape resolve_layer(const std::string& preset_or_path);
AcceleratorConfig resolve_accelerator(const std::string& preset_or_path);

}  // namespace marlmap
