#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsnn/graph.hpp"
#include "bsnn/tensor.hpp"

namespace bsnn {

struct Dataset {
    Tensor images;                     // [N,C,H,W]
    std::vector<std::uint32_t> labels; // one class id per image
    std::uint32_t num_classes = 0;
};

// Container framing: magic ("BSNN" models / "BSND" datasets), u32 LE format
// version, u64 LE manifest byte length, UTF-8 JSON manifest, then a payload
// of little-endian IEEE-754 32-bit values (labels as u32 LE). Round-trips
// are byte-identical.
inline constexpr std::uint32_t kContainerVersion = 1;

void save_model(const ModelGraph& graph, const std::string& path);
ModelGraph load_model(const std::string& path);

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace bsnn
