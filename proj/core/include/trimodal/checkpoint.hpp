#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "trimodal/optimizer.hpp"

namespace trimodal {

// A model checkpoint: versioned binary header, a flat config map, then one
// block per named parameter (name, shape, frozen flag, raw little-endian
// 64-bit floats). Byte-identical for identical models.
struct CheckpointBlock {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;
  bool frozen = false;
};

struct Checkpoint {
  std::string kind;  // "audio", "text", "video", "nnlb", "nnfb"
  std::map<std::string, std::string> config;
  std::vector<CheckpointBlock> params;

  const CheckpointBlock* find(const std::string& name) const;
};

void save_checkpoint(const std::filesystem::path& path, const std::string& kind,
                     const std::map<std::string, std::string>& config,
                     const std::vector<Parameter*>& params);

Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies checkpoint values into matching parameters; every parameter must
// have a block with identical name and shape.
void load_parameters(const Checkpoint& checkpoint, const std::vector<Parameter*>& params);

}  // namespace trimodal
