// Versioned JSON checkpoints for network parameters. Values round-trip
// bit-exactly (shortest-representation doubles on write, strtod on read).
#pragma once

#include <map>
#include <string>
#include <vector>

#include "advisory/tensor.hpp"

namespace advisory::nn {

struct LayerSpec {
  std::string kind;  // "dense" | "lstm"
  std::size_t in = 0;
  std::size_t out = 0;
  std::string activation;
};

struct Checkpoint {
  int format_version = 1;
  std::string network_kind;
  std::vector<LayerSpec> layer_specs;
  std::map<std::string, Tensor> tensors;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);

// Throws MissingArtifactError if the file is absent, ConfigError on schema
// violations.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace advisory::nn
