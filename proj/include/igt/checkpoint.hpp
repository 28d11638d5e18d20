#pragma once

// Flat binary parameter archive. Layout (all integers little-endian):
//
//   magic      8 bytes  "IGTCKPT1"
//   version    u32      1
//   meta_len   u32      length of the metadata JSON in bytes
//   meta       bytes    UTF-8 JSON (model shape, calibration entropy, ...)
//   count      u32      number of arrays
//   per array:
//     name_len u32, name bytes
//     rank     u32, dims rank x u64
//     payload  prod(dims) x f64 (IEEE-754 binary64, little-endian)

#include <filesystem>
#include <string>
#include <vector>

#include "igt/params.hpp"

namespace igt {

struct Checkpoint {
  std::string metadata;  // JSON text
  std::vector<std::pair<std::string, Tensor>> arrays;
};

void save_checkpoint(const std::filesystem::path& path, const std::string& metadata,
                     const ParamSet& params);
Checkpoint load_checkpoint(const std::filesystem::path& path);
// Copies archived values into params by name; every param must be present with matching shape.
void restore_params(const Checkpoint& ckpt, ParamSet& params);

}  // namespace igt
