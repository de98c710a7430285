#pragma once

// Binary checkpoint layout (all integers and floats little-endian):
//   "RCC1"            magic
//   u32               version = 1
//   u32               layer count
//   per layer:
//     u8              kind (0 = conv, 1 = fc)
//     u32             rank of the weight tensor, then u32 per dimension
//     f64[...]        weights, row-major
//     f64[dims[0]]    bias
// Conv layers are restored with "same" padding ((M-1)/2).

#include <filesystem>

#include "rcc/image.hpp"
#include "rcc/network.hpp"

namespace rcc {

inline constexpr std::uint32_t kCheckpointVersion = 1;

Bytes save_checkpoint(const NetworkParams& params);
NetworkParams load_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint_file(const std::filesystem::path& path, const NetworkParams& params);
NetworkParams load_checkpoint_file(const std::filesystem::path& path);

}  // namespace rcc
