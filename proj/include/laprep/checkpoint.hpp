#pragma once

#include <filesystem>

#include "laprep/mlp.hpp"

namespace laprep::nn {

// Layout: "LAPREPNN" magic, u32 version (1), u32 hidden count, u64 input,
// u64 hidden sizes..., u64 output, then each layer's weights (row-major)
// and biases as IEEE-754 binary64. All integers and floats little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const Mlp& net, const std::filesystem::path& path);
Mlp load_checkpoint(const std::filesystem::path& path);

}  // namespace laprep::nn
