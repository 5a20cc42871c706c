#pragma once

#include <filesystem>

#include "mito/net.hpp"

namespace mito {

// Model file layout (all integers little-endian):
//   magic "MITO", format version u32, gamma f64, input_size u32, channels u32,
//   layer count u32, then per layer: kind u32, filters u32, kernel_h u32,
//   kernel_w u32, stride u32, rate f64; then for each parameterized layer in
//   order the weight matrix (row-major f32) followed by the bias vector (f32).
constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const std::filesystem::path& path, const ModelF& model);
ModelF load_model(const std::filesystem::path& path);

}  // namespace mito
