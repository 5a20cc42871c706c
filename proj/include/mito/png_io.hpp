#pragma once

#include <filesystem>

#include "mito/image.hpp"

namespace mito {

// 8-bit PNG I/O. Gray and RGB only; values map to reflectance by v/255.
ImageF read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const ImageF& img);

}  // namespace mito
