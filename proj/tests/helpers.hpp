#pragma once

#include <filesystem>
#include <string>

#include "mito/image.hpp"
#include "mito/rng.hpp"

namespace mito::test {

inline ImageF random_patch(int w, int h, Rng& rng, float lo = 0.0f, float hi = 1.0f) {
  ImageF img(w, h, 3);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) img.at(x, y, c) = float(rng.uniform(lo, hi));
  return img;
}

inline ImageF flat_patch(int w, int h, float r, float g, float b) {
  ImageF img(w, h, 3);
  img.plane(0).setConstant(r);
  img.plane(1).setConstant(g);
  img.plane(2).setConstant(b);
  return img;
}

inline double max_abs_diff(const ImageF& a, const ImageF& b) {
  double m = 0.0;
  for (int c = 0; c < a.channels(); ++c)
    for (int y = 0; y < a.height(); ++y)
      for (int x = 0; x < a.width(); ++x)
        m = std::max(m, std::abs(double(a.at(x, y, c)) - double(b.at(x, y, c))));
  return m;
}

inline bool images_identical(const ImageF& a, const ImageF& b) {
  if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels())
    return false;
  return max_abs_diff(a, b) == 0.0;
}

// Scratch directory per test binary, cleaned on first use in a run.
inline std::filesystem::path scratch_dir(const std::string& name) {
  std::filesystem::path dir = std::filesystem::temp_directory_path() / ("mito_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace mito::test
