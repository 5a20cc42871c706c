#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "mito/image.hpp"

namespace mito {

// A "slide" is a directory of row/column-indexed 8-bit PNG tiles plus a
// plain-text manifest with the geometry.
struct SlideManifest {
  int width = 0;
  int height = 0;
  int tile_size = 512;
  int grid_rows = 0;
  int grid_cols = 0;
  double microns_per_pixel = 0.25;
  std::string tile_pattern = "tile_r{r}_c{c}.png";

  std::string tile_name(int row, int col) const;
};

void write_manifest(const std::filesystem::path& dir, const SlideManifest& m);
SlideManifest read_manifest(const std::filesystem::path& dir);

class Slide {
 public:
  static Slide open(const std::filesystem::path& dir);

  const SlideManifest& manifest() const { return manifest_; }
  int width() const { return manifest_.width; }
  int height() const { return manifest_.height; }

  // In-bounds region read, assembled from tiles. Thread-safe; decoded tiles
  // are cached.
  ImageF read_region(int x, int y, int w, int h) const;
  ImageF read_all() const;

 private:
  Slide(std::filesystem::path dir, SlideManifest m)
      : dir_(std::move(dir)), manifest_(std::move(m)) {}

  std::shared_ptr<const ImageF> tile(int row, int col) const;

  std::filesystem::path dir_;
  SlideManifest manifest_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<int, int>, std::shared_ptr<const ImageF>> cache_;
};

// Writes a whole image as a tiled slide directory.
void write_slide(const std::filesystem::path& dir, const ImageF& img, int tile_size,
                 double microns_per_pixel);

// Binary tissue raster at a downsampled grid. A cell is tissue when its mean
// optical density is at least `od_threshold` (white glass has OD ~ 0).
struct TissueMask {
  int width = 0, height = 0;  // mask grid dimensions
  int scale = 8;              // full-res pixels per mask cell
  std::vector<std::uint8_t> tissue;

  bool at_cell(int mx, int my) const { return tissue[std::size_t(my) * width + mx] != 0; }
  bool at(int x, int y) const;  // full-resolution lookup
  double tissue_fraction() const;
  // Fraction of tissue cells inside a full-res window [x, x+w) x [y, y+h).
  double fraction_in_window(int x, int y, int w, int h) const;
  // Tissue area within the circle divided by the full circle area; parts of
  // the circle outside the slide count as empty.
  double fraction_in_circle(double cx, double cy, double radius) const;

  static TissueMask all_tissue(int full_width, int full_height, int scale = 8);
};

TissueMask compute_tissue_mask(const ImageF& img, int scale = 8, double od_threshold = 0.05);
TissueMask compute_tissue_mask(const Slide& slide, int scale = 8, double od_threshold = 0.05);

}  // namespace mito
