#pragma once

#include <filesystem>

#include "mito/detections.hpp"
#include "mito/net.hpp"
#include "mito/slide.hpp"

namespace mito {

// Stride-aligned mitosis probability grid. Cell (i, j) holds the network
// output for the input patch whose top-left corner is (stride*j, stride*i);
// the corresponding full-resolution center is origin + stride * (j, i).
struct ProbabilityMap {
  int width = 0, height = 0;  // grid dimensions
  int stride = 4;
  int origin = 50;            // full-res offset of cell (0,0)'s patch center
  double microns_per_pixel = 0.25;
  Eigen::ArrayXXf values;     // (height, width) in [0,1]

  double full_x(int grid_x) const { return origin + double(stride) * grid_x; }
  double full_y(int grid_y) const { return origin + double(stride) * grid_y; }
};

// Dense whole-slide inference: the fully convolutional model slides over the
// image at its output stride; tiles are processed with a receptive-field
// halo so the tiled result is identical to a monolithic pass. Cells whose
// patch center falls outside the tissue mask are set to 0.
ProbabilityMap dense_probability_map(const ImageF& img, const ModelF& model,
                                     const TissueMask* mask = nullptr, int tile_cells = 64,
                                     int workers = 1);
ProbabilityMap dense_probability_map(const Slide& slide, const ModelF& model,
                                     const TissueMask* mask = nullptr, int tile_cells = 64,
                                     int workers = 1);

// Probability-map file: magic "PMAP", width u32, height u32, stride u32
// (16-byte header), then row-major little-endian float32 values.
void save_pmap(const std::filesystem::path& path, const ProbabilityMap& map);
ProbabilityMap load_pmap(const std::filesystem::path& path);

// 8-bit grayscale preview of the map.
ImageF pmap_preview(const ProbabilityMap& map);

// Map -> detections: binarize at `binarize`, 8-connected components,
// component centroid at full resolution with probability = component max,
// then greedy suppression (by descending probability) of detections within
// distance d of an accepted one.
DetectionList postprocess(const ProbabilityMap& map, double d = 100.0,
                          double binarize = 0.8);

struct HotspotParams {
  double area_mm2 = 2.0;
  int grid_stride = 200;        // px between evaluated hotspot centers
  double min_tissue = 0.05;     // minimum tissue coverage of the circle
  double percentile = 0.95;
};

struct HotspotResult {
  int count = 0;
  int cx = 0, cy = 0;  // hotspot circle center, full-res px
};

// Slides a 2 mm^2 circle over a grid of positions, counts detections per
// position (skipping positions with almost no tissue), and reports the
// nearest-rank 95th percentile of the series; the returned center is the
// first position with the smallest count >= that percentile.
HotspotResult hotspot(const DetectionList& dl, const TissueMask& mask,
                      double microns_per_pixel, const HotspotParams& params = {});

// MAI-style grading: 1 iff count <= theta1, 3 iff count > theta2, else 2.
int grade(int count, int theta1 = 6, int theta2 = 20);
inline int proliferation_score(int count) { return count; }

struct SlideSummary {
  int hotspot_count = 0;
  int hotspot_x = 0, hotspot_y = 0;
  int grade = 1;
  int proliferation_score = 0;
  double delta = 0.0;
  int theta1 = 6, theta2 = 20;
};

void write_summary(const std::filesystem::path& path, const SlideSummary& s);

}  // namespace mito
