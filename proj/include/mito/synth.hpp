#pragma once

#include <filesystem>
#include <vector>

#include "mito/image.hpp"
#include "mito/registration.hpp"
#include "mito/rng.hpp"

namespace mito {

// Synthetic H&E / pseudo-PHH3 slide generator. Backgrounds are smooth random
// hematoxylin/eosin concentration fields rendered through the stain model;
// mitoses are dark elongated high-hematoxylin blobs (DAB blobs on the PHH3
// side); distractor nuclei are rounder and strictly lighter than mitoses.
struct SynthConfig {
  int width = 2000, height = 2000;
  int tile_size = 512;
  double microns_per_pixel = 0.25;

  int n_mitoses = 25;
  int n_distractors = 150;

  // concentration bump amplitudes and sizes (px diameters)
  double mitosis_amp_min = 1.3, mitosis_amp_max = 2.0;
  double mitosis_diameter_min = 8.0, mitosis_diameter_max = 20.0;
  double mitosis_eccentricity_max = 3.0;
  double distractor_amp_min = 0.45, distractor_amp_max = 0.8;
  double distractor_diameter_min = 8.0, distractor_diameter_max = 16.0;

  // background field
  double h_base_min = 0.25, h_base_max = 0.40;
  double e_base_min = 0.15, e_base_max = 0.30;
  int field_modes = 4;
  double field_amp = 0.035;
  double field_min_period = 300.0;

  double stain_sigma = 0.0;  // per-slide stain variation

  // PHH3 pair geometry
  int pair_dx = 0, pair_dy = 0;
  int jitter = 0;          // per-region displacement bound, px
  int region_size = 512;

  double min_mitosis_spacing = 110.0;
  double margin = 120.0;

  std::uint64_t seed = 0;

  void validate() const {
    if (width < 256 || height < 256)
      throw Error(ErrorCode::config_infeasible, "slide too small");
    if (n_mitoses < 0 || n_distractors < 0)
      throw Error(ErrorCode::config_infeasible, "negative object count");
    if (jitter < 0 || region_size < 64)
      throw Error(ErrorCode::config_infeasible, "bad jitter configuration");
  }
};

struct FieldMode {
  double fx, fy, phase, amplitude;
};

struct SceneBlob {
  double x, y;
  double sigma_major, sigma_minor, angle;
  double amplitude;
};

// Fully sampled slide description; rendering any tile from it is a pure
// function, so tiles can be produced in parallel by any worker count.
struct Scene {
  SynthConfig cfg;
  double h_base = 0.3, e_base = 0.2;
  std::vector<FieldMode> h_modes, e_modes;
  std::vector<SceneBlob> nuclei;
  std::vector<SceneBlob> mitoses;
  double stain_alpha[3] = {1, 1, 1};
  double stain_beta[3] = {0, 0, 0};
  ShiftVector shift;                 // phh3 global shift
  int regions_x = 0, regions_y = 0;
  std::vector<ShiftVector> jitters;  // per region, row-major

  ShiftVector jitter_at(double x, double y) const;
  std::vector<Eigen::Vector2d> truth_he() const;
  // mitosis positions as they appear in the PHH3 frame (shift + jitter)
  std::vector<Eigen::Vector2d> truth_phh3() const;
};

Scene build_scene(const SynthConfig& cfg);

ImageF render_tile(const Scene& scene, int x0, int y0, int w, int h, bool phh3);
ImageF render_slide(const Scene& scene, bool phh3, int workers = 1);

// Writes the tile directory + manifest + truth CSV for the H&E slide.
void write_synth_slide(const Scene& scene, const std::filesystem::path& dir, bool phh3,
                       int workers = 1);

}  // namespace mito
