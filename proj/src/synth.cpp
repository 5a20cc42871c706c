#include "mito/synth.hpp"

#include <cmath>

#include "mito/candidates.hpp"
#include "mito/parallel.hpp"
#include "mito/png_io.hpp"
#include "mito/slide.hpp"
#include "mito/stain.hpp"

namespace mito {

namespace {

constexpr double kPi = 3.14159265358979323846;

double blob_value(const SceneBlob& b, double x, double y) {
  double dx = x - b.x, dy = y - b.y;
  double cu = std::cos(b.angle), su = std::sin(b.angle);
  double u = cu * dx + su * dy;
  double v = -su * dx + cu * dy;
  double q = 0.5 * (u * u / (b.sigma_major * b.sigma_major) +
                    v * v / (b.sigma_minor * b.sigma_minor));
  return q > 12.0 ? 0.0 : b.amplitude * std::exp(-q);
}

double blob_reach(const SceneBlob& b) { return 5.0 * b.sigma_major; }

}  // namespace

ShiftVector Scene::jitter_at(double x, double y) const {
  if (jitters.empty()) return {0, 0};
  int rx = std::clamp(int(x) / cfg.region_size, 0, regions_x - 1);
  int ry = std::clamp(int(y) / cfg.region_size, 0, regions_y - 1);
  return jitters[std::size_t(ry) * regions_x + rx];
}

std::vector<Eigen::Vector2d> Scene::truth_he() const {
  std::vector<Eigen::Vector2d> t;
  t.reserve(mitoses.size());
  for (const auto& b : mitoses) t.emplace_back(b.x, b.y);
  return t;
}

std::vector<Eigen::Vector2d> Scene::truth_phh3() const {
  std::vector<Eigen::Vector2d> t;
  t.reserve(mitoses.size());
  for (const auto& b : mitoses) {
    // fixed point of p = m + shift + jitter(region(p)); two iterations settle
    // it for objects away from region boundaries
    double px = b.x + shift.dx, py = b.y + shift.dy;
    for (int it = 0; it < 2; ++it) {
      ShiftVector j = jitter_at(px, py);
      px = b.x + shift.dx + j.dx;
      py = b.y + shift.dy + j.dy;
    }
    t.emplace_back(px, py);
  }
  return t;
}

Scene build_scene(const SynthConfig& cfg) {
  cfg.validate();
  Scene scene;
  scene.cfg = cfg;
  Rng rng(derive_seed(cfg.seed, 0x5ce11e));

  scene.h_base = rng.uniform(cfg.h_base_min, cfg.h_base_max);
  scene.e_base = rng.uniform(cfg.e_base_min, cfg.e_base_max);
  auto draw_modes = [&](std::vector<FieldMode>& modes) {
    for (int i = 0; i < cfg.field_modes; ++i) {
      double f = 1.0 / rng.uniform(cfg.field_min_period, 4.0 * cfg.field_min_period);
      double theta = rng.uniform(0.0, 2.0 * kPi);
      modes.push_back({f * std::cos(theta), f * std::sin(theta),
                       rng.uniform(0.0, 2.0 * kPi),
                       rng.uniform(0.3, 1.0) * cfg.field_amp});
    }
  };
  draw_modes(scene.h_modes);
  draw_modes(scene.e_modes);

  for (int c = 0; c < 3; ++c) {
    scene.stain_alpha[c] = rng.uniform(1.0 - cfg.stain_sigma, 1.0 + cfg.stain_sigma);
    scene.stain_beta[c] = rng.uniform(-cfg.stain_sigma, cfg.stain_sigma);
  }

  scene.shift = {cfg.pair_dx, cfg.pair_dy};
  scene.regions_x = (cfg.width + cfg.region_size - 1) / cfg.region_size;
  scene.regions_y = (cfg.height + cfg.region_size - 1) / cfg.region_size;
  if (cfg.jitter > 0) {
    scene.jitters.resize(std::size_t(scene.regions_x) * scene.regions_y);
    for (auto& j : scene.jitters) {
      j.dx = int(rng.uniform_index(std::uint64_t(2 * cfg.jitter) + 1)) - cfg.jitter;
      j.dy = int(rng.uniform_index(std::uint64_t(2 * cfg.jitter) + 1)) - cfg.jitter;
    }
  }

  // mitoses: pairwise-spaced, inside the margin, and (when jitter is active)
  // clear of region boundaries so their PHH3 position is well defined
  const double lo_x = cfg.margin, hi_x = cfg.width - cfg.margin;
  const double lo_y = cfg.margin, hi_y = cfg.height - cfg.margin;
  if (hi_x <= lo_x || hi_y <= lo_y)
    throw Error(ErrorCode::config_infeasible, "margin leaves no room for objects");
  auto boundary_clear = [&](double x, double y) {
    if (cfg.jitter == 0) return true;
    double bx = std::fmod(x + scene.shift.dx, double(cfg.region_size));
    double by = std::fmod(y + scene.shift.dy, double(cfg.region_size));
    if (bx < 0) bx += cfg.region_size;
    if (by < 0) by += cfg.region_size;
    const double clear = 2.0 * cfg.jitter + 4.0;
    return bx > clear && bx < cfg.region_size - clear && by > clear &&
           by < cfg.region_size - clear;
  };
  for (int i = 0; i < cfg.n_mitoses; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < 500 && !placed; ++attempt) {
      double x = std::floor(rng.uniform(lo_x, hi_x));
      double y = std::floor(rng.uniform(lo_y, hi_y));
      bool ok = boundary_clear(x, y);
      for (const auto& m : scene.mitoses) {
        if (!ok) break;
        double dx = x - m.x, dy = y - m.y;
        if (dx * dx + dy * dy < cfg.min_mitosis_spacing * cfg.min_mitosis_spacing)
          ok = false;
      }
      if (!ok) continue;
      double diameter = rng.uniform(cfg.mitosis_diameter_min, cfg.mitosis_diameter_max);
      double ecc = rng.uniform(1.0, cfg.mitosis_eccentricity_max);
      SceneBlob b;
      b.x = x;
      b.y = y;
      b.sigma_major = diameter / 4.0;
      b.sigma_minor = std::max(1.0, b.sigma_major / ecc);
      b.angle = rng.uniform(0.0, kPi);
      b.amplitude = rng.uniform(cfg.mitosis_amp_min, cfg.mitosis_amp_max);
      scene.mitoses.push_back(b);
      placed = true;
    }
    if (!placed)
      throw Error(ErrorCode::config_infeasible, "could not place all mitoses");
  }

  const double d_margin = 60.0;
  for (int i = 0; i < cfg.n_distractors; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < 500 && !placed; ++attempt) {
      double x = std::floor(rng.uniform(d_margin, cfg.width - d_margin));
      double y = std::floor(rng.uniform(d_margin, cfg.height - d_margin));
      bool ok = true;
      for (const auto& m : scene.mitoses) {
        double dx = x - m.x, dy = y - m.y;
        if (dx * dx + dy * dy < 70.0 * 70.0) ok = false;
      }
      for (const auto& n : scene.nuclei) {
        if (!ok) break;
        double dx = x - n.x, dy = y - n.y;
        if (dx * dx + dy * dy < 24.0 * 24.0) ok = false;
      }
      if (!ok) continue;
      double diameter = rng.uniform(cfg.distractor_diameter_min, cfg.distractor_diameter_max);
      SceneBlob b;
      b.x = x;
      b.y = y;
      b.sigma_major = diameter / 4.0;
      b.sigma_minor = b.sigma_major;
      b.angle = 0.0;
      b.amplitude = rng.uniform(cfg.distractor_amp_min, cfg.distractor_amp_max);
      scene.nuclei.push_back(b);
      placed = true;
    }
    if (!placed)
      throw Error(ErrorCode::config_infeasible, "could not place all distractor nuclei");
  }
  return scene;
}

ImageF render_tile(const Scene& scene, int x0, int y0, int w, int h, bool phh3) {
  const SynthConfig& cfg = scene.cfg;
  Image<float> conc(w, h, 3);

  // channel 0: hematoxylin; 1: eosin; 2: DAB
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double px = x0 + x, py = y0 + y;
      if (phh3) {
        ShiftVector j = scene.jitter_at(px, py);
        px -= scene.shift.dx + j.dx;
        py -= scene.shift.dy + j.dy;
      }
      double hv = scene.h_base;
      for (const auto& m : scene.h_modes)
        hv += m.amplitude * std::cos(2.0 * kPi * (m.fx * px + m.fy * py) + m.phase);
      double ev = 0.0;
      if (!phh3) {
        ev = scene.e_base;
        for (const auto& m : scene.e_modes)
          ev += m.amplitude * std::cos(2.0 * kPi * (m.fx * px + m.fy * py) + m.phase);
      }
      conc.at(x, y, 0) = float(hv);
      conc.at(x, y, 1) = float(ev);
      conc.at(x, y, 2) = 0.f;
    }

  // blobs are evaluated in scene coordinates (inverse-mapped per pixel)
  auto rasterize = [&](const SceneBlob& b, int channel) {
    double tx = b.x, ty = b.y;
    if (phh3) {
      ShiftVector j = scene.jitter_at(b.x + scene.shift.dx, b.y + scene.shift.dy);
      tx += scene.shift.dx + j.dx;
      ty += scene.shift.dy + j.dy;
    }
    double reach = blob_reach(b) + (phh3 ? cfg.jitter : 0) + 1.0;
    int bx0 = std::max(0, int(tx - reach) - x0);
    int bx1 = std::min(w - 1, int(tx + reach) - x0);
    int by0 = std::max(0, int(ty - reach) - y0);
    int by1 = std::min(h - 1, int(ty + reach) - y0);
    for (int y = by0; y <= by1; ++y)
      for (int x = bx0; x <= bx1; ++x) {
        double px = x0 + x, py = y0 + y;
        if (phh3) {
          ShiftVector j = scene.jitter_at(px, py);
          px -= scene.shift.dx + j.dx;
          py -= scene.shift.dy + j.dy;
        }
        conc.at(x, y, channel) += float(blob_value(b, px, py));
      }
  };

  for (const auto& n : scene.nuclei) rasterize(n, 0);
  for (const auto& m : scene.mitoses) rasterize(m, phh3 ? 2 : 0);

  for (int c = 0; c < 3; ++c)
    conc.plane(c) = float(scene.stain_alpha[c]) * conc.plane(c) + float(scene.stain_beta[c]);

  return hed_to_rgb(conc, StainMatrix::ruifrok_hed());
}

ImageF render_slide(const Scene& scene, bool phh3, int workers) {
  const SynthConfig& cfg = scene.cfg;
  ImageF out(cfg.width, cfg.height, 3);
  const int ts = cfg.tile_size;
  const int rows = (cfg.height + ts - 1) / ts;
  const int cols = (cfg.width + ts - 1) / ts;
  parallel_for(std::size_t(rows) * cols, workers, [&](std::size_t i) {
    int r = int(i) / cols, c = int(i) % cols;
    int x0 = c * ts, y0 = r * ts;
    int w = std::min(ts, cfg.width - x0);
    int h = std::min(ts, cfg.height - y0);
    ImageF tile = render_tile(scene, x0, y0, w, h, phh3);
    for (int ch = 0; ch < 3; ++ch)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.at(x0 + x, y0 + y, ch) = tile.at(x, y, ch);
  });
  return out;
}

void write_synth_slide(const Scene& scene, const std::filesystem::path& dir, bool phh3,
                       int workers) {
  const SynthConfig& cfg = scene.cfg;
  std::filesystem::create_directories(dir);
  SlideManifest m;
  m.width = cfg.width;
  m.height = cfg.height;
  m.tile_size = cfg.tile_size;
  m.grid_rows = (cfg.height + cfg.tile_size - 1) / cfg.tile_size;
  m.grid_cols = (cfg.width + cfg.tile_size - 1) / cfg.tile_size;
  m.microns_per_pixel = cfg.microns_per_pixel;
  write_manifest(dir, m);
  parallel_for(std::size_t(m.grid_rows) * m.grid_cols, workers, [&](std::size_t i) {
    int r = int(i) / m.grid_cols, c = int(i) % m.grid_cols;
    int x0 = c * cfg.tile_size, y0 = r * cfg.tile_size;
    int w = std::min(cfg.tile_size, cfg.width - x0);
    int h = std::min(cfg.tile_size, cfg.height - y0);
    write_png(dir / m.tile_name(r, c), render_tile(scene, x0, y0, w, h, phh3));
  });
  write_points_csv(dir / "truth.csv", phh3 ? scene.truth_phh3() : scene.truth_he());
}

}  // namespace mito
