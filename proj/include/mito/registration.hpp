#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "mito/image.hpp"
#include "mito/rng.hpp"
#include "mito/slide.hpp"

namespace mito {

struct ShiftVector {
  int dx = 0, dy = 0;
  bool operator==(const ShiftVector&) const = default;
};

struct RegistrationConfig {
  int n_tiles = 10;
  int tile_size = 1024;      // global-stage tile edge, working resolution
  int local_tile = 256;      // per-candidate refinement tile edge, full res
  int max_shift = 512;       // full-resolution shift bound
  int max_local_shift = 32;  // residual bound for the per-candidate stage
  int global_downsample = 4; // working resolution of the coarse pass
  double min_tissue_fraction = 0.5;

  void validate() const {
    if (n_tiles < 1) throw Error(ErrorCode::precondition, "n_tiles must be >= 1");
    if (tile_size < 16 || local_tile < 16)
      throw Error(ErrorCode::precondition, "registration tiles too small");
    if (global_downsample < 1)
      throw Error(ErrorCode::precondition, "global_downsample must be >= 1");
  }
};

// Zero-mean circular cross-correlation of two equally-sized tiles, computed
// in the frequency domain. The returned shift v maximizes the correlation,
// i.e. b looks like a translated by v (b(p) ~ a(p - v)); ties resolve to the
// smallest |v| and then lexicographic (dx, dy). The full correlation map is
// returned for trial averaging.
struct CorrelationResult {
  ShiftVector shift;
  Eigen::ArrayXXd map;  // (height, width), wrap-around indexed
};
CorrelationResult cross_correlate_shift(const ImageF& a, const ImageF& b);

// Correlation map only (throws DegenerateTile on constant tiles).
Eigen::ArrayXXd correlation_map(const ImageF& a, const ImageF& b);

// Argmax of a correlation map folded into signed shifts, restricted to
// |dx|,|dy| <= max_shift when max_shift >= 0.
ShiftVector correlation_argmax(const Eigen::ArrayXXd& map, int max_shift = -1);

// Argmax restricted to the square window of the given radius around `center`;
// ties resolve toward the center.
ShiftVector correlation_argmax_near(const Eigen::ArrayXXd& map, ShiftVector center,
                                    int radius);

struct GlobalRegistration {
  ShiftVector shift;
  std::vector<ShiftVector> trial_shifts;  // per-tile argmaxes (diagnostics)
  int degenerate_tiles = 0;
};

// Two-pass global alignment: tile correlations at a downsampled working
// resolution are averaged across n_tiles random tissue positions, then a
// full-resolution pass at the same positions removes the downsampling
// quantization. Degenerate (constant) tiles contribute nothing.
GlobalRegistration global_register(const ImageF& a, const ImageF& b, const TissueMask& mask,
                                   const RegistrationConfig& cfg, Rng& rng);

// Same, with explicit full-resolution tile positions (top-left corners).
GlobalRegistration global_register_at(const ImageF& a, const ImageF& b,
                                      const std::vector<std::pair<int, int>>& positions,
                                      const RegistrationConfig& cfg);

struct LocalRegistration {
  double x = 0, y = 0;        // refined coordinate in a's frame
  ShiftVector local;          // residual shift found by the tile pair
  bool fallback = false;      // true when only the global shift was applied
};

// Refines one candidate position (given in b's coordinates) by correlating a
// local tile pair centered on it; windows are clamped at image borders. A
// degenerate tile falls back to the global shift alone.
LocalRegistration local_register(double bx, double by, const ImageF& a, const ImageF& b,
                                 ShiftVector global, const RegistrationConfig& cfg);

}  // namespace mito
