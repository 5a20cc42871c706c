#include "mito/registration.hpp"

#include <unsupported/Eigen/FFT>

#include <complex>

namespace mito {

namespace {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;

// In-place 2D FFT by running 1D transforms over rows then columns.
void fft2(ComplexMatrix& m, bool inverse) {
  Eigen::FFT<double> fft;
  std::vector<Complex> buf, out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    buf.assign(m.row(r).begin(), m.row(r).end());
    out.resize(buf.size());
    if (inverse) fft.inv(out, buf); else fft.fwd(out, buf);
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = out[std::size_t(c)];
  }
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    buf.assign(m.col(c).begin(), m.col(c).end());
    out.resize(buf.size());
    if (inverse) fft.inv(out, buf); else fft.fwd(out, buf);
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = out[std::size_t(r)];
  }
}

Eigen::ArrayXXd zero_mean_luminance(const ImageF& img) {
  Image<float> lum = img.channels() == 1 ? img : luminance(img);
  Eigen::ArrayXXd m(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) m(y, x) = lum.at(x, y, 0);
  m -= m.mean();
  return m;
}

int fold_signed(int idx, int n) { return idx <= n / 2 ? idx : idx - n; }

}  // namespace

Eigen::ArrayXXd correlation_map(const ImageF& a, const ImageF& b) {
  if (a.width() != b.width() || a.height() != b.height())
    throw Error(ErrorCode::bad_dimensions, "correlation tiles must share dimensions");
  Eigen::ArrayXXd am = zero_mean_luminance(a);
  Eigen::ArrayXXd bm = zero_mean_luminance(b);
  if (am.abs().maxCoeff() < 1e-9 || bm.abs().maxCoeff() < 1e-9)
    throw Error(ErrorCode::degenerate_tile, "constant tile has no correlation peak");

  ComplexMatrix fa = am.matrix().cast<Complex>();
  ComplexMatrix fb = bm.matrix().cast<Complex>();
  fft2(fa, false);
  fft2(fb, false);
  ComplexMatrix cross = fa.conjugate().cwiseProduct(fb);
  fft2(cross, true);
  return cross.real().array();
}

ShiftVector correlation_argmax(const Eigen::ArrayXXd& map, int max_shift) {
  const int h = int(map.rows()), w = int(map.cols());
  bool found = false;
  double best = 0.0;
  ShiftVector best_shift;
  long long best_norm = 0;
  for (int r = 0; r < h; ++r) {
    int dy = fold_signed(r, h);
    if (max_shift >= 0 && std::abs(dy) > max_shift) continue;
    for (int c = 0; c < w; ++c) {
      int dx = fold_signed(c, w);
      if (max_shift >= 0 && std::abs(dx) > max_shift) continue;
      double v = map(r, c);
      long long norm = (long long)dx * dx + (long long)dy * dy;
      bool take = !found || v > best ||
                  (v == best && (norm < best_norm ||
                                 (norm == best_norm &&
                                  (dx < best_shift.dx ||
                                   (dx == best_shift.dx && dy < best_shift.dy)))));
      if (take) {
        found = true;
        best = v;
        best_shift = {dx, dy};
        best_norm = norm;
      }
    }
  }
  if (!found) throw Error(ErrorCode::precondition, "empty correlation search window");
  return best_shift;
}

CorrelationResult cross_correlate_shift(const ImageF& a, const ImageF& b) {
  CorrelationResult res;
  res.map = correlation_map(a, b);
  res.shift = correlation_argmax(res.map);
  return res;
}

ShiftVector correlation_argmax_near(const Eigen::ArrayXXd& map, ShiftVector center,
                                    int radius) {
  const int h = int(map.rows()), w = int(map.cols());
  bool found = false;
  double best = 0.0;
  ShiftVector best_shift;
  long long best_norm = 0;
  for (int r = 0; r < h; ++r) {
    int dy = fold_signed(r, h);
    if (std::abs(dy - center.dy) > radius) continue;
    for (int c = 0; c < w; ++c) {
      int dx = fold_signed(c, w);
      if (std::abs(dx - center.dx) > radius) continue;
      double v = map(r, c);
      long long norm = (long long)(dx - center.dx) * (dx - center.dx) +
                       (long long)(dy - center.dy) * (dy - center.dy);
      bool take = !found || v > best ||
                  (v == best && (norm < best_norm ||
                                 (norm == best_norm &&
                                  (dx < best_shift.dx ||
                                   (dx == best_shift.dx && dy < best_shift.dy)))));
      if (take) {
        found = true;
        best = v;
        best_shift = {dx, dy};
        best_norm = norm;
      }
    }
  }
  if (!found) throw Error(ErrorCode::precondition, "empty correlation search window");
  return best_shift;
}

namespace {

struct PassResult {
  ShiftVector shift;
  std::vector<ShiftVector> trial_shifts;
  int degenerate = 0;
};

// One averaged-correlation pass. Tiles of edge `tile` are taken from `a` at
// the given positions and from `b` at position + offset; out-of-bounds
// windows are skipped and degenerate tiles contribute nothing.
PassResult averaged_pass(const ImageF& a, const ImageF& b,
                         const std::vector<std::pair<int, int>>& positions, int tile,
                         ShiftVector offset, int max_shift) {
  PassResult res;
  Eigen::ArrayXXd mean_map;
  int used = 0;
  for (auto [x, y] : positions) {
    int bx = x + offset.dx, by = y + offset.dy;
    if (x < 0 || y < 0 || x + tile > a.width() || y + tile > a.height()) continue;
    if (bx < 0 || by < 0 || bx + tile > b.width() || by + tile > b.height()) continue;
    try {
      Eigen::ArrayXXd map = correlation_map(crop(a, x, y, tile, tile),
                                            crop(b, bx, by, tile, tile));
      res.trial_shifts.push_back(correlation_argmax(map, max_shift));
      if (mean_map.size() == 0) mean_map = map;
      else mean_map += map;
      ++used;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::degenerate_tile) throw;
      res.degenerate += 1;
    }
  }
  if (used == 0)
    throw Error(ErrorCode::insufficient_tissue, "no usable registration tiles");
  mean_map /= double(used);
  res.shift = correlation_argmax(mean_map, max_shift);
  return res;
}

}  // namespace

GlobalRegistration global_register_at(const ImageF& a, const ImageF& b,
                                      const std::vector<std::pair<int, int>>& positions,
                                      const RegistrationConfig& cfg) {
  cfg.validate();
  const int ds = cfg.global_downsample;
  GlobalRegistration out;

  ShiftVector coarse{0, 0};
  if (ds > 1) {
    ImageF a_small = downsample_mean(a, ds);
    ImageF b_small = downsample_mean(b, ds);
    int tile_small = std::min(cfg.tile_size, std::min(a_small.width(), a_small.height()));
    std::vector<std::pair<int, int>> pos_small;
    pos_small.reserve(positions.size());
    for (auto [x, y] : positions) {
      int sx = std::clamp(x / ds, 0, std::max(0, a_small.width() - tile_small));
      int sy = std::clamp(y / ds, 0, std::max(0, a_small.height() - tile_small));
      pos_small.emplace_back(sx, sy);
    }
    PassResult pass = averaged_pass(a_small, b_small, pos_small, tile_small, {0, 0},
                                    (cfg.max_shift + ds - 1) / ds);
    coarse = {pass.shift.dx * ds, pass.shift.dy * ds};
    out.degenerate_tiles += pass.degenerate;
  }

  int tile_full = std::min(cfg.tile_size * (ds > 1 ? ds : 1),
                           std::min(a.width(), a.height()));
  // residual window: quantization of the coarse pass is at most one working
  // pixel in each direction
  int residual_window = ds > 1 ? 2 * ds : cfg.max_shift;
  PassResult fine = averaged_pass(a, b, positions, tile_full, coarse, residual_window);
  out.shift = {coarse.dx + fine.shift.dx, coarse.dy + fine.shift.dy};
  out.trial_shifts = fine.trial_shifts;
  out.degenerate_tiles += fine.degenerate;
  return out;
}

GlobalRegistration global_register(const ImageF& a, const ImageF& b, const TissueMask& mask,
                                   const RegistrationConfig& cfg, Rng& rng) {
  cfg.validate();
  if (a.width() != b.width() || a.height() != b.height())
    throw Error(ErrorCode::bad_dimensions, "slides must share dimensions");
  const int ds = cfg.global_downsample;
  const int tile_full = std::min(cfg.tile_size * (ds > 1 ? ds : 1),
                                 std::min(a.width(), a.height()));
  const int max_x = a.width() - tile_full;
  const int max_y = a.height() - tile_full;

  // Prefer positions whose shifted counterpart window stays in bounds for any
  // shift up to max_shift; fall back to the full range when the slide is too
  // small for that margin.
  int lo_x = cfg.max_shift, hi_x = max_x - cfg.max_shift;
  int lo_y = cfg.max_shift, hi_y = max_y - cfg.max_shift;
  if (lo_x > hi_x) { lo_x = 0; hi_x = max_x; }
  if (lo_y > hi_y) { lo_y = 0; hi_y = max_y; }

  std::vector<std::pair<int, int>> positions;
  const int max_attempts = cfg.n_tiles * 50;
  for (int attempt = 0; attempt < max_attempts && int(positions.size()) < cfg.n_tiles;
       ++attempt) {
    int x = hi_x > lo_x ? lo_x + int(rng.uniform_index(std::uint64_t(hi_x - lo_x) + 1)) : lo_x;
    int y = hi_y > lo_y ? lo_y + int(rng.uniform_index(std::uint64_t(hi_y - lo_y) + 1)) : lo_y;
    if (mask.fraction_in_window(x, y, tile_full, tile_full) < cfg.min_tissue_fraction)
      continue;
    positions.emplace_back(x, y);
  }
  if (int(positions.size()) < cfg.n_tiles)
    throw Error(ErrorCode::insufficient_tissue,
                "could not draw enough tissue tiles for registration");
  return global_register_at(a, b, positions, cfg);
}

LocalRegistration local_register(double bx, double by, const ImageF& a, const ImageF& b,
                                 ShiftVector global, const RegistrationConfig& cfg) {
  cfg.validate();
  LocalRegistration out;
  const int tile = std::min({cfg.local_tile, a.width(), a.height(), b.width(), b.height()});
  double ax = bx - global.dx;
  double ay = by - global.dy;

  int ax0 = std::clamp(int(std::lround(ax)) - tile / 2, 0, a.width() - tile);
  int ay0 = std::clamp(int(std::lround(ay)) - tile / 2, 0, a.height() - tile);
  int bx0 = std::clamp(int(std::lround(bx)) - tile / 2, 0, b.width() - tile);
  int by0 = std::clamp(int(std::lround(by)) - tile / 2, 0, b.height() - tile);

  try {
    Eigen::ArrayXXd map = correlation_map(crop(a, ax0, ay0, tile, tile),
                                          crop(b, bx0, by0, tile, tile));
    // With clamped windows the zero-jitter correlation peak sits at
    // `expected` rather than zero; the residual jitter is the deviation from
    // it, searched within max_local_shift.
    ShiftVector expected{ax0 + global.dx - bx0, ay0 + global.dy - by0};
    ShiftVector w = correlation_argmax_near(map, expected, cfg.max_local_shift);
    out.local = {w.dx - expected.dx, w.dy - expected.dy};
    out.x = bx - global.dx - out.local.dx;
    out.y = by - global.dy - out.local.dy;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::degenerate_tile) throw;
    out.fallback = true;
    out.x = ax;
    out.y = ay;
  }
  return out;
}

}  // namespace mito
