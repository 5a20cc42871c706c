#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mito/common.hpp"
#include "mito/image.hpp"
#include "mito/rng.hpp"
#include "mito/stain.hpp"

namespace mito {

// Augmentation families. R rotation/mirror, S scaling, E elastic, C stain
// color, H brightness/contrast/color enhancement, B blur, G gaussian noise,
// T translation (realized as the random crop offset).
struct AugmentFamilies {
  bool rotation = true;   // R
  bool scale = true;      // S
  bool elastic = true;    // E
  bool stain = true;      // C
  bool enhance = true;    // H
  bool blur = true;       // B
  bool noise = true;      // G
  bool translate = true;  // T

  static AugmentFamilies none() { return {false, false, false, false, false, false, false, false}; }
  static AugmentFamilies all() { return {}; }

  static AugmentFamilies from_string(const std::string& letters) {
    AugmentFamilies f = none();
    for (char ch : letters) {
      switch (ch) {
        case 'R': f.rotation = true; break;
        case 'S': f.scale = true; break;
        case 'E': f.elastic = true; break;
        case 'C': f.stain = true; break;
        case 'H': f.enhance = true; break;
        case 'B': f.blur = true; break;
        case 'G': f.noise = true; break;
        case 'T': f.translate = true; break;
        default:
          throw Error(ErrorCode::bad_config, std::string("unknown augmentation family: ") + ch);
      }
    }
    return f;
  }

  std::string to_string() const {
    std::string s;
    if (rotation) s += 'R';
    if (scale) s += 'S';
    if (elastic) s += 'E';
    if (stain) s += 'C';
    if (enhance) s += 'H';
    if (blur) s += 'B';
    if (noise) s += 'G';
    if (translate) s += 'T';
    return s;
  }
};

struct AugmentConfig {
  double zoom_min = 0.75, zoom_max = 1.25;
  double elastic_alpha = 100.0, elastic_sigma = 10.0;
  double color_min = 0.75, color_max = 1.5;
  double contrast_min = 0.75, contrast_max = 1.5;
  double brightness_min = 0.75, brightness_max = 1.25;
  double blur_sigma_min = 0.0, blur_sigma_max = 2.0;
  double noise_std_min = 0.0, noise_std_max = 0.1;
  StainAugmentParams stain_params;
  int crop_size = 100;
  int input_size = 128;
  AugmentFamilies families;

  void validate() const {
    if (zoom_min > zoom_max || color_min > color_max || contrast_min > contrast_max ||
        brightness_min > brightness_max || blur_sigma_min > blur_sigma_max ||
        noise_std_min > noise_std_max)
      throw Error(ErrorCode::bad_config, "augmentation range is empty");
    if (crop_size > input_size)
      throw Error(ErrorCode::bad_config, "crop_size must be <= input_size");
    if (elastic_sigma <= 0.0 || elastic_alpha < 0.0)
      throw Error(ErrorCode::bad_config, "elastic parameters out of range");
    stain_params.validate();
  }
};

// k-th element of the square's dihedral group: k = r + 4*m, r clockwise
// 90-degree rotations after an optional horizontal mirror.
template <typename Scalar>
Image<Scalar> dihedral(const Image<Scalar>& p, int k) {
  if (k < 0 || k > 7) throw Error(ErrorCode::invalid_index, "dihedral index must be in [0,7]");
  int r = k & 3;
  bool mirror = (k >> 2) != 0;
  int ow = (r % 2 == 0) ? p.width() : p.height();
  int oh = (r % 2 == 0) ? p.height() : p.width();
  Image<Scalar> out(ow, oh, p.channels());
  for (int c = 0; c < p.channels(); ++c)
    for (int y = 0; y < p.height(); ++y)
      for (int x = 0; x < p.width(); ++x) {
        int sx = mirror ? p.width() - 1 - x : x;
        int tx = x, ty = y;
        switch (r) {
          case 0: tx = sx; ty = y; break;
          case 1: tx = p.height() - 1 - y; ty = sx; break;
          case 2: tx = p.width() - 1 - sx; ty = p.height() - 1 - y; break;
          case 3: tx = y; ty = p.width() - 1 - sx; break;
        }
        out.at(tx, ty, c) = p.at(sx, y, c);
      }
  return out;
}

// Bilinear zoom about the image center; output keeps the input dimensions,
// out-of-range samples are reflect-padded (factor < 1) or cropped (factor > 1).
template <typename Scalar>
Image<Scalar> scale(const Image<Scalar>& p, double factor) {
  if (!(factor > 0.0)) throw Error(ErrorCode::precondition, "scale factor must be > 0");
  Image<Scalar> out = p.like();
  double cx = (p.width() - 1) / 2.0;
  double cy = (p.height() - 1) / 2.0;
  for (int c = 0; c < p.channels(); ++c)
    for (int y = 0; y < p.height(); ++y) {
      double sy = cy + (y - cy) / factor;
      for (int x = 0; x < p.width(); ++x)
        out.at(x, y, c) = sample_bilinear_reflect(p, cx + (x - cx) / factor, sy, c);
    }
  return out;
}

namespace detail {

// Normalized 1D gaussian taps, truncated at 3 sigma.
inline std::vector<double> gaussian_kernel(double sigma) {
  int radius = std::max(1, int(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + radius];
  }
  for (auto& v : k) v /= sum;
  return k;
}

template <typename Derived>
Eigen::ArrayXXd separable_blur(const Eigen::ArrayBase<Derived>& in, double sigma) {
  const std::vector<double> k = gaussian_kernel(sigma);
  const int radius = int(k.size() / 2);
  const int h = int(in.rows()), w = int(in.cols());
  Eigen::ArrayXXd tmp(h, w), out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += k[i + radius] * in(y, reflect_index(x + i, w));
      tmp(y, x) = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += k[i + radius] * tmp(reflect_index(y + i, h), x);
      out(y, x) = acc;
    }
  return out;
}

}  // namespace detail

// Random elastic warp: per-pixel displacements ~ U(-1,1), gaussian-smoothed
// with std `sigma`, scaled by `alpha`, applied with bilinear sampling.
template <typename Scalar>
Image<Scalar> elastic(const Image<Scalar>& p, double alpha, double sigma, Rng& rng) {
  if (alpha < 0.0 || !(sigma > 0.0))
    throw Error(ErrorCode::precondition, "elastic needs alpha >= 0, sigma > 0");
  Eigen::ArrayXXd dx(p.height(), p.width()), dy(p.height(), p.width());
  for (int y = 0; y < p.height(); ++y)
    for (int x = 0; x < p.width(); ++x) dx(y, x) = rng.uniform(-1.0, 1.0);
  for (int y = 0; y < p.height(); ++y)
    for (int x = 0; x < p.width(); ++x) dy(y, x) = rng.uniform(-1.0, 1.0);
  if (alpha == 0.0) return p;
  dx = detail::separable_blur(dx, sigma) * alpha;
  dy = detail::separable_blur(dy, sigma) * alpha;
  Image<Scalar> out = p.like();
  for (int c = 0; c < p.channels(); ++c)
    for (int y = 0; y < p.height(); ++y)
      for (int x = 0; x < p.width(); ++x)
        out.at(x, y, c) =
            sample_bilinear_reflect(p, x + dx(y, x), y + dy(y, x), c);
  return out;
}

// Color, contrast and brightness enhancement, applied in that order.
// color:      pixel <- gray + c * (pixel - gray), gray = Rec.601 luminance
// contrast:   pixel <- mean_gray + k * (pixel - mean_gray)
// brightness: pixel <- b * pixel
template <typename Scalar>
Image<Scalar> enhance(const Image<Scalar>& p, double brightness, double contrast,
                      double color) {
  if (!(brightness > 0.0) || !(contrast > 0.0) || !(color > 0.0))
    throw Error(ErrorCode::precondition, "enhancement factors must be > 0");
  Image<Scalar> out = p.like();
  Image<Scalar> gray = luminance(p);
  for (int c = 0; c < 3; ++c)
    out.plane(c) = gray.plane(0) + Scalar(color) * (p.plane(c) - gray.plane(0));
  double mean_gray = double(luminance(out).plane(0).mean());
  for (int c = 0; c < 3; ++c)
    out.plane(c) = Scalar(brightness) *
                   (Scalar(mean_gray) + Scalar(contrast) * (out.plane(c) - Scalar(mean_gray)));
  out.clamp01();
  return out;
}

// Separable gaussian blur with reflect border; sigma = 0 is the identity.
template <typename Scalar>
Image<Scalar> blur(const Image<Scalar>& p, double sigma) {
  if (sigma < 0.0) throw Error(ErrorCode::precondition, "blur sigma must be >= 0");
  if (sigma == 0.0) return p;
  Image<Scalar> out = p.like();
  for (int c = 0; c < p.channels(); ++c)
    out.plane(c) = detail::separable_blur(p.plane(c).template cast<double>(), sigma)
                       .template cast<Scalar>();
  out.clamp01();
  return out;
}

// I.i.d. zero-mean gaussian noise, clipped back to [0,1].
template <typename Scalar>
Image<Scalar> noise(const Image<Scalar>& p, double std, Rng& rng) {
  if (std < 0.0) throw Error(ErrorCode::precondition, "noise std must be >= 0");
  if (std == 0.0) return p;
  Image<Scalar> out = p;
  for (int c = 0; c < p.channels(); ++c)
    for (int y = 0; y < p.height(); ++y)
      for (int x = 0; x < p.width(); ++x)
        out.at(x, y, c) = Scalar(out.at(x, y, c) + std * rng.normal());
  out.clamp01();
  return out;
}

// Full training-time pipeline: dihedral -> scale -> elastic -> stain ->
// enhance -> blur -> noise -> translate-crop input_size^2 -> crop_size^2.
// Disabled families draw nothing; with everything disabled this is a
// deterministic center crop.
template <typename Scalar>
Image<Scalar> augment_patch(const Image<Scalar>& p, const AugmentConfig& cfg, Rng& rng,
                            const StainMatrix& stains = StainMatrix::ruifrok_hed()) {
  cfg.validate();
  if (p.width() != cfg.input_size || p.height() != cfg.input_size)
    throw Error(ErrorCode::bad_dimensions, "augment_patch input size mismatch");
  Image<Scalar> img = p;
  if (cfg.families.rotation) img = dihedral(img, int(rng.uniform_index(8)));
  if (cfg.families.scale) img = scale(img, rng.uniform(cfg.zoom_min, cfg.zoom_max));
  if (cfg.families.elastic) img = elastic(img, cfg.elastic_alpha, cfg.elastic_sigma, rng);
  if (cfg.families.stain) img = stain_augment(img, cfg.stain_params, rng, stains);
  if (cfg.families.enhance) {
    double color = rng.uniform(cfg.color_min, cfg.color_max);
    double contrast = rng.uniform(cfg.contrast_min, cfg.contrast_max);
    double brightness = rng.uniform(cfg.brightness_min, cfg.brightness_max);
    img = enhance(img, brightness, contrast, color);
  }
  if (cfg.families.blur) img = blur(img, rng.uniform(cfg.blur_sigma_min, cfg.blur_sigma_max));
  if (cfg.families.noise) img = noise(img, rng.uniform(cfg.noise_std_min, cfg.noise_std_max), rng);
  int slack = cfg.input_size - cfg.crop_size;
  int ox = slack / 2, oy = slack / 2;
  if (cfg.families.translate && slack > 0) {
    ox = int(rng.uniform_index(std::uint64_t(slack) + 1));
    oy = int(rng.uniform_index(std::uint64_t(slack) + 1));
  }
  return crop(img, ox, oy, cfg.crop_size, cfg.crop_size);
}

}  // namespace mito
