#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "mito/common.hpp"

namespace mito {

// Planar raster image. Pixel values are reflectance in [0, 1] for RGB data;
// stain-concentration images reuse the same container with unconstrained
// values. Plane c is contiguous, row-major: data[c*w*h + y*w + x].
template <typename Scalar>
class Image {
 public:
  using PlaneMap =
      Eigen::Map<Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  using ConstPlaneMap =
      Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  // N x channels view; column c is stain/color channel c.
  using PixelMap = Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>, 0,
                              Eigen::OuterStride<>>;
  using ConstPixelMap =
      Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>, 0,
                 Eigen::OuterStride<>>;

  Image() = default;
  Image(int width, int height, int channels, Scalar fill = Scalar(0))
      : width_(width), height_(height), channels_(channels),
        data_(std::size_t(width) * height * channels, fill) {
    if (width < 1 || height < 1 || channels < 1)
      throw Error(ErrorCode::bad_dimensions, "image dimensions must be >= 1");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return std::size_t(width_) * height_; }
  bool empty() const { return data_.empty(); }

  Scalar& at(int x, int y, int c) { return data_[idx(x, y, c)]; }
  Scalar at(int x, int y, int c) const { return data_[idx(x, y, c)]; }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  PlaneMap plane(int c) {
    return PlaneMap(data_.data() + c * pixel_count(), height_, width_);
  }
  ConstPlaneMap plane(int c) const {
    return ConstPlaneMap(data_.data() + c * pixel_count(), height_, width_);
  }

  PixelMap pixels() {
    return PixelMap(data_.data(), Eigen::Index(pixel_count()), channels_,
                    Eigen::OuterStride<>(Eigen::Index(pixel_count())));
  }
  ConstPixelMap pixels() const {
    return ConstPixelMap(data_.data(), Eigen::Index(pixel_count()), channels_,
                         Eigen::OuterStride<>(Eigen::Index(pixel_count())));
  }

  Image like() const { return Image(width_, height_, channels_); }

  void clamp01() {
    for (auto& v : data_) v = v < Scalar(0) ? Scalar(0) : (v > Scalar(1) ? Scalar(1) : v);
  }

  template <typename Other>
  Image<Other> cast() const {
    Image<Other> out(width_, height_, channels_);
    for (std::size_t i = 0; i < data_.size(); ++i) out.data()[i] = Other(data_[i]);
    return out;
  }

 private:
  std::size_t idx(int x, int y, int c) const {
    return std::size_t(c) * pixel_count() + std::size_t(y) * width_ + x;
  }

  int width_ = 0, height_ = 0, channels_ = 0;
  std::vector<Scalar> data_;
};

using ImageF = Image<float>;
using ImageD = Image<double>;

// Mirrored ("symmetric") border fold of index i into [0, n).
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -1 - i;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

template <typename Scalar>
Scalar sample_bilinear_reflect(const Image<Scalar>& img, double x, double y, int c) {
  int x0 = int(std::floor(x));
  int y0 = int(std::floor(y));
  double fx = x - x0;
  double fy = y - y0;
  int x0r = reflect_index(x0, img.width());
  int x1r = reflect_index(x0 + 1, img.width());
  int y0r = reflect_index(y0, img.height());
  int y1r = reflect_index(y0 + 1, img.height());
  double v00 = img.at(x0r, y0r, c);
  double v10 = img.at(x1r, y0r, c);
  double v01 = img.at(x0r, y1r, c);
  double v11 = img.at(x1r, y1r, c);
  double top = v00 + fx * (v10 - v00);
  double bot = v01 + fx * (v11 - v01);
  return Scalar(top + fy * (bot - top));
}

// Rec.601 luminance of an RGB image; single-channel result.
template <typename Scalar>
Image<Scalar> luminance(const Image<Scalar>& img) {
  if (img.channels() != 3)
    throw Error(ErrorCode::bad_dimensions, "luminance needs a 3-channel image");
  Image<Scalar> out(img.width(), img.height(), 1);
  out.plane(0) = Scalar(0.299) * img.plane(0) + Scalar(0.587) * img.plane(1) +
                 Scalar(0.114) * img.plane(2);
  return out;
}

// Mean over channels per pixel (the detector's "mean RGB intensity").
template <typename Scalar>
Image<Scalar> channel_mean(const Image<Scalar>& img) {
  Image<Scalar> out(img.width(), img.height(), 1);
  auto p = out.plane(0);
  p.setZero();
  for (int c = 0; c < img.channels(); ++c) p += img.plane(c);
  p /= Scalar(img.channels());
  return out;
}

// In-bounds crop.
template <typename Scalar>
Image<Scalar> crop(const Image<Scalar>& img, int x, int y, int w, int h) {
  if (x < 0 || y < 0 || w < 1 || h < 1 || x + w > img.width() || y + h > img.height())
    throw Error(ErrorCode::bad_dimensions, "crop window out of bounds");
  Image<Scalar> out(w, h, img.channels());
  for (int c = 0; c < img.channels(); ++c)
    out.plane(c) = img.plane(c).block(y, x, h, w);
  return out;
}

// Crop centered at (cx, cy); parts outside the image are reflect-padded.
template <typename Scalar>
Image<Scalar> crop_reflect(const Image<Scalar>& img, int x, int y, int w, int h) {
  Image<Scalar> out(w, h, img.channels());
  for (int c = 0; c < img.channels(); ++c)
    for (int yy = 0; yy < h; ++yy) {
      int sy = reflect_index(y + yy, img.height());
      for (int xx = 0; xx < w; ++xx)
        out.at(xx, yy, c) = img.at(reflect_index(x + xx, img.width()), sy, c);
    }
  return out;
}

// Box-mean downsample by an integer factor (trailing remainder pixels are
// averaged into the last cell).
template <typename Scalar>
Image<Scalar> downsample_mean(const Image<Scalar>& img, int factor) {
  if (factor < 1) throw Error(ErrorCode::bad_dimensions, "downsample factor must be >= 1");
  if (factor == 1) return img;
  int ow = (img.width() + factor - 1) / factor;
  int oh = (img.height() + factor - 1) / factor;
  Image<Scalar> out(ow, oh, img.channels());
  for (int c = 0; c < img.channels(); ++c)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        int x0 = ox * factor, x1 = std::min(img.width(), x0 + factor);
        int y0 = oy * factor, y1 = std::min(img.height(), y0 + factor);
        double acc = 0.0;
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) acc += img.at(x, y, c);
        out.at(ox, oy, c) = Scalar(acc / ((x1 - x0) * (y1 - y0)));
      }
  return out;
}

}  // namespace mito
