#pragma once

#include <Eigen/Dense>

#include "mito/common.hpp"
#include "mito/image.hpp"

namespace mito {

// Dense feature map: `data` has one row per channel, columns are row-major
// spatial positions (y * width + x). This layout makes convolution a GEMM
// against an im2col matrix.
template <typename Scalar>
struct Tensor {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  int channels = 0, height = 0, width = 0;
  Matrix data;

  Tensor() = default;
  Tensor(int c, int h, int w) : channels(c), height(h), width(w) {
    data = Matrix::Zero(c, Eigen::Index(h) * w);
  }

  Eigen::Index spatial() const { return Eigen::Index(height) * width; }

  Scalar& at(int c, int y, int x) { return data(c, Eigen::Index(y) * width + x); }
  Scalar at(int c, int y, int x) const { return data(c, Eigen::Index(y) * width + x); }

  static Tensor from_image(const Image<Scalar>& img) {
    Tensor t(img.channels(), img.height(), img.width());
    using RowMajorMap = Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic,
                                                       Eigen::Dynamic, Eigen::RowMajor>>;
    t.data = RowMajorMap(img.data(), img.channels(), t.spatial());
    return t;
  }
};

}  // namespace mito
