#pragma once

#include <Eigen/Dense>

#include "mito/common.hpp"
#include "mito/image.hpp"
#include "mito/rng.hpp"

namespace mito {

// Normalized optical-density basis for hematoxylin / eosin / DAB. Rows are
// unit-length OD absorption vectors; the inverse is precomputed once so the
// deconvolution path is a plain matrix product.
class StainMatrix {
 public:
  // Row-normalizes `raw` and caches the inverse. Throws SingularMatrix when a
  // row is (near) zero or the normalized matrix is not invertible.
  static StainMatrix normalized(const Eigen::Matrix3d& raw) {
    Eigen::Matrix3d m = raw;
    for (int r = 0; r < 3; ++r) {
      double n = m.row(r).norm();
      if (n < 1e-12)
        throw Error(ErrorCode::singular_matrix, "stain matrix has a zero row");
      m.row(r) /= n;
    }
    double det = m.determinant();
    if (std::abs(det) < 1e-9)
      throw Error(ErrorCode::singular_matrix, "normalized stain matrix is singular");
    return StainMatrix(m, m.inverse());
  }

  // Ruifrok H&E+DAB basis (rows renormalized).
  static const StainMatrix& ruifrok_hed() {
    static const StainMatrix m = normalized((Eigen::Matrix3d() <<
        0.65, 0.70, 0.29,
        0.07, 0.99, 0.11,
        0.27, 0.57, 0.78).finished());
    return m;
  }

  const Eigen::Matrix3d& rows() const { return m_; }
  const Eigen::Matrix3d& inverse() const { return inv_; }
  Eigen::Vector3d row(int i) const { return m_.row(i); }

 private:
  StainMatrix(const Eigen::Matrix3d& m, const Eigen::Matrix3d& inv) : m_(m), inv_(inv) {}
  Eigen::Matrix3d m_;
  Eigen::Matrix3d inv_;
};

struct StainAugmentParams {
  double sigma = 0.05;
  bool enable_h = true;
  bool enable_e = true;
  bool enable_d = true;

  double alpha_min() const { return 1.0 - sigma; }
  double alpha_max() const { return 1.0 + sigma; }
  double beta_min() const { return -sigma; }
  double beta_max() const { return sigma; }
  bool enabled(int channel) const {
    return channel == 0 ? enable_h : channel == 1 ? enable_e : enable_d;
  }

  void validate() const {
    if (sigma < 0.0 || sigma > 0.5)
      throw Error(ErrorCode::precondition, "stain sigma must be in [0, 0.5]");
  }
};

constexpr double kStainEps = 1e-6;

// RGB reflectance -> HED concentrations: S = -log(P + eps) * M^-1.
template <typename Scalar>
Image<Scalar> rgb_to_hed(const Image<Scalar>& p, const StainMatrix& m,
                         double eps = kStainEps) {
  if (p.channels() != 3) throw Error(ErrorCode::bad_dimensions, "rgb_to_hed needs RGB");
  if (!(eps > 0.0)) throw Error(ErrorCode::precondition, "eps must be > 0");
  Image<Scalar> s(p.width(), p.height(), 3);
  Eigen::Matrix<Scalar, 3, 3> inv = m.inverse().template cast<Scalar>();
  s.pixels() = (-((p.pixels().array() + Scalar(eps)).log())).matrix() * inv;
  return s;
}

// HED concentrations -> RGB reflectance: P = exp(-S * M) - eps, clipped to [0,1].
template <typename Scalar>
Image<Scalar> hed_to_rgb(const Image<Scalar>& s, const StainMatrix& m,
                         double eps = kStainEps) {
  if (s.channels() != 3) throw Error(ErrorCode::bad_dimensions, "hed_to_rgb needs HED");
  Image<Scalar> p(s.width(), s.height(), 3);
  Eigen::Matrix<Scalar, 3, 3> rows = m.rows().template cast<Scalar>();
  p.pixels() = ((-(s.pixels() * rows)).array().exp() - Scalar(eps)).matrix();
  p.clamp01();
  return p;
}

// Per-channel affine jitter in HED space: S'_i = alpha_i * S_i + beta_i with
// alpha_i ~ U(1-sigma, 1+sigma), beta_i ~ U(-sigma, sigma). alpha/beta are
// drawn for all three channels on every call (stable stream alignment) and
// applied only to enabled ones.
template <typename Scalar>
Image<Scalar> stain_augment(const Image<Scalar>& p, const StainAugmentParams& params,
                            Rng& rng, const StainMatrix& m = StainMatrix::ruifrok_hed(),
                            double eps = kStainEps) {
  params.validate();
  Image<Scalar> s = rgb_to_hed(p, m, eps);
  for (int c = 0; c < 3; ++c) {
    double alpha = rng.uniform(params.alpha_min(), params.alpha_max());
    double beta = rng.uniform(params.beta_min(), params.beta_max());
    if (!params.enabled(c)) continue;
    s.plane(c) = Scalar(alpha) * s.plane(c) + Scalar(beta);
  }
  return hed_to_rgb(s, m, eps);
}

}  // namespace mito
