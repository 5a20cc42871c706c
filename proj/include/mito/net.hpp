#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <vector>

#include "mito/common.hpp"
#include "mito/rng.hpp"
#include "mito/tensor.hpp"

namespace mito {

// Output channel conventions for the two-class mitosis head.
constexpr int kClassMitosis = 0;
constexpr int kClassBackground = 1;

enum class LayerKind : std::uint32_t {
  conv = 1,
  maxpool = 2,
  dense = 3,
  dropout = 4,
  leaky_relu = 5,
  relu = 6,
  softmax = 7,
};

struct LayerSpec {
  LayerKind kind;
  int filters = 0;       // conv out channels / dense units
  int kernel_h = 0, kernel_w = 0;
  int stride = 1;
  double rate = 0.0;     // dropout keep-out probability

  static LayerSpec conv2d(int filters, int kernel, int stride) {
    return {LayerKind::conv, filters, kernel, kernel, stride, 0.0};
  }
  static LayerSpec maxpool2d(int kernel = 2, int stride = 2) {
    return {LayerKind::maxpool, 0, kernel, kernel, stride, 0.0};
  }
  static LayerSpec dense_units(int units) { return {LayerKind::dense, units, 0, 0, 1, 0.0}; }
  static LayerSpec dropout_rate(double rate) { return {LayerKind::dropout, 0, 0, 0, 1, rate}; }
  static LayerSpec leaky() { return {LayerKind::leaky_relu, 0, 0, 0, 1, 0.0}; }
  static LayerSpec relu_spec() { return {LayerKind::relu, 0, 0, 0, 1, 0.0}; }
  static LayerSpec softmax_spec() { return {LayerKind::softmax, 0, 0, 0, 1, 0.0}; }
};

struct NetworkSpec {
  double gamma = 1.0;
  int input_size = 100;
  int channels = 3;
  std::vector<LayerSpec> layers;
};

constexpr double kLeakySlope = 0.01;
constexpr double kDefaultDropout = 0.5;

// All-convolutional detector column: nine leaky-ReLU convs with width
// proportional to gamma, dropout, then a 1x1 two-class softmax head. Valid
// padding throughout, so a 100x100 input reduces to a 1x1x2 output.
NetworkSpec build_network(double gamma);

// conv+maxpool x5 with a 2048-unit hidden dense layer; the classifier used on
// stain-reference candidates. `scale` shrinks the widths like gamma does.
NetworkSpec build_pooled_network(double scale = 1.0);

long long param_count(const NetworkSpec& spec);

// Spatial size after each layer for a square input of `input` pixels.
std::vector<int> spatial_sizes(const NetworkSpec& spec, int input);

// Channel count after each layer.
std::vector<int> channel_counts(const NetworkSpec& spec);

struct NetGeometry {
  int receptive_field = 1;
  int stride = 1;
};

// Receptive field and output stride of a fully-convolutional spec. Throws
// ShapeMismatch when the spec contains a dense layer.
NetGeometry conv_geometry(const NetworkSpec& spec);

template <typename Scalar>
struct Model {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  NetworkSpec spec;
  std::vector<Matrix> weights;  // per layer; empty for parameterless layers
  std::vector<Vector> biases;

  // training metadata
  int trained_epoch = -1;
  double val_f1 = 0.0;

  template <typename Other>
  Model<Other> cast() const {
    Model<Other> out;
    out.spec = spec;
    out.weights.reserve(weights.size());
    out.biases.reserve(biases.size());
    for (const auto& w : weights) out.weights.push_back(w.template cast<Other>());
    for (const auto& b : biases) out.biases.push_back(b.template cast<Other>());
    out.trained_epoch = trained_epoch;
    out.val_f1 = val_f1;
    return out;
  }
};

using ModelF = Model<float>;

namespace detail {

// (channels, height, width) walk used by init/forward shape checks.
struct Shape3 {
  int c, h, w;
};

inline Shape3 layer_output_shape(const LayerSpec& l, Shape3 in) {
  switch (l.kind) {
    case LayerKind::conv: {
      if (in.h < l.kernel_h || in.w < l.kernel_w)
        throw Error(ErrorCode::shape_mismatch, "input smaller than conv kernel");
      return {l.filters, (in.h - l.kernel_h) / l.stride + 1,
              (in.w - l.kernel_w) / l.stride + 1};
    }
    case LayerKind::maxpool: {
      if (in.h < l.kernel_h || in.w < l.kernel_w)
        throw Error(ErrorCode::shape_mismatch, "input smaller than pool kernel");
      return {in.c, (in.h - l.kernel_h) / l.stride + 1,
              (in.w - l.kernel_w) / l.stride + 1};
    }
    case LayerKind::dense:
      return {l.filters, 1, 1};
    default:
      return in;
  }
}

}  // namespace detail

// He-initialized weights, zero biases. Deterministic given the rng state.
template <typename Scalar>
Model<Scalar> init_model(const NetworkSpec& spec, Rng& rng) {
  Model<Scalar> m;
  m.spec = spec;
  detail::Shape3 shape{spec.channels, spec.input_size, spec.input_size};
  for (const LayerSpec& l : spec.layers) {
    typename Model<Scalar>::Matrix w;
    typename Model<Scalar>::Vector b;
    if (l.kind == LayerKind::conv) {
      int fan_in = shape.c * l.kernel_h * l.kernel_w;
      double std = std::sqrt(2.0 / fan_in);
      w.resize(l.filters, fan_in);
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index k = 0; k < w.cols(); ++k) w(r, k) = Scalar(rng.normal() * std);
      b = Model<Scalar>::Vector::Zero(l.filters);
    } else if (l.kind == LayerKind::dense) {
      long long fan_in = (long long)shape.c * shape.h * shape.w;
      double std = std::sqrt(2.0 / double(fan_in));
      w.resize(l.filters, Eigen::Index(fan_in));
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index k = 0; k < w.cols(); ++k) w(r, k) = Scalar(rng.normal() * std);
      b = Model<Scalar>::Vector::Zero(l.filters);
    }
    m.weights.push_back(std::move(w));
    m.biases.push_back(std::move(b));
    shape = detail::layer_output_shape(l, shape);
  }
  return m;
}

namespace detail {

// im2col for one block of output columns [n0, n1). Rows are (c, ky, kx) in
// that order; K = in_c * kh * kw.
template <typename Scalar>
void im2col_block(const Tensor<Scalar>& x, int kh, int kw, int stride, int out_w,
                  Eigen::Index n0, Eigen::Index n1,
                  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& cols) {
  const Eigen::Index n = n1 - n0;
  cols.resize(Eigen::Index(x.channels) * kh * kw, n);
  for (int c = 0; c < x.channels; ++c)
    for (int ky = 0; ky < kh; ++ky)
      for (int kx = 0; kx < kw; ++kx) {
        const Eigen::Index row = (Eigen::Index(c) * kh + ky) * kw + kx;
        for (Eigen::Index j = 0; j < n; ++j) {
          const Eigen::Index pos = n0 + j;
          const int oy = int(pos / out_w);
          const int ox = int(pos % out_w);
          cols(row, j) = x.at(c, oy * stride + ky, ox * stride + kx);
        }
      }
}

// Column-block size keeping im2col buffers around ~32 MB for float.
inline Eigen::Index col_block_size(Eigen::Index k_rows) {
  const Eigen::Index budget = (8 << 20);  // elements
  return std::max<Eigen::Index>(256, budget / std::max<Eigen::Index>(1, k_rows));
}

}  // namespace detail

template <typename Scalar>
struct LayerCache {
  Tensor<Scalar> input;
  std::vector<Eigen::Index> argmax;                        // maxpool
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> mask;  // dropout
};

// Fully-convolutional forward pass. With train_mode, dropout masks are drawn
// from `rng`; in eval mode dropout is the identity (inverted scaling at train
// time). When `caches` is given every layer input needed by backward is kept.
template <typename Scalar>
Tensor<Scalar> forward(const Model<Scalar>& m, const Tensor<Scalar>& x, bool train_mode = false,
                       Rng* rng = nullptr, std::vector<LayerCache<Scalar>>* caches = nullptr) {
  using Matrix = typename Model<Scalar>::Matrix;
  if (x.channels != m.spec.channels)
    throw Error(ErrorCode::shape_mismatch, "input channel count mismatch");
  if (caches) caches->assign(m.spec.layers.size(), {});
  Tensor<Scalar> cur = x;
  for (std::size_t li = 0; li < m.spec.layers.size(); ++li) {
    const LayerSpec& l = m.spec.layers[li];
    LayerCache<Scalar>* cache = caches ? &(*caches)[li] : nullptr;
    switch (l.kind) {
      case LayerKind::conv: {
        if (cur.height < l.kernel_h || cur.width < l.kernel_w)
          throw Error(ErrorCode::shape_mismatch, "input smaller than conv kernel");
        const int oh = (cur.height - l.kernel_h) / l.stride + 1;
        const int ow = (cur.width - l.kernel_w) / l.stride + 1;
        Tensor<Scalar> out(l.filters, oh, ow);
        const Matrix& w = m.weights[li];
        Matrix cols;
        const Eigen::Index block = detail::col_block_size(w.cols());
        for (Eigen::Index n0 = 0; n0 < out.spatial(); n0 += block) {
          const Eigen::Index n1 = std::min(out.spatial(), n0 + block);
          detail::im2col_block(cur, l.kernel_h, l.kernel_w, l.stride, ow, n0, n1, cols);
          out.data.middleCols(n0, n1 - n0).noalias() = w * cols;
        }
        out.data.colwise() += m.biases[li];
        if (cache) cache->input = std::move(cur);
        cur = std::move(out);
        break;
      }
      case LayerKind::maxpool: {
        const int oh = (cur.height - l.kernel_h) / l.stride + 1;
        const int ow = (cur.width - l.kernel_w) / l.stride + 1;
        Tensor<Scalar> out(cur.channels, oh, ow);
        if (cache) cache->argmax.resize(std::size_t(cur.channels) * oh * ow);
        for (int c = 0; c < cur.channels; ++c)
          for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
              Scalar best = cur.at(c, oy * l.stride, ox * l.stride);
              Eigen::Index best_idx = Eigen::Index(oy * l.stride) * cur.width + ox * l.stride;
              for (int ky = 0; ky < l.kernel_h; ++ky)
                for (int kx = 0; kx < l.kernel_w; ++kx) {
                  Scalar v = cur.at(c, oy * l.stride + ky, ox * l.stride + kx);
                  if (v > best) {
                    best = v;
                    best_idx = Eigen::Index(oy * l.stride + ky) * cur.width + ox * l.stride + kx;
                  }
                }
              out.at(c, oy, ox) = best;
              if (cache)
                cache->argmax[(std::size_t(c) * oh + oy) * ow + ox] = best_idx;
            }
        if (cache) cache->input = std::move(cur);
        cur = std::move(out);
        break;
      }
      case LayerKind::dense: {
        const Matrix& w = m.weights[li];
        if (cur.spatial() * cur.channels != w.cols())
          throw Error(ErrorCode::shape_mismatch, "dense layer input size mismatch");
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> flat(w.cols());
        Eigen::Index k = 0;
        for (int c = 0; c < cur.channels; ++c)
          for (Eigen::Index s = 0; s < cur.spatial(); ++s) flat(k++) = cur.data(c, s);
        Tensor<Scalar> out(l.filters, 1, 1);
        out.data.col(0).noalias() = w * flat;
        out.data.col(0) += m.biases[li];
        if (cache) cache->input = std::move(cur);
        cur = std::move(out);
        break;
      }
      case LayerKind::dropout: {
        if (train_mode) {
          if (!rng) throw Error(ErrorCode::precondition, "dropout in train mode needs an rng");
          Matrix mask(cur.data.rows(), cur.data.cols());
          const Scalar keep_scale = Scalar(1.0 / (1.0 - l.rate));
          for (Eigen::Index r = 0; r < mask.rows(); ++r)
            for (Eigen::Index cidx = 0; cidx < mask.cols(); ++cidx)
              mask(r, cidx) = rng->uniform() >= l.rate ? keep_scale : Scalar(0);
          cur.data = cur.data.cwiseProduct(mask);
          if (cache) cache->mask = std::move(mask);
        }
        break;
      }
      case LayerKind::leaky_relu: {
        if (cache) cache->input = cur;
        cur.data = cur.data.unaryExpr([](Scalar v) {
          return v > Scalar(0) ? v : Scalar(kLeakySlope) * v;
        });
        break;
      }
      case LayerKind::relu: {
        if (cache) cache->input = cur;
        cur.data = cur.data.cwiseMax(Scalar(0));
        break;
      }
      case LayerKind::softmax: {
        for (Eigen::Index n = 0; n < cur.data.cols(); ++n) {
          auto col = cur.data.col(n);
          Scalar mx = col.maxCoeff();
          col = (col.array() - mx).exp();
          col /= col.sum();
        }
        break;
      }
    }
  }
  return cur;
}

template <typename Scalar>
struct Gradients {
  using Matrix = typename Model<Scalar>::Matrix;
  using Vector = typename Model<Scalar>::Vector;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static Gradients zeros_like(const Model<Scalar>& m) {
    Gradients g;
    g.weights.reserve(m.weights.size());
    g.biases.reserve(m.biases.size());
    for (const auto& w : m.weights)
      g.weights.push_back(Matrix::Zero(w.rows(), w.cols()));
    for (const auto& b : m.biases) g.biases.push_back(Vector::Zero(b.size()));
    return g;
  }

  void add(const Gradients& other) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i].size()) weights[i] += other.weights[i];
      if (biases[i].size()) biases[i] += other.biases[i];
    }
  }

  void scale(Scalar s) {
    for (auto& w : weights)
      if (w.size()) w *= s;
    for (auto& b : biases)
      if (b.size()) b *= s;
  }
};

// Cross-entropy of one forward pass against per-position soft targets
// `target` (channels x positions, columns sum to 1). Accumulates parameter
// gradients into `grads` and returns the mean cross-entropy over positions.
// The spec's final layer must be softmax; its gradient is fused with the loss.
template <typename Scalar>
Scalar backward(const Model<Scalar>& m, const Tensor<Scalar>& x,
                const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& target,
                Gradients<Scalar>& grads, bool train_mode = true, Rng* rng = nullptr) {
  using Matrix = typename Model<Scalar>::Matrix;
  if (m.spec.layers.empty() || m.spec.layers.back().kind != LayerKind::softmax)
    throw Error(ErrorCode::shape_mismatch, "backward requires a softmax head");
  std::vector<LayerCache<Scalar>> caches;
  Tensor<Scalar> probs = forward(m, x, train_mode, rng, &caches);
  if (probs.data.rows() != target.rows() || probs.data.cols() != target.cols())
    throw Error(ErrorCode::shape_mismatch, "target shape mismatch");

  const Eigen::Index n_pos = probs.data.cols();
  Scalar loss = 0;
  for (Eigen::Index n = 0; n < n_pos; ++n)
    for (Eigen::Index c = 0; c < probs.data.rows(); ++c) {
      Scalar q = target(c, n);
      if (q > Scalar(0))
        loss -= q * std::log(std::max(probs.data(c, n), Scalar(1e-12)));
    }
  loss /= Scalar(n_pos);

  // dL/dlogits for softmax + cross-entropy, averaged over positions.
  Tensor<Scalar> delta = probs;
  delta.data = (probs.data - target) / Scalar(n_pos);

  for (int li = int(m.spec.layers.size()) - 2; li >= 0; --li) {
    const LayerSpec& l = m.spec.layers[std::size_t(li)];
    LayerCache<Scalar>& cache = caches[std::size_t(li)];
    switch (l.kind) {
      case LayerKind::conv: {
        const Tensor<Scalar>& in = cache.input;
        const int ow = delta.width;
        Tensor<Scalar> din(in.channels, in.height, in.width);
        const Matrix& w = m.weights[std::size_t(li)];
        Matrix cols, dcols;
        const Eigen::Index block = detail::col_block_size(w.cols());
        for (Eigen::Index n0 = 0; n0 < delta.spatial(); n0 += block) {
          const Eigen::Index n1 = std::min(delta.spatial(), n0 + block);
          detail::im2col_block(in, l.kernel_h, l.kernel_w, l.stride, ow, n0, n1, cols);
          auto dy = delta.data.middleCols(n0, n1 - n0);
          grads.weights[std::size_t(li)].noalias() += dy * cols.transpose();
          dcols.noalias() = w.transpose() * dy;
          // col2im scatter-add
          for (int c = 0; c < in.channels; ++c)
            for (int ky = 0; ky < l.kernel_h; ++ky)
              for (int kx = 0; kx < l.kernel_w; ++kx) {
                const Eigen::Index row = (Eigen::Index(c) * l.kernel_h + ky) * l.kernel_w + kx;
                for (Eigen::Index j = 0; j < n1 - n0; ++j) {
                  const Eigen::Index pos = n0 + j;
                  const int oy = int(pos / ow);
                  const int ox = int(pos % ow);
                  din.at(c, oy * l.stride + ky, ox * l.stride + kx) += dcols(row, j);
                }
              }
        }
        grads.biases[std::size_t(li)] += delta.data.rowwise().sum();
        delta = std::move(din);
        break;
      }
      case LayerKind::maxpool: {
        const Tensor<Scalar>& in = cache.input;
        Tensor<Scalar> din(in.channels, in.height, in.width);
        for (int c = 0; c < delta.channels; ++c)
          for (Eigen::Index s = 0; s < delta.spatial(); ++s)
            din.data(c, cache.argmax[std::size_t(c) * delta.spatial() + s]) += delta.data(c, s);
        delta = std::move(din);
        break;
      }
      case LayerKind::dense: {
        const Tensor<Scalar>& in = cache.input;
        const Matrix& w = m.weights[std::size_t(li)];
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> flat(w.cols());
        Eigen::Index k = 0;
        for (int c = 0; c < in.channels; ++c)
          for (Eigen::Index s = 0; s < in.spatial(); ++s) flat(k++) = in.data(c, s);
        grads.weights[std::size_t(li)].noalias() += delta.data.col(0) * flat.transpose();
        grads.biases[std::size_t(li)] += delta.data.col(0);
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> dflat = w.transpose() * delta.data.col(0);
        Tensor<Scalar> din(in.channels, in.height, in.width);
        k = 0;
        for (int c = 0; c < in.channels; ++c)
          for (Eigen::Index s = 0; s < in.spatial(); ++s) din.data(c, s) = dflat(k++);
        delta = std::move(din);
        break;
      }
      case LayerKind::dropout: {
        if (train_mode) delta.data = delta.data.cwiseProduct(cache.mask);
        break;
      }
      case LayerKind::leaky_relu: {
        delta.data = delta.data.binaryExpr(cache.input.data, [](Scalar d, Scalar v) {
          return v > Scalar(0) ? d : Scalar(kLeakySlope) * d;
        });
        break;
      }
      case LayerKind::relu: {
        delta.data = delta.data.binaryExpr(cache.input.data, [](Scalar d, Scalar v) {
          return v > Scalar(0) ? d : Scalar(0);
        });
        break;
      }
      case LayerKind::softmax:
        throw Error(ErrorCode::shape_mismatch, "softmax must be the final layer");
    }
  }
  return loss;
}

struct TrainConfig {
  double lr_start = 1e-3;
  double lr_end = 3e-5;
  int epochs = 20;
  double l2 = 1e-5;
  int batch = 64;
  double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  std::uint64_t seed = 0;
  int workers = 1;
  // Fixed gradient-accumulation grain; results are identical for any worker
  // count because chunks are reduced in index order.
  int chunk = 8;

  void validate() const {
    if (!(lr_start > lr_end) || !(lr_end > 0))
      throw Error(ErrorCode::bad_config, "need lr_start > lr_end > 0");
    if (epochs < 1) throw Error(ErrorCode::bad_config, "epochs must be >= 1");
    if (batch < 2 || batch % 2 != 0)
      throw Error(ErrorCode::bad_config, "batch must be even (balanced halves)");
  }
};

// Per-epoch geometric decay hitting lr_start at epoch 0 and lr_end at the
// final epoch exactly.
inline double lr_at_epoch(const TrainConfig& cfg, int epoch) {
  if (cfg.epochs <= 1) return cfg.lr_start;
  double t = double(epoch) / double(cfg.epochs - 1);
  return cfg.lr_start * std::pow(cfg.lr_end / cfg.lr_start, t);
}

template <typename Scalar>
struct AdamState {
  using Matrix = typename Model<Scalar>::Matrix;
  using Vector = typename Model<Scalar>::Vector;
  std::vector<Matrix> mw, vw;
  std::vector<Vector> mb, vb;
  long long t = 0;

  static AdamState zeros_like(const Model<Scalar>& m) {
    AdamState s;
    for (const auto& w : m.weights) {
      s.mw.push_back(Matrix::Zero(w.rows(), w.cols()));
      s.vw.push_back(Matrix::Zero(w.rows(), w.cols()));
    }
    for (const auto& b : m.biases) {
      s.mb.push_back(Vector::Zero(b.size()));
      s.vb.push_back(Vector::Zero(b.size()));
    }
    return s;
  }
};

// One Adam update from mean cross-entropy gradients. The L2 penalty
// (l2 * ||W||^2, biases excluded) contributes 2*l2*W here.
template <typename Scalar>
void adam_step(Model<Scalar>& m, const Gradients<Scalar>& grads, AdamState<Scalar>& state,
               double lr, const TrainConfig& cfg) {
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, double(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, double(state.t));
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    if (!m.weights[i].size()) continue;
    auto gw = (grads.weights[i] + Scalar(2.0 * cfg.l2) * m.weights[i]).eval();
    state.mw[i] = Scalar(cfg.beta1) * state.mw[i] + Scalar(1.0 - cfg.beta1) * gw;
    state.vw[i] = Scalar(cfg.beta2) * state.vw[i] + Scalar(1.0 - cfg.beta2) * gw.cwiseProduct(gw);
    m.weights[i] -=
        (Scalar(lr) * (state.mw[i] / Scalar(bc1)).array() /
         ((state.vw[i] / Scalar(bc2)).array().sqrt() + Scalar(cfg.adam_eps)))
            .matrix();
    auto gb = grads.biases[i];
    state.mb[i] = Scalar(cfg.beta1) * state.mb[i] + Scalar(1.0 - cfg.beta1) * gb;
    state.vb[i] = Scalar(cfg.beta2) * state.vb[i] + Scalar(1.0 - cfg.beta2) * gb.cwiseProduct(gb);
    m.biases[i] -=
        (Scalar(lr) * (state.mb[i] / Scalar(bc1)).array() /
         ((state.vb[i] / Scalar(bc2)).array().sqrt() + Scalar(cfg.adam_eps)))
            .matrix();
  }
}

// Total training objective on a fixed mini-batch: mean cross-entropy plus the
// L2 penalty. Used by the finite-difference checks.
template <typename Scalar>
Scalar batch_loss(const Model<Scalar>& m, const std::vector<Tensor<Scalar>>& xs,
                  const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& qs,
                  double l2, bool train_mode = false, std::uint64_t dropout_seed = 0) {
  Scalar loss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Rng rng(derive_seed(dropout_seed, i));
    Tensor<Scalar> p = forward(m, xs[i], train_mode, &rng);
    Scalar sample = 0;
    for (Eigen::Index n = 0; n < p.data.cols(); ++n)
      for (Eigen::Index c = 0; c < p.data.rows(); ++c)
        if (qs[i](c, n) > Scalar(0))
          sample -= qs[i](c, n) * std::log(std::max(p.data(c, n), Scalar(1e-12)));
    loss += sample / Scalar(p.data.cols());
  }
  loss /= Scalar(xs.size());
  if (l2 > 0)
    for (const auto& w : m.weights)
      if (w.size()) loss += Scalar(l2) * w.squaredNorm();
  return loss;
}

}  // namespace mito
