#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "mito/augment.hpp"
#include "mito/net.hpp"
#include "mito/parallel.hpp"

namespace mito {

// In-memory patch dataset. Pixels are kept as 8-bit planar RGB (the slide
// tiles are 8-bit anyway); labels are hard {0,1} and/or soft target pairs.
class PatchSet {
 public:
  explicit PatchSet(int size = 128) : size_(size) {}

  int size() const { return size_; }
  int count() const { return int(labels_.size()); }
  bool has_soft() const { return !soft_.empty(); }

  void add(const Image<float>& patch, int label) {
    if (patch.width() != size_ || patch.height() != size_ || patch.channels() != 3)
      throw Error(ErrorCode::bad_dimensions, "patch size mismatch");
    std::size_t base = pixels_.size();
    pixels_.resize(base + std::size_t(size_) * size_ * 3);
    for (std::size_t i = 0; i < std::size_t(size_) * size_ * 3; ++i) {
      float v = patch.data()[i];
      v = v < 0.f ? 0.f : (v > 1.f ? 1.f : v);
      pixels_[base + i] = std::uint8_t(std::lround(v * 255.f));
    }
    labels_.push_back(label);
  }

  void set_soft(std::vector<std::array<float, 2>> soft) {
    if (int(soft.size()) != count())
      throw Error(ErrorCode::length_mismatch, "soft target count mismatch");
    soft_ = std::move(soft);
  }

  Image<float> patch(int i) const {
    Image<float> img(size_, size_, 3);
    const std::uint8_t* src = pixels_.data() + std::size_t(i) * size_ * size_ * 3;
    for (std::size_t k = 0; k < std::size_t(size_) * size_ * 3; ++k)
      img.data()[k] = float(src[k]) / 255.f;
    return img;
  }

  int label(int i) const { return labels_[std::size_t(i)]; }
  const std::array<float, 2>& soft(int i) const { return soft_[std::size_t(i)]; }

  std::vector<int> indices_with_label(int label) const {
    std::vector<int> idx;
    for (int i = 0; i < count(); ++i)
      if (labels_[std::size_t(i)] == label) idx.push_back(i);
    return idx;
  }

 private:
  int size_;
  std::vector<std::uint8_t> pixels_;
  std::vector<int> labels_;
  std::vector<std::array<float, 2>> soft_;
};

inline double binary_f1(int tp, int fp, int fn) {
  double p = tp + fp > 0 ? double(tp) / (tp + fp) : 0.0;
  double r = tp + fn > 0 ? double(tp) / (tp + fn) : 0.0;
  return p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
}

template <typename Scalar>
Image<Scalar> center_crop(const Image<Scalar>& img, int size) {
  int ox = (img.width() - size) / 2;
  int oy = (img.height() - size) / 2;
  return crop(img, ox, oy, size, size);
}

// Patch-classification F1 on a validation set at probability threshold 0.5,
// eval mode, deterministic.
template <typename Scalar>
double validation_f1(const Model<Scalar>& m, const PatchSet& val, int workers = 1) {
  const std::size_t n = std::size_t(val.count());
  std::vector<int> pred(n);
  parallel_for(n, workers, [&](std::size_t i) {
    Image<float> img = center_crop(val.patch(int(i)), m.spec.input_size);
    Tensor<Scalar> x = Tensor<Scalar>::from_image(img.template cast<Scalar>());
    Tensor<Scalar> p = forward(m, x);
    pred[i] = p.data(kClassMitosis, 0) >= Scalar(0.5) ? 1 : 0;
  });
  int tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (pred[i] == 1 && val.label(int(i)) == 1) ++tp;
    if (pred[i] == 1 && val.label(int(i)) == 0) ++fp;
    if (pred[i] == 0 && val.label(int(i)) == 1) ++fn;
  }
  return binary_f1(tp, fp, fn);
}

struct TrainLogEntry {
  int epoch;
  double lr;
  double mean_loss;
  double val_f1;
};

// Trains `spec` on `train_set` with on-the-fly augmentation, balanced
// mini-batches for hard labels (uniform shuffling for soft targets), Adam,
// and the exponential epoch schedule. Returns the checkpoint with the best
// validation F1 (threshold 0.5); ties keep the earliest epoch.
template <typename Scalar>
Model<Scalar> train(const PatchSet& train_set, const PatchSet& val_set, const NetworkSpec& spec,
                    const TrainConfig& cfg, const AugmentConfig& aug,
                    const StainMatrix& stains = StainMatrix::ruifrok_hed(),
                    std::vector<TrainLogEntry>* log = nullptr,
                    const std::function<void(const TrainLogEntry&)>& on_epoch = {}) {
  cfg.validate();
  aug.validate();
  if (train_set.count() == 0) throw Error(ErrorCode::precondition, "empty training set");
  if (val_set.count() == 0) throw Error(ErrorCode::precondition, "empty validation set");
  if (aug.input_size != train_set.size() || aug.crop_size != spec.input_size)
    throw Error(ErrorCode::bad_config, "augmentation sizes do not bridge patch -> network input");

  const bool soft = train_set.has_soft();
  std::vector<int> pos, neg, all;
  if (soft) {
    all.resize(std::size_t(train_set.count()));
    std::iota(all.begin(), all.end(), 0);
  } else {
    pos = train_set.indices_with_label(1);
    neg = train_set.indices_with_label(0);
    if (pos.empty() || neg.empty())
      throw Error(ErrorCode::precondition, "hard-label training needs both classes");
  }
  if (val_set.indices_with_label(1).empty() || val_set.indices_with_label(0).empty())
    throw Error(ErrorCode::precondition, "validation set needs both classes");

  Rng master(cfg.seed);
  Rng init_rng = master.split(1);
  Model<Scalar> model = init_model<Scalar>(spec, init_rng);
  AdamState<Scalar> adam = AdamState<Scalar>::zeros_like(model);

  Model<Scalar> best = model;
  double best_f1 = -1.0;
  int half = cfg.batch / 2;
  long long global_step = 0;

  auto shuffle = [](std::vector<int>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[std::size_t(rng.uniform_index(i))]);
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double lr = lr_at_epoch(cfg, epoch);
    Rng order_rng = master.split(100 + std::uint64_t(epoch));
    int steps;
    if (soft) {
      shuffle(all, order_rng);
      steps = (train_set.count() + cfg.batch - 1) / cfg.batch;
    } else {
      shuffle(pos, order_rng);
      shuffle(neg, order_rng);
      steps = int((std::max(pos.size(), neg.size()) + std::size_t(half) - 1) / std::size_t(half));
    }

    double loss_sum = 0.0;
    for (int step = 0; step < steps; ++step) {
      std::vector<int> batch_idx(std::size_t(cfg.batch));
      if (soft) {
        for (int j = 0; j < cfg.batch; ++j)
          batch_idx[std::size_t(j)] = all[(std::size_t(step) * cfg.batch + j) % all.size()];
      } else {
        for (int j = 0; j < half; ++j) {
          batch_idx[std::size_t(j)] = pos[(std::size_t(step) * half + j) % pos.size()];
          batch_idx[std::size_t(half + j)] = neg[(std::size_t(step) * half + j) % neg.size()];
        }
      }

      const std::uint64_t step_seed = derive_seed(cfg.seed, 0x100000ull + std::uint64_t(global_step));
      const int n_chunks = (cfg.batch + cfg.chunk - 1) / cfg.chunk;
      const std::size_t n_chunks_sz = std::size_t(n_chunks);
      std::vector<Gradients<Scalar>> chunk_grads(n_chunks_sz);
      std::vector<double> chunk_loss(n_chunks_sz, 0.0);

      parallel_for(std::size_t(n_chunks), cfg.workers, [&](std::size_t ci) {
        Gradients<Scalar> g = Gradients<Scalar>::zeros_like(model);
        double loss = 0.0;
        int begin = int(ci) * cfg.chunk;
        int end = std::min(cfg.batch, begin + cfg.chunk);
        for (int j = begin; j < end; ++j) {
          int idx = batch_idx[std::size_t(j)];
          Rng sample_rng(derive_seed(step_seed, std::uint64_t(j)));
          Image<float> img = augment_patch(train_set.patch(idx), aug, sample_rng, stains);
          Tensor<Scalar> x = Tensor<Scalar>::from_image(img.template cast<Scalar>());
          Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> q(2, 1);
          if (soft) {
            q(kClassMitosis, 0) = Scalar(train_set.soft(idx)[0]);
            q(kClassBackground, 0) = Scalar(train_set.soft(idx)[1]);
          } else {
            q(kClassMitosis, 0) = Scalar(train_set.label(idx) == 1 ? 1 : 0);
            q(kClassBackground, 0) = Scalar(train_set.label(idx) == 1 ? 0 : 1);
          }
          loss += double(backward(model, x, q, g, true, &sample_rng));
        }
        chunk_grads[ci] = std::move(g);
        chunk_loss[ci] = loss;
      });

      Gradients<Scalar> grads = std::move(chunk_grads[0]);
      double loss = chunk_loss[0];
      for (int ci = 1; ci < n_chunks; ++ci) {
        grads.add(chunk_grads[std::size_t(ci)]);
        loss += chunk_loss[std::size_t(ci)];
      }
      grads.scale(Scalar(1.0 / cfg.batch));
      loss /= cfg.batch;
      if (!std::isfinite(loss))
        throw Error(ErrorCode::non_finite_loss, "training loss diverged");
      loss_sum += loss;
      adam_step(model, grads, adam, lr, cfg);
      ++global_step;
    }

    double f1 = validation_f1(model, val_set, cfg.workers);
    TrainLogEntry entry{epoch, lr, steps > 0 ? loss_sum / steps : 0.0, f1};
    if (log) log->push_back(entry);
    if (on_epoch) on_epoch(entry);
    if (f1 > best_f1) {
      best_f1 = f1;
      best = model;
      best.trained_epoch = epoch;
      best.val_f1 = f1;
    }
  }
  return best;
}

}  // namespace mito
