#include "mito/net.hpp"

#include <array>

namespace mito {

namespace {

constexpr std::array<int, 9> kBaseFilters = {32, 32, 64, 64, 128, 128, 256, 256, 512};
constexpr std::array<int, 9> kKernels = {3, 3, 3, 3, 3, 3, 3, 3, 14};
constexpr std::array<int, 9> kStrides = {1, 2, 1, 2, 1, 1, 1, 1, 1};

}  // namespace

NetworkSpec build_network(double gamma) {
  if (!(gamma > 0.0) || gamma > 1.0)
    throw Error(ErrorCode::invalid_gamma, "gamma must be in (0, 1]");
  NetworkSpec spec;
  spec.gamma = gamma;
  spec.input_size = 100;
  spec.channels = 3;
  for (std::size_t i = 0; i < kBaseFilters.size(); ++i) {
    int filters = int(std::floor(kBaseFilters[i] * gamma));
    if (filters < 1)
      throw Error(ErrorCode::invalid_gamma, "gamma scales a conv layer below one filter");
    spec.layers.push_back(LayerSpec::conv2d(filters, kKernels[i], kStrides[i]));
    spec.layers.push_back(LayerSpec::leaky());
  }
  spec.layers.push_back(LayerSpec::dropout_rate(kDefaultDropout));
  spec.layers.push_back(LayerSpec::conv2d(2, 1, 1));
  spec.layers.push_back(LayerSpec::softmax_spec());
  return spec;
}

NetworkSpec build_pooled_network(double scale) {
  if (!(scale > 0.0) || scale > 1.0)
    throw Error(ErrorCode::invalid_gamma, "scale must be in (0, 1]");
  NetworkSpec spec;
  spec.gamma = scale;
  spec.input_size = 100;
  spec.channels = 3;
  const std::array<int, 5> bases = {64, 128, 256, 512, 1024};
  for (int base : bases) {
    int filters = int(std::floor(base * scale));
    if (filters < 1)
      throw Error(ErrorCode::invalid_gamma, "scale shrinks a conv layer below one filter");
    spec.layers.push_back(LayerSpec::conv2d(filters, 3, 1));
    spec.layers.push_back(LayerSpec::relu_spec());
    spec.layers.push_back(LayerSpec::maxpool2d(2, 2));
  }
  int hidden = std::max(1, int(std::floor(2048 * scale)));
  spec.layers.push_back(LayerSpec::dense_units(hidden));
  spec.layers.push_back(LayerSpec::relu_spec());
  spec.layers.push_back(LayerSpec::dropout_rate(kDefaultDropout));
  spec.layers.push_back(LayerSpec::dense_units(2));
  spec.layers.push_back(LayerSpec::softmax_spec());
  return spec;
}

long long param_count(const NetworkSpec& spec) {
  long long total = 0;
  detail::Shape3 shape{spec.channels, spec.input_size, spec.input_size};
  for (const LayerSpec& l : spec.layers) {
    if (l.kind == LayerKind::conv) {
      total += (long long)l.filters * shape.c * l.kernel_h * l.kernel_w + l.filters;
    } else if (l.kind == LayerKind::dense) {
      total += (long long)l.filters * shape.c * shape.h * shape.w + l.filters;
    }
    shape = detail::layer_output_shape(l, shape);
  }
  return total;
}

std::vector<int> spatial_sizes(const NetworkSpec& spec, int input) {
  std::vector<int> sizes;
  detail::Shape3 shape{spec.channels, input, input};
  for (const LayerSpec& l : spec.layers) {
    shape = detail::layer_output_shape(l, shape);
    sizes.push_back(shape.h);
  }
  return sizes;
}

std::vector<int> channel_counts(const NetworkSpec& spec) {
  std::vector<int> counts;
  detail::Shape3 shape{spec.channels, spec.input_size, spec.input_size};
  for (const LayerSpec& l : spec.layers) {
    shape = detail::layer_output_shape(l, shape);
    counts.push_back(shape.c);
  }
  return counts;
}

NetGeometry conv_geometry(const NetworkSpec& spec) {
  NetGeometry g;
  int jump = 1, rf = 1;
  for (const LayerSpec& l : spec.layers) {
    switch (l.kind) {
      case LayerKind::conv:
      case LayerKind::maxpool:
        rf += (l.kernel_h - 1) * jump;
        jump *= l.stride;
        break;
      case LayerKind::dense:
        throw Error(ErrorCode::shape_mismatch,
                    "dense layers are not fully convolutional");
      default:
        break;
    }
  }
  g.receptive_field = rf;
  g.stride = jump;
  return g;
}

}  // namespace mito
