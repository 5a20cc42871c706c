#include "mito/model_io.hpp"

#include <cstring>
#include <fstream>

namespace mito {

namespace {

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void write_f64(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void write_f32(std::ostream& os, float v) {
  std::uint32_t u;
  std::memcpy(&u, &v, 4);
  write_u32(os, u);
}

std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw Error(ErrorCode::truncated_file, "model file ends early");
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
         (std::uint32_t(b[3]) << 24);
}

double read_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw Error(ErrorCode::truncated_file, "model file ends early");
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= std::uint64_t(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

float read_f32(std::istream& is) {
  std::uint32_t u = read_u32(is);
  float v;
  std::memcpy(&v, &u, 4);
  return v;
}

}  // namespace

void save_model(const std::filesystem::path& path, const ModelF& model) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  os.write("MITO", 4);
  write_u32(os, kModelFormatVersion);
  write_f64(os, model.spec.gamma);
  write_u32(os, std::uint32_t(model.spec.input_size));
  write_u32(os, std::uint32_t(model.spec.channels));
  write_u32(os, std::uint32_t(model.spec.layers.size()));
  for (const LayerSpec& l : model.spec.layers) {
    write_u32(os, std::uint32_t(l.kind));
    write_u32(os, std::uint32_t(l.filters));
    write_u32(os, std::uint32_t(l.kernel_h));
    write_u32(os, std::uint32_t(l.kernel_w));
    write_u32(os, std::uint32_t(l.stride));
    write_f64(os, l.rate);
  }
  for (std::size_t i = 0; i < model.spec.layers.size(); ++i) {
    const auto& w = model.weights[i];
    if (!w.size()) continue;
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) write_f32(os, w(r, c));
    for (Eigen::Index r = 0; r < model.biases[i].size(); ++r)
      write_f32(os, model.biases[i](r));
  }
  if (!os) throw Error(ErrorCode::io_error, "failed writing " + path.string());
}

ModelF load_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::missing_input, "cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "MITO", 4) != 0)
    throw Error(ErrorCode::bad_magic, "not a model file: " + path.string());
  std::uint32_t version = read_u32(is);
  if (version != kModelFormatVersion)
    throw Error(ErrorCode::version_mismatch, "unsupported model format version");

  ModelF model;
  model.spec.gamma = read_f64(is);
  model.spec.input_size = int(read_u32(is));
  model.spec.channels = int(read_u32(is));
  std::uint32_t n_layers = read_u32(is);
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    LayerSpec l;
    std::uint32_t kind = read_u32(is);
    if (kind < 1 || kind > 7)
      throw Error(ErrorCode::bad_magic, "unknown layer kind in model file");
    l.kind = LayerKind(kind);
    l.filters = int(read_u32(is));
    l.kernel_h = int(read_u32(is));
    l.kernel_w = int(read_u32(is));
    l.stride = int(read_u32(is));
    l.rate = read_f64(is);
    model.spec.layers.push_back(l);
  }

  detail::Shape3 shape{model.spec.channels, model.spec.input_size, model.spec.input_size};
  for (const LayerSpec& l : model.spec.layers) {
    ModelF::Matrix w;
    ModelF::Vector b;
    if (l.kind == LayerKind::conv) {
      w.resize(l.filters, Eigen::Index(shape.c) * l.kernel_h * l.kernel_w);
    } else if (l.kind == LayerKind::dense) {
      w.resize(l.filters, Eigen::Index(shape.c) * shape.h * shape.w);
    }
    if (w.size()) {
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = read_f32(is);
      b.resize(l.filters);
      for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = read_f32(is);
    }
    model.weights.push_back(std::move(w));
    model.biases.push_back(std::move(b));
    shape = detail::layer_output_shape(l, shape);
  }
  return model;
}

}  // namespace mito
