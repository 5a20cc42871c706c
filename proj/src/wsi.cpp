#include "mito/wsi.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>

#include "mito/parallel.hpp"
#include "mito/tensor.hpp"

namespace mito {

namespace {

using RegionReader = std::function<ImageF(int, int, int, int)>;

ProbabilityMap dense_map_impl(int img_w, int img_h, double mpp, const RegionReader& read,
                              const ModelF& model, const TissueMask* mask, int tile_cells,
                              int workers) {
  const NetGeometry geom = conv_geometry(model.spec);
  if (img_w < geom.receptive_field || img_h < geom.receptive_field)
    throw Error(ErrorCode::tile_geometry, "image smaller than the receptive field");
  if (tile_cells < 1) throw Error(ErrorCode::tile_geometry, "tile_cells must be >= 1");

  ProbabilityMap map;
  map.stride = geom.stride;
  map.origin = geom.receptive_field / 2;
  map.microns_per_pixel = mpp;
  map.width = (img_w - geom.receptive_field) / geom.stride + 1;
  map.height = (img_h - geom.receptive_field) / geom.stride + 1;
  map.values = Eigen::ArrayXXf::Zero(map.height, map.width);

  const int blocks_x = (map.width + tile_cells - 1) / tile_cells;
  const int blocks_y = (map.height + tile_cells - 1) / tile_cells;

  parallel_for(std::size_t(blocks_x) * blocks_y, workers, [&](std::size_t bi) {
    const int by = int(bi) / blocks_x;
    const int bx = int(bi) % blocks_x;
    const int cell_x0 = bx * tile_cells;
    const int cell_y0 = by * tile_cells;
    const int bw = std::min(tile_cells, map.width - cell_x0);
    const int bh = std::min(tile_cells, map.height - cell_y0);

    bool any_tissue = mask == nullptr;
    if (mask)
      for (int i = 0; i < bh && !any_tissue; ++i)
        for (int j = 0; j < bw && !any_tissue; ++j)
          any_tissue = mask->at(int(map.full_x(cell_x0 + j)), int(map.full_y(cell_y0 + i)));
    if (!any_tissue) return;  // block stays zero

    const int x0 = cell_x0 * geom.stride;
    const int y0 = cell_y0 * geom.stride;
    const int in_w = (bw - 1) * geom.stride + geom.receptive_field;
    const int in_h = (bh - 1) * geom.stride + geom.receptive_field;
    ImageF region = read(x0, y0, in_w, in_h);
    Tensor<float> out = forward(model, Tensor<float>::from_image(region));
    if (out.height != bh || out.width != bw)
      throw Error(ErrorCode::tile_geometry, "dense output block size mismatch");
    for (int i = 0; i < bh; ++i)
      for (int j = 0; j < bw; ++j) {
        bool tissue =
            !mask || mask->at(int(map.full_x(cell_x0 + j)), int(map.full_y(cell_y0 + i)));
        map.values(cell_y0 + i, cell_x0 + j) =
            tissue ? out.at(kClassMitosis, i, j) : 0.0f;
      }
  });
  return map;
}

}  // namespace

ProbabilityMap dense_probability_map(const ImageF& img, const ModelF& model,
                                     const TissueMask* mask, int tile_cells, int workers) {
  return dense_map_impl(
      img.width(), img.height(), 0.25,
      [&](int x, int y, int w, int h) { return crop(img, x, y, w, h); }, model, mask,
      tile_cells, workers);
}

ProbabilityMap dense_probability_map(const Slide& slide, const ModelF& model,
                                     const TissueMask* mask, int tile_cells, int workers) {
  return dense_map_impl(
      slide.width(), slide.height(), slide.manifest().microns_per_pixel,
      [&](int x, int y, int w, int h) { return slide.read_region(x, y, w, h); }, model, mask,
      tile_cells, workers);
}

void save_pmap(const std::filesystem::path& path, const ProbabilityMap& map) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  os.write("PMAP", 4);
  auto write_u32 = [&](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
  };
  write_u32(std::uint32_t(map.width));
  write_u32(std::uint32_t(map.height));
  write_u32(std::uint32_t(map.stride));
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x) {
      float v = map.values(y, x);
      std::uint32_t u;
      std::memcpy(&u, &v, 4);
      write_u32(u);
    }
  if (!os) throw Error(ErrorCode::io_error, "failed writing " + path.string());
}

ProbabilityMap load_pmap(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::missing_input, "cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "PMAP", 4) != 0)
    throw Error(ErrorCode::bad_magic, "not a probability map file: " + path.string());
  auto read_u32 = [&]() {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw Error(ErrorCode::truncated_file, "probability map ends early");
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
  };
  ProbabilityMap map;
  map.width = int(read_u32());
  map.height = int(read_u32());
  map.stride = int(read_u32());
  map.values.resize(map.height, map.width);
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x) {
      std::uint32_t u = read_u32();
      float v;
      std::memcpy(&v, &u, 4);
      map.values(y, x) = v;
    }
  return map;
}

ImageF pmap_preview(const ProbabilityMap& map) {
  ImageF img(map.width, map.height, 1);
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x) img.at(x, y, 0) = map.values(y, x);
  return img;
}

DetectionList postprocess(const ProbabilityMap& map, double d, double binarize) {
  DetectionList out;
  out.d = d;
  const int w = map.width, h = map.height;
  std::vector<std::int32_t> label(std::size_t(w) * h, -1);
  auto on = [&](int x, int y) { return map.values(y, x) >= float(binarize); };

  std::vector<Detection> raw;
  std::vector<std::pair<int, int>> stack;
  int next = 0;
  for (int y0 = 0; y0 < h; ++y0)
    for (int x0 = 0; x0 < w; ++x0) {
      if (!on(x0, y0) || label[std::size_t(y0) * w + x0] >= 0) continue;
      stack.clear();
      stack.emplace_back(x0, y0);
      label[std::size_t(y0) * w + x0] = next;
      double sx = 0, sy = 0;
      float peak = 0.f;
      long long count = 0;
      while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        sx += map.full_x(x);
        sy += map.full_y(y);
        peak = std::max(peak, map.values(y, x));
        ++count;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (label[std::size_t(ny) * w + nx] >= 0 || !on(nx, ny)) continue;
            label[std::size_t(ny) * w + nx] = next;
            stack.emplace_back(nx, ny);
          }
      }
      ++next;
      raw.push_back({sx / double(count), sy / double(count), double(peak)});
    }

  std::sort(raw.begin(), raw.end(), [](const Detection& a, const Detection& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  for (const Detection& det : raw) {
    bool keep = true;
    for (const Detection& acc : out.entries) {
      double dx = det.x - acc.x, dy = det.y - acc.y;
      if (dx * dx + dy * dy <= d * d) {
        keep = false;
        break;
      }
    }
    if (keep) out.entries.push_back(det);
  }
  return out;
}

DetectionList apply_threshold(const DetectionList& dl, double delta) {
  DetectionList out;
  out.d = dl.d;
  for (const auto& e : dl.entries)
    if (e.probability >= delta) out.entries.push_back(e);
  return out;
}

void write_detections_csv(const std::filesystem::path& path, const DetectionList& dl) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  os << "x,y,probability\n";
  for (const auto& e : dl.entries) os << e.x << ',' << e.y << ',' << e.probability << '\n';
}

DetectionList read_detections_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::missing_input, "cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,y,probability", 0) != 0)
    throw Error(ErrorCode::io_error, "bad detections CSV header in " + path.string());
  DetectionList out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    Detection det;
    char comma;
    std::istringstream ss(line);
    if (!(ss >> det.x >> comma >> det.y >> comma >> det.probability))
      throw Error(ErrorCode::io_error, "bad detections CSV row: " + line);
    out.entries.push_back(det);
  }
  return out;
}

HotspotResult hotspot(const DetectionList& dl, const TissueMask& mask,
                      double microns_per_pixel, const HotspotParams& params) {
  if (!(microns_per_pixel > 0.0))
    throw Error(ErrorCode::precondition, "resolution must be positive");
  const double radius_um = std::sqrt(params.area_mm2 / 3.14159265358979323846) * 1000.0;
  const double radius_px = radius_um / microns_per_pixel;
  const int full_w = mask.width * mask.scale;
  const int full_h = mask.height * mask.scale;

  struct Position {
    int x, y, count;
  };
  std::vector<Position> series;
  for (int y = 0; y < full_h; y += params.grid_stride)
    for (int x = 0; x < full_w; x += params.grid_stride) {
      if (mask.fraction_in_circle(x, y, radius_px) < params.min_tissue) continue;
      int count = 0;
      for (const auto& e : dl.entries) {
        double dx = e.x - x, dy = e.y - y;
        if (dx * dx + dy * dy <= radius_px * radius_px) ++count;
      }
      series.push_back({x, y, count});
    }
  if (series.empty())
    throw Error(ErrorCode::no_tissue, "no hotspot position has tissue coverage");

  std::vector<int> counts;
  counts.reserve(series.size());
  for (const auto& p : series) counts.push_back(p.count);
  std::sort(counts.begin(), counts.end());
  std::size_t rank = std::size_t(
      std::max(1.0, std::ceil(params.percentile * double(counts.size()))));
  int value = counts[rank - 1];

  // center: first grid position (row-major) with the smallest count >= value
  HotspotResult best{-1, 0, 0};
  for (const auto& p : series)
    if (p.count >= value && (best.count < 0 || p.count < best.count)) {
      best.count = p.count;
      best.cx = p.x;
      best.cy = p.y;
    }
  best.count = value;
  return best;
}

int grade(int count, int theta1, int theta2) {
  if (theta1 >= theta2)
    throw Error(ErrorCode::bad_thresholds, "need theta1 < theta2");
  if (count < 0) throw Error(ErrorCode::precondition, "count must be >= 0");
  if (count <= theta1) return 1;
  if (count > theta2) return 3;
  return 2;
}

void write_summary(const std::filesystem::path& path, const SlideSummary& s) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  os << "hotspot_count = " << s.hotspot_count << "\n"
     << "hotspot_center_x = " << s.hotspot_x << "\n"
     << "hotspot_center_y = " << s.hotspot_y << "\n"
     << "grade = " << s.grade << "\n"
     << "proliferation_score = " << s.proliferation_score << "\n"
     << "delta = " << s.delta << "\n"
     << "theta1 = " << s.theta1 << "\n"
     << "theta2 = " << s.theta2 << "\n";
}

}  // namespace mito
