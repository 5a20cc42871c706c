#include "mito/slide.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "mito/png_io.hpp"

namespace mito {

namespace {

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

std::string zero_pad(int v, int width = 4) {
  std::string s = std::to_string(v);
  while (int(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

}  // namespace

std::string SlideManifest::tile_name(int row, int col) const {
  std::string name = replace_all(tile_pattern, "{r}", zero_pad(row));
  return replace_all(name, "{c}", zero_pad(col));
}

void write_manifest(const std::filesystem::path& dir, const SlideManifest& m) {
  std::ofstream os(dir / "manifest.txt");
  if (!os) throw Error(ErrorCode::io_error, "cannot write manifest in " + dir.string());
  os << "width = " << m.width << "\n"
     << "height = " << m.height << "\n"
     << "tile_size = " << m.tile_size << "\n"
     << "grid_rows = " << m.grid_rows << "\n"
     << "grid_cols = " << m.grid_cols << "\n"
     << "microns_per_pixel = " << m.microns_per_pixel << "\n"
     << "tile_pattern = " << m.tile_pattern << "\n";
}

SlideManifest read_manifest(const std::filesystem::path& dir) {
  std::ifstream is(dir / "manifest.txt");
  if (!is)
    throw Error(ErrorCode::missing_input, "no manifest.txt in " + dir.string());
  SlideManifest m;
  std::string line;
  while (std::getline(is, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      std::size_t b = s.find_first_not_of(" \t");
      std::size_t e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "width") m.width = std::stoi(value);
    else if (key == "height") m.height = std::stoi(value);
    else if (key == "tile_size") m.tile_size = std::stoi(value);
    else if (key == "grid_rows") m.grid_rows = std::stoi(value);
    else if (key == "grid_cols") m.grid_cols = std::stoi(value);
    else if (key == "microns_per_pixel") m.microns_per_pixel = std::stod(value);
    else if (key == "tile_pattern") m.tile_pattern = value;
    else throw Error(ErrorCode::io_error, "unknown manifest key: " + key);
  }
  if (m.width < 1 || m.height < 1 || m.tile_size < 1)
    throw Error(ErrorCode::io_error, "manifest misses slide geometry");
  return m;
}

Slide Slide::open(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw Error(ErrorCode::missing_input, "slide directory not found: " + dir.string());
  return Slide(dir, read_manifest(dir));
}

std::shared_ptr<const ImageF> Slide::tile(int row, int col) const {
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find({row, col});
    if (it != cache_.end()) return it->second;
  }
  auto img = std::make_shared<const ImageF>(read_png(dir_ / manifest_.tile_name(row, col)));
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto [it, inserted] = cache_.try_emplace({row, col}, img);
  return it->second;
}

ImageF Slide::read_region(int x, int y, int w, int h) const {
  if (x < 0 || y < 0 || w < 1 || h < 1 || x + w > manifest_.width || y + h > manifest_.height)
    throw Error(ErrorCode::bad_dimensions, "slide region out of bounds");
  ImageF out(w, h, 3);
  const int ts = manifest_.tile_size;
  int row0 = y / ts, row1 = (y + h - 1) / ts;
  int col0 = x / ts, col1 = (x + w - 1) / ts;
  for (int r = row0; r <= row1; ++r)
    for (int c = col0; c <= col1; ++c) {
      auto t = tile(r, c);
      int tx0 = c * ts, ty0 = r * ts;
      int sx0 = std::max(x, tx0), sy0 = std::max(y, ty0);
      int sx1 = std::min(x + w, tx0 + t->width());
      int sy1 = std::min(y + h, ty0 + t->height());
      for (int ch = 0; ch < 3; ++ch)
        for (int yy = sy0; yy < sy1; ++yy)
          for (int xx = sx0; xx < sx1; ++xx)
            out.at(xx - x, yy - y, ch) = t->at(xx - tx0, yy - ty0, ch);
    }
  return out;
}

ImageF Slide::read_all() const { return read_region(0, 0, manifest_.width, manifest_.height); }

void write_slide(const std::filesystem::path& dir, const ImageF& img, int tile_size,
                 double microns_per_pixel) {
  std::filesystem::create_directories(dir);
  SlideManifest m;
  m.width = img.width();
  m.height = img.height();
  m.tile_size = tile_size;
  m.grid_rows = (img.height() + tile_size - 1) / tile_size;
  m.grid_cols = (img.width() + tile_size - 1) / tile_size;
  m.microns_per_pixel = microns_per_pixel;
  write_manifest(dir, m);
  for (int r = 0; r < m.grid_rows; ++r)
    for (int c = 0; c < m.grid_cols; ++c) {
      int x0 = c * tile_size, y0 = r * tile_size;
      int w = std::min(tile_size, img.width() - x0);
      int h = std::min(tile_size, img.height() - y0);
      write_png(dir / m.tile_name(r, c), crop(img, x0, y0, w, h));
    }
}

bool TissueMask::at(int x, int y) const {
  int mx = std::min(width - 1, std::max(0, x / scale));
  int my = std::min(height - 1, std::max(0, y / scale));
  return at_cell(mx, my);
}

double TissueMask::tissue_fraction() const {
  if (tissue.empty()) return 0.0;
  double s = 0;
  for (auto v : tissue) s += v ? 1.0 : 0.0;
  return s / double(tissue.size());
}

double TissueMask::fraction_in_window(int x, int y, int w, int h) const {
  long long total = 0, hit = 0;
  int mx0 = std::max(0, x / scale), mx1 = std::min(width - 1, (x + w - 1) / scale);
  int my0 = std::max(0, y / scale), my1 = std::min(height - 1, (y + h - 1) / scale);
  for (int my = my0; my <= my1; ++my)
    for (int mx = mx0; mx <= mx1; ++mx) {
      ++total;
      if (at_cell(mx, my)) ++hit;
    }
  return total > 0 ? double(hit) / double(total) : 0.0;
}

double TissueMask::fraction_in_circle(double cx, double cy, double radius) const {
  // Cell-center membership; area measured in mask cells.
  const double r2 = radius * radius;
  const double cell_area = double(scale) * scale;
  const double circle_cells = 3.14159265358979323846 * r2 / cell_area;
  int mx0 = std::max(0, int((cx - radius) / scale) - 1);
  int mx1 = std::min(width - 1, int((cx + radius) / scale) + 1);
  int my0 = std::max(0, int((cy - radius) / scale) - 1);
  int my1 = std::min(height - 1, int((cy + radius) / scale) + 1);
  long long hit = 0;
  for (int my = my0; my <= my1; ++my) {
    double py = (my + 0.5) * scale - cy;
    for (int mx = mx0; mx <= mx1; ++mx) {
      double px = (mx + 0.5) * scale - cx;
      if (px * px + py * py <= r2 && at_cell(mx, my)) ++hit;
    }
  }
  return circle_cells > 0 ? double(hit) / circle_cells : 0.0;
}

TissueMask TissueMask::all_tissue(int full_width, int full_height, int scale) {
  TissueMask m;
  m.scale = scale;
  m.width = (full_width + scale - 1) / scale;
  m.height = (full_height + scale - 1) / scale;
  m.tissue.assign(std::size_t(m.width) * m.height, 1);
  return m;
}

TissueMask compute_tissue_mask(const ImageF& img, int scale, double od_threshold) {
  ImageF small = downsample_mean(img, scale);
  TissueMask m;
  m.scale = scale;
  m.width = small.width();
  m.height = small.height();
  m.tissue.assign(std::size_t(m.width) * m.height, 0);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      double od = 0;
      for (int c = 0; c < small.channels(); ++c)
        od += -std::log(double(small.at(x, y, c)) + 1e-6);
      od /= small.channels();
      m.tissue[std::size_t(y) * m.width + x] = od >= od_threshold ? 1 : 0;
    }
  return m;
}

TissueMask compute_tissue_mask(const Slide& slide, int scale, double od_threshold) {
  return compute_tissue_mask(slide.read_all(), scale, od_threshold);
}

}  // namespace mito
