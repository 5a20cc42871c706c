#include "mito/candidates.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace mito {

std::vector<Candidate> detect_candidates(const ImageF& img, const DetectorParams& params) {
  params.validate();
  const ImageF mean = channel_mean(img);
  const int w = mean.width(), h = mean.height();

  struct Px {
    float intensity;
    int x, y;
  };
  std::vector<Px> dark;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float v = mean.at(x, y, 0);
      if (v <= float(params.t)) dark.push_back({v, x, y});
    }
  std::sort(dark.begin(), dark.end(), [](const Px& a, const Px& b) {
    if (a.intensity != b.intensity) return a.intensity < b.intensity;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });

  // Suppression mask; a candidate stamps all pixels with 4*dist^2 <= d^2
  // (exact integer boundary test).
  std::vector<std::uint8_t> suppressed(std::size_t(w) * h, 0);
  const int d = params.d;
  const long long d2 = (long long)d * d;
  const int reach = d / 2 + 1;

  std::vector<Candidate> out;
  for (const Px& p : dark) {
    if (suppressed[std::size_t(p.y) * w + p.x]) continue;
    out.push_back({p.x, p.y, p.intensity, kLabelUnlabeled, 0.0});
    for (int dy = -reach; dy <= reach; ++dy) {
      int y = p.y + dy;
      if (y < 0 || y >= h) continue;
      for (int dx = -reach; dx <= reach; ++dx) {
        int x = p.x + dx;
        if (x < 0 || x >= w) continue;
        if (4ll * (dx * dx + dy * dy) <= d2) suppressed[std::size_t(y) * w + x] = 1;
      }
    }
  }
  return out;
}

void label_candidates(std::vector<Candidate>& cands,
                      const std::vector<Eigen::Vector2d>& reference, double d) {
  for (Candidate& c : cands) {
    bool pos = false;
    for (const auto& r : reference) {
      double dx = c.x - r.x(), dy = c.y - r.y();
      if (dx * dx + dy * dy <= d * d) {
        pos = true;
        break;
      }
    }
    c.label = pos ? kLabelPositive : kLabelNegative;
  }
}

std::vector<Candidate> phh3_candidates(const ImageF& img, const StainMatrix& m,
                                       double dab_thresh, int min_component) {
  const ImageF hed = rgb_to_hed(img, m);
  const ImageF mean = channel_mean(img);
  const int w = img.width(), h = img.height();

  std::vector<std::int32_t> label(std::size_t(w) * h, -1);
  auto positive = [&](int x, int y) { return hed.at(x, y, 2) > float(dab_thresh); };

  std::vector<Candidate> out;
  std::vector<std::pair<int, int>> stack;
  int next_label = 0;
  for (int y0 = 0; y0 < h; ++y0)
    for (int x0 = 0; x0 < w; ++x0) {
      if (!positive(x0, y0) || label[std::size_t(y0) * w + x0] >= 0) continue;
      // flood fill one 8-connected component
      stack.clear();
      stack.emplace_back(x0, y0);
      label[std::size_t(y0) * w + x0] = next_label;
      double sx = 0, sy = 0;
      long long count = 0;
      while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        sx += x;
        sy += y;
        ++count;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (label[std::size_t(ny) * w + nx] >= 0 || !positive(nx, ny)) continue;
            label[std::size_t(ny) * w + nx] = next_label;
            stack.emplace_back(nx, ny);
          }
      }
      ++next_label;
      if (count < min_component) continue;
      int cx = int(std::lround(sx / double(count)));
      int cy = int(std::lround(sy / double(count)));
      out.push_back({cx, cy, mean.at(cx, cy, 0), kLabelUnlabeled, 0.0});
    }
  return out;
}

std::vector<Vote> majority_vote(const std::vector<std::vector<int>>& observers, int quorum) {
  if (int(observers.size()) < quorum)
    throw Error(ErrorCode::precondition, "need at least quorum observers");
  const std::size_t n = observers.front().size();
  for (const auto& o : observers)
    if (o.size() != n)
      throw Error(ErrorCode::length_mismatch, "observer label lists differ in length");
  std::vector<Vote> votes(n);
  for (std::size_t i = 0; i < n; ++i) {
    int pos = 0, neg = 0;
    for (const auto& o : observers) (o[i] != 0 ? pos : neg) += 1;
    votes[i] = pos >= quorum ? Vote::positive : neg >= quorum ? Vote::negative : Vote::discarded;
  }
  return votes;
}

void write_candidates_csv(const std::filesystem::path& path,
                          const std::vector<Candidate>& cands) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  os << "x,y,intensity,label\n";
  for (const Candidate& c : cands)
    os << c.x << ',' << c.y << ',' << c.intensity << ',' << c.label << '\n';
}

std::vector<Candidate> read_candidates_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::missing_input, "cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,y,intensity,label", 0) != 0)
    throw Error(ErrorCode::io_error, "bad candidate CSV header in " + path.string());
  std::vector<Candidate> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    Candidate c;
    char comma;
    if (!(ss >> c.x >> comma >> c.y >> comma >> c.intensity >> comma >> c.label))
      throw Error(ErrorCode::io_error, "bad candidate CSV row: " + line);
    out.push_back(c);
  }
  return out;
}

void write_points_csv(const std::filesystem::path& path,
                      const std::vector<Eigen::Vector2d>& points) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  os << "x,y\n";
  for (const auto& p : points) os << p.x() << ',' << p.y() << '\n';
}

std::vector<Eigen::Vector2d> read_points_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::missing_input, "cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,y", 0) != 0)
    throw Error(ErrorCode::io_error, "bad points CSV header in " + path.string());
  std::vector<Eigen::Vector2d> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    double x, y;
    char comma;
    if (!(ss >> x >> comma >> y))
      throw Error(ErrorCode::io_error, "bad points CSV row: " + line);
    out.emplace_back(x, y);
  }
  return out;
}

}  // namespace mito
