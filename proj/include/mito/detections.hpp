#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <vector>

#include "mito/common.hpp"

namespace mito {

struct Detection {
  double x = 0, y = 0;       // full-resolution coordinates
  double probability = 0.0;
};

struct DetectionList {
  std::vector<Detection> entries;
  double d = 100.0;  // suppression distance the list was built with

  std::vector<Eigen::Vector2d> points() const {
    std::vector<Eigen::Vector2d> p;
    p.reserve(entries.size());
    for (const auto& e : entries) p.emplace_back(e.x, e.y);
    return p;
  }
};

// Keeps entries with probability >= delta.
DetectionList apply_threshold(const DetectionList& dl, double delta);

void write_detections_csv(const std::filesystem::path& path, const DetectionList& dl);
DetectionList read_detections_csv(const std::filesystem::path& path);

}  // namespace mito
