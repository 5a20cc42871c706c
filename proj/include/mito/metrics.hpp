#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "mito/common.hpp"
#include "mito/detections.hpp"

namespace mito {

struct MatchConfig {
  double radius = 30.0;  // px at 0.25 um/px

  void validate() const {
    if (!(radius > 0.0)) throw Error(ErrorCode::precondition, "match radius must be > 0");
  }
};

struct MatchResult {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int matched = 0;
  std::vector<int> pred_to_truth;  // -1 for unmatched predictions
};

// Distance-gated detection score: maximum-cardinality one-to-one matching
// between predictions and ground truth within `radius` (inclusive), then
// precision/recall/F1. F1 is 0 when precision + recall is 0.
MatchResult match_f1(const std::vector<Eigen::Vector2d>& pred,
                     const std::vector<Eigen::Vector2d>& truth, const MatchConfig& cfg);

// Quadratic weighted Cohen's kappa over categorical labels. Returns nullopt
// when the expected-disagreement denominator is zero (both raters constant).
std::optional<double> kappa_quadratic(const std::vector<int>& a, const std::vector<int>& b);

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Average ranks (1-based, ties averaged).
std::vector<double> average_ranks(const std::vector<double>& v);

struct SweepPoint {
  double delta = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct SweepResult {
  double best_delta = 0.0;
  double best_f1 = 0.0;
  std::vector<SweepPoint> curve;
};

std::vector<double> default_sweep_grid(double lo = 0.80, double hi = 1.00,
                                       double step = 0.001);

// Evaluates match_f1 after thresholding the detections at each grid value and
// returns the argmax (ties resolve to the largest delta) plus the full curve.
SweepResult sweep_threshold(const DetectionList& detections,
                            const std::vector<Eigen::Vector2d>& truth,
                            const MatchConfig& cfg, const std::vector<double>& grid);

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& sweep);

}  // namespace mito
