#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <vector>

#include "mito/image.hpp"
#include "mito/stain.hpp"

namespace mito {

// Candidate label values as stored in candidate CSVs.
constexpr int kLabelUnlabeled = -1;
constexpr int kLabelNegative = 0;
constexpr int kLabelPositive = 1;

struct Candidate {
  int x = 0, y = 0;          // full-resolution pixel coordinates
  float intensity = 0.f;     // mean-RGB value at the candidate pixel
  int label = kLabelUnlabeled;
  double score = 0.0;        // classifier probability, when scored
};

struct DetectorParams {
  int d = 100;       // suppression diameter, px
  double t = 0.6;    // intensity ceiling

  void validate() const {
    if (d < 1) throw Error(ErrorCode::precondition, "detector d must be >= 1");
    if (!(t > 0.0) || !(t < 1.0))
      throw Error(ErrorCode::precondition, "detector t must be in (0,1)");
  }
};

// Iterative detection-and-suppression over the mean-RGB image: pixels are
// visited in ascending (intensity, y, x) order; each accepted candidate
// suppresses the disk of diameter d around it (points at distance <= d/2);
// processing stops once intensities exceed t. Output is sorted by ascending
// intensity.
std::vector<Candidate> detect_candidates(const ImageF& img, const DetectorParams& params);

// Positive iff the candidate lies within Euclidean distance d of any
// reference point (inclusive), negative otherwise.
void label_candidates(std::vector<Candidate>& cands,
                      const std::vector<Eigen::Vector2d>& reference, double d);

// DAB-channel candidate extraction: color deconvolution, threshold the DAB
// concentrations, 8-connected component labeling, centroids. Components
// smaller than min_component pixels are dropped as noise.
std::vector<Candidate> phh3_candidates(const ImageF& img, const StainMatrix& m,
                                       double dab_thresh = 0.15, int min_component = 4);

enum class Vote { positive, negative, discarded };

// Majority vote across observers; positive/negative requires at least
// `quorum` concordant labels, anything else is discarded.
std::vector<Vote> majority_vote(const std::vector<std::vector<int>>& observers, int quorum = 3);

void write_candidates_csv(const std::filesystem::path& path,
                          const std::vector<Candidate>& cands);
std::vector<Candidate> read_candidates_csv(const std::filesystem::path& path);

void write_points_csv(const std::filesystem::path& path,
                      const std::vector<Eigen::Vector2d>& points);
std::vector<Eigen::Vector2d> read_points_csv(const std::filesystem::path& path);

}  // namespace mito
