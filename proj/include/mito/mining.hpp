#pragma once

#include <filesystem>
#include <vector>

#include "mito/net.hpp"
#include "mito/rng.hpp"
#include "mito/train.hpp"

namespace mito {

// n draws with replacement, P(i) proportional to scores[i].
std::vector<int> hard_negative_sample(const std::vector<double>& scores, int n, Rng& rng);

struct Ensemble {
  std::vector<ModelF> members;

  void validate() const {
    if (members.empty()) throw Error(ErrorCode::empty_ensemble, "ensemble has no members");
  }
};

// Arithmetic mean of the member softmax outputs (probabilities, not logits).
Tensor<float> ensemble_predict(const Ensemble& e, const Tensor<float>& x);

// Mean mitosis probability for a single patch (center-cropped to the member
// input size).
std::array<float, 2> ensemble_predict_patch(const Ensemble& e, const Image<float>& patch);

// k negative-index multisets for bootstrap members; each member's sampling
// stream is derived from `master_seed` and the member index.
std::vector<std::vector<int>> build_bootstrap_datasets(const std::vector<double>& scores,
                                                       int k, int n,
                                                       std::uint64_t master_seed);

// Ensemble manifest: text file with k, the master seed and member paths.
void write_ensemble_manifest(const std::filesystem::path& path,
                             const std::vector<std::filesystem::path>& members,
                             std::uint64_t master_seed);
struct EnsembleManifest {
  int k = 0;
  std::uint64_t master_seed = 0;
  std::vector<std::filesystem::path> members;
};
EnsembleManifest read_ensemble_manifest(const std::filesystem::path& path);
Ensemble load_ensemble(const std::filesystem::path& manifest_path);

// Soft-target dataset: ensemble probabilities for every patch (eval mode,
// center crop). Targets sum to 1 by construction.
PatchSet make_soft_dataset(const Ensemble& e, const PatchSet& patches);

// Knowledge distillation: trains build_network(student_gamma) against the
// ensemble's averaged output probabilities with plain soft-target
// cross-entropy (no temperature). Checkpoint selection uses the hard-label
// validation F1.
ModelF distill(const Ensemble& e, const PatchSet& patches, const PatchSet& val,
               double student_gamma, const TrainConfig& cfg, const AugmentConfig& aug,
               const StainMatrix& stains = StainMatrix::ruifrok_hed(),
               std::vector<TrainLogEntry>* log = nullptr);

}  // namespace mito
