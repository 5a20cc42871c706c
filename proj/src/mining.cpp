#include "mito/mining.hpp"

#include <fstream>

#include "mito/model_io.hpp"

namespace mito {

std::vector<int> hard_negative_sample(const std::vector<double>& scores, int n, Rng& rng) {
  if (n < 1) throw Error(ErrorCode::precondition, "sample count must be >= 1");
  double total = 0.0;
  for (double s : scores) {
    if (s < 0.0) throw Error(ErrorCode::precondition, "scores must be non-negative");
    total += s;
  }
  if (!(total > 0.0))
    throw Error(ErrorCode::all_zero_scores, "cannot sample from all-zero scores");

  // inverse-CDF sampling over the cumulative score sums
  std::vector<double> cdf(scores.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    acc += scores[i];
    cdf[i] = acc;
  }
  const std::size_t n_sz = std::size_t(n);
  std::vector<int> draws(n_sz);
  for (std::size_t i = 0; i < n_sz; ++i) {
    double u = rng.uniform() * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    draws[i] = int(it - cdf.begin());
  }
  return draws;
}

Tensor<float> ensemble_predict(const Ensemble& e, const Tensor<float>& x) {
  e.validate();
  Tensor<float> mean = forward(e.members.front(), x);
  for (std::size_t i = 1; i < e.members.size(); ++i)
    mean.data += forward(e.members[i], x).data;
  mean.data /= float(e.members.size());
  return mean;
}

std::array<float, 2> ensemble_predict_patch(const Ensemble& e, const Image<float>& patch) {
  e.validate();
  Image<float> img = center_crop(patch, e.members.front().spec.input_size);
  Tensor<float> p = ensemble_predict(e, Tensor<float>::from_image(img));
  return {p.data(kClassMitosis, 0), p.data(kClassBackground, 0)};
}

std::vector<std::vector<int>> build_bootstrap_datasets(const std::vector<double>& scores,
                                                       int k, int n,
                                                       std::uint64_t master_seed) {
  if (k < 1) throw Error(ErrorCode::precondition, "k must be >= 1");
  std::vector<std::vector<int>> datasets;
  datasets.reserve(std::size_t(k));
  for (int member = 0; member < k; ++member) {
    Rng rng(derive_seed(master_seed, 0x5a00 + std::uint64_t(member)));
    datasets.push_back(hard_negative_sample(scores, n, rng));
  }
  return datasets;
}

void write_ensemble_manifest(const std::filesystem::path& path,
                             const std::vector<std::filesystem::path>& members,
                             std::uint64_t master_seed) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  os << "k = " << members.size() << "\n";
  os << "master_seed = " << master_seed << "\n";
  for (const auto& m : members) os << "member = " << m.string() << "\n";
}

EnsembleManifest read_ensemble_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::missing_input, "cannot open " + path.string());
  EnsembleManifest manifest;
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
    if (key == "k") manifest.k = std::stoi(value);
    else if (key == "master_seed") manifest.master_seed = std::stoull(value);
    else if (key == "member") manifest.members.emplace_back(value);
    else throw Error(ErrorCode::io_error, "unknown ensemble manifest key: " + key);
  }
  if (manifest.k != int(manifest.members.size()))
    throw Error(ErrorCode::io_error, "ensemble manifest k does not match member count");
  return manifest;
}

Ensemble load_ensemble(const std::filesystem::path& manifest_path) {
  EnsembleManifest manifest = read_ensemble_manifest(manifest_path);
  Ensemble e;
  for (const auto& member : manifest.members) {
    std::filesystem::path p = member;
    if (p.is_relative()) p = manifest_path.parent_path() / p;
    e.members.push_back(load_model(p));
  }
  e.validate();
  return e;
}

PatchSet make_soft_dataset(const Ensemble& e, const PatchSet& patches) {
  e.validate();
  if (patches.count() == 0) throw Error(ErrorCode::precondition, "no patches to distill on");
  PatchSet soft = patches;
  std::vector<std::array<float, 2>> targets(std::size_t(patches.count()));
  for (int i = 0; i < patches.count(); ++i)
    targets[std::size_t(i)] = ensemble_predict_patch(e, patches.patch(i));
  soft.set_soft(std::move(targets));
  return soft;
}

ModelF distill(const Ensemble& e, const PatchSet& patches, const PatchSet& val,
               double student_gamma, const TrainConfig& cfg, const AugmentConfig& aug,
               const StainMatrix& stains, std::vector<TrainLogEntry>* log) {
  PatchSet soft = make_soft_dataset(e, patches);
  NetworkSpec spec = build_network(student_gamma);
  return train<float>(soft, val, spec, cfg, aug, stains, log);
}

}  // namespace mito
