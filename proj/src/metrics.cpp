#include "mito/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

namespace mito {

namespace {

// Kuhn's augmenting-path maximum bipartite matching.
bool try_augment(int u, const std::vector<std::vector<int>>& adj, std::vector<char>& visited,
                 std::vector<int>& truth_match) {
  for (int v : adj[std::size_t(u)]) {
    if (visited[std::size_t(v)]) continue;
    visited[std::size_t(v)] = 1;
    if (truth_match[std::size_t(v)] < 0 ||
        try_augment(truth_match[std::size_t(v)], adj, visited, truth_match)) {
      truth_match[std::size_t(v)] = u;
      return true;
    }
  }
  return false;
}

}  // namespace

MatchResult match_f1(const std::vector<Eigen::Vector2d>& pred,
                     const std::vector<Eigen::Vector2d>& truth, const MatchConfig& cfg) {
  cfg.validate();
  const double r2 = cfg.radius * cfg.radius;
  std::vector<std::vector<int>> adj(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i)
    for (std::size_t j = 0; j < truth.size(); ++j)
      if ((pred[i] - truth[j]).squaredNorm() <= r2) adj[i].push_back(int(j));

  std::vector<int> truth_match(truth.size(), -1);
  int matched = 0;
  for (std::size_t u = 0; u < pred.size(); ++u) {
    std::vector<char> visited(truth.size(), 0);
    if (try_augment(int(u), adj, visited, truth_match)) ++matched;
  }

  MatchResult res;
  res.matched = matched;
  res.pred_to_truth.assign(pred.size(), -1);
  for (std::size_t j = 0; j < truth.size(); ++j)
    if (truth_match[j] >= 0) res.pred_to_truth[std::size_t(truth_match[j])] = int(j);
  res.precision = pred.empty() ? 0.0 : double(matched) / double(pred.size());
  res.recall = truth.empty() ? 0.0 : double(matched) / double(truth.size());
  res.f1 = res.precision + res.recall > 0.0
               ? 2.0 * res.precision * res.recall / (res.precision + res.recall)
               : 0.0;
  return res;
}

std::optional<double> kappa_quadratic(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size() || a.empty())
    throw Error(ErrorCode::length_mismatch, "kappa needs equal non-empty label lists");

  // Map labels to a contiguous 0..k-1 category range.
  std::map<int, int> categories;
  for (int v : a) categories.emplace(v, 0);
  for (int v : b) categories.emplace(v, 0);
  int k = 0;
  for (auto& [label, idx] : categories) idx = k++;
  if (k == 1) return std::nullopt;  // both raters constant and identical

  Eigen::MatrixXd observed = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t i = 0; i < a.size(); ++i)
    observed(categories[a[i]], categories[b[i]]) += 1.0;
  const double n = double(a.size());
  Eigen::VectorXd row = observed.rowwise().sum();
  Eigen::VectorXd col = observed.colwise().sum();

  double num = 0.0, den = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      double w = double(i - j) * (i - j) / double((k - 1) * (k - 1));
      num += w * observed(i, j);
      den += w * row(i) * col(j) / n;
    }
  if (den == 0.0) return std::nullopt;
  return 1.0 - num / den;
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t(0));
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    double rank = 0.5 * double(i + j) + 1.0;  // average of 1-based positions
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::vector<double> default_sweep_grid(double lo, double hi, double step) {
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    double v = lo + i * step;
    if (v > hi + 1e-12) break;
    grid.push_back(v);
  }
  return grid;
}

SweepResult sweep_threshold(const DetectionList& detections,
                            const std::vector<Eigen::Vector2d>& truth,
                            const MatchConfig& cfg, const std::vector<double>& grid) {
  if (grid.empty()) throw Error(ErrorCode::precondition, "sweep grid is empty");
  SweepResult res;
  for (double delta : grid) {
    DetectionList kept = apply_threshold(detections, delta);
    MatchResult m = match_f1(kept.points(), truth, cfg);
    res.curve.push_back({delta, m.precision, m.recall, m.f1});
    if (res.curve.size() == 1 || m.f1 >= res.best_f1) {
      res.best_f1 = m.f1;
      res.best_delta = delta;
    }
  }
  return res;
}

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& sweep) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  os << "delta,precision,recall,f1\n";
  for (const auto& p : sweep.curve)
    os << p.delta << ',' << p.precision << ',' << p.recall << ',' << p.f1 << '\n';
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error(ErrorCode::degenerate_input, "spearman needs equal lists of length >= 2");
  std::vector<double> rx = average_ranks(x);
  std::vector<double> ry = average_ranks(y);
  const double n = double(x.size());
  double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    throw Error(ErrorCode::degenerate_input, "spearman input is constant");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace mito
