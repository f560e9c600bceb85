#include "oodgauge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace oodgauge {

double auroc(std::span<const double> id_scores,
             std::span<const double> ood_scores) {
  if (id_scores.empty() || ood_scores.empty()) {
    throw std::invalid_argument("auroc: both score sets must be non-empty");
  }
  struct Entry {
    double score;
    bool is_id;
  };
  std::vector<Entry> entries;
  entries.reserve(id_scores.size() + ood_scores.size());
  for (double s : id_scores) {
    if (!std::isfinite(s)) throw std::invalid_argument("auroc: non-finite score");
    entries.push_back({s, true});
  }
  for (double s : ood_scores) {
    if (!std::isfinite(s)) throw std::invalid_argument("auroc: non-finite score");
    entries.push_back({s, false});
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.score < b.score; });

  // Rank sum of the ID set with average ranks across tie groups. Average
  // ranks are multiples of 0.5, so the accumulation below is exact.
  double id_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < entries.size()) {
    std::size_t j = i;
    while (j < entries.size() && entries[j].score == entries[i].score) ++j;
    // Ranks i+1 .. j (1-based) share the average (i+1+j)/2.
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (entries[k].is_id) id_rank_sum += avg_rank;
    }
    i = j;
  }

  const double n_id = static_cast<double>(id_scores.size());
  const double n_ood = static_cast<double>(ood_scores.size());
  const double u = id_rank_sum - n_id * (n_id + 1.0) / 2.0;
  return u / (n_id * n_ood);
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && v[idx[j]] == v[idx[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[idx[k]] = avg_rank;
    i = j;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("spearman: length mismatch");
  }
  if (x.size() < 2) {
    throw std::invalid_argument("spearman: need at least two points");
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("spearman: non-finite");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw std::invalid_argument("spearman: non-finite");
  }
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean_x += rx[i];
    mean_y += ry[i];
  }
  mean_x /= n;
  mean_y /= n;
  double cov = 0.0, var_x = 0.0, var_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = rx[i] - mean_x;
    const double dy = ry[i] - mean_y;
    cov += dx * dy;
    var_x += dx * dx;
    var_y += dy * dy;
  }
  if (var_x == 0.0 || var_y == 0.0) {
    throw std::invalid_argument(
        "spearman: undefined when a rank vector is constant");
  }
  return cov / std::sqrt(var_x * var_y);
}

double accuracy(std::span<const int> predictions, std::span<const int> truth) {
  if (predictions.size() != truth.size()) {
    throw std::invalid_argument("accuracy: length mismatch");
  }
  if (predictions.empty()) {
    throw std::invalid_argument("accuracy: empty inputs");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == truth[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

}  // namespace oodgauge
