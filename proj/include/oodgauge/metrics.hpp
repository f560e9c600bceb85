#pragma once

#include <span>

namespace oodgauge {

// Probability that a random ID score exceeds a random OOD score, ties worth
// 1/2: [#(id > ood) + 0.5*#(id = ood)] / (n_id * n_ood). Computed by
// Mann-Whitney rank sums with average ranks for ties, O(n log n); the
// numerator is a multiple of 0.5 and therefore exact, so the result matches
// the O(n^2) pairwise count bit-for-bit.
double auroc(std::span<const double> id_scores,
             std::span<const double> ood_scores);

// Fraction of exact matches.
double accuracy(std::span<const int> predictions, std::span<const int> truth);

// Spearman rank correlation: Pearson correlation of the two rank vectors,
// with average ranks for ties. Throws if either input has zero rank
// variance (correlation undefined).
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace oodgauge
