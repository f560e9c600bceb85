#pragma once

#include <vector>

#include "oodgauge/config.hpp"
#include "oodgauge/datagen.hpp"
#include "oodgauge/results.hpp"
#include "oodgauge/scoring.hpp"
#include "oodgauge/train.hpp"

namespace oodgauge {

struct EvalResult {
  double auroc = 0.0;
  double id_accuracy = 0.0;
};

// Scores both sets with one scorer: AUROC(id scores vs ood scores) plus
// classification accuracy on the ID set. `stats` is required for the md
// scorer (error otherwise) and ignored by the rest.
EvalResult evaluate_ood(const MlpParams& model, Scorer scorer,
                        const LabeledDataset& id_test, const Matrix& ood_set,
                        const MahalanobisStats* stats,
                        const OdinParams& odin = {});

// Trains one run, then evaluates every configured scorer at every r of the
// 50-point grid against pre-built OOD rings (shared across methods via the
// eval RNG stream). One record per (r, scorer). Circles dataset only.
std::vector<SweepRecord> sweep_r(const ExperimentConfig& config);

// Blob counterpart over the 11-point mixing-ratio grid: mixed evaluation
// sets pair each ID pool sample with a distinct shuffled OOD pool sample,
// built once per lambda and shared across scorers. id_accuracy holds the
// accuracy on the mixed samples against their ID labels.
std::vector<SweepRecord> sweep_mix(const ExperimentConfig& config);

}  // namespace oodgauge
