#pragma once

#include <vector>

#include "oodgauge/config.hpp"
#include "oodgauge/datagen.hpp"
#include "oodgauge/model.hpp"
#include "oodgauge/scoring.hpp"

namespace oodgauge {

struct EpochStats {
  double train_loss = 0.0;    // sample-weighted mean over the epoch's steps
  double val_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  double wall_time_s = 0.0;
};

struct TrainedRun {
  MlpParams model;
  TrainHistory history;
  LabeledDataset train_set;  // statistics fitting reads from here
  LabeledDataset val_set;    // eval_only
};

// Shuffled mini-batch Adam on L_multi = L_cls + alpha * L_ss for
// epochs x ceil(N/batch) steps. RNG streams: 0 = data generation,
// 1 = model init, 2 = batch shuffling, 3 = SSL augmentation, so toggling
// the SSL branch cannot perturb the classification path's randomness.
// Deterministic given the config; throws on a non-finite loss, naming the
// step.
TrainedRun train_run(const ExperimentConfig& config);

// Penultimate features of the training split -> Mahalanobis statistics.
// Rejects datasets flagged eval_only (leakage guard).
MahalanobisStats fit_mahalanobis_on_train(const MlpParams& model,
                                          const LabeledDataset& train_set,
                                          double lambda_reg = 1e-6);

}  // namespace oodgauge
