#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oodgauge/datagen.hpp"
#include "oodgauge/model.hpp"
#include "oodgauge/scoring.hpp"
#include "oodgauge/ssl.hpp"

namespace oodgauge {

enum class DatasetKind { circles, blobs };

const char* to_string(DatasetKind kind);
DatasetKind dataset_kind_from_string(const std::string& s);

// One fully-determined experiment. Serialized key=value both ways, so a
// config file, the CLI overrides, and the metadata echoed into results all
// speak the same vocabulary.
struct ExperimentConfig {
  HeadKind loss_kind = HeadKind::ce;
  SslKind ssl_kind = SslKind::none;
  double alpha = 1.0;
  int epochs = 10;
  int batch_size = 128;
  double lr = 0.01;
  std::uint64_t seed = 1;
  DatasetKind dataset = DatasetKind::circles;
  std::vector<Scorer> scorers{Scorer::baseline, Scorer::md, Scorer::odin};

  OdinParams odin;
  double ntxent_tau = 0.5;
  double byol_tau_ema = 0.99;
  AugSpec aug;

  // Ring geometry and protocol sizes (two classes).
  double circle_radius_inner = 0.5;
  double circle_radius_outer = 1.0;
  double circle_noise_std = 0.125;
  int n_train_per_class = 24000;

  // Blob geometry: two ID means and the OOD mean form an equilateral
  // triangle with side blob_mean_distance in the first two coordinates.
  int blob_dims = 8;
  double blob_std = 0.8;
  double blob_mean_distance = 4.0;
  int blob_n_per_class = 4000;
  int blob_n_ood = 10000;

  // Evaluation sizes (totals). n_ood_eval is per r value.
  int n_val = 16000;
  int n_id_test = 16000;
  int n_ood_eval = 16000;

  // Divides every sample count for fast CI runs (1 = full protocol).
  int scale = 1;
};

// Throws std::invalid_argument naming the offending field.
void validate(const ExperimentConfig& config);

// Copy with every sample count divided by `scale` (floored at 1) and scale
// reset to 1. Training and sweeps operate on this.
ExperimentConfig effective(const ExperimentConfig& config);

CircleSpec circle_spec(const ExperimentConfig& config);
BlobSpec blob_spec(const ExperimentConfig& config);

// One `key = value` line per field, fixed order.
std::string serialize_config(const ExperimentConfig& config);

// Applies one key to the config; unknown key or bad value throws.
void apply_config_key(ExperimentConfig& config, const std::string& key,
                      const std::string& value);

// Flat key = value file; '#' starts a comment; blank lines ignored.
ExperimentConfig parse_config_text(const std::string& text,
                                   ExperimentConfig base = {});
ExperimentConfig load_config_file(const std::string& path,
                                  ExperimentConfig base = {});

}  // namespace oodgauge
