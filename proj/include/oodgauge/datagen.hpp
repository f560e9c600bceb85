#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "oodgauge/matrix.hpp"
#include "oodgauge/rng.hpp"

namespace oodgauge {

// Two concentric noisy rings, one per class: angle uniform on [0, 2pi),
// radius N(class_radii[c], radial_noise_std^2).
struct CircleSpec {
  std::array<double, 2> class_radii{0.5, 1.0};
  double radial_noise_std = 0.125;
  int n_per_class = 24000;
};

// OOD ring at r_factor times the ID base radius, same radial noise model.
struct RingOodSpec {
  double r_factor = 1.0;
  double base_radius = 1.0;
  int n = 16000;
  double radial_noise_std = 0.125;
};

struct LabeledDataset {
  Matrix features;          // N x d
  std::vector<int> labels;  // N values in [0, num_classes)
  int num_classes = 0;
  // Evaluation-only data; statistics fitting must reject it.
  bool eval_only = false;

  int size() const { return features.rows(); }
  int dims() const { return features.cols(); }
};

// Isotropic Gaussian blobs: labeled ID classes at class_means plus one
// unlabeled OOD blob at ood_mean, all sharing one std.
struct BlobSpec {
  int dims = 8;
  std::vector<std::vector<double>> class_means;
  std::vector<double> ood_mean;
  double shared_std = 0.8;
  int n_per_class = 4000;
  int n_ood = 10000;

  // Two ID classes and the OOD mean at mutual distance 4 (an equilateral
  // triangle in the first two coordinates), the rest of the space empty.
  static BlobSpec defaults();
};

struct MixRatio {
  explicit MixRatio(double lambda);
  double lambda = 0.0;  // weight of the OOD component; 0 = pure ID
};

LabeledDataset make_circle_id(const CircleSpec& spec, Rng& rng);
Matrix make_ood_ring(const RingOodSpec& spec, Rng& rng);

// 50 evenly spaced distance factors from 1.0 to 5.9 inclusive.
std::vector<double> r_grid();
// 11 evenly spaced mixing ratios from 0.0 to 1.0 inclusive.
std::vector<double> ratio_grid();

// (1 - lambda) * x_id + lambda * x_ood, elementwise.
std::vector<double> mixup(std::span<const double> x_id,
                          std::span<const double> x_ood, MixRatio ratio);
// Row i of the result mixes row i of each argument.
Matrix mixup_rows(const Matrix& id_rows, const Matrix& ood_rows,
                  MixRatio ratio);

std::pair<LabeledDataset, Matrix> make_blobs(const BlobSpec& spec, Rng& rng);

// CSV with header x0,...,x{d-1},label and 17 significant digits.
void write_labeled_csv(const LabeledDataset& ds, const std::string& path);
LabeledDataset read_labeled_csv(const std::string& path);
// Same format without the label column (OOD files).
void write_features_csv(const Matrix& features, const std::string& path);
Matrix read_features_csv(const std::string& path);

}  // namespace oodgauge
