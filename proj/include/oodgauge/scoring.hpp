#pragma once

#include <span>
#include <string>
#include <vector>

#include "oodgauge/matrix.hpp"
#include "oodgauge/model.hpp"

namespace oodgauge {

// Higher score = more in-distribution, for every scorer.
enum class Scorer { baseline, md, odin };

const char* to_string(Scorer scorer);
Scorer scorer_from_string(const std::string& s);

// softmax(logits / temperature), max-stabilized.
std::vector<double> softmax_with_temperature(std::span<const double> logits,
                                             double temperature);

// CE head: max_k softmax(logits)_k. OVADM head: max_k sigma(logits_k).
double msp_score(std::span<const double> logits, HeadKind head);
std::vector<double> msp_scores(const Matrix& logits, HeadKind head);

// Lower-triangular L with A = L·L^T. Throws if A is not positive definite.
Matrix cholesky_lower(const Matrix& a);
// Inverse of a symmetric positive-definite matrix via its Cholesky factor.
Matrix spd_inverse(const Matrix& a);

struct MahalanobisStats {
  Matrix mu;              // K x d class means
  Matrix precision;       // d x d, inverse of (tied covariance + lambda*I)
  Matrix chol_precision;  // lower L with precision = L·L^T
  double lambda_reg = 1e-6;
};

// Fills chol_precision from the given precision matrix (which must be SPD).
MahalanobisStats make_mahalanobis_stats(Matrix mu, Matrix precision,
                                        double lambda_reg);

// Class means plus tied covariance Sigma = (1/N)·sum_i (h_i - mu_{y_i})·
// (h_i - mu_{y_i})^T; precision = (Sigma + lambda*I)^{-1}. Every class in
// [0, num_classes) must have at least one sample.
MahalanobisStats fit_mahalanobis(const Matrix& features,
                                 std::span<const int> labels, int num_classes,
                                 double lambda_reg = 1e-6);

// max_k of -(h - mu_k)^T · precision · (h - mu_k), computed as a negated sum
// of squares through the Cholesky factor so the result is structurally <= 0.
double md_score(const MahalanobisStats& stats, std::span<const double> h);
std::vector<double> md_scores(const MahalanobisStats& stats,
                              const Matrix& features);

struct OdinParams {
  double temperature = 1000.0;
  double epsilon = 0.01;  // input-space perturbation size
};

// Temperature-scaled score after one signed input-gradient step:
// p = softmax(logits(x)/T); x~ = x + eps*sign(grad_x log max_k p_k);
// return max_k softmax(logits(x~)/T)_k. The OVADM head replaces
// softmax(./T) with sigma(l_k/T) throughout. With T=1, eps=0 this equals
// msp_score exactly (shared code path).
double odin_score(const MlpParams& model, std::span<const double> x,
                  const OdinParams& params);
std::vector<double> odin_scores(const MlpParams& model, const Matrix& xs,
                                const OdinParams& params);

// The perturbed inputs x~ (exposed so perturbation geometry is testable).
Matrix odin_perturb(const MlpParams& model, const Matrix& xs,
                    const OdinParams& params);

}  // namespace oodgauge
