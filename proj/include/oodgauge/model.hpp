#pragma once

#include <span>
#include <string>
#include <vector>

#include "oodgauge/matrix.hpp"
#include "oodgauge/rng.hpp"
#include "oodgauge/tape.hpp"

namespace oodgauge {

inline constexpr int kHiddenUnits = 8;

enum class HeadKind { ce, ovadm };

const char* to_string(HeadKind kind);
HeadKind head_kind_from_string(const std::string& s);

// Two-hidden-layer MLP trunk (d_in -> 8 -> 8) with either a linear softmax
// head or learned OVADM centroids (logit k = -|h - w_k|^2, the negative
// squared distance). Weights are row-major with batches as rows:
// h = relu(relu(x*W1 + b1)*W2 + b2).
struct MlpParams {
  Matrix w1, b1;  // d_in x 8, 1 x 8
  Matrix w2, b2;  // 8 x 8, 1 x 8
  HeadKind head = HeadKind::ce;
  Matrix w_out, b_out;  // K x 8, 1 x K (ce head)
  Matrix centroids;     // K x 8 (ovadm head)

  int d_in() const { return w1.rows(); }
  int num_classes() const {
    return head == HeadKind::ce ? w_out.rows() : centroids.rows();
  }
  // Fixed order: trunk, then head. Drives optimizer state layout.
  std::vector<Matrix*> trainable();
  std::vector<const Matrix*> trainable() const;
};

// Weights Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)), biases zero, OVADM
// centroids standard normal.
MlpParams init_mlp(int d_in, int num_classes, HeadKind head, Rng& rng);

struct ForwardResult {
  Matrix features;  // N x 8 penultimate activations
  Matrix logits;    // N x K
};

ForwardResult forward(const MlpParams& params, const Matrix& x);

// Mean cross-entropy of the true class under a max-stabilized softmax.
double ce_loss(const Matrix& logits, std::span<const int> labels);

// One-vs-all binary cross-entropy over distance logits: per sample
// softplus(-l_y) + sum_{k != y} softplus(l_k), averaged over the batch.
double ovadm_loss(const Matrix& logits, std::span<const int> labels);

// Row-wise argmax; ties break toward the lower class index.
std::vector<int> predict(const Matrix& logits);

// --- tape builders (training and input-gradient paths) ---

struct TrunkVars {
  Var w1, b1, w2, b2;
};

struct MlpVars {
  TrunkVars trunk;
  Var head_w;  // w_out or centroids
  Var head_b;  // b_out; unused for ovadm
  HeadKind head = HeadKind::ce;
};

TrunkVars trunk_leaves(Tape& tape, const MlpParams& params);
TrunkVars trunk_constants(Tape& tape, const MlpParams& params);
MlpVars mlp_leaves(Tape& tape, const MlpParams& params);
MlpVars mlp_constants(Tape& tape, const MlpParams& params);
std::vector<Var> collect_vars(const MlpVars& vars);

Var trunk_features(Tape& tape, const TrunkVars& vars, Var x);
Var logits_from_features(Tape& tape, const MlpVars& vars, Var features);

Var ce_loss_node(Tape& tape, Var logits, std::span<const int> labels);
Var ovadm_loss_node(Tape& tape, Var logits, std::span<const int> labels);
Var classification_loss_node(Tape& tape, HeadKind head, Var logits,
                             std::span<const int> labels);

// Text checkpoint, bitwise round-trip (17 significant digits).
void save_checkpoint(const MlpParams& params, const std::string& path);
MlpParams load_checkpoint(const std::string& path);

}  // namespace oodgauge
