#pragma once

#include <string>
#include <utility>
#include <vector>

#include "oodgauge/matrix.hpp"
#include "oodgauge/model.hpp"
#include "oodgauge/rng.hpp"
#include "oodgauge/tape.hpp"

namespace oodgauge {

enum class SslKind { none, simclr, byol };

const char* to_string(SslKind kind);
SslKind ssl_kind_from_string(const std::string& s);

struct AugSpec {
  double noise_std = 0.01;
};

// Two independently noised copies of x: view = x + n, n ~ N(0, noise_std^2)
// i.i.d. per element. Draw order: view1 row-major, then view2.
std::pair<Matrix, Matrix> augment(const Matrix& x, const AugSpec& spec,
                                  Rng& rng);

// 8 -> 8 (ReLU) -> 8 (linear) head, used both as the SimCLR projector and as
// the BYOL projector/predictor.
struct ProjectionHead {
  Matrix w1, b1;  // 8 x 8, 1 x 8
  Matrix w2, b2;  // 8 x 8, 1 x 8

  std::vector<Matrix*> trainable();
};

// Weights and biases Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)). Non-zero bias
// init keeps the head's output away from the exact zero vector even when a
// ReLU-dead trunk row feeds it, so cosine-based losses stay defined.
ProjectionHead init_projection_head(Rng& rng);

struct ProjVars {
  Var w1, b1, w2, b2;
};

ProjVars proj_leaves(Tape& tape, const ProjectionHead& head);
ProjVars proj_constants(Tape& tape, const ProjectionHead& head);
Var apply_projection(Tape& tape, const ProjVars& vars, Var h);

// NT-Xent over two aligned batches of projections (row i of z1 and row i of
// z2 are the positive pair). Cosine similarities at temperature tau; every
// anchor's denominator ranges over the other 2N-1 embeddings.
Var ntxent_node(Tape& tape, Var z1, Var z2, double tau);
double ntxent(const Matrix& z1, const Matrix& z2, double tau = 0.5);

// Online side shares the classifier trunk and owns projector + predictor;
// the target side is an EMA copy of trunk + projector.
struct ByolState {
  ProjectionHead projector;
  ProjectionHead predictor;
  Matrix target_w1, target_b1, target_w2, target_b2;
  ProjectionHead target_projector;
  double tau_ema = 0.99;
};

// Fresh projector/predictor; the target branch starts as a copy of the
// online one (trunk from `model`, projector from the new online projector).
ByolState init_byol(const MlpParams& model, Rng& rng, double tau_ema = 0.99);

// target <- tau_ema * target + (1 - tau_ema) * online, trunk and projector
// only; applied once per optimizer step.
void ema_update(ByolState& state, const MlpParams& model);

struct ByolVars {
  ProjVars projector;
  ProjVars predictor;
  TrunkVars target_trunk;
  ProjVars target_projector;
};

// Everything as leaves; the loss stop-grads the target branch, so target
// leaves receive exactly zero gradient (checkable via backward()).
ByolVars byol_leaves(Tape& tape, const ByolState& state);
ByolVars byol_constants(Tape& tape, const ByolState& state);

// Symmetric BYOL loss: per direction, mean over rows of
// 2 - 2*cos(predictor(proj(trunk(v))), stop_grad(target_proj(target_trunk(v')))),
// then the mean of the two directions. Lies in [0, 4].
Var byol_loss_node(Tape& tape, const TrunkVars& online_trunk,
                   const ByolVars& vars, Var view1, Var view2);
double byol_loss(const MlpParams& model, const ByolState& state,
                 const Matrix& view1, const Matrix& view2);

// L_multi = L_cls + alpha * L_ss.
Var multitask_node(Tape& tape, Var l_cls, Var l_ss, double alpha);
double multitask_loss(double l_cls, double l_ss, double alpha);

}  // namespace oodgauge
