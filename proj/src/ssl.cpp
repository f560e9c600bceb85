#include "oodgauge/ssl.hpp"

#include <cmath>
#include <stdexcept>

namespace oodgauge {

const char* to_string(SslKind kind) {
  switch (kind) {
    case SslKind::none: return "none";
    case SslKind::simclr: return "simclr";
    case SslKind::byol: return "byol";
  }
  throw std::logic_error("unreachable ssl kind");
}

SslKind ssl_kind_from_string(const std::string& s) {
  if (s == "none") return SslKind::none;
  if (s == "simclr") return SslKind::simclr;
  if (s == "byol") return SslKind::byol;
  throw std::invalid_argument("unknown ssl kind '" + s + "'");
}

std::pair<Matrix, Matrix> augment(const Matrix& x, const AugSpec& spec,
                                  Rng& rng) {
  if (spec.noise_std < 0.0) {
    throw std::invalid_argument("augment: noise_std must be >= 0");
  }
  Matrix v1 = x;
  for (double& e : v1.values()) e += rng.normal(0.0, spec.noise_std);
  Matrix v2 = x;
  for (double& e : v2.values()) e += rng.normal(0.0, spec.noise_std);
  return {std::move(v1), std::move(v2)};
}

std::vector<Matrix*> ProjectionHead::trainable() {
  return {&w1, &b1, &w2, &b2};
}

namespace {

Matrix uniform_fill(int rows, int cols, double bound, Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = rng.uniform_range(-bound, bound);
  }
  return m;
}

}  // namespace

ProjectionHead init_projection_head(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(kHiddenUnits));
  ProjectionHead head;
  head.w1 = uniform_fill(kHiddenUnits, kHiddenUnits, bound, rng);
  head.b1 = uniform_fill(1, kHiddenUnits, bound, rng);
  head.w2 = uniform_fill(kHiddenUnits, kHiddenUnits, bound, rng);
  head.b2 = uniform_fill(1, kHiddenUnits, bound, rng);
  return head;
}

ProjVars proj_leaves(Tape& tape, const ProjectionHead& head) {
  return {tape.leaf(head.w1), tape.leaf(head.b1), tape.leaf(head.w2),
          tape.leaf(head.b2)};
}

ProjVars proj_constants(Tape& tape, const ProjectionHead& head) {
  return {tape.constant(head.w1), tape.constant(head.b1),
          tape.constant(head.w2), tape.constant(head.b2)};
}

Var apply_projection(Tape& tape, const ProjVars& vars, Var h) {
  const Var hidden =
      tape.relu(tape.add_rowvec(tape.matmul(h, vars.w1), vars.b1));
  return tape.add_rowvec(tape.matmul(hidden, vars.w2), vars.b2);
}

Var ntxent_node(Tape& tape, Var z1, Var z2, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("ntxent: tau must be > 0");
  // Copy the batch size out: adding nodes invalidates value references.
  const int n = tape.value(z1).rows();
  if (n != tape.value(z2).rows() ||
      tape.value(z1).cols() != tape.value(z2).cols()) {
    throw std::invalid_argument("ntxent: view shapes differ");
  }
  if (n < 1) throw std::invalid_argument("ntxent: empty batch");

  const Var z = tape.concat_rows(normalize_rows(tape, z1),
                                 normalize_rows(tape, z2));
  const Var sims =
      tape.scale(tape.matmul(z, tape.transpose(z)), 1.0 / tau);  // 2N x 2N

  const int two_n = 2 * n;
  Matrix self_mask(two_n, two_n, 0.0);
  for (int i = 0; i < two_n; ++i) self_mask(i, i) = -1e9;
  const Var masked = tape.add(sims, tape.constant(std::move(self_mask)));
  const Var lse = logsumexp_rows(tape, masked);  // 2N x 1

  Matrix pos_mask(two_n, two_n, 0.0);
  for (int i = 0; i < n; ++i) {
    pos_mask(i, i + n) = 1.0;
    pos_mask(i + n, i) = 1.0;
  }
  const Var positives =
      tape.sum_rows(tape.mul(sims, tape.constant(std::move(pos_mask))));

  return tape.scale(tape.sum(tape.sub(lse, positives)), 1.0 / two_n);
}

double ntxent(const Matrix& z1, const Matrix& z2, double tau) {
  Tape tape;
  return tape.value(
      ntxent_node(tape, tape.constant(z1), tape.constant(z2), tau))(0, 0);
}

ByolState init_byol(const MlpParams& model, Rng& rng, double tau_ema) {
  if (tau_ema < 0.0 || tau_ema > 1.0) {
    throw std::invalid_argument("init_byol: tau_ema must lie in [0, 1]");
  }
  ByolState state;
  state.projector = init_projection_head(rng);
  state.predictor = init_projection_head(rng);
  state.target_w1 = model.w1;
  state.target_b1 = model.b1;
  state.target_w2 = model.w2;
  state.target_b2 = model.b2;
  state.target_projector = state.projector;
  state.tau_ema = tau_ema;
  return state;
}

namespace {

void ema_blend(Matrix& target, const Matrix& online, double tau) {
  if (!target.same_shape(online)) {
    throw std::invalid_argument("ema_update: shape mismatch");
  }
  for (std::size_t i = 0; i < target.size(); ++i) {
    target[i] = tau * target[i] + (1.0 - tau) * online[i];
  }
}

}  // namespace

void ema_update(ByolState& state, const MlpParams& model) {
  const double tau = state.tau_ema;
  ema_blend(state.target_w1, model.w1, tau);
  ema_blend(state.target_b1, model.b1, tau);
  ema_blend(state.target_w2, model.w2, tau);
  ema_blend(state.target_b2, model.b2, tau);
  ema_blend(state.target_projector.w1, state.projector.w1, tau);
  ema_blend(state.target_projector.b1, state.projector.b1, tau);
  ema_blend(state.target_projector.w2, state.projector.w2, tau);
  ema_blend(state.target_projector.b2, state.projector.b2, tau);
}

ByolVars byol_leaves(Tape& tape, const ByolState& state) {
  ByolVars vars;
  vars.projector = proj_leaves(tape, state.projector);
  vars.predictor = proj_leaves(tape, state.predictor);
  vars.target_trunk = {tape.leaf(state.target_w1), tape.leaf(state.target_b1),
                       tape.leaf(state.target_w2), tape.leaf(state.target_b2)};
  vars.target_projector = proj_leaves(tape, state.target_projector);
  return vars;
}

ByolVars byol_constants(Tape& tape, const ByolState& state) {
  ByolVars vars;
  vars.projector = proj_constants(tape, state.projector);
  vars.predictor = proj_constants(tape, state.predictor);
  vars.target_trunk = {
      tape.constant(state.target_w1), tape.constant(state.target_b1),
      tape.constant(state.target_w2), tape.constant(state.target_b2)};
  vars.target_projector = proj_constants(tape, state.target_projector);
  return vars;
}

Var byol_loss_node(Tape& tape, const TrunkVars& online_trunk,
                   const ByolVars& vars, Var view1, Var view2) {
  auto direction = [&](Var online_view, Var target_view) {
    const Var q = apply_projection(
        tape, vars.predictor,
        apply_projection(tape, vars.projector,
                         trunk_features(tape, online_trunk, online_view)));
    const Var zt = tape.stop_grad(apply_projection(
        tape, vars.target_projector,
        trunk_features(tape, vars.target_trunk, target_view)));
    const Var cos =
        tape.sum_rows(tape.mul(normalize_rows(tape, q),
                               normalize_rows(tape, zt)));  // N x 1
    const int n = tape.value(cos).rows();
    const Var per_row =
        tape.add(tape.constant(Matrix(n, 1, 2.0)), tape.scale(cos, -2.0));
    return tape.scale(tape.sum(per_row), 1.0 / n);
  };
  const Var d1 = direction(view1, view2);
  const Var d2 = direction(view2, view1);
  return tape.scale(tape.add(d1, d2), 0.5);
}

double byol_loss(const MlpParams& model, const ByolState& state,
                 const Matrix& view1, const Matrix& view2) {
  if (!view1.same_shape(view2)) {
    throw std::invalid_argument("byol_loss: view shapes differ");
  }
  Tape tape;
  const TrunkVars trunk = trunk_constants(tape, model);
  const ByolVars vars = byol_constants(tape, state);
  const Var loss = byol_loss_node(tape, trunk, vars, tape.constant(view1),
                                  tape.constant(view2));
  return tape.value(loss)(0, 0);
}

Var multitask_node(Tape& tape, Var l_cls, Var l_ss, double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("multitask: alpha must be >= 0");
  return tape.add(l_cls, tape.scale(l_ss, alpha));
}

double multitask_loss(double l_cls, double l_ss, double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("multitask: alpha must be >= 0");
  return l_cls + alpha * l_ss;
}

}  // namespace oodgauge
