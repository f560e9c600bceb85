#include "oodgauge/train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "oodgauge/adam.hpp"
#include "oodgauge/metrics.hpp"
#include "oodgauge/rng.hpp"
#include "oodgauge/ssl.hpp"
#include "oodgauge/tape.hpp"

namespace oodgauge {

namespace {

constexpr std::uint64_t kStreamData = 0;
constexpr std::uint64_t kStreamInit = 1;
constexpr std::uint64_t kStreamShuffle = 2;
constexpr std::uint64_t kStreamAugment = 3;

LabeledDataset generate_id_set(const ExperimentConfig& cfg, int total,
                               Rng& rng) {
  const int per_class = std::max(1, total / 2);
  if (cfg.dataset == DatasetKind::circles) {
    CircleSpec spec = circle_spec(cfg);
    spec.n_per_class = per_class;
    return make_circle_id(spec, rng);
  }
  BlobSpec spec = blob_spec(cfg);
  spec.n_per_class = per_class;
  spec.n_ood = 0;
  return make_blobs(spec, rng).first;
}

}  // namespace

TrainedRun train_run(const ExperimentConfig& config) {
  validate(config);
  const ExperimentConfig cfg = effective(config);
  const auto t_start = std::chrono::steady_clock::now();

  Rng rng_data(cfg.seed, kStreamData);
  Rng rng_init(cfg.seed, kStreamInit);
  Rng rng_shuffle(cfg.seed, kStreamShuffle);
  Rng rng_augment(cfg.seed, kStreamAugment);

  TrainedRun run;
  run.train_set = generate_id_set(
      cfg,
      2 * (cfg.dataset == DatasetKind::circles ? cfg.n_train_per_class
                                               : cfg.blob_n_per_class),
      rng_data);
  run.val_set = generate_id_set(cfg, cfg.n_val, rng_data);
  run.val_set.eval_only = true;

  const int d_in = run.train_set.dims();
  const int num_classes = run.train_set.num_classes;
  run.model = init_mlp(d_in, num_classes, cfg.loss_kind, rng_init);

  ProjectionHead simclr_projector;
  ByolState byol_state;
  if (cfg.ssl_kind == SslKind::simclr) {
    simclr_projector = init_projection_head(rng_init);
  } else if (cfg.ssl_kind == SslKind::byol) {
    byol_state = init_byol(run.model, rng_init, cfg.byol_tau_ema);
  }

  std::vector<Matrix*> params = run.model.trainable();
  if (cfg.ssl_kind == SslKind::simclr) {
    for (Matrix* p : simclr_projector.trainable()) params.push_back(p);
  } else if (cfg.ssl_kind == SslKind::byol) {
    for (Matrix* p : byol_state.projector.trainable()) params.push_back(p);
    for (Matrix* p : byol_state.predictor.trainable()) params.push_back(p);
  }
  AdamState opt = AdamState::init(params);
  AdamHyper hyper;
  hyper.lr = cfg.lr;

  const int n = run.train_set.size();
  const int steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  int global_step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng_shuffle.shuffle(order);
    double loss_sum = 0.0;

    for (int step = 0; step < steps_per_epoch; ++step) {
      ++global_step;
      const int begin = step * cfg.batch_size;
      const int count = std::min(cfg.batch_size, n - begin);
      const std::span<const int> batch_idx(order.data() + begin,
                                           static_cast<std::size_t>(count));
      const Matrix batch_x = take_rows(run.train_set.features, batch_idx);
      std::vector<int> batch_y(static_cast<std::size_t>(count));
      for (int i = 0; i < count; ++i) {
        batch_y[static_cast<std::size_t>(i)] =
            run.train_set.labels[static_cast<std::size_t>(batch_idx[i])];
      }

      Tape tape;
      const MlpVars vars = mlp_leaves(tape, run.model);
      const Var x = tape.constant(batch_x);
      const Var features = trunk_features(tape, vars.trunk, x);
      const Var logits = logits_from_features(tape, vars, features);
      const Var l_cls =
          classification_loss_node(tape, cfg.loss_kind, logits, batch_y);

      Var loss = l_cls;
      std::vector<Var> wrt = collect_vars(vars);
      if (cfg.ssl_kind == SslKind::simclr) {
        auto [v1, v2] = augment(batch_x, cfg.aug, rng_augment);
        const ProjVars proj = proj_leaves(tape, simclr_projector);
        const Var z1 = apply_projection(
            tape, proj, trunk_features(tape, vars.trunk, tape.constant(v1)));
        const Var z2 = apply_projection(
            tape, proj, trunk_features(tape, vars.trunk, tape.constant(v2)));
        const Var l_ss = ntxent_node(tape, z1, z2, cfg.ntxent_tau);
        loss = multitask_node(tape, l_cls, l_ss, cfg.alpha);
        for (Var v : {proj.w1, proj.b1, proj.w2, proj.b2}) wrt.push_back(v);
      } else if (cfg.ssl_kind == SslKind::byol) {
        auto [v1, v2] = augment(batch_x, cfg.aug, rng_augment);
        ByolVars bvars;
        bvars.projector = proj_leaves(tape, byol_state.projector);
        bvars.predictor = proj_leaves(tape, byol_state.predictor);
        bvars.target_trunk = {tape.constant(byol_state.target_w1),
                              tape.constant(byol_state.target_b1),
                              tape.constant(byol_state.target_w2),
                              tape.constant(byol_state.target_b2)};
        bvars.target_projector =
            proj_constants(tape, byol_state.target_projector);
        const Var l_ss = byol_loss_node(tape, vars.trunk, bvars,
                                        tape.constant(v1), tape.constant(v2));
        loss = multitask_node(tape, l_cls, l_ss, cfg.alpha);
        for (Var v : {bvars.projector.w1, bvars.projector.b1,
                      bvars.projector.w2, bvars.projector.b2,
                      bvars.predictor.w1, bvars.predictor.b1,
                      bvars.predictor.w2, bvars.predictor.b2}) {
          wrt.push_back(v);
        }
      }

      const double loss_value = tape.value(loss)(0, 0);
      if (!std::isfinite(loss_value)) {
        throw std::runtime_error(
            "training aborted: non-finite loss at step " +
            std::to_string(global_step) + " (epoch " +
            std::to_string(epoch + 1) + ")");
      }
      loss_sum += loss_value * count;

      const std::vector<Matrix> grads = tape.backward(loss, wrt);
      adam_step(params, grads, opt, hyper);
      if (cfg.ssl_kind == SslKind::byol) {
        ema_update(byol_state, run.model);
      }
    }

    EpochStats stats;
    stats.train_loss = loss_sum / n;
    const Matrix val_logits = forward(run.model, run.val_set.features).logits;
    stats.val_accuracy =
        accuracy(predict(val_logits), run.val_set.labels);
    run.history.epochs.push_back(stats);
  }

  run.history.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return run;
}

MahalanobisStats fit_mahalanobis_on_train(const MlpParams& model,
                                          const LabeledDataset& train_set,
                                          double lambda_reg) {
  if (train_set.eval_only) {
    throw std::invalid_argument(
        "fit_mahalanobis_on_train: refusing to fit statistics on "
        "evaluation-only data");
  }
  const Matrix features = forward(model, train_set.features).features;
  return fit_mahalanobis(features, train_set.labels, train_set.num_classes,
                         lambda_reg);
}

}  // namespace oodgauge
