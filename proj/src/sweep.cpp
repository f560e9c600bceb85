#include "oodgauge/sweep.hpp"

#include <chrono>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "oodgauge/metrics.hpp"
#include "oodgauge/rng.hpp"

namespace oodgauge {

namespace {

constexpr std::uint64_t kStreamEvalGen = 4;
constexpr std::uint64_t kStreamMixPairing = 5;

std::vector<double> score_set(const MlpParams& model, Scorer scorer,
                              const Matrix& inputs,
                              const MahalanobisStats* stats,
                              const OdinParams& odin) {
  switch (scorer) {
    case Scorer::baseline:
      return msp_scores(forward(model, inputs).logits, model.head);
    case Scorer::md: {
      if (stats == nullptr) {
        throw std::invalid_argument(
            "md scorer requires fitted Mahalanobis statistics");
      }
      return md_scores(*stats, forward(model, inputs).features);
    }
    case Scorer::odin:
      return odin_scores(model, inputs, odin);
  }
  throw std::logic_error("unreachable scorer");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

LabeledDataset make_eval_id_set(const ExperimentConfig& cfg, int total,
                                Rng& rng) {
  LabeledDataset set;
  if (cfg.dataset == DatasetKind::circles) {
    CircleSpec spec = circle_spec(cfg);
    spec.n_per_class = std::max(1, total / 2);
    set = make_circle_id(spec, rng);
  } else {
    BlobSpec spec = blob_spec(cfg);
    spec.n_per_class = std::max(1, total / 2);
    spec.n_ood = 0;
    set = make_blobs(spec, rng).first;
  }
  set.eval_only = true;
  return set;
}

const MahalanobisStats* maybe_fit_stats(const ExperimentConfig& cfg,
                                        const TrainedRun& run,
                                        MahalanobisStats& storage) {
  for (Scorer s : cfg.scorers) {
    if (s == Scorer::md) {
      storage = fit_mahalanobis_on_train(run.model, run.train_set);
      return &storage;
    }
  }
  return nullptr;
}

}  // namespace

EvalResult evaluate_ood(const MlpParams& model, Scorer scorer,
                        const LabeledDataset& id_test, const Matrix& ood_set,
                        const MahalanobisStats* stats,
                        const OdinParams& odin) {
  if (id_test.dims() != model.d_in() || ood_set.cols() != model.d_in()) {
    throw std::invalid_argument("evaluate_ood: input dimension mismatch");
  }
  const ForwardResult id_fwd = forward(model, id_test.features);
  EvalResult result;
  result.id_accuracy = accuracy(predict(id_fwd.logits), id_test.labels);

  std::vector<double> id_scores;
  switch (scorer) {
    case Scorer::baseline:
      id_scores = msp_scores(id_fwd.logits, model.head);
      break;
    case Scorer::md:
      if (stats == nullptr) {
        throw std::invalid_argument(
            "md scorer requires fitted Mahalanobis statistics");
      }
      id_scores = md_scores(*stats, id_fwd.features);
      break;
    case Scorer::odin:
      id_scores = odin_scores(model, id_test.features, odin);
      break;
  }
  const std::vector<double> ood_scores =
      score_set(model, scorer, ood_set, stats, odin);
  result.auroc = auroc(id_scores, ood_scores);
  return result;
}

std::vector<SweepRecord> sweep_r(const ExperimentConfig& config) {
  validate(config);
  if (config.dataset != DatasetKind::circles) {
    throw std::invalid_argument("sweep_r requires the circles dataset");
  }
  const ExperimentConfig cfg = effective(config);
  const TrainedRun run = train_run(config);

  MahalanobisStats stats_storage;
  const MahalanobisStats* stats = maybe_fit_stats(cfg, run, stats_storage);

  Rng rng_eval(cfg.seed, kStreamEvalGen);
  const LabeledDataset id_test = make_eval_id_set(cfg, cfg.n_id_test, rng_eval);

  // Pre-build every OOD ring before scoring anything: the eval stream
  // depends only on (seed, sizes), so every method sees identical sets.
  const std::vector<double> grid = r_grid();
  std::vector<Matrix> ood_sets;
  ood_sets.reserve(grid.size());
  for (double r : grid) {
    RingOodSpec spec;
    spec.r_factor = r;
    spec.base_radius = cfg.circle_radius_outer;
    spec.n = cfg.n_ood_eval;
    spec.radial_noise_std = cfg.circle_noise_std;
    ood_sets.push_back(make_ood_ring(spec, rng_eval));
  }

  const ForwardResult id_fwd = forward(run.model, id_test.features);
  const double id_accuracy = accuracy(predict(id_fwd.logits), id_test.labels);
  std::vector<std::vector<double>> id_scores;
  for (Scorer scorer : cfg.scorers) {
    switch (scorer) {
      case Scorer::baseline:
        id_scores.push_back(msp_scores(id_fwd.logits, run.model.head));
        break;
      case Scorer::md:
        id_scores.push_back(md_scores(*stats, id_fwd.features));
        break;
      case Scorer::odin:
        id_scores.push_back(odin_scores(run.model, id_test.features, cfg.odin));
        break;
    }
  }

  std::vector<SweepRecord> records;
  records.reserve(grid.size() * cfg.scorers.size());
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    for (std::size_t si = 0; si < cfg.scorers.size(); ++si) {
      const auto t0 = std::chrono::steady_clock::now();
      const std::vector<double> ood_scores =
          score_set(run.model, cfg.scorers[si], ood_sets[gi], stats, cfg.odin);
      SweepRecord rec;
      rec.loss_kind = cfg.loss_kind;
      rec.ssl_kind = cfg.ssl_kind;
      rec.scorer = cfg.scorers[si];
      rec.axis = "r";
      rec.axis_value = grid[gi];
      rec.auroc = auroc(id_scores[si], ood_scores);
      rec.id_accuracy = id_accuracy;
      rec.seed = cfg.seed;
      rec.wall_time_s = seconds_since(t0);
      records.push_back(std::move(rec));
    }
  }
  return records;
}

std::vector<SweepRecord> sweep_mix(const ExperimentConfig& config) {
  validate(config);
  if (config.dataset != DatasetKind::blobs) {
    throw std::invalid_argument("sweep_mix requires the blobs dataset");
  }
  const ExperimentConfig cfg = effective(config);
  const TrainedRun run = train_run(config);

  MahalanobisStats stats_storage;
  const MahalanobisStats* stats = maybe_fit_stats(cfg, run, stats_storage);

  Rng rng_eval(cfg.seed, kStreamEvalGen);
  const LabeledDataset id_test = make_eval_id_set(cfg, cfg.n_id_test, rng_eval);

  // ID and OOD pools of equal (even) size; each pool sample is used exactly
  // once per mixed set.
  const int pool_per_class = std::max(1, cfg.blob_n_ood / 2);
  const int pool_size = 2 * pool_per_class;
  const LabeledDataset mix_id = make_eval_id_set(cfg, pool_size, rng_eval);
  const BlobSpec bspec = blob_spec(cfg);
  Matrix mix_ood(pool_size, bspec.dims);
  for (int i = 0; i < pool_size; ++i) {
    for (int j = 0; j < bspec.dims; ++j) {
      mix_ood(i, j) = bspec.ood_mean[static_cast<std::size_t>(j)] +
                      bspec.shared_std * rng_eval.normal();
    }
  }

  Rng rng_pair(cfg.seed, kStreamMixPairing);
  std::vector<int> pairing(static_cast<std::size_t>(pool_size));
  std::iota(pairing.begin(), pairing.end(), 0);
  rng_pair.shuffle(pairing);
  const Matrix mix_ood_shuffled = take_rows(mix_ood, pairing);

  const ForwardResult id_fwd = forward(run.model, id_test.features);
  std::vector<std::vector<double>> id_scores;
  for (Scorer scorer : cfg.scorers) {
    switch (scorer) {
      case Scorer::baseline:
        id_scores.push_back(msp_scores(id_fwd.logits, run.model.head));
        break;
      case Scorer::md:
        id_scores.push_back(md_scores(*stats, id_fwd.features));
        break;
      case Scorer::odin:
        id_scores.push_back(odin_scores(run.model, id_test.features, cfg.odin));
        break;
    }
  }

  const std::vector<double> grid = ratio_grid();
  std::vector<SweepRecord> records;
  records.reserve(grid.size() * cfg.scorers.size());
  for (double lambda : grid) {
    const Matrix mixed =
        mixup_rows(mix_id.features, mix_ood_shuffled, MixRatio(lambda));
    const ForwardResult mixed_fwd = forward(run.model, mixed);
    const double mix_accuracy =
        accuracy(predict(mixed_fwd.logits), mix_id.labels);
    for (std::size_t si = 0; si < cfg.scorers.size(); ++si) {
      const auto t0 = std::chrono::steady_clock::now();
      std::vector<double> mixed_scores;
      switch (cfg.scorers[si]) {
        case Scorer::baseline:
          mixed_scores = msp_scores(mixed_fwd.logits, run.model.head);
          break;
        case Scorer::md:
          mixed_scores = md_scores(*stats, mixed_fwd.features);
          break;
        case Scorer::odin:
          mixed_scores = odin_scores(run.model, mixed, cfg.odin);
          break;
      }
      SweepRecord rec;
      rec.loss_kind = cfg.loss_kind;
      rec.ssl_kind = cfg.ssl_kind;
      rec.scorer = cfg.scorers[si];
      rec.axis = "mix";
      rec.axis_value = lambda;
      rec.auroc = auroc(id_scores[si], mixed_scores);
      rec.id_accuracy = mix_accuracy;
      rec.seed = cfg.seed;
      rec.wall_time_s = seconds_since(t0);
      records.push_back(std::move(rec));
    }
  }
  return records;
}

}  // namespace oodgauge
