// Command-line front end: dataset generation, single training runs,
// checkpoint evaluation, r / mixing-ratio sweeps, score landscapes, and
// results-table reports. Exit codes: 0 success, 1 usage error, 2 runtime or
// numeric error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oodgauge/config.hpp"
#include "oodgauge/datagen.hpp"
#include "oodgauge/landscape.hpp"
#include "oodgauge/metrics.hpp"
#include "oodgauge/results.hpp"
#include "oodgauge/rng.hpp"
#include "oodgauge/sweep.hpp"
#include "oodgauge/train.hpp"

namespace {

using namespace oodgauge;

std::string trim_copy(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

struct ConfigCli {
  std::string config_path;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flag_overrides;  // config key -> value
};

void add_config_options(CLI::App& cmd, ConfigCli& cc) {
  cmd.add_option("--config", cc.config_path,
                 "Flat 'key = value' config file");
  cmd.add_option("--set", cc.sets,
                 "KEY=VALUE override applied after --config (repeatable)");
  auto key_option = [&cmd, &cc](const std::string& flag,
                                const std::string& key,
                                const std::string& desc) {
    cmd.add_option_function<std::string>(
        flag, [&cc, key](const std::string& v) { cc.flag_overrides[key] = v; },
        desc);
  };
  key_option("--loss", "loss", "Classification head: ce | ovadm");
  key_option("--ssl", "ssl", "SSL branch: none | simclr | byol");
  key_option("--alpha", "alpha", "SSL loss coefficient");
  key_option("--epochs", "epochs", "Training epochs");
  key_option("--batch-size", "batch_size", "Mini-batch size");
  key_option("--lr", "lr", "Adam learning rate");
  key_option("--seed", "seed", "Experiment seed");
  key_option("--dataset", "dataset", "Dataset: circles | blobs");
  key_option("--scorers", "scorers", "Comma list from baseline,md,odin");
  key_option("--scale", "scale", "Divide every sample count (fast CI runs)");
}

ExperimentConfig resolve_config(const ConfigCli& cc) {
  ExperimentConfig config;
  if (!cc.config_path.empty()) {
    config = load_config_file(cc.config_path, config);
  }
  for (const std::string& kv : cc.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--set expects KEY=VALUE, got '" + kv + "'");
    }
    apply_config_key(config, trim_copy(kv.substr(0, eq)),
                     trim_copy(kv.substr(eq + 1)));
  }
  for (const auto& [key, value] : cc.flag_overrides) {
    apply_config_key(config, key, value);
  }
  validate(config);
  return config;
}

int run_gen(const ConfigCli& cc, const std::string& out_dir, double r) {
  const ExperimentConfig cfg = effective(resolve_config(cc));
  std::filesystem::create_directories(out_dir);
  const auto path = [&](const char* name) {
    return (std::filesystem::path(out_dir) / name).string();
  };

  Rng rng_data(cfg.seed, 0);
  Rng rng_eval(cfg.seed, 4);
  if (cfg.dataset == DatasetKind::circles) {
    CircleSpec spec = circle_spec(cfg);
    write_labeled_csv(make_circle_id(spec, rng_data), path("train.csv"));
    spec.n_per_class = std::max(1, cfg.n_val / 2);
    write_labeled_csv(make_circle_id(spec, rng_data), path("val.csv"));
    spec.n_per_class = std::max(1, cfg.n_id_test / 2);
    write_labeled_csv(make_circle_id(spec, rng_eval), path("id_test.csv"));
    RingOodSpec ood;
    ood.r_factor = r;
    ood.base_radius = cfg.circle_radius_outer;
    ood.n = cfg.n_ood_eval;
    ood.radial_noise_std = cfg.circle_noise_std;
    write_features_csv(make_ood_ring(ood, rng_eval), path("ood.csv"));
  } else {
    BlobSpec spec = blob_spec(cfg);
    spec.n_ood = 0;
    write_labeled_csv(make_blobs(spec, rng_data).first, path("train.csv"));
    spec.n_per_class = std::max(1, cfg.n_val / 2);
    write_labeled_csv(make_blobs(spec, rng_data).first, path("val.csv"));
    BlobSpec eval_spec = blob_spec(cfg);
    eval_spec.n_per_class = std::max(1, cfg.n_id_test / 2);
    write_labeled_csv(make_blobs(eval_spec, rng_eval).first,
                      path("id_test.csv"));
    Matrix ood(cfg.blob_n_ood, eval_spec.dims);
    for (int i = 0; i < ood.rows(); ++i) {
      for (int j = 0; j < ood.cols(); ++j) {
        ood(i, j) = eval_spec.ood_mean[static_cast<std::size_t>(j)] +
                    eval_spec.shared_std * rng_eval.normal();
      }
    }
    write_features_csv(ood, path("ood.csv"));
  }
  std::cout << "wrote train.csv, val.csv, id_test.csv, ood.csv to " << out_dir
            << "\n";
  return 0;
}

int run_train(const ConfigCli& cc, const std::string& ckpt_path,
              const std::string& history_path) {
  const ExperimentConfig config = resolve_config(cc);
  const TrainedRun run = train_run(config);
  save_checkpoint(run.model, ckpt_path);

  std::ofstream hist(history_path);
  if (!hist) {
    throw std::runtime_error("cannot open for writing: " + history_path);
  }
  hist << "epoch,train_loss,val_accuracy\n";
  char buf[96];
  for (std::size_t e = 0; e < run.history.epochs.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", e + 1,
                  run.history.epochs[e].train_loss,
                  run.history.epochs[e].val_accuracy);
    hist << buf;
  }
  if (!hist) throw std::runtime_error("write failed: " + history_path);

  std::printf("checkpoint: %s\nhistory: %s\n", ckpt_path.c_str(),
              history_path.c_str());
  if (!run.history.epochs.empty()) {
    std::printf("final val accuracy: %.4f\n",
                run.history.epochs.back().val_accuracy);
  }
  std::printf("wall time: %.2fs\n", run.history.wall_time_s);
  return 0;
}

int run_eval(const std::string& ckpt_path, const std::string& id_test_path,
             const std::string& ood_path, const std::string& scorer_name,
             const std::string& train_path, const OdinParams& odin) {
  const MlpParams model = load_checkpoint(ckpt_path);
  const Scorer scorer = scorer_from_string(scorer_name);
  LabeledDataset id_test = read_labeled_csv(id_test_path);
  id_test.eval_only = true;
  const Matrix ood = read_features_csv(ood_path);

  MahalanobisStats stats;
  const MahalanobisStats* stats_ptr = nullptr;
  if (scorer == Scorer::md) {
    if (train_path.empty()) {
      throw std::invalid_argument(
          "--train is required for the md scorer (statistics are fitted on "
          "training features)");
    }
    stats = fit_mahalanobis_on_train(model, read_labeled_csv(train_path));
    stats_ptr = &stats;
  }
  const EvalResult result =
      evaluate_ood(model, scorer, id_test, ood, stats_ptr, odin);
  std::printf("auroc %.17g\nid_accuracy %.17g\n", result.auroc,
              result.id_accuracy);
  return 0;
}

int run_sweep(const ConfigCli& cc, bool mix, const std::string& out_path,
              bool append) {
  const ExperimentConfig config = resolve_config(cc);
  const std::vector<SweepRecord> records =
      mix ? sweep_mix(config) : sweep_r(config);
  if (append) {
    append_results(records, out_path);
  } else {
    write_results(records, out_path, serialize_config(config));
  }
  std::printf("%zu records -> %s\n", records.size(), out_path.c_str());
  return 0;
}

int run_landscape(const std::string& ckpt_path, const std::string& train_path,
                  const std::string& scorer_name, const std::string& out_path,
                  double extent, int resolution, const OdinParams& odin) {
  const MlpParams model = load_checkpoint(ckpt_path);
  LandscapeSpec spec;
  spec.extent = extent;
  spec.resolution = resolution;
  spec.scorer = scorer_from_string(scorer_name);

  MahalanobisStats stats;
  const MahalanobisStats* stats_ptr = nullptr;
  if (spec.scorer == Scorer::md) {
    if (train_path.empty()) {
      throw std::invalid_argument("--train is required for the md scorer");
    }
    stats = fit_mahalanobis_on_train(model, read_labeled_csv(train_path));
    stats_ptr = &stats;
  }
  const LandscapeImage image = compute_landscape(model, spec, stats_ptr, odin);
  write_landscape(image, out_path);
  std::printf("%s (%dx%d), score range [%.17g, %.17g]\n", out_path.c_str(),
              image.resolution, image.resolution, image.raw_min,
              image.raw_max);
  return 0;
}

int run_report(const std::string& in_path) {
  const std::vector<SweepRecord> records = read_results(in_path);
  if (records.empty()) {
    std::printf("no records in %s\n", in_path.c_str());
    return 0;
  }

  // Group key: method x scorer x axis; rows: axis values, mean over seeds.
  struct Cell {
    double auroc_sum = 0.0;
    double acc_sum = 0.0;
    std::vector<std::uint64_t> seeds;
  };
  std::map<std::string, std::map<double, Cell>> groups;
  for (const SweepRecord& r : records) {
    const std::string key = std::string(to_string(r.loss_kind)) + "," +
                            to_string(r.ssl_kind) + "," + to_string(r.scorer) +
                            "," + r.axis;
    Cell& cell = groups[key][r.axis_value];
    cell.auroc_sum += r.auroc;
    cell.acc_sum += r.id_accuracy;
    cell.seeds.push_back(r.seed);
  }

  for (const auto& [key, rows] : groups) {
    std::size_t n_runs = 0;
    for (const auto& [value, cell] : rows) {
      n_runs = std::max(n_runs, cell.seeds.size());
    }
    std::printf("\n[%s] mean over %zu run(s)\n", key.c_str(), n_runs);
    std::printf("  %10s  %10s  %12s\n", "axis_value", "auroc", "id_accuracy");
    std::vector<double> axis_values, mean_aurocs;
    for (const auto& [value, cell] : rows) {
      const double n = static_cast<double>(cell.seeds.size());
      std::printf("  %10.3f  %10.4f  %12.4f\n", value, cell.auroc_sum / n,
                  cell.acc_sum / n);
      axis_values.push_back(value);
      mean_aurocs.push_back(cell.auroc_sum / n);
    }
    if (axis_values.size() >= 2) {
      try {
        std::printf("  spearman(axis, auroc) = %.4f\n",
                    spearman(axis_values, mean_aurocs));
      } catch (const std::invalid_argument&) {
        std::printf("  spearman(axis, auroc) undefined (constant ranks)\n");
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Controllable OOD-detection evaluation framework"};
  app.require_subcommand(1);

  ConfigCli gen_cc;
  std::string gen_out_dir = ".";
  double gen_r = 3.0;
  CLI::App* gen = app.add_subcommand("gen", "Write dataset CSVs");
  add_config_options(*gen, gen_cc);
  gen->add_option("--out-dir", gen_out_dir, "Output directory")
      ->capture_default_str();
  gen->add_option("--r", gen_r, "Distance factor for the OOD ring (circles)")
      ->capture_default_str();

  ConfigCli train_cc;
  std::string train_ckpt = "model.ckpt";
  std::string train_history = "history.csv";
  CLI::App* train = app.add_subcommand("train", "Train one model");
  add_config_options(*train, train_cc);
  train->add_option("--ckpt", train_ckpt, "Checkpoint output path")
      ->capture_default_str();
  train->add_option("--history", train_history, "Per-epoch history CSV path")
      ->capture_default_str();

  std::string eval_ckpt, eval_id_test, eval_ood, eval_train;
  std::string eval_scorer = "baseline";
  OdinParams eval_odin;
  CLI::App* eval = app.add_subcommand(
      "eval", "Score a checkpoint against an ID test set and an OOD set");
  eval->add_option("--ckpt", eval_ckpt, "Checkpoint path")->required();
  eval->add_option("--id-test", eval_id_test, "Labeled ID test CSV")
      ->required();
  eval->add_option("--ood", eval_ood, "Unlabeled OOD CSV")->required();
  eval->add_option("--scorer", eval_scorer, "baseline | md | odin")
      ->capture_default_str();
  eval->add_option("--train", eval_train,
                   "Labeled training CSV (required for md)");
  eval->add_option("--odin-temperature", eval_odin.temperature,
                   "ODIN temperature")
      ->capture_default_str();
  eval->add_option("--odin-epsilon", eval_odin.epsilon, "ODIN perturbation")
      ->capture_default_str();

  ConfigCli sweep_r_cc;
  std::string sweep_r_out = "results.csv";
  bool sweep_r_append = false;
  CLI::App* sweep_r_cmd = app.add_subcommand(
      "sweep-r", "Train once, evaluate every scorer over the 50-point r grid");
  add_config_options(*sweep_r_cmd, sweep_r_cc);
  sweep_r_cmd->add_option("--out", sweep_r_out, "Results CSV path")
      ->capture_default_str();
  sweep_r_cmd->add_flag("--append", sweep_r_append,
                        "Append to an existing results file");

  ConfigCli sweep_mix_cc;
  std::string sweep_mix_out = "results.csv";
  bool sweep_mix_append = false;
  CLI::App* sweep_mix_cmd = app.add_subcommand(
      "sweep-mix",
      "Train once, evaluate every scorer over the 11-point mixing-ratio grid");
  add_config_options(*sweep_mix_cmd, sweep_mix_cc);
  sweep_mix_cmd->add_option("--out", sweep_mix_out, "Results CSV path")
      ->capture_default_str();
  sweep_mix_cmd->add_flag("--append", sweep_mix_append,
                          "Append to an existing results file");

  std::string land_ckpt, land_train, land_out = "landscape.pgm";
  std::string land_scorer = "baseline";
  double land_extent = 6.5;
  int land_resolution = 200;
  OdinParams land_odin;
  CLI::App* land = app.add_subcommand(
      "landscape", "Render a score landscape over the input plane as PGM");
  land->add_option("--ckpt", land_ckpt, "Checkpoint path")->required();
  land->add_option("--train", land_train,
                   "Labeled training CSV (required for md)");
  land->add_option("--scorer", land_scorer, "baseline | md | odin")
      ->capture_default_str();
  land->add_option("--out", land_out, "Output PGM path")
      ->capture_default_str();
  land->add_option("--extent", land_extent, "Half-width of the window")
      ->capture_default_str();
  land->add_option("--resolution", land_resolution, "Pixels per side")
      ->capture_default_str();
  land->add_option("--odin-temperature", land_odin.temperature,
                   "ODIN temperature")
      ->capture_default_str();
  land->add_option("--odin-epsilon", land_odin.epsilon, "ODIN perturbation")
      ->capture_default_str();

  std::string report_in = "results.csv";
  CLI::App* report =
      app.add_subcommand("report", "Summarize a results CSV per method");
  report->add_option("--in", report_in, "Results CSV path")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    if (gen->parsed()) return run_gen(gen_cc, gen_out_dir, gen_r);
    if (train->parsed()) return run_train(train_cc, train_ckpt, train_history);
    if (eval->parsed()) {
      return run_eval(eval_ckpt, eval_id_test, eval_ood, eval_scorer,
                      eval_train, eval_odin);
    }
    if (sweep_r_cmd->parsed()) {
      return run_sweep(sweep_r_cc, false, sweep_r_out, sweep_r_append);
    }
    if (sweep_mix_cmd->parsed()) {
      return run_sweep(sweep_mix_cc, true, sweep_mix_out, sweep_mix_append);
    }
    if (land->parsed()) {
      return run_landscape(land_ckpt, land_train, land_scorer, land_out,
                           land_extent, land_resolution, land_odin);
    }
    if (report->parsed()) return run_report(report_in);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cerr << "no subcommand\n";
  return 1;
}
