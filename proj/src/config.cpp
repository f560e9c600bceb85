#include "oodgauge/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oodgauge {

const char* to_string(DatasetKind kind) {
  return kind == DatasetKind::circles ? "circles" : "blobs";
}

DatasetKind dataset_kind_from_string(const std::string& s) {
  if (s == "circles") return DatasetKind::circles;
  if (s == "blobs") return DatasetKind::blobs;
  throw std::invalid_argument("unknown dataset kind '" + s + "'");
}

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument("config: " + message);
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad real for '" + key + "': " + value);
  }
  if (used != value.size()) {
    throw std::invalid_argument("config: bad real for '" + key + "': " + value);
  }
  return v;
}

int parse_count(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer for '" + key +
                                "': " + value);
  }
  if (used != value.size() || v < 0 || v > 1'000'000'000L) {
    throw std::invalid_argument("config: bad integer for '" + key +
                                "': " + value);
  }
  return static_cast<int>(v);
}

std::uint64_t parse_seed(const std::string& value) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    // stoull would silently wrap negative input; reject it up front.
    if (value.find('-') != std::string::npos) throw std::invalid_argument("");
    v = std::stoull(value, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad seed: " + value);
  }
  if (used != value.size()) {
    throw std::invalid_argument("config: bad seed: " + value);
  }
  return v;
}

std::vector<Scorer> parse_scorers(const std::string& value) {
  std::vector<Scorer> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const Scorer s = scorer_from_string(item);
    if (std::find(out.begin(), out.end(), s) != out.end()) {
      throw std::invalid_argument("config: duplicate scorer '" + item + "'");
    }
    out.push_back(s);
  }
  return out;
}

std::string scorers_to_string(const std::vector<Scorer>& scorers) {
  std::string out;
  for (std::size_t i = 0; i < scorers.size(); ++i) {
    if (i > 0) out += ',';
    out += to_string(scorers[i]);
  }
  return out;
}

}  // namespace

void validate(const ExperimentConfig& c) {
  require(c.alpha >= 0.0, "alpha must be >= 0");
  require(c.epochs >= 1, "epochs must be >= 1");
  require(c.batch_size >= 1, "batch_size must be >= 1");
  require(std::isfinite(c.lr) && c.lr >= 0.0, "lr must be finite and >= 0");
  require(c.odin.temperature > 0.0, "odin_temperature must be > 0");
  require(c.odin.epsilon >= 0.0, "odin_epsilon must be >= 0");
  require(c.ntxent_tau > 0.0, "ntxent_tau must be > 0");
  require(c.byol_tau_ema >= 0.0 && c.byol_tau_ema <= 1.0,
          "byol_tau_ema must lie in [0, 1]");
  require(c.aug.noise_std >= 0.0, "aug_noise_std must be >= 0");
  require(c.circle_radius_inner > 0.0 &&
              c.circle_radius_outer > c.circle_radius_inner,
          "circle radii must be strictly increasing and > 0");
  require(c.circle_noise_std >= 0.0, "circle_noise_std must be >= 0");
  require(c.n_train_per_class >= 1, "n_train_per_class must be >= 1");
  require(c.blob_dims >= 2, "blob_dims must be >= 2");
  require(c.blob_std > 0.0, "blob_std must be > 0");
  require(c.blob_mean_distance > 0.0, "blob_mean_distance must be > 0");
  require(c.blob_n_per_class >= 1, "blob_n_per_class must be >= 1");
  require(c.blob_n_ood >= 1, "blob_n_ood must be >= 1");
  require(c.n_val >= 2, "n_val must be >= 2");
  require(c.n_id_test >= 2, "n_id_test must be >= 2");
  require(c.n_ood_eval >= 1, "n_ood_eval must be >= 1");
  require(c.scale >= 1, "scale must be >= 1");
}

namespace {

int scaled_count(int n, int scale, int floor_value) {
  return std::max(floor_value, n / scale);
}

}  // namespace

ExperimentConfig effective(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.n_train_per_class = scaled_count(c.n_train_per_class, config.scale, 1);
  c.blob_n_per_class = scaled_count(c.blob_n_per_class, config.scale, 1);
  c.blob_n_ood = scaled_count(c.blob_n_ood, config.scale, 1);
  c.n_val = scaled_count(c.n_val, config.scale, 2);
  c.n_id_test = scaled_count(c.n_id_test, config.scale, 2);
  c.n_ood_eval = scaled_count(c.n_ood_eval, config.scale, 1);
  c.scale = 1;
  return c;
}

CircleSpec circle_spec(const ExperimentConfig& config) {
  CircleSpec spec;
  spec.class_radii = {config.circle_radius_inner, config.circle_radius_outer};
  spec.radial_noise_std = config.circle_noise_std;
  spec.n_per_class = config.n_train_per_class;
  return spec;
}

BlobSpec blob_spec(const ExperimentConfig& config) {
  BlobSpec spec;
  spec.dims = config.blob_dims;
  spec.shared_std = config.blob_std;
  spec.n_per_class = config.blob_n_per_class;
  spec.n_ood = config.blob_n_ood;
  const double d = config.blob_mean_distance;
  spec.class_means.assign(2, std::vector<double>(
                                 static_cast<std::size_t>(config.blob_dims),
                                 0.0));
  spec.class_means[1][0] = d;
  spec.ood_mean.assign(static_cast<std::size_t>(config.blob_dims), 0.0);
  spec.ood_mean[0] = d / 2.0;
  spec.ood_mean[1] = d * std::sqrt(3.0) / 2.0;
  return spec;
}

std::string serialize_config(const ExperimentConfig& c) {
  std::string out;
  auto emit = [&](const char* key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  emit("loss", to_string(c.loss_kind));
  emit("ssl", to_string(c.ssl_kind));
  emit("alpha", format_real(c.alpha));
  emit("epochs", std::to_string(c.epochs));
  emit("batch_size", std::to_string(c.batch_size));
  emit("lr", format_real(c.lr));
  emit("seed", std::to_string(c.seed));
  emit("dataset", to_string(c.dataset));
  emit("scorers", scorers_to_string(c.scorers));
  emit("odin_temperature", format_real(c.odin.temperature));
  emit("odin_epsilon", format_real(c.odin.epsilon));
  emit("ntxent_tau", format_real(c.ntxent_tau));
  emit("byol_tau_ema", format_real(c.byol_tau_ema));
  emit("aug_noise_std", format_real(c.aug.noise_std));
  emit("circle_radius_inner", format_real(c.circle_radius_inner));
  emit("circle_radius_outer", format_real(c.circle_radius_outer));
  emit("circle_noise_std", format_real(c.circle_noise_std));
  emit("n_train_per_class", std::to_string(c.n_train_per_class));
  emit("blob_dims", std::to_string(c.blob_dims));
  emit("blob_std", format_real(c.blob_std));
  emit("blob_mean_distance", format_real(c.blob_mean_distance));
  emit("blob_n_per_class", std::to_string(c.blob_n_per_class));
  emit("blob_n_ood", std::to_string(c.blob_n_ood));
  emit("n_val", std::to_string(c.n_val));
  emit("n_id_test", std::to_string(c.n_id_test));
  emit("n_ood_eval", std::to_string(c.n_ood_eval));
  emit("scale", std::to_string(c.scale));
  return out;
}

void apply_config_key(ExperimentConfig& c, const std::string& key,
                      const std::string& value) {
  if (key == "loss") {
    c.loss_kind = head_kind_from_string(value);
  } else if (key == "ssl") {
    c.ssl_kind = ssl_kind_from_string(value);
  } else if (key == "alpha") {
    c.alpha = parse_real(key, value);
  } else if (key == "epochs") {
    c.epochs = parse_count(key, value);
  } else if (key == "batch_size") {
    c.batch_size = parse_count(key, value);
  } else if (key == "lr") {
    c.lr = parse_real(key, value);
  } else if (key == "seed") {
    c.seed = parse_seed(value);
  } else if (key == "dataset") {
    c.dataset = dataset_kind_from_string(value);
  } else if (key == "scorers") {
    c.scorers = parse_scorers(value);
  } else if (key == "odin_temperature") {
    c.odin.temperature = parse_real(key, value);
  } else if (key == "odin_epsilon") {
    c.odin.epsilon = parse_real(key, value);
  } else if (key == "ntxent_tau") {
    c.ntxent_tau = parse_real(key, value);
  } else if (key == "byol_tau_ema") {
    c.byol_tau_ema = parse_real(key, value);
  } else if (key == "aug_noise_std") {
    c.aug.noise_std = parse_real(key, value);
  } else if (key == "circle_radius_inner") {
    c.circle_radius_inner = parse_real(key, value);
  } else if (key == "circle_radius_outer") {
    c.circle_radius_outer = parse_real(key, value);
  } else if (key == "circle_noise_std") {
    c.circle_noise_std = parse_real(key, value);
  } else if (key == "n_train_per_class") {
    c.n_train_per_class = parse_count(key, value);
  } else if (key == "blob_dims") {
    c.blob_dims = parse_count(key, value);
  } else if (key == "blob_std") {
    c.blob_std = parse_real(key, value);
  } else if (key == "blob_mean_distance") {
    c.blob_mean_distance = parse_real(key, value);
  } else if (key == "blob_n_per_class") {
    c.blob_n_per_class = parse_count(key, value);
  } else if (key == "blob_n_ood") {
    c.blob_n_ood = parse_count(key, value);
  } else if (key == "n_val") {
    c.n_val = parse_count(key, value);
  } else if (key == "n_id_test") {
    c.n_id_test = parse_count(key, value);
  } else if (key == "n_ood_eval") {
    c.n_ood_eval = parse_count(key, value);
  } else if (key == "scale") {
    c.scale = parse_count(key, value);
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

ExperimentConfig parse_config_text(const std::string& text,
                                   ExperimentConfig base) {
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " is not 'key = value': " + line);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config: empty key on line " +
                                  std::to_string(line_no));
    }
    apply_config_key(base, key, value);
  }
  return base;
}

ExperimentConfig load_config_file(const std::string& path,
                                  ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), std::move(base));
}

}  // namespace oodgauge
