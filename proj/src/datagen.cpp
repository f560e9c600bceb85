#include "oodgauge/datagen.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace oodgauge {

namespace {

void append_ring_points(Matrix& out, int row0, int n, double mean_radius,
                        double noise_std, Rng& rng) {
  for (int i = 0; i < n; ++i) {
    const double angle = rng.uniform() * 2.0 * std::numbers::pi;
    const double radius = rng.normal(mean_radius, noise_std);
    out(row0 + i, 0) = radius * std::cos(angle);
    out(row0 + i, 1) = radius * std::sin(angle);
  }
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

MixRatio::MixRatio(double l) : lambda(l) {
  if (!(l >= 0.0 && l <= 1.0)) {
    throw std::invalid_argument("MixRatio: lambda must lie in [0, 1]");
  }
}

LabeledDataset make_circle_id(const CircleSpec& spec, Rng& rng) {
  if (spec.n_per_class <= 0) {
    throw std::invalid_argument("make_circle_id: n_per_class must be > 0");
  }
  if (!(spec.class_radii[0] > 0.0 &&
        spec.class_radii[1] > spec.class_radii[0])) {
    throw std::invalid_argument(
        "make_circle_id: radii must be strictly increasing and > 0");
  }
  if (spec.radial_noise_std < 0.0) {
    throw std::invalid_argument("make_circle_id: noise std must be >= 0");
  }
  LabeledDataset ds;
  ds.num_classes = 2;
  ds.features = Matrix(2 * spec.n_per_class, 2);
  ds.labels.resize(static_cast<std::size_t>(2 * spec.n_per_class));
  for (int c = 0; c < 2; ++c) {
    append_ring_points(ds.features, c * spec.n_per_class, spec.n_per_class,
                       spec.class_radii[static_cast<std::size_t>(c)],
                       spec.radial_noise_std, rng);
    for (int i = 0; i < spec.n_per_class; ++i) {
      ds.labels[static_cast<std::size_t>(c * spec.n_per_class + i)] = c;
    }
  }
  return ds;
}

Matrix make_ood_ring(const RingOodSpec& spec, Rng& rng) {
  if (spec.r_factor < 1.0) {
    throw std::invalid_argument("make_ood_ring: r_factor must be >= 1");
  }
  if (spec.n <= 0) throw std::invalid_argument("make_ood_ring: n must be > 0");
  if (spec.base_radius <= 0.0 || spec.radial_noise_std < 0.0) {
    throw std::invalid_argument("make_ood_ring: invalid radius or noise std");
  }
  Matrix out(spec.n, 2);
  append_ring_points(out, 0, spec.n, spec.r_factor * spec.base_radius,
                     spec.radial_noise_std, rng);
  return out;
}

std::vector<double> r_grid() {
  std::vector<double> grid(50);
  for (int i = 0; i < 50; ++i) {
    grid[static_cast<std::size_t>(i)] = 1.0 + (5.9 - 1.0) * i / 49.0;
  }
  return grid;
}

std::vector<double> ratio_grid() {
  std::vector<double> grid(11);
  for (int i = 0; i <= 10; ++i) {
    grid[static_cast<std::size_t>(i)] = i / 10.0;
  }
  return grid;
}

std::vector<double> mixup(std::span<const double> x_id,
                          std::span<const double> x_ood, MixRatio ratio) {
  if (x_id.size() != x_ood.size()) {
    throw std::invalid_argument("mixup: dimension mismatch");
  }
  std::vector<double> out(x_id.size());
  const double l = ratio.lambda;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (1.0 - l) * x_id[i] + l * x_ood[i];
  }
  return out;
}

Matrix mixup_rows(const Matrix& id_rows, const Matrix& ood_rows,
                  MixRatio ratio) {
  if (!id_rows.same_shape(ood_rows)) {
    throw std::invalid_argument("mixup_rows: shape mismatch");
  }
  Matrix out = id_rows;
  const double l = ratio.lambda;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (1.0 - l) * id_rows[i] + l * ood_rows[i];
  }
  return out;
}

BlobSpec BlobSpec::defaults() {
  BlobSpec spec;
  spec.dims = 8;
  spec.class_means.assign(2, std::vector<double>(8, 0.0));
  spec.class_means[1][0] = 4.0;
  spec.ood_mean.assign(8, 0.0);
  spec.ood_mean[0] = 2.0;
  spec.ood_mean[1] = 2.0 * std::sqrt(3.0);
  return spec;
}

std::pair<LabeledDataset, Matrix> make_blobs(const BlobSpec& spec, Rng& rng) {
  const int num_classes = static_cast<int>(spec.class_means.size());
  if (num_classes < 2) {
    throw std::invalid_argument("make_blobs: need at least two class means");
  }
  if (spec.shared_std < 0.0) {
    throw std::invalid_argument("make_blobs: shared_std must be >= 0");
  }
  if (spec.n_per_class <= 0 || spec.n_ood < 0 || spec.dims <= 0) {
    throw std::invalid_argument("make_blobs: invalid sample counts");
  }
  for (const auto& mean : spec.class_means) {
    if (static_cast<int>(mean.size()) != spec.dims) {
      throw std::invalid_argument("make_blobs: class mean dimension mismatch");
    }
  }
  if (static_cast<int>(spec.ood_mean.size()) != spec.dims) {
    throw std::invalid_argument("make_blobs: ood mean dimension mismatch");
  }
  for (std::size_t a = 0; a < spec.class_means.size(); ++a) {
    for (std::size_t b = a + 1; b < spec.class_means.size(); ++b) {
      if (spec.class_means[a] == spec.class_means[b]) {
        throw std::invalid_argument("make_blobs: class means must be distinct");
      }
    }
  }

  LabeledDataset ds;
  ds.num_classes = num_classes;
  ds.features = Matrix(num_classes * spec.n_per_class, spec.dims);
  ds.labels.resize(static_cast<std::size_t>(num_classes * spec.n_per_class));
  int row = 0;
  for (int c = 0; c < num_classes; ++c) {
    const auto& mean = spec.class_means[static_cast<std::size_t>(c)];
    for (int i = 0; i < spec.n_per_class; ++i, ++row) {
      for (int j = 0; j < spec.dims; ++j) {
        ds.features(row, j) =
            mean[static_cast<std::size_t>(j)] + spec.shared_std * rng.normal();
      }
      ds.labels[static_cast<std::size_t>(row)] = c;
    }
  }

  Matrix ood(spec.n_ood, spec.dims);
  for (int i = 0; i < spec.n_ood; ++i) {
    for (int j = 0; j < spec.dims; ++j) {
      ood(i, j) = spec.ood_mean[static_cast<std::size_t>(j)] +
                  spec.shared_std * rng.normal();
    }
  }
  return {std::move(ds), std::move(ood)};
}

namespace {

void write_csv(const Matrix& features, const std::vector<int>* labels,
               const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (int j = 0; j < features.cols(); ++j) {
    if (j > 0) out << ',';
    out << 'x' << j;
  }
  if (labels != nullptr) out << ",label";
  out << '\n';
  for (int i = 0; i < features.rows(); ++i) {
    for (int j = 0; j < features.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_real(features(i, j));
    }
    if (labels != nullptr) out << ',' << (*labels)[static_cast<std::size_t>(i)];
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

struct ParsedCsv {
  Matrix features;
  std::vector<int> labels;
  bool has_labels = false;
};

ParsedCsv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty CSV file: " + path);
  }
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  ParsedCsv parsed;
  parsed.has_labels = !header.empty() && header.back() == "label";
  const int dims =
      static_cast<int>(header.size()) - (parsed.has_labels ? 1 : 0);
  for (int j = 0; j < dims; ++j) {
    if (header[static_cast<std::size_t>(j)] != "x" + std::to_string(j)) {
      throw std::runtime_error("unexpected CSV column '" +
                               header[static_cast<std::size_t>(j)] + "' in " +
                               path);
    }
  }

  std::vector<double> values;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        if (col < dims) {
          values.push_back(std::stod(cell));
        } else {
          parsed.labels.push_back(std::stoi(cell));
        }
      } catch (const std::exception&) {
        throw std::runtime_error("bad numeric cell '" + cell + "' at row " +
                                 std::to_string(rows + 1) + ", column " +
                                 std::to_string(col) + " in " + path);
      }
      ++col;
    }
    const int expected = dims + (parsed.has_labels ? 1 : 0);
    if (col != expected) {
      throw std::runtime_error("row " + std::to_string(rows + 1) + " in " +
                               path + " has " + std::to_string(col) +
                               " cells, expected " + std::to_string(expected));
    }
    ++rows;
  }
  parsed.features = Matrix(rows, dims, std::move(values));
  return parsed;
}

}  // namespace

void write_labeled_csv(const LabeledDataset& ds, const std::string& path) {
  write_csv(ds.features, &ds.labels, path);
}

LabeledDataset read_labeled_csv(const std::string& path) {
  ParsedCsv parsed = read_csv(path);
  if (!parsed.has_labels) {
    throw std::runtime_error("expected a label column in " + path);
  }
  LabeledDataset ds;
  ds.features = std::move(parsed.features);
  ds.labels = std::move(parsed.labels);
  int max_label = 0;
  for (int l : ds.labels) {
    if (l < 0) throw std::runtime_error("negative label in " + path);
    max_label = std::max(max_label, l);
  }
  ds.num_classes = max_label + 1;
  return ds;
}

void write_features_csv(const Matrix& features, const std::string& path) {
  write_csv(features, nullptr, path);
}

Matrix read_features_csv(const std::string& path) {
  ParsedCsv parsed = read_csv(path);
  if (parsed.has_labels) {
    throw std::runtime_error("unexpected label column in " + path);
  }
  return std::move(parsed.features);
}

}  // namespace oodgauge
