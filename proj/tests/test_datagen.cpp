// Dataset generators: exact geometry at zero noise, statistical means under
// noise, grid definitions, mixup identities, and CSV round-trips.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "oodgauge/datagen.hpp"
#include "oodgauge/matrix.hpp"
#include "oodgauge/rng.hpp"

using namespace oodgauge;

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v) s += x * x;
  return std::sqrt(s);
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("circle generator: zero noise puts points exactly on the circles") {
  CircleSpec spec;
  spec.radial_noise_std = 0.0;
  spec.n_per_class = 100;
  Rng rng(1, 0);
  const LabeledDataset ds = make_circle_id(spec, rng);
  REQUIRE(ds.size() == 200);
  REQUIRE(ds.dims() == 2);
  CHECK(ds.num_classes == 2);
  int count[2] = {0, 0};
  for (int i = 0; i < ds.size(); ++i) {
    const int y = ds.labels[static_cast<std::size_t>(i)];
    REQUIRE((y == 0 || y == 1));
    ++count[y];
    const double r = norm2(ds.features.row_span(i));
    CHECK(std::fabs(r - spec.class_radii[static_cast<std::size_t>(y)]) <=
          1e-12);
  }
  CHECK(count[0] == 100);
  CHECK(count[1] == 100);
}

TEST_CASE("circle generator: balanced labels and statistical radii") {
  CircleSpec spec;  // defaults: radii 0.5/1.0, noise 0.125
  spec.n_per_class = 100000;
  Rng rng(2, 0);
  const LabeledDataset ds = make_circle_id(spec, rng);
  double mean_r1 = 0.0;
  double mean_x = 0.0, mean_y = 0.0;
  int n1 = 0;
  for (int i = 0; i < ds.size(); ++i) {
    if (ds.labels[static_cast<std::size_t>(i)] == 1) {
      mean_r1 += norm2(ds.features.row_span(i));
      mean_x += ds.features(i, 0);
      mean_y += ds.features(i, 1);
      ++n1;
    }
  }
  mean_r1 /= n1;
  CHECK(n1 == 100000);
  CHECK(std::fabs(mean_r1 - 1.0) <= 0.002);
  // Angles cover the circle.
  CHECK(std::fabs(mean_x / n1) <= 0.01);
  CHECK(std::fabs(mean_y / n1) <= 0.01);
}

TEST_CASE("circle generator determinism") {
  CircleSpec spec;
  spec.n_per_class = 50;
  Rng r1(9, 0), r2(9, 0);
  const LabeledDataset a = make_circle_id(spec, r1);
  const LabeledDataset b = make_circle_id(spec, r2);
  CHECK(max_abs_diff(a.features, b.features) == 0.0);
  CHECK(a.labels == b.labels);
}

TEST_CASE("ood ring geometry") {
  RingOodSpec spec;
  spec.r_factor = 2.0;
  spec.base_radius = 1.0;
  spec.radial_noise_std = 0.0;
  spec.n = 64;
  Rng rng(3, 0);
  const Matrix ring = make_ood_ring(spec, rng);
  REQUIRE(ring.rows() == 64);
  REQUIRE(ring.cols() == 2);
  for (int i = 0; i < ring.rows(); ++i) {
    CHECK(std::fabs(norm2(ring.row_span(i)) - 2.0) <= 1e-12);
  }

  RingOodSpec far;
  far.r_factor = 5.9;
  far.n = 16000;
  Rng rng2(4, 0);
  const Matrix far_ring = make_ood_ring(far, rng2);
  double mean_r = 0.0;
  for (int i = 0; i < far_ring.rows(); ++i) {
    mean_r += norm2(far_ring.row_span(i));
  }
  mean_r /= far_ring.rows();
  CHECK(std::fabs(mean_r - 5.9) <= 0.01);

  RingOodSpec bad;
  bad.r_factor = 0.5;
  CHECK_THROWS_AS(make_ood_ring(bad, rng), std::invalid_argument);
}

TEST_CASE("r grid: 50 values, 1.0 to 5.9, step 0.1") {
  const std::vector<double> grid = r_grid();
  REQUIRE(grid.size() == 50);
  CHECK(grid.front() == 1.0);
  CHECK(std::fabs(grid.back() - 5.9) <= 1e-12);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::fabs(grid[i] - (1.0 + 0.1 * static_cast<double>(i))) <= 1e-12);
  }
}

TEST_CASE("ratio grid: 11 values, 0.0 to 1.0") {
  const std::vector<double> grid = ratio_grid();
  REQUIRE(grid.size() == 11);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 1.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::fabs(grid[i] - 0.1 * static_cast<double>(i)) <= 1e-12);
  }
}

TEST_CASE("mixup endpoints, midpoint and affinity") {
  const std::vector<double> x_id{0.0, 0.0};
  const std::vector<double> x_ood{2.0, 4.0};
  CHECK(mixup(x_id, x_ood, MixRatio(0.0)) == x_id);
  CHECK(mixup(x_id, x_ood, MixRatio(1.0)) == x_ood);
  const auto mid = mixup(x_id, x_ood, MixRatio(0.5));
  CHECK(mid == std::vector<double>{1.0, 2.0});

  // mixup(x, y, l) + mixup(y, x, l) = x + y.
  const std::vector<double> a{0.3, -1.2, 5.0};
  const std::vector<double> b{2.2, 0.4, -3.0};
  for (const double lambda : {0.0, 0.25, 0.6, 1.0}) {
    const auto ab = mixup(a, b, MixRatio(lambda));
    const auto ba = mixup(b, a, MixRatio(lambda));
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(std::fabs(ab[k] + ba[k] - (a[k] + b[k])) <= 1e-15);
    }
  }

  CHECK_THROWS_AS(MixRatio(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(MixRatio(1.1), std::invalid_argument);
  CHECK_THROWS_AS(mixup(a, x_id, MixRatio(0.5)), std::invalid_argument);
}

TEST_CASE("mixup_rows pairs row i with row i") {
  const Matrix id_rows(2, 2, {1, 2, 3, 4});
  const Matrix ood_rows(2, 2, {5, 6, 7, 8});
  const Matrix mixed = mixup_rows(id_rows, ood_rows, MixRatio(0.25));
  CHECK(mixed(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(mixed(0, 1) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(mixed(1, 0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(mixed(1, 1) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK_THROWS_AS(mixup_rows(id_rows, Matrix(3, 2, 0.0), MixRatio(0.5)),
                  std::invalid_argument);
}

TEST_CASE("blob generator: sizes, balance and zero-noise degeneracy") {
  BlobSpec spec = BlobSpec::defaults();
  spec.shared_std = 0.0;
  spec.n_per_class = 10;
  spec.n_ood = 7;
  Rng rng(5, 0);
  const auto [id, ood] = make_blobs(spec, rng);
  REQUIRE(id.size() == 20);
  REQUIRE(id.dims() == 8);
  REQUIRE(ood.rows() == 7);
  REQUIRE(ood.cols() == 8);
  for (int i = 0; i < id.size(); ++i) {
    const int y = id.labels[static_cast<std::size_t>(i)];
    for (int j = 0; j < id.dims(); ++j) {
      CHECK(id.features(i, j) ==
            spec.class_means[static_cast<std::size_t>(y)]
                            [static_cast<std::size_t>(j)]);
    }
  }
  for (int i = 0; i < ood.rows(); ++i) {
    for (int j = 0; j < ood.cols(); ++j) {
      CHECK(ood(i, j) == spec.ood_mean[static_cast<std::size_t>(j)]);
    }
  }

  // n_ood = 0 is allowed (training sets have no OOD block).
  spec.n_ood = 0;
  const auto [id2, empty_ood] = make_blobs(spec, rng);
  CHECK(id2.size() == 20);
  CHECK(empty_ood.rows() == 0);
}

TEST_CASE("blob generator: statistical means and separability") {
  BlobSpec spec = BlobSpec::defaults();  // d=8, distance 4, std 0.8
  spec.n_per_class = 4000;
  spec.n_ood = 4000;
  Rng rng(6, 0);
  const auto [id, ood] = make_blobs(spec, rng);

  std::vector<double> mean0(8, 0.0), mean1(8, 0.0), mean_ood(8, 0.0);
  int n0 = 0, n1 = 0;
  for (int i = 0; i < id.size(); ++i) {
    const bool is0 = id.labels[static_cast<std::size_t>(i)] == 0;
    for (int j = 0; j < 8; ++j) {
      (is0 ? mean0 : mean1)[static_cast<std::size_t>(j)] += id.features(i, j);
    }
    (is0 ? n0 : n1) += 1;
  }
  CHECK(n0 == 4000);
  CHECK(n1 == 4000);
  for (int i = 0; i < ood.rows(); ++i) {
    for (int j = 0; j < 8; ++j) {
      mean_ood[static_cast<std::size_t>(j)] += ood(i, j);
    }
  }
  for (int j = 0; j < 8; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    CHECK(std::fabs(mean0[ju] / n0 - spec.class_means[0][ju]) <= 0.07);
    CHECK(std::fabs(mean1[ju] / n1 - spec.class_means[1][ju]) <= 0.07);
    CHECK(std::fabs(mean_ood[ju] / ood.rows() - spec.ood_mean[ju]) <= 0.07);
  }

  // Nearest-true-mean classification: the default geometry is comfortably
  // separable (2.5 sigma margin to the decision boundary).
  int correct = 0;
  for (int i = 0; i < id.size(); ++i) {
    double d0 = 0.0, d1 = 0.0;
    for (int j = 0; j < 8; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      const double v = id.features(i, j);
      d0 += (v - spec.class_means[0][ju]) * (v - spec.class_means[0][ju]);
      d1 += (v - spec.class_means[1][ju]) * (v - spec.class_means[1][ju]);
    }
    const int pred = d1 < d0 ? 1 : 0;
    if (pred == id.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  CHECK(static_cast<double>(correct) / id.size() > 0.985);
}

TEST_CASE("blob generator rejects degenerate specs") {
  Rng rng(7, 0);
  BlobSpec no_means;  // empty class_means
  CHECK_THROWS_AS(make_blobs(no_means, rng), std::invalid_argument);

  BlobSpec bad_dims = BlobSpec::defaults();
  bad_dims.dims = 0;
  CHECK_THROWS_AS(make_blobs(bad_dims, rng), std::invalid_argument);

  BlobSpec bad_mean = BlobSpec::defaults();
  bad_mean.ood_mean = {1.0};  // wrong dimension
  CHECK_THROWS_AS(make_blobs(bad_mean, rng), std::invalid_argument);

  BlobSpec duplicate = BlobSpec::defaults();
  duplicate.class_means[1] = duplicate.class_means[0];
  CHECK_THROWS_AS(make_blobs(duplicate, rng), std::invalid_argument);
}

TEST_CASE("labeled csv round-trip is exact") {
  CircleSpec spec;
  spec.n_per_class = 25;
  Rng rng(8, 0);
  LabeledDataset ds = make_circle_id(spec, rng);
  const std::string path = temp_path("oodgauge_test_labeled.csv");
  write_labeled_csv(ds, path);
  const LabeledDataset back = read_labeled_csv(path);
  CHECK(back.size() == ds.size());
  CHECK(back.num_classes == ds.num_classes);
  CHECK(back.labels == ds.labels);
  CHECK(max_abs_diff(back.features, ds.features) == 0.0);
  CHECK(back.eval_only == false);
  std::remove(path.c_str());
}

TEST_CASE("features csv round-trip is exact") {
  RingOodSpec spec;
  spec.n = 30;
  Rng rng(9, 0);
  const Matrix ring = make_ood_ring(spec, rng);
  const std::string path = temp_path("oodgauge_test_features.csv");
  write_features_csv(ring, path);
  const Matrix back = read_features_csv(path);
  CHECK(max_abs_diff(back, ring) == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("csv readers reject malformed input") {
  CHECK_THROWS_AS(read_labeled_csv("/nonexistent/oodgauge.csv"),
                  std::runtime_error);

  const std::string path = temp_path("oodgauge_test_bad.csv");
  auto write_file = [&path](const std::string& text) {
    std::ofstream out(path);
    out << text;
  };

  write_file("x9,x1,label\n0.5,0.5,0\n");  // misnamed feature column
  CHECK_THROWS_WITH_AS(read_labeled_csv(path),
                       doctest::Contains("unexpected CSV column"),
                       std::runtime_error);

  write_file("x0,x1\n0.1,0.2\n");  // no label column
  CHECK_THROWS_WITH_AS(read_labeled_csv(path), doctest::Contains("label"),
                       std::runtime_error);

  write_file("x0,x1,label\n0.5\n");  // ragged row
  CHECK_THROWS_WITH_AS(read_labeled_csv(path), doctest::Contains("cells"),
                       std::runtime_error);

  write_file("x0,x1,label\n0.5,abc,0\n");  // non-numeric cell
  CHECK_THROWS_WITH_AS(read_labeled_csv(path),
                       doctest::Contains("bad numeric cell"),
                       std::runtime_error);

  write_file("x0,x1,label\n0.5,0.5,-1\n");  // negative label
  CHECK_THROWS_WITH_AS(read_labeled_csv(path),
                       doctest::Contains("negative label"),
                       std::runtime_error);

  // Features reader rejects a stray label column.
  write_file("x0,x1,label\n0.5,0.5,0\n");
  CHECK_THROWS_WITH_AS(read_features_csv(path),
                       doctest::Contains("unexpected label"),
                       std::runtime_error);

  std::remove(path.c_str());
}
