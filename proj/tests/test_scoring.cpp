// Scorer oracles: MSP hand values and bounds, Mahalanobis algebra
// (Cholesky, precision identity, worked distances), and the ODIN
// reductions/perturbation geometry.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oodgauge/matrix.hpp"
#include "oodgauge/model.hpp"
#include "oodgauge/rng.hpp"
#include "oodgauge/scoring.hpp"

using namespace oodgauge;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.normal(0.0, scale);
  return m;
}

// Tied covariance recomputed directly from the definition.
Matrix reference_tied_covariance(const Matrix& features,
                                 const std::vector<int>& labels,
                                 int num_classes) {
  const int n = features.rows();
  const int d = features.cols();
  Matrix mu(num_classes, d, 0.0);
  std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
  for (int i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    ++counts[static_cast<std::size_t>(y)];
    for (int j = 0; j < d; ++j) mu(y, j) += features(i, j);
  }
  for (int c = 0; c < num_classes; ++c) {
    for (int j = 0; j < d; ++j) {
      mu(c, j) /= counts[static_cast<std::size_t>(c)];
    }
  }
  Matrix sigma(d, d, 0.0);
  for (int i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        sigma(a, b) +=
            (features(i, a) - mu(y, a)) * (features(i, b) - mu(y, b));
      }
    }
  }
  for (double& v : sigma.values()) v /= n;
  return sigma;
}

}  // namespace

TEST_CASE("softmax_with_temperature") {
  const std::vector<double> logits{0.0, std::log(3.0)};
  const auto p = softmax_with_temperature(logits, 1.0);
  CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(0.75).epsilon(1e-14));

  // High temperature flattens toward uniform; argmax never changes.
  for (const double t : {1.0, 10.0, 1000.0}) {
    const auto q = softmax_with_temperature(logits, t);
    CHECK(q[1] > q[0]);
    double sum = 0.0;
    for (const double v : q) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  }
  const auto flat = softmax_with_temperature(logits, 1e9);
  CHECK(flat[0] == doctest::Approx(0.5).epsilon(1e-8));

  CHECK_THROWS_AS(softmax_with_temperature(logits, 0.0),
                  std::invalid_argument);
}

TEST_CASE("msp_score hand values and bounds") {
  // CE: equal logits -> 1/K; saturated -> near 1.
  CHECK(msp_score(std::vector<double>{1.3, 1.3}, HeadKind::ce) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(msp_score(std::vector<double>{10.0, -10.0}, HeadKind::ce) > 0.9999);
  CHECK(msp_score(std::vector<double>{0.0, std::log(3.0)}, HeadKind::ce) ==
        doctest::Approx(0.75).epsilon(1e-14));

  // OVADM: max logit 0 -> sigma(0) = 0.5; distances cap the score at 0.5.
  CHECK(msp_score(std::vector<double>{0.0, -3.0}, HeadKind::ovadm) == 0.5);
  CHECK(msp_score(std::vector<double>{-1.0, -3.0}, HeadKind::ovadm) ==
        doctest::Approx(1.0 / (1.0 + std::exp(1.0))).epsilon(1e-14));

  Rng rng(1, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const Matrix logits = random_matrix(1, 4, rng, 3.0);
    const double ce = msp_score(logits.row_span(0), HeadKind::ce);
    CHECK(ce >= 0.25);
    CHECK(ce <= 1.0);
    Matrix neg = logits;
    for (double& v : neg.values()) v = -std::fabs(v);
    const double ova = msp_score(neg.row_span(0), HeadKind::ovadm);
    CHECK(ova > 0.0);
    CHECK(ova <= 0.5);
  }
}

TEST_CASE("cholesky_lower reconstructs SPD matrices and rejects others") {
  const Matrix a(3, 3, {4, 2, 2, 2, 5, 3, 2, 3, 6});
  const Matrix l = cholesky_lower(a);
  const Matrix rebuilt = matmul(l, transpose(l));
  CHECK(max_abs_diff(rebuilt, a) <= 1e-12);
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) CHECK(l(i, j) == 0.0);
  }

  const Matrix not_pd(2, 2, {1, 2, 2, 1});
  CHECK_THROWS_WITH_AS(cholesky_lower(not_pd),
                       doctest::Contains("positive definite"),
                       std::runtime_error);
  CHECK_THROWS_AS(cholesky_lower(Matrix(2, 3, 0.0)), std::invalid_argument);
}

TEST_CASE("spd_inverse") {
  CHECK(max_abs_diff(spd_inverse(Matrix::identity(4)),
                     Matrix::identity(4)) <= 1e-14);

  Rng rng(2, 0);
  const Matrix b = random_matrix(5, 5, rng);
  Matrix a = matmul(b, transpose(b));
  for (int i = 0; i < 5; ++i) a(i, i) += 1.0;  // comfortably SPD
  const Matrix inv = spd_inverse(a);
  CHECK(max_abs_diff(matmul(a, inv), Matrix::identity(5)) <= 1e-10);
  CHECK(max_abs_diff(inv, transpose(inv)) <= 1e-12);  // symmetrized
}

TEST_CASE("fit_mahalanobis: one point per class with lambda 1") {
  // Sigma = 0, precision = (0 + 1*I)^-1 = I; score is -squared Euclidean.
  const Matrix features(2, 2, {1.0, 2.0, -1.0, 0.5});
  const std::vector<int> labels{0, 1};
  const MahalanobisStats stats = fit_mahalanobis(features, labels, 2, 1.0);
  CHECK(max_abs_diff(stats.mu, features) <= 1e-15);
  CHECK(max_abs_diff(stats.precision, Matrix::identity(2)) <= 1e-14);

  const std::vector<double> h{2.0, 2.0};
  // Distances: to mu_0 = 1, to mu_1 = 9+2.25; max of negatives = -1.
  CHECK(md_score(stats, h) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("fit_mahalanobis: statistical consistency and precision identity") {
  Rng rng(3, 0);
  const int n = 100000;
  Matrix features(n, 3);
  std::vector<int> labels(static_cast<std::size_t>(n));
  const double mu0[3] = {0.0, 0.0, 0.0};
  const double mu1[3] = {5.0, -2.0, 1.0};
  for (int i = 0; i < n; ++i) {
    const int y = i % 2;
    labels[static_cast<std::size_t>(i)] = y;
    for (int j = 0; j < 3; ++j) {
      features(i, j) = (y == 0 ? mu0[j] : mu1[j]) + rng.normal();
    }
  }
  const MahalanobisStats stats = fit_mahalanobis(features, labels, 2);

  // Fitted tied covariance should be close to I, so precision close to I.
  Matrix sigma = reference_tied_covariance(
      features, labels, 2);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      CHECK(std::fabs(sigma(a, b) - (a == b ? 1.0 : 0.0)) <= 0.05);
    }
  }
  CHECK(std::fabs(stats.mu(1, 0) - 5.0) <= 0.05);

  // precision * (Sigma + lambda I) = I within 1e-8.
  Matrix reg = sigma;
  for (int i = 0; i < 3; ++i) reg(i, i) += stats.lambda_reg;
  CHECK(max_abs_diff(matmul(stats.precision, reg), Matrix::identity(3)) <=
        1e-8);
}

TEST_CASE("fit_mahalanobis rejects empty classes and bad shapes") {
  const Matrix features(2, 2, {1.0, 2.0, 3.0, 4.0});
  CHECK_THROWS_WITH_AS(
      fit_mahalanobis(features, std::vector<int>{0, 0}, 2, 1e-6),
      doctest::Contains("class 1"), std::invalid_argument);
  CHECK_THROWS_AS(fit_mahalanobis(features, std::vector<int>{0}, 2, 1e-6),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_mahalanobis(features, std::vector<int>{0, 1}, 2, -1.0),
                  std::invalid_argument);
}

TEST_CASE("md_score worked cases") {
  // h exactly at a class mean -> 0.
  Matrix mu(2, 2, {0.0, 0.0, 4.0, 0.0});
  MahalanobisStats iso = make_mahalanobis_stats(mu, Matrix::identity(2), 1e-6);
  CHECK(md_score(iso, std::vector<double>{4.0, 0.0}) == 0.0);

  // Identity precision -> negative squared Euclidean distance to the
  // nearest mean: h=(1,1) -> min(2, 10) -> -2.
  CHECK(md_score(iso, std::vector<double>{1.0, 1.0}) ==
        doctest::Approx(-2.0).epsilon(1e-12));

  // Worked anisotropic case: precision diag(2, 1), mu=(0,0), h=(1,1) -> -3.
  Matrix mu_one(1, 2, {0.0, 0.0});
  Matrix prec(2, 2, {2.0, 0.0, 0.0, 1.0});
  MahalanobisStats aniso = make_mahalanobis_stats(mu_one, prec, 1e-6);
  CHECK(md_score(aniso, std::vector<double>{1.0, 1.0}) ==
        doctest::Approx(-3.0).epsilon(1e-12));
}

TEST_CASE("md_score is never positive and ignores class order") {
  Rng rng(4, 0);
  const Matrix b = random_matrix(4, 4, rng, 0.5);
  Matrix prec = matmul(b, transpose(b));
  for (int i = 0; i < 4; ++i) prec(i, i) += 0.5;
  const Matrix mu = random_matrix(3, 4, rng, 2.0);
  const MahalanobisStats stats = make_mahalanobis_stats(mu, prec, 1e-6);

  // Relabeled copy: classes permuted (2, 0, 1).
  Matrix mu_perm(3, 4);
  const int perm[3] = {2, 0, 1};
  for (int c = 0; c < 3; ++c) {
    for (int j = 0; j < 4; ++j) mu_perm(c, j) = mu(perm[c], j);
  }
  const MahalanobisStats perm_stats =
      make_mahalanobis_stats(mu_perm, prec, 1e-6);

  for (int rep = 0; rep < 200; ++rep) {
    const Matrix h = random_matrix(1, 4, rng, 3.0);
    const double s = md_score(stats, h.row_span(0));
    CHECK(s <= 0.0);
    CHECK(md_score(perm_stats, h.row_span(0)) ==
          doctest::Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("md_scores matches md_score row by row") {
  Rng rng(5, 0);
  const Matrix mu = random_matrix(2, 3, rng);
  const MahalanobisStats stats =
      make_mahalanobis_stats(mu, Matrix::identity(3), 1e-6);
  const Matrix h = random_matrix(10, 3, rng);
  const auto scores = md_scores(stats, h);
  REQUIRE(scores.size() == 10);
  for (int i = 0; i < 10; ++i) {
    CHECK(scores[static_cast<std::size_t>(i)] ==
          md_score(stats, h.row_span(i)));
  }
}

TEST_CASE("odin with T=1, eps=0 equals msp exactly") {
  Rng xr(6, 0);
  const Matrix xs = random_matrix(64, 2, xr, 1.5);
  for (const HeadKind head : {HeadKind::ce, HeadKind::ovadm}) {
    Rng rng(7, 1);
    const MlpParams model = init_mlp(2, 2, head, rng);
    OdinParams params;
    params.temperature = 1.0;
    params.epsilon = 0.0;
    const auto odin = odin_scores(model, xs, params);
    const auto msp = msp_scores(forward(model, xs).logits, head);
    REQUIRE(odin.size() == msp.size());
    for (std::size_t i = 0; i < odin.size(); ++i) {
      CHECK(odin[i] == msp[i]);  // bitwise: shared code path
    }
  }
}

TEST_CASE("odin at huge temperature flattens the CE head to 1/K") {
  Rng rng(8, 1);
  const MlpParams model = init_mlp(2, 2, HeadKind::ce, rng);
  Rng xr(9, 0);
  const Matrix xs = random_matrix(16, 2, xr);
  OdinParams params;
  params.temperature = 1e9;
  params.epsilon = 0.0;
  for (const double s : odin_scores(model, xs, params)) {
    CHECK(std::fabs(s - 0.5) <= 1e-6);
  }
}

TEST_CASE("odin perturbation geometry: each coordinate moves by eps or 0") {
  Rng rng(10, 1);
  const MlpParams model = init_mlp(2, 2, HeadKind::ce, rng);
  Rng xr(11, 0);
  const Matrix xs = random_matrix(32, 2, xr, 2.0);
  OdinParams params;  // defaults T=1000, eps=0.01
  const Matrix perturbed = odin_perturb(model, xs, params);
  REQUIRE(perturbed.same_shape(xs));
  double max_move = 0.0;
  for (int i = 0; i < xs.rows(); ++i) {
    for (int j = 0; j < xs.cols(); ++j) {
      // (x + eps) - x is eps only up to rounding in x's last place.
      const double move = std::fabs(perturbed(i, j) - xs(i, j));
      CHECK((move == 0.0 || std::fabs(move - params.epsilon) <= 1e-12));
      max_move = std::max(max_move, move);
    }
  }
  // Generic random inputs have nonzero confidence gradients somewhere.
  CHECK(std::fabs(max_move - params.epsilon) <= 1e-12);

  // eps = 0 returns the inputs untouched.
  OdinParams still;
  still.epsilon = 0.0;
  CHECK(max_abs_diff(odin_perturb(model, xs, still), xs) == 0.0);

  OdinParams bad;
  bad.temperature = 0.0;
  CHECK_THROWS_AS(odin_perturb(model, xs, bad), std::invalid_argument);
  OdinParams bad_eps;
  bad_eps.epsilon = -0.5;
  CHECK_THROWS_AS(odin_perturb(model, xs, bad_eps), std::invalid_argument);
}

TEST_CASE("odin_scores matches per-sample odin_score") {
  Rng rng(12, 1);
  const MlpParams model = init_mlp(2, 2, HeadKind::ovadm, rng);
  Rng xr(13, 0);
  const Matrix xs = random_matrix(8, 2, xr);
  OdinParams params;
  const auto batch = odin_scores(model, xs, params);
  for (int i = 0; i < xs.rows(); ++i) {
    CHECK(batch[static_cast<std::size_t>(i)] ==
          doctest::Approx(odin_score(model, xs.row_span(i), params))
              .epsilon(1e-14));
  }
}

TEST_CASE("scorer name round-trip") {
  CHECK(scorer_from_string("baseline") == Scorer::baseline);
  CHECK(scorer_from_string("md") == Scorer::md);
  CHECK(scorer_from_string("odin") == Scorer::odin);
  CHECK(std::string(to_string(Scorer::md)) == "md");
  CHECK_THROWS_AS(scorer_from_string("energy"), std::invalid_argument);
}
