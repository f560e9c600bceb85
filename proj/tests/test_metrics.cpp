// AUROC against an O(n^2) brute force (the rank path must match it exactly,
// ties included), plus accuracy and Spearman oracles.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oodgauge/metrics.hpp"
#include "oodgauge/rng.hpp"

using namespace oodgauge;

namespace {

// Pairwise definition, counted directly.
double auroc_brute_force(const std::vector<double>& id_scores,
                         const std::vector<double>& ood_scores) {
  double num = 0.0;
  for (const double s_id : id_scores) {
    for (const double s_ood : ood_scores) {
      if (s_id > s_ood) {
        num += 1.0;
      } else if (s_id == s_ood) {
        num += 0.5;
      }
    }
  }
  return num / (static_cast<double>(id_scores.size()) *
                static_cast<double>(ood_scores.size()));
}

}  // namespace

TEST_CASE("auroc hand examples") {
  CHECK(auroc(std::vector<double>{2, 3}, std::vector<double>{0, 1}) == 1.0);
  CHECK(auroc(std::vector<double>{0, 1}, std::vector<double>{2, 3}) == 0.0);
  // One win, one loss.
  CHECK(auroc(std::vector<double>{1, 2}, std::vector<double>{1.5}) == 0.5);
  // Identical multisets -> 0.5 exactly.
  const std::vector<double> same{0.3, 0.7, 0.7, 1.1};
  CHECK(auroc(same, same) == 0.5);
  // Tie worth one half: pairs (1 vs 1 -> 0.5), (2 vs 1 -> 1).
  CHECK(auroc(std::vector<double>{1, 2}, std::vector<double>{1}) == 0.75);
}

TEST_CASE("auroc equals brute force on 200 random instances with ties") {
  Rng rng(2024, 0);
  for (int instance = 0; instance < 200; ++instance) {
    const int n_id = 1 + static_cast<int>(rng.uniform_below(30));
    const int n_ood = 1 + static_cast<int>(rng.uniform_below(30));
    std::vector<double> id_scores(n_id), ood_scores(n_ood);
    // Small integer grid forces many exact ties.
    for (double& s : id_scores) {
      s = static_cast<double>(rng.uniform_below(8)) * 0.5;
    }
    for (double& s : ood_scores) {
      s = static_cast<double>(rng.uniform_below(8)) * 0.5;
    }
    const double fast = auroc(id_scores, ood_scores);
    const double brute = auroc_brute_force(id_scores, ood_scores);
    INFO("instance ", instance, " n_id=", n_id, " n_ood=", n_ood);
    CHECK(std::fabs(fast - brute) <= 1e-12);
  }
}

TEST_CASE("auroc symmetry: swapped roles sum to one exactly") {
  Rng rng(7, 0);
  for (int instance = 0; instance < 50; ++instance) {
    std::vector<double> a(10), b(12);
    for (double& s : a) s = static_cast<double>(rng.uniform_below(5));
    for (double& s : b) s = static_cast<double>(rng.uniform_below(5));
    CHECK(auroc(a, b) + auroc(b, a) == 1.0);
  }
}

TEST_CASE("auroc invariant under strictly increasing transforms") {
  Rng rng(8, 0);
  std::vector<double> a(40), b(35);
  for (double& s : a) s = static_cast<double>(rng.uniform_below(10)) * 0.25;
  for (double& s : b) s = static_cast<double>(rng.uniform_below(10)) * 0.25;
  const double base = auroc(a, b);
  auto monotone = [](double x) { return x * x * x + 2.0 * x + 1.0; };
  std::vector<double> ta = a, tb = b;
  for (double& s : ta) s = monotone(s);
  for (double& s : tb) s = monotone(s);
  CHECK(auroc(ta, tb) == base);
}

TEST_CASE("auroc input validation") {
  const std::vector<double> ok{1.0};
  CHECK_THROWS_AS(auroc(std::vector<double>{}, ok), std::invalid_argument);
  CHECK_THROWS_AS(auroc(ok, std::vector<double>{}), std::invalid_argument);
  const std::vector<double> bad{std::nan("")};
  CHECK_THROWS_AS(auroc(bad, ok), std::invalid_argument);
}

TEST_CASE("accuracy") {
  const std::vector<int> t{0, 1, 1, 0};
  CHECK(accuracy(t, t) == 1.0);
  CHECK(accuracy(std::vector<int>{1, 0, 0, 1}, t) == 0.0);
  CHECK(accuracy(std::vector<int>{0, 1, 1, 1}, t) == 0.75);
  CHECK_THROWS_AS(accuracy(std::vector<int>{0}, t), std::invalid_argument);
  CHECK_THROWS_AS(accuracy(std::vector<int>{}, std::vector<int>{}),
                  std::invalid_argument);
}

TEST_CASE("spearman hand values") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{10, 20, 30, 40, 50};
  CHECK(spearman(x, y) == doctest::Approx(1.0).epsilon(1e-12));
  const std::vector<double> yr{50, 40, 30, 20, 10};
  CHECK(spearman(x, yr) == doctest::Approx(-1.0).epsilon(1e-12));

  // Ties: x ranks {1, 2.5, 2.5, 4}; Pearson on ranks = 3/sqrt(10).
  const std::vector<double> xt{1, 2, 2, 3};
  const std::vector<double> yt{10, 20, 30, 40};
  CHECK(spearman(xt, yt) ==
        doctest::Approx(3.0 / std::sqrt(10.0)).epsilon(1e-12));
}

TEST_CASE("spearman depends only on ranks") {
  const std::vector<double> x{0.1, 0.5, 0.2, 0.9, 0.4};
  const std::vector<double> y{3.0, 1.0, 7.0, 2.0, 5.0};
  const double base = spearman(x, y);
  std::vector<double> tx = x;
  for (double& v : tx) v = std::exp(v) * 10.0;  // strictly increasing
  CHECK(spearman(tx, y) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("spearman input validation") {
  CHECK_THROWS_AS(spearman(std::vector<double>{1, 2, 3},
                           std::vector<double>{1, 2}),
                  std::invalid_argument);
  CHECK_THROWS_AS(spearman(std::vector<double>{1}, std::vector<double>{1}),
                  std::invalid_argument);
  // Zero rank variance -> undefined.
  CHECK_THROWS_AS(spearman(std::vector<double>{2, 2, 2},
                           std::vector<double>{1, 2, 3}),
                  std::invalid_argument);
}
