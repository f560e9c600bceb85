#include "oodgauge/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oodgauge/tape.hpp"

namespace oodgauge {

const char* to_string(Scorer scorer) {
  switch (scorer) {
    case Scorer::baseline: return "baseline";
    case Scorer::md: return "md";
    case Scorer::odin: return "odin";
  }
  throw std::logic_error("unreachable scorer");
}

Scorer scorer_from_string(const std::string& s) {
  if (s == "baseline") return Scorer::baseline;
  if (s == "md") return Scorer::md;
  if (s == "odin") return Scorer::odin;
  throw std::invalid_argument("unknown scorer '" + s + "'");
}

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double max_softmax(std::span<const double> logits, double temperature) {
  double m = logits[0];
  for (double l : logits) m = std::max(m, l);
  double denom = 0.0;
  for (double l : logits) denom += std::exp((l - m) / temperature);
  return 1.0 / denom;  // exp((m - m)/T) = 1 is the largest numerator
}

double max_sigmoid(std::span<const double> logits, double temperature) {
  double m = logits[0];
  for (double l : logits) m = std::max(m, l);
  return stable_sigmoid(m / temperature);
}

double head_score(std::span<const double> logits, HeadKind head,
                  double temperature) {
  if (logits.empty()) throw std::invalid_argument("score: empty logit vector");
  return head == HeadKind::ce ? max_softmax(logits, temperature)
                              : max_sigmoid(logits, temperature);
}

}  // namespace

std::vector<double> softmax_with_temperature(std::span<const double> logits,
                                             double temperature) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty vector");
  if (temperature <= 0.0) {
    throw std::invalid_argument("softmax: temperature must be > 0");
  }
  double m = logits[0];
  for (double l : logits) m = std::max(m, l);
  std::vector<double> out(logits.size());
  double denom = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp((logits[i] - m) / temperature);
    denom += out[i];
  }
  for (double& p : out) p /= denom;
  return out;
}

double msp_score(std::span<const double> logits, HeadKind head) {
  return head_score(logits, head, 1.0);
}

std::vector<double> msp_scores(const Matrix& logits, HeadKind head) {
  std::vector<double> out(static_cast<std::size_t>(logits.rows()));
  for (int i = 0; i < logits.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = msp_score(logits.row_span(i), head);
  }
  return out;
}

Matrix cholesky_lower(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("cholesky: matrix must be square");
  }
  const int n = a.rows();
  Matrix l(n, n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      if (i == j) {
        if (s <= 0.0) {
          throw std::runtime_error("cholesky: matrix is not positive definite");
        }
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  return l;
}

Matrix spd_inverse(const Matrix& a) {
  const Matrix l = cholesky_lower(a);
  const int n = a.rows();
  Matrix inv(n, n);
  std::vector<double> y(static_cast<std::size_t>(n));
  for (int col = 0; col < n; ++col) {
    // Forward substitution L y = e_col.
    for (int i = 0; i < n; ++i) {
      double s = (i == col) ? 1.0 : 0.0;
      for (int k = 0; k < i; ++k) s -= l(i, k) * y[static_cast<std::size_t>(k)];
      y[static_cast<std::size_t>(i)] = s / l(i, i);
    }
    // Back substitution L^T x = y.
    for (int i = n - 1; i >= 0; --i) {
      double s = y[static_cast<std::size_t>(i)];
      for (int k = i + 1; k < n; ++k) s -= l(k, i) * inv(k, col);
      inv(i, col) = s / l(i, i);
    }
  }
  // Exact symmetry, independent of per-column rounding.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      const double v = 0.5 * (inv(i, j) + inv(j, i));
      inv(i, j) = v;
      inv(j, i) = v;
    }
  }
  return inv;
}

static MahalanobisStats finish_stats(Matrix mu, Matrix precision,
                                     double lambda_reg) {
  MahalanobisStats stats;
  stats.chol_precision = cholesky_lower(precision);
  stats.mu = std::move(mu);
  stats.precision = std::move(precision);
  stats.lambda_reg = lambda_reg;
  return stats;
}

MahalanobisStats make_mahalanobis_stats(Matrix mu, Matrix precision,
                                        double lambda_reg) {
  if (mu.cols() != precision.rows() || precision.rows() != precision.cols()) {
    throw std::invalid_argument("mahalanobis: mu/precision shape mismatch");
  }
  if (lambda_reg <= 0.0) {
    throw std::invalid_argument("mahalanobis: lambda_reg must be > 0");
  }
  return finish_stats(std::move(mu), std::move(precision),
                                    lambda_reg);
}

MahalanobisStats fit_mahalanobis(const Matrix& features,
                                 std::span<const int> labels, int num_classes,
                                 double lambda_reg) {
  const int n = features.rows();
  const int d = features.cols();
  if (n < 2) throw std::invalid_argument("fit_mahalanobis: need N >= 2");
  if (static_cast<int>(labels.size()) != n) {
    throw std::invalid_argument("fit_mahalanobis: label count mismatch");
  }
  if (num_classes < 1) {
    throw std::invalid_argument("fit_mahalanobis: need at least one class");
  }
  if (lambda_reg <= 0.0) {
    throw std::invalid_argument("fit_mahalanobis: lambda_reg must be > 0");
  }

  Matrix mu(num_classes, d, 0.0);
  std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
  for (int i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= num_classes) {
      throw std::invalid_argument("fit_mahalanobis: label out of range");
    }
    ++counts[static_cast<std::size_t>(y)];
    for (int j = 0; j < d; ++j) mu(y, j) += features(i, j);
  }
  for (int c = 0; c < num_classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) {
      throw std::invalid_argument("fit_mahalanobis: class " +
                                  std::to_string(c) + " has no samples");
    }
    for (int j = 0; j < d; ++j) mu(c, j) /= counts[static_cast<std::size_t>(c)];
  }

  Matrix sigma(d, d, 0.0);
  std::vector<double> diff(static_cast<std::size_t>(d));
  for (int i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    for (int j = 0; j < d; ++j) {
      diff[static_cast<std::size_t>(j)] = features(i, j) - mu(y, j);
    }
    for (int j = 0; j < d; ++j) {
      for (int k = 0; k < d; ++k) {
        sigma(j, k) += diff[static_cast<std::size_t>(j)] *
                       diff[static_cast<std::size_t>(k)];
      }
    }
  }
  for (double& e : sigma.values()) e /= n;

  Matrix regularized = sigma;
  for (int j = 0; j < d; ++j) regularized(j, j) += lambda_reg;
  return finish_stats(std::move(mu), spd_inverse(regularized),
                                    lambda_reg);
}

double md_score(const MahalanobisStats& stats, std::span<const double> h) {
  const int d = stats.mu.cols();
  if (static_cast<int>(h.size()) != d) {
    throw std::invalid_argument("md_score: feature dimension mismatch");
  }
  const Matrix& l = stats.chol_precision;
  double best = 0.0;
  for (int c = 0; c < stats.mu.rows(); ++c) {
    // (h-mu)^T P (h-mu) = ||L^T (h-mu)||^2 with P = L L^T.
    double quad = 0.0;
    for (int i = 0; i < d; ++i) {
      double t = 0.0;
      for (int j = i; j < d; ++j) {
        t += l(j, i) * (h[static_cast<std::size_t>(j)] - stats.mu(c, j));
      }
      quad += t * t;
    }
    const double score = -quad;
    if (c == 0 || score > best) best = score;
  }
  return best;
}

std::vector<double> md_scores(const MahalanobisStats& stats,
                              const Matrix& features) {
  std::vector<double> out(static_cast<std::size_t>(features.rows()));
  for (int i = 0; i < features.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = md_score(stats, features.row_span(i));
  }
  return out;
}

namespace {

// Gradient of sum_i log(max-prob objective for row i) with respect to the
// input batch. Rows pass through the network independently, so the gradient
// rows are the per-sample input gradients.
Matrix input_gradients(const MlpParams& model, const Matrix& xs,
                       double temperature) {
  Tape tape;
  const Var x = tape.leaf(xs);
  MlpVars vars = mlp_constants(tape, model);
  const Var features = trunk_features(tape, vars.trunk, x);
  const Var logits = logits_from_features(tape, vars, features);
  const Var scaled = tape.scale(logits, 1.0 / temperature);

  const Matrix& lv = tape.value(logits);
  Matrix argmax_mask(lv.rows(), lv.cols(), 0.0);
  for (int i = 0; i < lv.rows(); ++i) {
    int best = 0;
    for (int j = 1; j < lv.cols(); ++j) {
      if (lv(i, j) > lv(i, best)) best = j;
    }
    argmax_mask(i, best) = 1.0;
  }
  const Var mask = tape.constant(std::move(argmax_mask));

  Var objective;
  if (model.head == HeadKind::ce) {
    // log p_max per row = l_max/T - logsumexp(l/T).
    const Var picked = tape.sum_rows(tape.mul(scaled, mask));
    objective = tape.sum(tape.sub(picked, logsumexp_rows(tape, scaled)));
  } else {
    // log sigma(l_max/T) = -softplus(-l_max/T) per row.
    const Var neg_softplus =
        tape.scale(tape.softplus(tape.scale(scaled, -1.0)), -1.0);
    objective = tape.sum(tape.sum_rows(tape.mul(neg_softplus, mask)));
  }
  const Var wrt[] = {x};
  return tape.backward(objective, wrt)[0];
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

Matrix odin_perturb(const MlpParams& model, const Matrix& xs,
                    const OdinParams& params) {
  if (params.temperature <= 0.0) {
    throw std::invalid_argument("odin: temperature must be > 0");
  }
  if (params.epsilon < 0.0) {
    throw std::invalid_argument("odin: epsilon must be >= 0");
  }
  if (params.epsilon == 0.0) return xs;

  Matrix perturbed = xs;
  constexpr int kChunk = 2048;
  for (int start = 0; start < xs.rows(); start += kChunk) {
    const int count = std::min(kChunk, xs.rows() - start);
    std::vector<int> rows(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) rows[static_cast<std::size_t>(i)] = start + i;
    const Matrix grad =
        input_gradients(model, take_rows(xs, rows), params.temperature);
    for (int i = 0; i < count; ++i) {
      for (int j = 0; j < xs.cols(); ++j) {
        perturbed(start + i, j) += params.epsilon * sign(grad(i, j));
      }
    }
  }
  return perturbed;
}

std::vector<double> odin_scores(const MlpParams& model, const Matrix& xs,
                                const OdinParams& params) {
  const Matrix perturbed = odin_perturb(model, xs, params);
  const Matrix logits = forward(model, perturbed).logits;
  std::vector<double> out(static_cast<std::size_t>(logits.rows()));
  for (int i = 0; i < logits.rows(); ++i) {
    out[static_cast<std::size_t>(i)] =
        head_score(logits.row_span(i), model.head, params.temperature);
  }
  return out;
}

double odin_score(const MlpParams& model, std::span<const double> x,
                  const OdinParams& params) {
  Matrix xs(1, static_cast<int>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) {
    xs(0, static_cast<int>(j)) = x[j];
  }
  return odin_scores(model, xs, params)[0];
}

}  // namespace oodgauge
