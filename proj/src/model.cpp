#include "oodgauge/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oodgauge {

const char* to_string(HeadKind kind) {
  return kind == HeadKind::ce ? "ce" : "ovadm";
}

HeadKind head_kind_from_string(const std::string& s) {
  if (s == "ce") return HeadKind::ce;
  if (s == "ovadm") return HeadKind::ovadm;
  throw std::invalid_argument("unknown head kind '" + s + "'");
}

std::vector<Matrix*> MlpParams::trainable() {
  std::vector<Matrix*> out{&w1, &b1, &w2, &b2};
  if (head == HeadKind::ce) {
    out.push_back(&w_out);
    out.push_back(&b_out);
  } else {
    out.push_back(&centroids);
  }
  return out;
}

std::vector<const Matrix*> MlpParams::trainable() const {
  auto mutable_list = const_cast<MlpParams*>(this)->trainable();
  return {mutable_list.begin(), mutable_list.end()};
}

namespace {

Matrix uniform_init(int rows, int cols, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = rng.uniform_range(-bound, bound);
  }
  return m;
}

}  // namespace

MlpParams init_mlp(int d_in, int num_classes, HeadKind head, Rng& rng) {
  if (d_in < 1) throw std::invalid_argument("init_mlp: d_in must be >= 1");
  if (num_classes < 2) {
    throw std::invalid_argument("init_mlp: need at least two classes");
  }
  MlpParams params;
  params.w1 = uniform_init(d_in, kHiddenUnits, rng);
  params.b1 = Matrix(1, kHiddenUnits, 0.0);
  params.w2 = uniform_init(kHiddenUnits, kHiddenUnits, rng);
  params.b2 = Matrix(1, kHiddenUnits, 0.0);
  params.head = head;
  if (head == HeadKind::ce) {
    // Stored K x 8; fan-in is the 8 trunk features.
    Matrix w_t = uniform_init(kHiddenUnits, num_classes, rng);
    params.w_out = transpose(w_t);
    params.b_out = Matrix(1, num_classes, 0.0);
  } else {
    params.centroids = Matrix(num_classes, kHiddenUnits);
    for (std::size_t i = 0; i < params.centroids.size(); ++i) {
      params.centroids[i] = rng.normal();
    }
  }
  return params;
}

ForwardResult forward(const MlpParams& params, const Matrix& x) {
  if (x.cols() != params.d_in()) {
    throw std::invalid_argument("forward: input has " +
                                std::to_string(x.cols()) +
                                " columns, model expects " +
                                std::to_string(params.d_in()));
  }
  const int n = x.rows();
  Matrix h1 = matmul(x, params.w1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < kHiddenUnits; ++j) {
      h1(i, j) = std::max(0.0, h1(i, j) + params.b1(0, j));
    }
  }
  Matrix h2 = matmul(h1, params.w2);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < kHiddenUnits; ++j) {
      h2(i, j) = std::max(0.0, h2(i, j) + params.b2(0, j));
    }
  }

  const int k = params.num_classes();
  Matrix logits(n, k);
  if (params.head == HeadKind::ce) {
    logits = matmul(h2, transpose(params.w_out));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < k; ++j) logits(i, j) += params.b_out(0, j);
    }
  } else {
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < k; ++c) {
        double sq = 0.0;
        for (int j = 0; j < kHiddenUnits; ++j) {
          const double d = h2(i, j) - params.centroids(c, j);
          sq += d * d;
        }
        logits(i, c) = -sq;
      }
    }
  }
  return {std::move(h2), std::move(logits)};
}

namespace {

void check_labels(const Matrix& logits, std::span<const int> labels) {
  if (logits.rows() == 0) throw std::invalid_argument("loss: empty batch");
  if (static_cast<int>(labels.size()) != logits.rows()) {
    throw std::invalid_argument("loss: label count does not match batch");
  }
  for (int l : labels) {
    if (l < 0 || l >= logits.cols()) {
      throw std::invalid_argument("loss: label out of range");
    }
  }
}

Matrix one_hot(std::span<const int> labels, int num_classes) {
  Matrix m(static_cast<int>(labels.size()), num_classes, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    m(static_cast<int>(i), labels[i]) = 1.0;
  }
  return m;
}

}  // namespace

Var ce_loss_node(Tape& tape, Var logits, std::span<const int> labels) {
  // Copy the shape out: adding nodes below may invalidate value references.
  const int rows = tape.value(logits).rows();
  const int cols = tape.value(logits).cols();
  check_labels(tape.value(logits), labels);
  const Var lse = logsumexp_rows(tape, logits);  // N x 1
  const Var picked =
      tape.sum_rows(tape.mul(logits, tape.constant(one_hot(labels, cols))));
  const Var per_row = tape.sub(lse, picked);
  return tape.scale(tape.sum(per_row), 1.0 / rows);
}

Var ovadm_loss_node(Tape& tape, Var logits, std::span<const int> labels) {
  const int rows = tape.value(logits).rows();
  const int cols = tape.value(logits).cols();
  check_labels(tape.value(logits), labels);
  // -log sigma(l_y) = softplus(-l_y) and -log(1 - sigma(l_k)) = softplus(l_k):
  // flip the sign of the true-class logit, then softplus everything.
  Matrix signs(rows, cols, 1.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    signs(static_cast<int>(i), labels[i]) = -1.0;
  }
  const Var flipped = tape.mul(logits, tape.constant(std::move(signs)));
  const Var terms = tape.softplus(flipped);
  return tape.scale(tape.sum(terms), 1.0 / rows);
}

Var classification_loss_node(Tape& tape, HeadKind head, Var logits,
                             std::span<const int> labels) {
  return head == HeadKind::ce ? ce_loss_node(tape, logits, labels)
                              : ovadm_loss_node(tape, logits, labels);
}

double ce_loss(const Matrix& logits, std::span<const int> labels) {
  Tape tape;
  return tape.value(ce_loss_node(tape, tape.constant(logits), labels))(0, 0);
}

double ovadm_loss(const Matrix& logits, std::span<const int> labels) {
  Tape tape;
  return tape.value(ovadm_loss_node(tape, tape.constant(logits), labels))(0, 0);
}

std::vector<int> predict(const Matrix& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (int i = 0; i < logits.rows(); ++i) {
    int best = 0;
    for (int j = 1; j < logits.cols(); ++j) {
      if (logits(i, j) > logits(i, best)) best = j;
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

TrunkVars trunk_leaves(Tape& tape, const MlpParams& params) {
  return {tape.leaf(params.w1), tape.leaf(params.b1), tape.leaf(params.w2),
          tape.leaf(params.b2)};
}

TrunkVars trunk_constants(Tape& tape, const MlpParams& params) {
  return {tape.constant(params.w1), tape.constant(params.b1),
          tape.constant(params.w2), tape.constant(params.b2)};
}

MlpVars mlp_leaves(Tape& tape, const MlpParams& params) {
  MlpVars vars;
  vars.trunk = trunk_leaves(tape, params);
  vars.head = params.head;
  if (params.head == HeadKind::ce) {
    vars.head_w = tape.leaf(params.w_out);
    vars.head_b = tape.leaf(params.b_out);
  } else {
    vars.head_w = tape.leaf(params.centroids);
  }
  return vars;
}

MlpVars mlp_constants(Tape& tape, const MlpParams& params) {
  MlpVars vars;
  vars.trunk = trunk_constants(tape, params);
  vars.head = params.head;
  if (params.head == HeadKind::ce) {
    vars.head_w = tape.constant(params.w_out);
    vars.head_b = tape.constant(params.b_out);
  } else {
    vars.head_w = tape.constant(params.centroids);
  }
  return vars;
}

std::vector<Var> collect_vars(const MlpVars& vars) {
  std::vector<Var> out{vars.trunk.w1, vars.trunk.b1, vars.trunk.w2,
                       vars.trunk.b2, vars.head_w};
  if (vars.head == HeadKind::ce) out.push_back(vars.head_b);
  return out;
}

Var trunk_features(Tape& tape, const TrunkVars& vars, Var x) {
  const Var h1 =
      tape.relu(tape.add_rowvec(tape.matmul(x, vars.w1), vars.b1));
  return tape.relu(tape.add_rowvec(tape.matmul(h1, vars.w2), vars.b2));
}

Var logits_from_features(Tape& tape, const MlpVars& vars, Var features) {
  if (vars.head == HeadKind::ce) {
    return tape.add_rowvec(tape.matmul(features, tape.transpose(vars.head_w)),
                           vars.head_b);
  }
  // Pairwise squared distances via |h|^2 + |c|^2 - 2 h.c; the relu clamps
  // the tiny negative values cancellation can produce.
  const Var cross = tape.matmul(features, tape.transpose(vars.head_w));
  const Var sq_h = tape.sum_rows(tape.mul(features, features));  // N x 1
  const Var sq_c = tape.transpose(
      tape.sum_rows(tape.mul(vars.head_w, vars.head_w)));  // 1 x K
  const Var d2 = tape.add_colvec(
      tape.add_rowvec(tape.scale(cross, -2.0), sq_c), sq_h);
  return tape.scale(tape.relu(d2), -1.0);
}

namespace {

void write_matrix(std::ofstream& out, const char* name, const Matrix& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  char buf[64];
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      out << buf << (j + 1 == m.cols() ? '\n' : ' ');
    }
  }
}

Matrix read_matrix(std::ifstream& in, const std::string& expected_name) {
  std::string name;
  int rows = 0, cols = 0;
  if (!(in >> name >> rows >> cols)) {
    throw std::runtime_error("checkpoint: truncated while reading header of '" +
                             expected_name + "'");
  }
  if (name != expected_name) {
    throw std::runtime_error("checkpoint: expected matrix '" + expected_name +
                             "', found '" + name + "'");
  }
  if (rows <= 0 || cols <= 0) {
    throw std::runtime_error("checkpoint: bad shape for '" + expected_name +
                             "'");
  }
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!(in >> m[i])) {
      throw std::runtime_error("checkpoint: truncated while reading '" +
                               expected_name + "'");
    }
  }
  if (!m.all_finite()) {
    throw std::runtime_error("checkpoint: non-finite value in '" +
                             expected_name + "'");
  }
  return m;
}

}  // namespace

void save_checkpoint(const MlpParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "oodgauge-ckpt v1 d_in=" << params.d_in()
      << " K=" << params.num_classes() << " head=" << to_string(params.head)
      << '\n';
  write_matrix(out, "W1", params.w1);
  write_matrix(out, "b1", params.b1);
  write_matrix(out, "W2", params.w2);
  write_matrix(out, "b2", params.b2);
  if (params.head == HeadKind::ce) {
    write_matrix(out, "W_out", params.w_out);
    write_matrix(out, "b_out", params.b_out);
  } else {
    write_matrix(out, "centroids", params.centroids);
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

MlpParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string magic, version, d_in_field, k_field, head_field;
  if (!(in >> magic >> version >> d_in_field >> k_field >> head_field)) {
    throw std::runtime_error("checkpoint: truncated header in " + path);
  }
  if (magic != "oodgauge-ckpt") {
    throw std::runtime_error("checkpoint: bad magic '" + magic + "' in " +
                             path);
  }
  if (version != "v1") {
    throw std::runtime_error("checkpoint: unsupported version '" + version +
                             "' in " + path);
  }
  auto parse_field = [&](const std::string& field, const char* key) {
    const std::string prefix = std::string(key) + "=";
    if (field.rfind(prefix, 0) != 0) {
      throw std::runtime_error("checkpoint: expected field '" +
                               std::string(key) + "', found '" + field + "'");
    }
    return field.substr(prefix.size());
  };
  const int d_in = std::stoi(parse_field(d_in_field, "d_in"));
  const int k = std::stoi(parse_field(k_field, "K"));
  const HeadKind head = head_kind_from_string(parse_field(head_field, "head"));

  MlpParams params;
  params.head = head;
  params.w1 = read_matrix(in, "W1");
  params.b1 = read_matrix(in, "b1");
  params.w2 = read_matrix(in, "W2");
  params.b2 = read_matrix(in, "b2");
  if (head == HeadKind::ce) {
    params.w_out = read_matrix(in, "W_out");
    params.b_out = read_matrix(in, "b_out");
  } else {
    params.centroids = read_matrix(in, "centroids");
  }
  if (params.d_in() != d_in) {
    throw std::runtime_error("checkpoint: W1 rows disagree with d_in header");
  }
  if (params.num_classes() != k) {
    throw std::runtime_error("checkpoint: head shape disagrees with K header");
  }
  if (params.w1.cols() != kHiddenUnits || params.w2.rows() != kHiddenUnits ||
      params.w2.cols() != kHiddenUnits) {
    throw std::runtime_error("checkpoint: trunk shapes are not d_in x 8 x 8");
  }
  return params;
}

}  // namespace oodgauge
