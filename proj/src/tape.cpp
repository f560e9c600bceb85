#include "oodgauge/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace oodgauge {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace

Var Tape::push(Op op, int a, int b, double c, Matrix value) {
  Node n;
  n.op = op;
  n.a = a;
  n.b = b;
  n.c = c;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
    throw std::invalid_argument("Tape: invalid Var");
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

const Matrix& Tape::value(Var v) const { return node(v).value; }

Var Tape::constant(Matrix value) {
  return push(Op::kConstant, -1, -1, 0.0, std::move(value));
}

Var Tape::leaf(Matrix value) {
  return push(Op::kLeaf, -1, -1, 0.0, std::move(value));
}

namespace {
void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string("Tape::") + op +
                                ": shape mismatch");
  }
}
}  // namespace

Var Tape::add(Var a, Var b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  require_same_shape(va, vb, "add");
  Matrix out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += vb[i];
  return push(Op::kAdd, a.id, b.id, 0.0, std::move(out));
}

Var Tape::sub(Var a, Var b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  require_same_shape(va, vb, "sub");
  Matrix out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= vb[i];
  return push(Op::kSub, a.id, b.id, 0.0, std::move(out));
}

Var Tape::mul(Var a, Var b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  require_same_shape(va, vb, "mul");
  Matrix out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= vb[i];
  return push(Op::kMul, a.id, b.id, 0.0, std::move(out));
}

Var Tape::div(Var a, Var b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  require_same_shape(va, vb, "div");
  Matrix out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= vb[i];
  return push(Op::kDiv, a.id, b.id, 0.0, std::move(out));
}

Var Tape::scale(Var a, double c) {
  Matrix out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c;
  return push(Op::kScale, a.id, -1, c, std::move(out));
}

Var Tape::matmul(Var a, Var b) {
  return push(Op::kMatMul, a.id, b.id, 0.0,
              oodgauge::matmul(value(a), value(b)));
}

Var Tape::transpose(Var a) {
  return push(Op::kTranspose, a.id, -1, 0.0, oodgauge::transpose(value(a)));
}

Var Tape::relu(Var a) {
  Matrix out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 0.0) out[i] = 0.0;
  }
  return push(Op::kRelu, a.id, -1, 0.0, std::move(out));
}

Var Tape::exp(Var a) {
  Matrix out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(out[i]);
  return push(Op::kExp, a.id, -1, 0.0, std::move(out));
}

Var Tape::log(Var a) {
  Matrix out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(out[i]);
  return push(Op::kLog, a.id, -1, 0.0, std::move(out));
}

Var Tape::tanh(Var a) {
  Matrix out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
  return push(Op::kTanh, a.id, -1, 0.0, std::move(out));
}

Var Tape::sigmoid(Var a) {
  Matrix out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = stable_sigmoid(out[i]);
  return push(Op::kSigmoid, a.id, -1, 0.0, std::move(out));
}

Var Tape::softplus(Var a) {
  Matrix out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = stable_softplus(out[i]);
  return push(Op::kSoftplus, a.id, -1, 0.0, std::move(out));
}

Var Tape::sqrt(Var a) {
  Matrix out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(out[i]);
  return push(Op::kSqrt, a.id, -1, 0.0, std::move(out));
}

Var Tape::sum(Var a) {
  const Matrix& va = value(a);
  double total = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) total += va[i];
  return push(Op::kSum, a.id, -1, 0.0, Matrix(1, 1, {total}));
}

Var Tape::sum_rows(Var a) {
  const Matrix& va = value(a);
  Matrix out(va.rows(), 1, 0.0);
  for (int i = 0; i < va.rows(); ++i) {
    double total = 0.0;
    for (int j = 0; j < va.cols(); ++j) total += va(i, j);
    out(i, 0) = total;
  }
  return push(Op::kSumRows, a.id, -1, 0.0, std::move(out));
}

Var Tape::add_rowvec(Var a, Var v) {
  const Matrix& va = value(a);
  const Matrix& vv = value(v);
  if (vv.rows() != 1 || vv.cols() != va.cols()) {
    throw std::invalid_argument("Tape::add_rowvec: vector must be 1xK");
  }
  Matrix out = va;
  for (int i = 0; i < out.rows(); ++i) {
    for (int j = 0; j < out.cols(); ++j) out(i, j) += vv(0, j);
  }
  return push(Op::kAddRowVec, a.id, v.id, 0.0, std::move(out));
}

Var Tape::add_colvec(Var a, Var v) {
  const Matrix& va = value(a);
  const Matrix& vv = value(v);
  if (vv.cols() != 1 || vv.rows() != va.rows()) {
    throw std::invalid_argument("Tape::add_colvec: vector must be Nx1");
  }
  Matrix out = va;
  for (int i = 0; i < out.rows(); ++i) {
    for (int j = 0; j < out.cols(); ++j) out(i, j) += vv(i, 0);
  }
  return push(Op::kAddColVec, a.id, v.id, 0.0, std::move(out));
}

Var Tape::mul_colvec(Var a, Var v) {
  const Matrix& va = value(a);
  const Matrix& vv = value(v);
  if (vv.cols() != 1 || vv.rows() != va.rows()) {
    throw std::invalid_argument("Tape::mul_colvec: vector must be Nx1");
  }
  Matrix out = va;
  for (int i = 0; i < out.rows(); ++i) {
    for (int j = 0; j < out.cols(); ++j) out(i, j) *= vv(i, 0);
  }
  return push(Op::kMulColVec, a.id, v.id, 0.0, std::move(out));
}

Var Tape::concat_rows(Var a, Var b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  if (va.cols() != vb.cols()) {
    throw std::invalid_argument("Tape::concat_rows: column counts differ");
  }
  Matrix out(va.rows() + vb.rows(), va.cols());
  for (int i = 0; i < va.rows(); ++i) {
    for (int j = 0; j < va.cols(); ++j) out(i, j) = va(i, j);
  }
  for (int i = 0; i < vb.rows(); ++i) {
    for (int j = 0; j < vb.cols(); ++j) out(va.rows() + i, j) = vb(i, j);
  }
  return push(Op::kConcatRows, a.id, b.id, 0.0, std::move(out));
}

Var Tape::stop_grad(Var a) {
  return push(Op::kStopGrad, a.id, -1, 0.0, value(a));
}

std::vector<Matrix> Tape::backward(Var root, std::span<const Var> wrt) const {
  const Node& root_node = node(root);
  if (root_node.value.rows() != 1 || root_node.value.cols() != 1) {
    throw std::invalid_argument("Tape::backward: root is not scalar");
  }

  // Adjoints are allocated lazily; an empty matrix means "no gradient has
  // reached this node", which lets the reverse sweep skip dead branches.
  std::vector<Matrix> adj(nodes_.size());
  adj[static_cast<std::size_t>(root.id)] = Matrix(1, 1, {1.0});

  auto accum = [&](int target, auto&& write) {
    Matrix& g = adj[static_cast<std::size_t>(target)];
    if (g.empty()) {
      const Matrix& v = nodes_[static_cast<std::size_t>(target)].value;
      g = Matrix(v.rows(), v.cols(), 0.0);
    }
    write(g);
  };

  for (int i = root.id; i >= 0; --i) {
    const Matrix& g = adj[static_cast<std::size_t>(i)];
    if (g.empty()) continue;
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    const Matrix& va = n.a >= 0 ? nodes_[static_cast<std::size_t>(n.a)].value
                                : n.value;
    switch (n.op) {
      case Op::kConstant:
      case Op::kLeaf:
      case Op::kStopGrad:
        break;
      case Op::kAdd:
        accum(n.a, [&](Matrix& d) {
          for (std::size_t k = 0; k < g.size(); ++k) d[k] += g[k];
        });
        accum(n.b, [&](Matrix& d) {
          for (std::size_t k = 0; k < g.size(); ++k) d[k] += g[k];
        });
        break;
      case Op::kSub:
        accum(n.a, [&](Matrix& d) {
          for (std::size_t k = 0; k < g.size(); ++k) d[k] += g[k];
        });
        accum(n.b, [&](Matrix& d) {
          for (std::size_t k = 0; k < g.size(); ++k) d[k] -= g[k];
        });
        break;
      case Op::kMul: {
        const Matrix& vb = nodes_[static_cast<std::size_t>(n.b)].value;
        accum(n.a, [&](Matrix& d) {
          for (std::size_t k = 0; k < g.size(); ++k) d[k] += g[k] * vb[k];
        });
        accum(n.b, [&](Matrix& d) {
          for (std::size_t k = 0; k < g.size(); ++k) d[k] += g[k] * va[k];
        });
        break;
      }
      case Op::kDiv: {
        const Matrix& vb = nodes_[static_cast<std::size_t>(n.b)].value;
        accum(n.a, [&](Matrix& d) {
          for (std::size_t k = 0; k < g.size(); ++k) d[k] += g[k] / vb[k];
        });
        accum(n.b, [&](Matrix& d) {
          for (std::size_t k = 0; k < g.size(); ++k) {
            d[k] -= g[k] * n.value[k] / vb[k];
          }
        });
        break;
      }
      case Op::kScale:
        accum(n.a, [&](Matrix& d) {
          for (std::size_t k = 0; k < g.size(); ++k) d[k] += n.c * g[k];
        });
        break;
      case Op::kMatMul: {
        const Matrix& vb = nodes_[static_cast<std::size_t>(n.b)].value;
        accum(n.a, [&](Matrix& d) {
          // dA += g * B^T
          for (int r = 0; r < d.rows(); ++r) {
            for (int p = 0; p < g.cols(); ++p) {
              const double grp = g(r, p);
              for (int c = 0; c < d.cols(); ++c) {
                d(r, c) += grp * vb(c, p);
              }
            }
          }
        });
        accum(n.b, [&](Matrix& d) {
          // dB += A^T * g
          for (int r = 0; r < va.rows(); ++r) {
            for (int c = 0; c < d.rows(); ++c) {
              const double arc = va(r, c);
              for (int p = 0; p < d.cols(); ++p) {
                d(c, p) += arc * g(r, p);
              }
            }
          }
        });
        break;
      }
      case Op::kTranspose:
        accum(n.a, [&](Matrix& d) {
          for (int r = 0; r < g.rows(); ++r) {
            for (int c = 0; c < g.cols(); ++c) d(c, r) += g(r, c);
          }
        });
        break;
      case Op::kRelu:
        accum(n.a, [&](Matrix& d) {
          for (std::size_t k = 0; k < g.size(); ++k) {
            if (va[k] > 0.0) d[k] += g[k];
          }
        });
        break;
      case Op::kExp:
        accum(n.a, [&](Matrix& d) {
          for (std::size_t k = 0; k < g.size(); ++k) d[k] += g[k] * n.value[k];
        });
        break;
      case Op::kLog:
        accum(n.a, [&](Matrix& d) {
          for (std::size_t k = 0; k < g.size(); ++k) d[k] += g[k] / va[k];
        });
        break;
      case Op::kTanh:
        accum(n.a, [&](Matrix& d) {
          for (std::size_t k = 0; k < g.size(); ++k) {
            d[k] += g[k] * (1.0 - n.value[k] * n.value[k]);
          }
        });
        break;
      case Op::kSigmoid:
        accum(n.a, [&](Matrix& d) {
          for (std::size_t k = 0; k < g.size(); ++k) {
            d[k] += g[k] * n.value[k] * (1.0 - n.value[k]);
          }
        });
        break;
      case Op::kSoftplus:
        accum(n.a, [&](Matrix& d) {
          for (std::size_t k = 0; k < g.size(); ++k) {
            d[k] += g[k] * stable_sigmoid(va[k]);
          }
        });
        break;
      case Op::kSqrt:
        accum(n.a, [&](Matrix& d) {
          for (std::size_t k = 0; k < g.size(); ++k) {
            if (va[k] > 0.0) d[k] += g[k] * 0.5 / n.value[k];
          }
        });
        break;
      case Op::kSum:
        accum(n.a, [&](Matrix& d) {
          const double g0 = g(0, 0);
          for (std::size_t k = 0; k < d.size(); ++k) d[k] += g0;
        });
        break;
      case Op::kSumRows:
        accum(n.a, [&](Matrix& d) {
          for (int r = 0; r < d.rows(); ++r) {
            const double gr = g(r, 0);
            for (int c = 0; c < d.cols(); ++c) d(r, c) += gr;
          }
        });
        break;
      case Op::kAddRowVec:
        accum(n.a, [&](Matrix& d) {
          for (std::size_t k = 0; k < g.size(); ++k) d[k] += g[k];
        });
        accum(n.b, [&](Matrix& d) {
          for (int r = 0; r < g.rows(); ++r) {
            for (int c = 0; c < g.cols(); ++c) d(0, c) += g(r, c);
          }
        });
        break;
      case Op::kAddColVec:
        accum(n.a, [&](Matrix& d) {
          for (std::size_t k = 0; k < g.size(); ++k) d[k] += g[k];
        });
        accum(n.b, [&](Matrix& d) {
          for (int r = 0; r < g.rows(); ++r) {
            for (int c = 0; c < g.cols(); ++c) d(r, 0) += g(r, c);
          }
        });
        break;
      case Op::kMulColVec: {
        const Matrix& vv = nodes_[static_cast<std::size_t>(n.b)].value;
        accum(n.a, [&](Matrix& d) {
          for (int r = 0; r < g.rows(); ++r) {
            for (int c = 0; c < g.cols(); ++c) d(r, c) += g(r, c) * vv(r, 0);
          }
        });
        accum(n.b, [&](Matrix& d) {
          for (int r = 0; r < g.rows(); ++r) {
            double total = 0.0;
            for (int c = 0; c < g.cols(); ++c) total += g(r, c) * va(r, c);
            d(r, 0) += total;
          }
        });
        break;
      }
      case Op::kConcatRows: {
        const int rows_a = va.rows();
        accum(n.a, [&](Matrix& d) {
          for (int r = 0; r < rows_a; ++r) {
            for (int c = 0; c < g.cols(); ++c) d(r, c) += g(r, c);
          }
        });
        accum(n.b, [&](Matrix& d) {
          for (int r = 0; r < d.rows(); ++r) {
            for (int c = 0; c < g.cols(); ++c) d(r, c) += g(rows_a + r, c);
          }
        });
        break;
      }
    }
  }

  std::vector<Matrix> out;
  out.reserve(wrt.size());
  for (Var w : wrt) {
    const Node& wn = node(w);
    Matrix& g = adj[static_cast<std::size_t>(w.id)];
    if (g.empty()) g = Matrix(wn.value.rows(), wn.value.cols(), 0.0);
    out.push_back(std::move(g));
  }
  return out;
}

double eval_scalar(const TapeFn& f, const std::vector<Matrix>& inputs) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const Matrix& m : inputs) vars.push_back(tape.constant(m));
  const Var root = f(tape, vars);
  const Matrix& v = tape.value(root);
  if (v.rows() != 1 || v.cols() != 1) {
    throw std::invalid_argument("eval_scalar: f is not scalar-valued");
  }
  return v(0, 0);
}

std::vector<Matrix> grad(const TapeFn& f, const std::vector<Matrix>& inputs) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const Matrix& m : inputs) vars.push_back(tape.leaf(m));
  const Var root = f(tape, vars);
  return tape.backward(root, vars);
}

std::vector<Matrix> finite_diff(const TapeFn& f, std::vector<Matrix> inputs,
                                double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff: h must be > 0");
  std::vector<Matrix> out;
  out.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    Matrix g(inputs[i].rows(), inputs[i].cols(), 0.0);
    for (std::size_t k = 0; k < inputs[i].size(); ++k) {
      const double saved = inputs[i][k];
      inputs[i][k] = saved + h;
      const double fp = eval_scalar(f, inputs);
      inputs[i][k] = saved - h;
      const double fm = eval_scalar(f, inputs);
      inputs[i][k] = saved;
      g[k] = (fp - fm) / (2.0 * h);
    }
    out.push_back(std::move(g));
  }
  return out;
}

Var logsumexp_rows(Tape& tape, Var x) {
  const Matrix& v = tape.value(x);
  Matrix row_max(v.rows(), 1, 0.0);
  for (int i = 0; i < v.rows(); ++i) {
    double m = v(i, 0);
    for (int j = 1; j < v.cols(); ++j) m = std::max(m, v(i, j));
    row_max(i, 0) = m;
  }
  const Var max_const = tape.constant(row_max);
  const Var shifted = tape.add_colvec(x, tape.scale(max_const, -1.0));
  const Var sums = tape.sum_rows(tape.exp(shifted));
  return tape.add(tape.log(sums), max_const);
}

Var row_l2_norms(Tape& tape, Var x) {
  return tape.sqrt(tape.sum_rows(tape.mul(x, x)));
}

Var normalize_rows(Tape& tape, Var x) {
  const Var norms = row_l2_norms(tape, x);
  const Matrix& nv = tape.value(norms);
  for (int i = 0; i < nv.rows(); ++i) {
    if (nv(i, 0) == 0.0) {
      throw std::runtime_error("normalize_rows: zero-norm row " +
                               std::to_string(i));
    }
  }
  const Var inv = tape.div(tape.constant(Matrix(nv.rows(), 1, 1.0)), norms);
  return tape.mul_colvec(x, inv);
}

}  // namespace oodgauge
