#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "oodgauge/matrix.hpp"

namespace oodgauge {

class Tape;

// Handle to a node on a tape. Only valid for the tape that produced it.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode autodiff over a fixed primitive set, matrix-granular.
// Forward values are computed eagerly at construction, so intermediate
// values can be inspected (e.g. to build stabilizing constants) while the
// graph is being assembled. Nodes are stored in topological order by
// construction; backward() walks them once, in reverse.
//
// Convention at kinks: relu'(0) = 0 and d(sqrt)/dx at 0 is taken as 0.
class Tape {
 public:
  // Leaves. Constants are opaque to differentiation; leaves accumulate
  // gradients.
  Var constant(Matrix value);
  Var leaf(Matrix value);

  // Elementwise binary ops on same-shape operands.
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);

  Var scale(Var a, double c);

  Var matmul(Var a, Var b);
  Var transpose(Var a);

  // Elementwise unary ops.
  Var relu(Var a);
  Var exp(Var a);
  Var log(Var a);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var softplus(Var a);
  Var sqrt(Var a);

  // Reductions.
  Var sum(Var a);       // -> 1x1
  Var sum_rows(Var a);  // NxK -> Nx1

  // Broadcast ops.
  Var add_rowvec(Var a, Var v);  // NxK + 1xK
  Var add_colvec(Var a, Var v);  // NxK + Nx1
  Var mul_colvec(Var a, Var v);  // NxK * Nx1

  Var concat_rows(Var a, Var b);

  // Identity forward, zero backward.
  Var stop_grad(Var a);

  const Matrix& value(Var v) const;
  int node_count() const { return static_cast<int>(nodes_.size()); }

  // Gradient of the scalar (1x1) node `root` with respect to each of `wrt`,
  // in order. Throws if root is not scalar.
  std::vector<Matrix> backward(Var root, std::span<const Var> wrt) const;

 private:
  enum class Op : std::uint8_t {
    kConstant,
    kLeaf,
    kAdd,
    kSub,
    kMul,
    kDiv,
    kScale,
    kMatMul,
    kTranspose,
    kRelu,
    kExp,
    kLog,
    kTanh,
    kSigmoid,
    kSoftplus,
    kSqrt,
    kSum,
    kSumRows,
    kAddRowVec,
    kAddColVec,
    kMulColVec,
    kConcatRows,
    kStopGrad,
  };

  struct Node {
    Op op = Op::kConstant;
    int a = -1;
    int b = -1;
    double c = 0.0;
    Matrix value;
  };

  Var push(Op op, int a, int b, double c, Matrix value);
  const Node& node(Var v) const;

  std::vector<Node> nodes_;
};

// A scalar-valued function assembled from tape primitives over the given
// input leaves. Must return a 1x1 node.
using TapeFn = std::function<Var(Tape&, const std::vector<Var>&)>;

// Value of f at `inputs`.
double eval_scalar(const TapeFn& f, const std::vector<Matrix>& inputs);

// df/dinput for each input, evaluated at `inputs`.
std::vector<Matrix> grad(const TapeFn& f, const std::vector<Matrix>& inputs);

// Central finite differences, (f(x+h e_i) - f(x-h e_i)) / 2h per coordinate.
// Uses forward evaluation only; the independent oracle for grad().
std::vector<Matrix> finite_diff(const TapeFn& f, std::vector<Matrix> inputs,
                                double h);

// --- composed helpers (not primitives) ---

// Row-wise log(sum_j exp(x_ij)) as Nx1, stabilized by subtracting the
// per-row max (read from the eager values, entering as a constant).
Var logsumexp_rows(Tape& tape, Var x);

// Row-wise L2 norms as Nx1: sqrt(sum_rows(x*x)).
Var row_l2_norms(Tape& tape, Var x);

// Rows scaled to unit L2 norm. Throws if any row norm is zero.
Var normalize_rows(Tape& tape, Var x);

}  // namespace oodgauge
