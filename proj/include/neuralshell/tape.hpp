#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace neuralshell {

// Reverse-mode automatic differentiation on a flat operation tape.
//
// The tape is rebuilt every optimizer iteration: parameter leaves are
// registered first, the loss expression is appended (values are computed
// eagerly as nodes are created), and a single backward() sweep fills the
// adjoint of every node with d(root)/d(node).  The gradient is then read
// off the parameter leaves.
//
// Beyond the scalar primitives there are three fused node kinds, added so
// that wide network layers do not pay per-scalar dispatch:
//   Dot      - inner product of two unit-stride node ranges;
//   DotPairs - inner product over an explicit list of node index pairs;
//   LinComb  - affine combination of nodes with *constant* coefficients
//              (coefficients are plain numbers, not nodes, so no adjoint
//              flows into them).
// Each is the exact fusion of the mul/add primitives it replaces.

enum class Op : std::uint8_t {
  Constant,
  Parameter,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Sin,
  Cos,
  Exp,
  Tanh,
  Dot,
  DotPairs,
  LinComb,
};

// Raised for invalid tape operations; carries the offending node index.
class TapeError : public std::runtime_error {
 public:
  TapeError(const std::string& what, std::int32_t node)
      : std::runtime_error(what + " (node " + std::to_string(node) + ")"), node_(node) {}
  std::int32_t node() const { return node_; }

 private:
  std::int32_t node_;
};

class Tape;

// Lightweight handle to a tape node.  Arithmetic on handles appends nodes.
struct Scalar {
  std::int32_t i = -1;
  Tape* t = nullptr;

  bool valid() const { return i >= 0; }
};

class Tape {
 public:
  Tape() { reset(); }

  // --- construction -------------------------------------------------------

  // Registers n parameter leaves initialized from `values`; returns the index
  // of the first leaf.  Leaves are ordinary nodes whose adjoints form the
  // gradient.
  std::int32_t add_parameters(std::span<const double> values);

  Scalar constant(double v);
  Scalar zero() { return zero_; }
  Scalar one() { return one_; }
  Scalar node(std::int32_t i) { return {i, this}; }

  Scalar add(Scalar a, Scalar b);
  Scalar sub(Scalar a, Scalar b);
  Scalar mul(Scalar a, Scalar b);
  Scalar div(Scalar a, Scalar b);  // throws TapeError on zero denominator
  Scalar neg(Scalar a);
  Scalar sin(Scalar a);
  Scalar cos(Scalar a);
  Scalar exp(Scalar a);
  Scalar tanh(Scalar a);

  // value = sum_k value[a0+k] * value[b0+k], k in [0, n)
  Scalar dot_range(std::int32_t a0, std::int32_t b0, std::int32_t n);
  // value = sum_k value[pairs[k].first] * value[pairs[k].second]
  Scalar dot_pairs(std::span<const std::pair<std::int32_t, std::int32_t>> pairs);
  // value = c0 + sum_k coeff[k] * value[idx[k]]
  Scalar lincomb(double c0, std::span<const double> coeff, std::span<const Scalar> idx);

  // --- execution -----------------------------------------------------------

  // Fresh adjoint sweep: zeroes the adjoint buffer, seeds d(root)/d(root)=1
  // and accumulates adjoints in reverse node order.
  void backward(Scalar root);

  double value(Scalar s) const { return value_[s.i]; }
  double value(std::int32_t i) const { return value_[i]; }
  double adjoint(Scalar s) const { return adjoint_[s.i]; }
  double adjoint(std::int32_t i) const { return adjoint_[i]; }

  // Copies the adjoints of the registered parameter leaves into `grad`.
  void gradient(std::span<double> grad) const;

  std::size_t size() const { return value_.size(); }
  std::int32_t parameter_base() const { return param_base_; }
  std::int32_t parameter_count() const { return param_count_; }

  // Clears all nodes but keeps allocated buffers for reuse.
  void reset();

 private:
  friend struct Scalar;

  std::int32_t push(Op op, double v, std::int32_t a = -1, std::int32_t b = -1, double aux = 0.0);

  std::vector<Op> op_;
  std::vector<double> value_;
  std::vector<double> adjoint_;
  std::vector<double> aux_;           // cached backward factor (sin/cos/exp/tanh/div)
  std::vector<std::int32_t> a_, b_;   // operand indices or pool offsets
  std::vector<std::int32_t> ipool_;   // index pool for DotPairs / LinComb
  std::vector<double> dpool_;         // coefficient pool for LinComb
  std::int32_t param_base_ = 0;
  std::int32_t param_count_ = 0;
  Scalar zero_{}, one_{};
};

// Operator sugar so expression-level code reads naturally.
inline Scalar operator+(Scalar a, Scalar b) { return a.t->add(a, b); }
inline Scalar operator-(Scalar a, Scalar b) { return a.t->sub(a, b); }
inline Scalar operator*(Scalar a, Scalar b) { return a.t->mul(a, b); }
inline Scalar operator/(Scalar a, Scalar b) { return a.t->div(a, b); }
inline Scalar operator-(Scalar a) { return a.t->neg(a); }
inline Scalar sin(Scalar a) { return a.t->sin(a); }
inline Scalar cos(Scalar a) { return a.t->cos(a); }
inline Scalar exp(Scalar a) { return a.t->exp(a); }
inline Scalar tanh(Scalar a) { return a.t->tanh(a); }

}  // namespace neuralshell
