#include "neuralshell/tape.hpp"

#include <algorithm>
#include <cmath>

namespace neuralshell {

std::int32_t Tape::push(Op op, double v, std::int32_t a, std::int32_t b, double aux) {
  const auto i = static_cast<std::int32_t>(value_.size());
  op_.push_back(op);
  value_.push_back(v);
  aux_.push_back(aux);
  a_.push_back(a);
  b_.push_back(b);
  return i;
}

void Tape::reset() {
  op_.clear();
  value_.clear();
  adjoint_.clear();
  aux_.clear();
  a_.clear();
  b_.clear();
  ipool_.clear();
  dpool_.clear();
  param_base_ = 0;
  param_count_ = 0;
  zero_ = constant(0.0);
  one_ = constant(1.0);
}

std::int32_t Tape::add_parameters(std::span<const double> values) {
  const auto base = static_cast<std::int32_t>(value_.size());
  if (param_count_ == 0) {
    param_base_ = base;
  } else if (param_base_ + param_count_ != base) {
    throw TapeError("parameter leaves must form one contiguous block", base);
  }
  for (double v : values) push(Op::Parameter, v);
  param_count_ += static_cast<std::int32_t>(values.size());
  return base;
}

Scalar Tape::constant(double v) { return {push(Op::Constant, v), this}; }

Scalar Tape::add(Scalar a, Scalar b) { return {push(Op::Add, value_[a.i] + value_[b.i], a.i, b.i), this}; }
Scalar Tape::sub(Scalar a, Scalar b) { return {push(Op::Sub, value_[a.i] - value_[b.i], a.i, b.i), this}; }
Scalar Tape::mul(Scalar a, Scalar b) { return {push(Op::Mul, value_[a.i] * value_[b.i], a.i, b.i), this}; }

Scalar Tape::div(Scalar a, Scalar b) {
  const double d = value_[b.i];
  if (d == 0.0) throw TapeError("division by zero", b.i);
  return {push(Op::Div, value_[a.i] / d, a.i, b.i, 1.0 / d), this};
}

Scalar Tape::neg(Scalar a) { return {push(Op::Neg, -value_[a.i], a.i), this}; }

Scalar Tape::sin(Scalar a) {
  const double x = value_[a.i];
  return {push(Op::Sin, std::sin(x), a.i, -1, std::cos(x)), this};
}

Scalar Tape::cos(Scalar a) {
  const double x = value_[a.i];
  return {push(Op::Cos, std::cos(x), a.i, -1, -std::sin(x)), this};
}

Scalar Tape::exp(Scalar a) {
  const double e = std::exp(value_[a.i]);
  return {push(Op::Exp, e, a.i, -1, e), this};
}

Scalar Tape::tanh(Scalar a) {
  const double t = std::tanh(value_[a.i]);
  return {push(Op::Tanh, t, a.i, -1, 1.0 - t * t), this};
}

Scalar Tape::dot_range(std::int32_t a0, std::int32_t b0, std::int32_t n) {
  const double* va = value_.data() + a0;
  const double* vb = value_.data() + b0;
  double s = 0.0;
  for (std::int32_t k = 0; k < n; ++k) s += va[k] * vb[k];
  const auto off = static_cast<std::int32_t>(ipool_.size());
  ipool_.push_back(a0);
  ipool_.push_back(b0);
  ipool_.push_back(n);
  return {push(Op::Dot, s, off), this};
}

Scalar Tape::dot_pairs(std::span<const std::pair<std::int32_t, std::int32_t>> pairs) {
  const auto off = static_cast<std::int32_t>(ipool_.size());
  ipool_.push_back(static_cast<std::int32_t>(pairs.size()));
  double s = 0.0;
  for (const auto& [pa, pb] : pairs) {
    s += value_[pa] * value_[pb];
    ipool_.push_back(pa);
    ipool_.push_back(pb);
  }
  return {push(Op::DotPairs, s, off), this};
}

Scalar Tape::lincomb(double c0, std::span<const double> coeff, std::span<const Scalar> idx) {
  const auto ioff = static_cast<std::int32_t>(ipool_.size());
  const auto doff = static_cast<std::int32_t>(dpool_.size());
  const auto n = static_cast<std::int32_t>(idx.size());
  ipool_.push_back(n);
  dpool_.push_back(c0);
  double s = c0;
  for (std::int32_t k = 0; k < n; ++k) {
    s += coeff[k] * value_[idx[k].i];
    ipool_.push_back(idx[k].i);
    dpool_.push_back(coeff[k]);
  }
  return {push(Op::LinComb, s, ioff, doff), this};
}

void Tape::backward(Scalar root) {
  adjoint_.assign(value_.size(), 0.0);
  adjoint_[root.i] = 1.0;
  for (auto i = static_cast<std::int32_t>(value_.size()) - 1; i >= 0; --i) {
    const double w = adjoint_[i];
    if (w == 0.0) continue;
    switch (op_[i]) {
      case Op::Constant:
      case Op::Parameter:
        break;
      case Op::Add:
        adjoint_[a_[i]] += w;
        adjoint_[b_[i]] += w;
        break;
      case Op::Sub:
        adjoint_[a_[i]] += w;
        adjoint_[b_[i]] -= w;
        break;
      case Op::Mul:
        adjoint_[a_[i]] += w * value_[b_[i]];
        adjoint_[b_[i]] += w * value_[a_[i]];
        break;
      case Op::Div:
        // value = a/b: d/da = 1/b, d/db = -value/b
        adjoint_[a_[i]] += w * aux_[i];
        adjoint_[b_[i]] -= w * value_[i] * aux_[i];
        break;
      case Op::Neg:
        adjoint_[a_[i]] -= w;
        break;
      case Op::Sin:
      case Op::Cos:
      case Op::Exp:
      case Op::Tanh:
        adjoint_[a_[i]] += w * aux_[i];
        break;
      case Op::Dot: {
        const std::int32_t off = a_[i];
        const std::int32_t a0 = ipool_[off], b0 = ipool_[off + 1], n = ipool_[off + 2];
        const double* va = value_.data() + a0;
        const double* vb = value_.data() + b0;
        double* ga = adjoint_.data() + a0;
        double* gb = adjoint_.data() + b0;
        for (std::int32_t k = 0; k < n; ++k) {
          ga[k] += w * vb[k];
          gb[k] += w * va[k];
        }
        break;
      }
      case Op::DotPairs: {
        const std::int32_t off = a_[i];
        const std::int32_t n = ipool_[off];
        for (std::int32_t k = 0; k < n; ++k) {
          const std::int32_t pa = ipool_[off + 1 + 2 * k], pb = ipool_[off + 2 + 2 * k];
          adjoint_[pa] += w * value_[pb];
          adjoint_[pb] += w * value_[pa];
        }
        break;
      }
      case Op::LinComb: {
        const std::int32_t ioff = a_[i], doff = b_[i];
        const std::int32_t n = ipool_[ioff];
        for (std::int32_t k = 0; k < n; ++k) adjoint_[ipool_[ioff + 1 + k]] += w * dpool_[doff + 1 + k];
        break;
      }
    }
  }
}

void Tape::gradient(std::span<double> grad) const {
  const auto n = static_cast<std::size_t>(param_count_);
  for (std::size_t k = 0; k < n && k < grad.size(); ++k) grad[k] = adjoint_[param_base_ + k];
}

}  // namespace neuralshell
