#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "adasparse/errors.hpp"

namespace adasparse {

using Vec = std::vector<double>;

/// Dense row-major matrix of 64-bit floats. All training math runs in f64 so
/// finite-difference gradient checks stay decisive.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
  std::size_t size() const { return data.size(); }
  bool same_shape(const Matrix& o) const {
    return rows == o.rows && cols == o.cols;
  }
};

enum class OpKind { kNone, kMatmul, kSigmoid, kTanh, kHadamard };

/// Caches recorded by a forward op and consumed by its backward rule.
/// A node is consumed exactly once; reusing it without a fresh forward
/// throws StateError.
struct TapeNode {
  OpKind kind = OpKind::kNone;
  Vec in;    // matmul: x; hadamard: a
  Vec in2;   // hadamard: b
  Vec out;   // sigmoid/tanh: activation value (backward works off the output)
  bool spent = false;
};

// out = A.x. Throws ShapeError when A.cols != len(x).
Vec matmul(const Matrix& a, const Vec& x);
Vec matmul(const Matrix& a, const Vec& x, TapeNode& node);
struct MatmulGrads {
  Matrix d_mat;
  Vec d_vec;
};
MatmulGrads matmul_backward(const Matrix& a, TapeNode& node, const Vec& d_out);

double sigmoid_scalar(double x);

// Elementwise 1/(1+e^-x); saturates cleanly, never NaN on finite input.
Vec sigmoid(const Vec& x);
Vec sigmoid(const Vec& x, TapeNode& node);
Vec sigmoid_backward(TapeNode& node, const Vec& d_out);

// Elementwise tanh; backward uses 1 - out^2.
Vec tanh_act(const Vec& x);
Vec tanh_act(const Vec& x, TapeNode& node);
Vec tanh_backward(TapeNode& node, const Vec& d_out);

// Elementwise product; throws ShapeError on length mismatch.
Vec hadamard(const Vec& a, const Vec& b);
Vec hadamard(const Vec& a, const Vec& b, TapeNode& node);
struct HadamardGrads {
  Vec d_a;
  Vec d_b;
};
HadamardGrads hadamard_backward(TapeNode& node, const Vec& d_out);

/// One live parameter buffer paired with its analytic gradient, taken at the
/// unperturbed point. grad_check perturbs value in place and restores it.
struct ParamCheck {
  std::span<double> value;
  std::span<const double> grad;
};

/// Central finite differences vs. analytic gradients; returns the worst
/// relative error over all entries. Relative error is measured against
/// max(1, |fd|, |analytic|) so near-zero entries compare on an absolute
/// scale. Throws NumericError if the loss goes non-finite while probing.
double grad_check(const std::function<double()>& loss,
                  std::span<const ParamCheck> params, double eps);
double grad_check(const std::function<double()>& loss,
                  const std::vector<std::pair<Matrix*, const Matrix*>>& params,
                  double eps);

}  // namespace adasparse
