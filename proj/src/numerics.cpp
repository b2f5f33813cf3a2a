#include "adasparse/numerics.hpp"

#include <cmath>
#include <cstdio>

namespace adasparse {

namespace {

void check_finite(const Vec& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericError(std::string(what) + ": non-finite value");
  }
}

void require_fresh(TapeNode& node, OpKind kind, const char* what) {
  if (node.kind != kind) throw StateError(std::string(what) + ": tape node from a different op");
  if (node.spent) throw StateError(std::string(what) + ": tape node already consumed");
  node.spent = true;
}

}  // namespace

Vec matmul(const Matrix& a, const Vec& x) {
  if (a.cols != x.size()) {
    throw ShapeError("matmul: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                     " vs vector of length " + std::to_string(x.size()));
  }
  Vec out(a.rows, 0.0);
  const double* w = a.data.data();
  for (std::size_t r = 0; r < a.rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < a.cols; ++c) acc += w[c] * x[c];
    out[r] = acc;
    w += a.cols;
  }
  check_finite(out, "matmul");
  return out;
}

Vec matmul(const Matrix& a, const Vec& x, TapeNode& node) {
  Vec out = matmul(a, x);
  node = TapeNode{};
  node.kind = OpKind::kMatmul;
  node.in = x;
  return out;
}

MatmulGrads matmul_backward(const Matrix& a, TapeNode& node, const Vec& d_out) {
  require_fresh(node, OpKind::kMatmul, "matmul_backward");
  if (d_out.size() != a.rows || node.in.size() != a.cols) {
    throw ShapeError("matmul_backward: gradient shape mismatch");
  }
  MatmulGrads g;
  g.d_mat = Matrix(a.rows, a.cols);
  g.d_vec.assign(a.cols, 0.0);
  for (std::size_t r = 0; r < a.rows; ++r) {
    const double gr = d_out[r];
    double* dm = g.d_mat.data.data() + r * a.cols;
    const double* w = a.data.data() + r * a.cols;
    for (std::size_t c = 0; c < a.cols; ++c) {
      dm[c] = gr * node.in[c];
      g.d_vec[c] += gr * w[c];
    }
  }
  return g;
}

double sigmoid_scalar(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Vec sigmoid(const Vec& x) {
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = sigmoid_scalar(x[i]);
  return out;
}

Vec sigmoid(const Vec& x, TapeNode& node) {
  Vec out = sigmoid(x);
  node = TapeNode{};
  node.kind = OpKind::kSigmoid;
  node.out = out;
  return out;
}

Vec sigmoid_backward(TapeNode& node, const Vec& d_out) {
  require_fresh(node, OpKind::kSigmoid, "sigmoid_backward");
  if (d_out.size() != node.out.size()) throw ShapeError("sigmoid_backward: length mismatch");
  Vec g(d_out.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = d_out[i] * node.out[i] * (1.0 - node.out[i]);
  }
  return g;
}

Vec tanh_act(const Vec& x) {
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::tanh(x[i]);
  return out;
}

Vec tanh_act(const Vec& x, TapeNode& node) {
  Vec out = tanh_act(x);
  node = TapeNode{};
  node.kind = OpKind::kTanh;
  node.out = out;
  return out;
}

Vec tanh_backward(TapeNode& node, const Vec& d_out) {
  require_fresh(node, OpKind::kTanh, "tanh_backward");
  if (d_out.size() != node.out.size()) throw ShapeError("tanh_backward: length mismatch");
  Vec g(d_out.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = d_out[i] * (1.0 - node.out[i] * node.out[i]);
  }
  return g;
}

Vec hadamard(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    throw ShapeError("hadamard: length " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

Vec hadamard(const Vec& a, const Vec& b, TapeNode& node) {
  Vec out = hadamard(a, b);
  node = TapeNode{};
  node.kind = OpKind::kHadamard;
  node.in = a;
  node.in2 = b;
  return out;
}

HadamardGrads hadamard_backward(TapeNode& node, const Vec& d_out) {
  require_fresh(node, OpKind::kHadamard, "hadamard_backward");
  if (d_out.size() != node.in.size()) throw ShapeError("hadamard_backward: length mismatch");
  HadamardGrads g;
  g.d_a = hadamard(d_out, node.in2);
  g.d_b = hadamard(d_out, node.in);
  return g;
}

double grad_check(const std::function<double()>& loss,
                  std::span<const ParamCheck> params, double eps) {
  if (eps <= 0.0) throw Error("grad_check: eps must be positive");
  double worst = 0.0;
  for (const ParamCheck& p : params) {
    if (p.value.size() != p.grad.size()) {
      throw ShapeError("grad_check: value/grad length mismatch");
    }
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + eps;
      const double up = loss();
      p.value[i] = saved - eps;
      const double dn = loss();
      p.value[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(dn)) {
        throw NumericError("grad_check: non-finite loss while probing");
      }
      const double fd = (up - dn) / (2.0 * eps);
      const double an = p.grad[i];
      const double denom = std::max({1.0, std::fabs(fd), std::fabs(an)});
      worst = std::max(worst, std::fabs(fd - an) / denom);
    }
  }
  return worst;
}

double grad_check(const std::function<double()>& loss,
                  const std::vector<std::pair<Matrix*, const Matrix*>>& params,
                  double eps) {
  std::vector<ParamCheck> views;
  views.reserve(params.size());
  for (const auto& [value, grad] : params) {
    if (!value->same_shape(*grad)) throw ShapeError("grad_check: shape mismatch");
    views.push_back({std::span<double>(value->data),
                     std::span<const double>(grad->data)});
  }
  return grad_check(loss, views, eps);
}

}  // namespace adasparse
