#include "adasparse/pruner.hpp"

#include <cmath>

namespace adasparse {

std::string to_string(FactorKind kind) {
  switch (kind) {
    case FactorKind::kBinarization:
      return "binarization";
    case FactorKind::kScaling:
      return "scaling";
    case FactorKind::kFusion:
      return "fusion";
  }
  return "?";
}

void FactorMethod::validate() const {
  if (beta < 1.0) throw SpecError("factor method: beta must be >= 1");
  if (epsilon <= 0.0) throw SpecError("factor method: epsilon must be > 0");
  if (alpha <= 0.0) throw SpecError("factor method: alpha must be > 0");
}

void SparsityBoundary::validate() const {
  if (!(0.0 <= r_min && r_min < r_max && r_max <= 1.0)) {
    throw SpecError("sparsity boundary: need 0 <= r_min < r_max <= 1");
  }
}

PrunerState make_pruner(std::size_t e_d_len, std::span<const std::size_t> gate_widths,
                        Rng& rng) {
  PrunerState state;
  state.e_d_len = e_d_len;
  for (std::size_t width : gate_widths) {
    const std::size_t in = e_d_len + width;
    Matrix w(width, in);
    const double bound = std::sqrt(6.0 / static_cast<double>(in + width));
    for (auto& x : w.data) x = rng.uniform(-bound, bound);
    state.weights.push_back(std::move(w));
  }
  return state;
}

FactorVector compute_factors(const PrunerState& state, std::span<const double> e_d,
                             std::span<const double> h_l, std::size_t layer,
                             const FactorMethod& method) {
  method.validate();
  if (layer >= state.weights.size()) throw ShapeError("compute_factors: bad layer index");
  const Matrix& w = state.weights[layer];
  if (e_d.size() != state.e_d_len || e_d.size() + h_l.size() != w.cols) {
    throw ShapeError("compute_factors: input width mismatch at layer " +
                     std::to_string(layer));
  }

  FactorVector fv;
  fv.gate_input.resize(w.cols);
  std::copy(e_d.begin(), e_d.end(), fv.gate_input.begin());
  std::copy(h_l.begin(), h_l.end(),
            fv.gate_input.begin() + static_cast<std::ptrdiff_t>(e_d.size()));

  fv.v_in = matmul(w, fv.gate_input);
  fv.v_out.resize(fv.v_in.size());
  fv.pi.resize(fv.v_in.size());
  for (std::size_t i = 0; i < fv.v_in.size(); ++i) {
    switch (method.kind) {
      case FactorKind::kBinarization: {
        const double v = sigmoid_scalar(method.alpha * fv.v_in[i]);
        fv.v_out[i] = v;
        fv.pi[i] = v > method.epsilon ? 1.0 : 0.0;
        break;
      }
      case FactorKind::kScaling: {
        const double v = method.beta * sigmoid_scalar(fv.v_in[i]);
        fv.v_out[i] = v;
        fv.pi[i] = v > 0.0 ? v : 0.0;
        break;
      }
      case FactorKind::kFusion: {
        const double v = method.beta * sigmoid_scalar(method.alpha * fv.v_in[i]);
        fv.v_out[i] = v;
        fv.pi[i] = v > method.epsilon ? v : 0.0;
        break;
      }
    }
  }
  return fv;
}

FactorGrads factors_backward(const PrunerState& state, std::size_t layer,
                             FactorVector& fv, const FactorMethod& method,
                             std::span<const double> d_upstream) {
  if (layer >= state.weights.size()) throw ShapeError("factors_backward: bad layer index");
  const Matrix& w = state.weights[layer];
  if (fv.spent) throw StateError("factors_backward: factor cache already consumed");
  fv.spent = true;
  if (d_upstream.size() != fv.v_out.size() || fv.gate_input.size() != w.cols) {
    throw ShapeError("factors_backward: gradient shape mismatch");
  }

  // d v_out / d v_in per formulation, with s the underlying sigmoid value.
  Vec d_in(fv.v_in.size());
  for (std::size_t i = 0; i < d_in.size(); ++i) {
    const double v = fv.v_out[i];
    double deriv = 0.0;
    switch (method.kind) {
      case FactorKind::kBinarization:
        deriv = method.alpha * v * (1.0 - v);
        break;
      case FactorKind::kScaling:
        deriv = v * (1.0 - v / method.beta);
        break;
      case FactorKind::kFusion:
        deriv = method.alpha * v * (1.0 - v / method.beta);
        break;
    }
    d_in[i] = d_upstream[i] * deriv;
  }

  FactorGrads grads;
  grads.d_weight = Matrix(w.rows, w.cols);
  Vec d_input(w.cols, 0.0);
  for (std::size_t r = 0; r < w.rows; ++r) {
    const double g = d_in[r];
    double* dwr = grads.d_weight.data.data() + r * w.cols;
    const double* wr = w.data.data() + r * w.cols;
    for (std::size_t c = 0; c < w.cols; ++c) {
      dwr[c] = g * fv.gate_input[c];
      d_input[c] += g * wr[c];
    }
  }
  grads.d_e_d.assign(d_input.begin(),
                     d_input.begin() + static_cast<std::ptrdiff_t>(state.e_d_len));
  grads.d_h.assign(d_input.begin() + static_cast<std::ptrdiff_t>(state.e_d_len),
                   d_input.end());
  return grads;
}

double sparsity_ratio(const FactorVector& fv) {
  if (fv.pi.empty()) return 0.0;
  std::size_t zeros = 0;
  for (double x : fv.pi) {
    if (x == 0.0) ++zeros;
  }
  return static_cast<double>(zeros) / static_cast<double>(fv.pi.size());
}

double sparsity_loss(std::span<const double> ratios, const SparsityBoundary& boundary,
                     double lambda_hat) {
  boundary.validate();
  if (ratios.empty()) return 0.0;
  const double mid = boundary.mid();
  double total = 0.0;
  for (double r : ratios) {
    if (boundary.contains(r)) continue;
    const double lambda_l = lambda_hat * std::fabs(r - mid);
    total += lambda_l * std::fabs(r - mid);
  }
  return total / static_cast<double>(ratios.size());
}

Vec gradient_through_sparsity(const FactorVector& fv, const SparsityBoundary& boundary,
                              double lambda_hat, std::size_t layer_count) {
  boundary.validate();
  const std::size_t n = fv.pi.size();
  Vec grad(n, 0.0);
  if (n == 0 || layer_count == 0) return grad;
  const double r = sparsity_ratio(fv);
  if (boundary.contains(r)) return grad;
  // lambda_l * sign(r - mid) composed with dr/dpi_i = -1/N under the
  // straight-through view pi ~ v_out.
  const double g = -lambda_hat * (r - boundary.mid()) /
                   (static_cast<double>(n) * static_cast<double>(layer_count));
  grad.assign(n, g);
  return grad;
}

double LinearSchedule::at(std::int64_t step) const {
  if (total_steps <= 0 || step <= 0) return initial;
  if (step >= total_steps) return cap;
  const double progress = static_cast<double>(step) / static_cast<double>(total_steps);
  return initial + (cap - initial) * progress;
}

double alpha_schedule(std::int64_t step, std::int64_t total_steps, double alpha_init,
                      double alpha_max) {
  return LinearSchedule{alpha_init, alpha_max, total_steps}.at(step);
}

double lambda_schedule(std::int64_t step, std::int64_t total_steps, double lambda_init,
                       double lambda_cap) {
  return LinearSchedule{lambda_init, lambda_cap, total_steps}.at(step);
}

}  // namespace adasparse
