#include "adasparse/backbone.hpp"

#include <cmath>

namespace adasparse {

BackboneState make_backbone(std::size_t input_width,
                            const std::vector<std::int32_t>& hidden_sizes, Rng& rng) {
  if (input_width == 0) throw SpecError("backbone: input width must be positive");
  for (auto h : hidden_sizes) {
    if (h < 1) throw SpecError("backbone: hidden sizes must be >= 1");
  }
  BackboneState state;
  state.widths.push_back(input_width);
  for (auto h : hidden_sizes) state.widths.push_back(static_cast<std::size_t>(h));
  state.widths.push_back(1);

  for (std::size_t l = 0; l + 1 < state.widths.size(); ++l) {
    const std::size_t fan_in = state.widths[l];
    const std::size_t fan_out = state.widths[l + 1];
    Matrix w(fan_out, fan_in);
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (auto& x : w.data) x = rng.uniform(-bound, bound);
    state.weights.push_back(std::move(w));
    state.biases.push_back(Vec(fan_out, 0.0));
  }
  return state;
}

ForwardCache backbone_forward(const BackboneState& state, std::span<const double> e_d,
                              std::span<const double> e_a, std::span<const Vec> factors) {
  const std::size_t layers = state.layer_count();
  if (e_d.size() + e_a.size() != state.widths[0]) {
    throw ShapeError("backbone_forward: input width " +
                     std::to_string(e_d.size() + e_a.size()) + " != " +
                     std::to_string(state.widths[0]));
  }
  const bool gated = !factors.empty();
  if (gated && factors.size() != layers) {
    throw ShapeError("backbone_forward: expected one factor vector per layer");
  }

  ForwardCache cache;
  cache.pre_gate.resize(layers);
  cache.gated.resize(layers);
  if (gated) cache.factors.resize(layers);

  Vec h(state.widths[0]);
  std::copy(e_d.begin(), e_d.end(), h.begin());
  std::copy(e_a.begin(), e_a.end(), h.begin() + static_cast<std::ptrdiff_t>(e_d.size()));

  for (std::size_t l = 0; l < layers; ++l) {
    cache.pre_gate[l] = h;
    if (gated) {
      if (factors[l].size() != state.gate_width(l)) {
        throw ShapeError("backbone_forward: factor width mismatch at layer " +
                         std::to_string(l));
      }
      cache.factors[l] = factors[l];
      cache.gated[l] = hadamard(h, factors[l]);
    } else {
      cache.gated[l] = h;
    }
    Vec z = matmul(state.weights[l], cache.gated[l]);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += state.biases[l][i];
    h = (l + 1 < layers) ? tanh_act(z) : std::move(z);
  }

  cache.logit = h[0];
  cache.pctr = sigmoid_scalar(cache.logit);
  return cache;
}

BackboneGrads backbone_backward(const BackboneState& state, ForwardCache& cache,
                                double d_logit, std::size_t e_d_len) {
  const std::size_t layers = state.layer_count();
  if (cache.pre_gate.size() != layers) {
    throw StateError("backbone_backward: cache does not match this network");
  }
  if (cache.spent) throw StateError("backbone_backward: cache already consumed");
  cache.spent = true;
  const bool gated = !cache.factors.empty();

  BackboneGrads grads;
  grads.d_weights.reserve(layers);
  grads.d_biases.reserve(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    grads.d_weights.emplace_back(state.weights[l].rows, state.weights[l].cols);
    grads.d_biases.emplace_back(state.weights[l].rows, 0.0);
  }
  if (gated) grads.d_factors.resize(layers);

  // d_pre: gradient at the pre-activation of layer l (the head has no tanh).
  Vec d_pre{d_logit};
  for (std::size_t l = layers; l-- > 0;) {
    Matrix& dw = grads.d_weights[l];
    const Matrix& w = state.weights[l];
    const Vec& in = cache.gated[l];
    Vec d_gated(w.cols, 0.0);
    for (std::size_t r = 0; r < w.rows; ++r) {
      const double g = d_pre[r];
      grads.d_biases[l][r] += g;
      double* dwr = dw.data.data() + r * w.cols;
      const double* wr = w.data.data() + r * w.cols;
      for (std::size_t c = 0; c < w.cols; ++c) {
        dwr[c] += g * in[c];
        d_gated[c] += g * wr[c];
      }
    }

    Vec d_h;
    if (gated) {
      grads.d_factors[l] = hadamard(d_gated, cache.pre_gate[l]);
      d_h = hadamard(d_gated, cache.factors[l]);
    } else {
      d_h = std::move(d_gated);
    }

    if (l > 0) {
      // pre_gate[l] is the tanh output of layer l-1.
      const Vec& out = cache.pre_gate[l];
      d_pre.assign(out.size(), 0.0);
      for (std::size_t i = 0; i < out.size(); ++i) {
        d_pre[i] = d_h[i] * (1.0 - out[i] * out[i]);
      }
    } else {
      grads.d_e_d.assign(d_h.begin(), d_h.begin() + static_cast<std::ptrdiff_t>(e_d_len));
      grads.d_e_a.assign(d_h.begin() + static_cast<std::ptrdiff_t>(e_d_len), d_h.end());
    }
  }
  return grads;
}

}  // namespace adasparse
