#include "adasparse/model.hpp"

#include <cmath>

namespace adasparse {

SampleForward model_forward(const AdaSparseModel& model, const Sample& s, double alpha) {
  SampleForward out;
  out.alpha = alpha;
  embed(model.embeddings, s, out.e_d, out.e_a);

  const BackboneState& bb = model.backbone;
  const std::size_t layers = bb.layer_count();
  if (out.e_d.size() + out.e_a.size() != bb.widths[0]) {
    throw ShapeError("model_forward: embedding width does not match backbone input");
  }

  ForwardCache& cache = out.cache;
  cache.pre_gate.resize(layers);
  cache.gated.resize(layers);
  if (model.has_pruner) cache.factors.resize(layers);

  const FactorMethod method = model.method_at(alpha);
  Vec h(bb.widths[0]);
  std::copy(out.e_d.begin(), out.e_d.end(), h.begin());
  std::copy(out.e_a.begin(), out.e_a.end(),
            h.begin() + static_cast<std::ptrdiff_t>(out.e_d.size()));

  for (std::size_t l = 0; l < layers; ++l) {
    cache.pre_gate[l] = h;
    if (model.has_pruner) {
      FactorVector fv = compute_factors(model.pruner, out.e_d, h, l, method);
      out.ratios.push_back(sparsity_ratio(fv));
      cache.factors[l] = fv.pi;
      cache.gated[l] = hadamard(h, fv.pi);
      out.factors.push_back(std::move(fv));
    } else {
      cache.gated[l] = h;
    }
    Vec z = matmul(bb.weights[l], cache.gated[l]);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += bb.biases[l][i];
    h = (l + 1 < layers) ? tanh_act(z) : std::move(z);
  }

  cache.logit = h[0];
  cache.pctr = sigmoid_scalar(cache.logit);
  out.logit = cache.logit;
  out.pctr = cache.pctr;
  return out;
}

ModelGrads make_grads(const AdaSparseModel& model) {
  ModelGrads g;
  for (const Matrix& w : model.backbone.weights) g.backbone_w.emplace_back(w.rows, w.cols);
  for (const Vec& b : model.backbone.biases) g.backbone_b.emplace_back(b.size(), 0.0);
  if (model.has_pruner) {
    for (const Matrix& w : model.pruner.weights) g.pruner_w.emplace_back(w.rows, w.cols);
  }
  return g;
}

void ModelGrads::zero() {
  for (auto& w : backbone_w) w.data.assign(w.data.size(), 0.0);
  for (auto& b : backbone_b) b.assign(b.size(), 0.0);
  for (auto& w : pruner_w) w.data.assign(w.data.size(), 0.0);
  embed.clear();
}

void ModelGrads::scale(double f) {
  for (auto& w : backbone_w) {
    for (auto& x : w.data) x *= f;
  }
  for (auto& b : backbone_b) {
    for (auto& x : b) x *= f;
  }
  for (auto& w : pruner_w) {
    for (auto& x : w.data) x *= f;
  }
  for (auto& [key, row] : embed.rows) {
    for (auto& x : row) x *= f;
  }
}

void model_backward(const AdaSparseModel& model, const Sample& s, SampleForward& fwd,
                    double d_logit, double lambda_hat, ModelGrads& grads) {
  const BackboneState& bb = model.backbone;
  const std::size_t layers = bb.layer_count();
  if (fwd.cache.pre_gate.size() != layers) {
    throw StateError("model_backward: forward cache does not match the model");
  }
  if (fwd.cache.spent) throw StateError("model_backward: forward cache already consumed");
  fwd.cache.spent = true;

  const FactorMethod method =
      model.has_pruner ? model.method_at(fwd.alpha) : FactorMethod{};
  // Scaling never produces zeros, so its regularizer is off by construction.
  const bool regularize = model.has_pruner &&
                          model.pruner_settings.kind != FactorKind::kScaling &&
                          lambda_hat != 0.0;

  Vec d_e_d_pruner(fwd.e_d.size(), 0.0);
  Vec d_pre{d_logit};
  Vec d_input;

  for (std::size_t l = layers; l-- > 0;) {
    const Matrix& w = bb.weights[l];
    Matrix& dw = grads.backbone_w[l];
    const Vec& in = fwd.cache.gated[l];
    Vec d_gated(w.cols, 0.0);
    for (std::size_t r = 0; r < w.rows; ++r) {
      const double g = d_pre[r];
      grads.backbone_b[l][r] += g;
      double* dwr = dw.data.data() + r * w.cols;
      const double* wr = w.data.data() + r * w.cols;
      for (std::size_t c = 0; c < w.cols; ++c) {
        dwr[c] += g * in[c];
        d_gated[c] += g * wr[c];
      }
    }

    Vec d_h;
    if (model.has_pruner) {
      FactorVector& fv = fwd.factors[l];
      // Gate: h^l(d) = h^l . pi^l.
      Vec d_pi = hadamard(d_gated, fwd.cache.pre_gate[l]);
      d_h = hadamard(d_gated, fv.pi);
      if (regularize) {
        const Vec d_rs = gradient_through_sparsity(fv, model.pruner_settings.boundary,
                                                   lambda_hat, layers);
        for (std::size_t i = 0; i < d_pi.size(); ++i) d_pi[i] += d_rs[i];
      }
      FactorGrads fg = factors_backward(model.pruner, l, fv, method, d_pi);
      Matrix& dpw = grads.pruner_w[l];
      for (std::size_t i = 0; i < dpw.data.size(); ++i) dpw.data[i] += fg.d_weight.data[i];
      for (std::size_t i = 0; i < d_e_d_pruner.size(); ++i) d_e_d_pruner[i] += fg.d_e_d[i];
      for (std::size_t i = 0; i < d_h.size(); ++i) d_h[i] += fg.d_h[i];
    } else {
      d_h = std::move(d_gated);
    }

    if (l > 0) {
      const Vec& out = fwd.cache.pre_gate[l];
      d_pre.assign(out.size(), 0.0);
      for (std::size_t i = 0; i < out.size(); ++i) {
        d_pre[i] = d_h[i] * (1.0 - out[i] * out[i]);
      }
    } else {
      d_input = std::move(d_h);
    }
  }

  const std::size_t e_d_len = fwd.e_d.size();
  Vec d_e_d(d_input.begin(), d_input.begin() + static_cast<std::ptrdiff_t>(e_d_len));
  Vec d_e_a(d_input.begin() + static_cast<std::ptrdiff_t>(e_d_len), d_input.end());
  for (std::size_t i = 0; i < e_d_len; ++i) d_e_d[i] += d_e_d_pruner[i];
  embed_backward(model.embeddings, s, d_e_d, d_e_a, grads.embed);
}

}  // namespace adasparse
