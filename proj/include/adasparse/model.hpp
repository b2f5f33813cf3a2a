#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "adasparse/backbone.hpp"
#include "adasparse/data.hpp"
#include "adasparse/embedding.hpp"
#include "adasparse/pruner.hpp"
#include "adasparse/vocab.hpp"

namespace adasparse {

struct PrunerSettings {
  FactorKind kind = FactorKind::kFusion;
  double beta = 2.0;
  double epsilon = 0.25;
  SparsityBoundary boundary;
};

/// Embeddings + gated backbone + optional domain-aware pruner. Without a
/// pruner this is the plain DNN baseline.
struct AdaSparseModel {
  Vocabulary vocab;
  EmbeddingSet embeddings;
  BackboneState backbone;
  bool has_pruner = false;
  PrunerState pruner;
  PrunerSettings pruner_settings;

  FactorMethod method_at(double alpha) const {
    return FactorMethod{pruner_settings.kind, alpha, pruner_settings.beta,
                        pruner_settings.epsilon};
  }
};

/// Per-sample forward state. The pruner runs inside the layer loop: factors
/// for layer l are computed from the live h^l, then applied before the
/// affine map.
struct SampleForward {
  Vec e_d;
  Vec e_a;
  std::vector<FactorVector> factors;  // empty when ungated
  std::vector<double> ratios;         // per-layer zero fraction, empty when ungated
  ForwardCache cache;
  double alpha = 0.1;  // annealing value the factors were computed with
  double logit = 0.0;
  double pctr = 0.0;
};

SampleForward model_forward(const AdaSparseModel& model, const Sample& s, double alpha);

/// Gradient accumulators for all three parameter groups.
struct ModelGrads {
  std::vector<Matrix> backbone_w;
  std::vector<Vec> backbone_b;
  std::vector<Matrix> pruner_w;
  EmbeddingGrads embed;

  void zero();
  void scale(double f);
};

ModelGrads make_grads(const AdaSparseModel& model);

/// Accumulates one sample's gradients. d_logit is the loss gradient at the
/// logit; lambda_hat weights the sparsity-regularizer path (ignored for the
/// plain model and for Scaling, whose regularizer is disabled). The chain is
/// exact apart from the straight-through convention at the threshold.
void model_backward(const AdaSparseModel& model, const Sample& s, SampleForward& fwd,
                    double d_logit, double lambda_hat, ModelGrads& grads);

}  // namespace adasparse
