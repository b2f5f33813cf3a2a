#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "adasparse/numerics.hpp"
#include "adasparse/rng.hpp"

namespace adasparse {

/// Fully-connected tanh network with a scalar sigmoid head. Every layer
/// input h^l (including the concatenated embedding input h^0 and the head's
/// input) can be gated elementwise by a per-layer factor vector before the
/// affine map. Gates multiply neurons, not biases.
///
/// widths = [input, hidden..., 1]; weights[l] maps widths[l] -> widths[l+1].
struct BackboneState {
  std::vector<std::size_t> widths;
  std::vector<Matrix> weights;
  std::vector<Vec> biases;

  std::size_t layer_count() const { return weights.size(); }
  // One gate per affine layer input.
  std::size_t gate_count() const { return weights.size(); }
  std::size_t gate_width(std::size_t l) const { return widths[l]; }
};

// Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases.
BackboneState make_backbone(std::size_t input_width,
                            const std::vector<std::int32_t>& hidden_sizes, Rng& rng);

struct ForwardCache {
  std::vector<Vec> pre_gate;  // h^l before gating, l = 0..L-1
  std::vector<Vec> gated;     // h^l after gating (== pre_gate when ungated)
  std::vector<Vec> factors;   // the factor vectors applied, empty when ungated
  double logit = 0.0;
  double pctr = 0.0;
  bool spent = false;  // backward consumes the cache once
};

// factors: one vector per layer matching gate widths, or empty for the plain
// (ungated) network. Gating with all-ones factors is bit-exact identity.
ForwardCache backbone_forward(const BackboneState& state, std::span<const double> e_d,
                              std::span<const double> e_a,
                              std::span<const Vec> factors = {});

struct BackboneGrads {
  std::vector<Matrix> d_weights;
  std::vector<Vec> d_biases;
  std::vector<Vec> d_factors;  // dL/d pi^l, empty when ungated
  Vec d_e_d;
  Vec d_e_a;
};

// Chain rule through head, tanh layers and gates, treating the factor
// vectors as independent inputs (their gradient is returned so a pruner can
// backpropagate further). Throws StateError on a consumed cache.
BackboneGrads backbone_backward(const BackboneState& state, ForwardCache& cache,
                                double d_logit, std::size_t e_d_len);

}  // namespace adasparse
