#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "adasparse/numerics.hpp"
#include "adasparse/rng.hpp"

namespace adasparse {

/// The three weighting-factor formulations. With v_in = W_p^l.[e_d; h^l]:
///   Binarization:  v_out = sigmoid(alpha*v_in),      pi = sign(|v_out| - eps)
///   Scaling:       v_out = beta*sigmoid(v_in),       pi = v_out * sign(|v_out|)
///   Fusion:        v_out = beta*sigmoid(alpha*v_in), pi = v_out * sign(|v_out| - eps)
/// where sign(x) is 1 for x > 0 and 0 otherwise, so a value exactly at the
/// threshold prunes to zero.
enum class FactorKind { kBinarization, kScaling, kFusion };

std::string to_string(FactorKind kind);

struct FactorMethod {
  FactorKind kind = FactorKind::kFusion;
  double alpha = 0.1;    // annealed sharpness; unused by Scaling
  double beta = 2.0;     // >= 1; unused by Binarization
  double epsilon = 0.25; // > 0; unused by Scaling
  void validate() const;
};

/// Per-layer factor vector with the caches its backward pass consumes.
/// Value ranges: Binarization {0,1}; Scaling [0,beta]; Fusion {0} u (eps,beta].
struct FactorVector {
  Vec pi;
  Vec v_out;       // pre-threshold values
  Vec v_in;        // pre-activation values
  Vec gate_input;  // [e_d; h^l] as seen by the forward pass
  bool spent = false;
};

/// One affine map per gated layer: weights[l] has shape
/// gate_width(l) x (e_d_len + gate_width(l)).
struct PrunerState {
  std::size_t e_d_len = 0;
  std::vector<Matrix> weights;

  std::size_t layer_count() const { return weights.size(); }
};

PrunerState make_pruner(std::size_t e_d_len, std::span<const std::size_t> gate_widths,
                        Rng& rng);

FactorVector compute_factors(const PrunerState& state, std::span<const double> e_d,
                             std::span<const double> h_l, std::size_t layer,
                             const FactorMethod& method);

struct FactorGrads {
  Matrix d_weight;
  Vec d_e_d;
  Vec d_h;
};

/// Straight-through backward: the threshold operator is treated as identity
/// on v_out, so d_upstream is the gradient arriving at pi and/or v_out; the
/// sigmoid (with its alpha/beta scaling) is differentiated exactly.
FactorGrads factors_backward(const PrunerState& state, std::size_t layer,
                             FactorVector& fv, const FactorMethod& method,
                             std::span<const double> d_upstream);

/// Fraction of exactly-zero factor entries. Coincides with 1 - |pi|_1/N for
/// binary factors; always 0 for Scaling, whose regularizer is disabled.
double sparsity_ratio(const FactorVector& fv);

struct SparsityBoundary {
  double r_min = 0.15;
  double r_max = 0.25;
  double mid() const { return (r_min + r_max) / 2.0; }
  bool contains(double r) const { return r >= r_min && r <= r_max; }
  void validate() const;
};

// Per layer: lambda_l = 0 when r^l is inside the boundary, else
// lambda_hat*|r^l - mid|; the layer term is lambda_l*|r^l - mid| and the loss
// is the mean over layers. Exactly 0 when every ratio is inside.
double sparsity_loss(std::span<const double> ratios, const SparsityBoundary& boundary,
                     double lambda_hat);

/// Straight-through gradient of the sparsity term w.r.t. one layer's
/// pre-threshold values: treating pi as v_out and r = 1 - |pi|_1/N, each
/// entry gets -lambda_hat*(r - mid)/(N*layer_count) when r is outside the
/// boundary and 0 inside. Descent pushes factors toward the boundary band.
Vec gradient_through_sparsity(const FactorVector& fv, const SparsityBoundary& boundary,
                              double lambda_hat, std::size_t layer_count);

/// Linear ramp from `initial` at step 0 to `cap` at step >= total_steps,
/// endpoints exact. total_steps <= 0 pins the schedule at `initial`.
struct LinearSchedule {
  double initial = 0.0;
  double cap = 0.0;
  std::int64_t total_steps = 0;
  double at(std::int64_t step) const;
};

double alpha_schedule(std::int64_t step, std::int64_t total_steps,
                      double alpha_init = 0.1, double alpha_max = 5.0);
double lambda_schedule(std::int64_t step, std::int64_t total_steps,
                       double lambda_init = 0.01, double lambda_cap = 1.0);

}  // namespace adasparse
