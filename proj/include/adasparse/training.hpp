#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adasparse/model.hpp"
#include "adasparse/textio.hpp"

namespace adasparse {

enum class PrunerMode { kNone, kBinarization, kScaling, kFusion };

std::string to_string(PrunerMode mode);
PrunerMode pruner_mode_from_string(const std::string& s);  // throws SpecError

struct TrainConfig {
  std::vector<std::int32_t> hidden_sizes{128, 64, 32};
  std::int32_t embed_dim = 8;
  PrunerMode method = PrunerMode::kFusion;
  double r_min = 0.15;
  double r_max = 0.25;
  double beta = 2.0;
  double epsilon = 0.25;
  double alpha_init = 0.1;
  double alpha_max = 5.0;
  double lambda_init = 0.01;
  double lambda_cap = 1.0;
  double lr = 0.001;
  std::int32_t batch_size = 256;
  std::int32_t epochs = 5;
  std::uint64_t seed = 1;
  std::int64_t schedule_steps = 0;  // 0: derived as epochs * steps_per_epoch

  void validate() const;
};

// Canonical text form: sorted key=value lines; doubles round-trip exactly.
std::string format_train_config(const TrainConfig& config);
// Applies pairs onto an existing config without validating, so partial
// files can be layered under command-line overrides.
void apply_train_config_pairs(TrainConfig& config, const KvPairs& pairs);
TrainConfig parse_train_config(const KvPairs& pairs);

AdaSparseModel make_model(const TrainConfig& config, const Vocabulary& vocab);

// -(y ln p + (1-y) ln(1-p)) with p clamped to [1e-12, 1-1e-12].
double cross_entropy(std::int32_t label, double p);

// Mean cross-entropy over the batch plus the mean per-sample sparsity
// regularizer (skipped for the plain model and for Scaling).
double total_loss(const AdaSparseModel& model, std::span<const Sample> batch,
                  double alpha, double lambda_hat);

struct Moments {
  Vec m;
  Vec v;
};

/// Bias-corrected Adam. Embedding tables update lazily: rows absent from the
/// step's sparse gradients keep their values and moments bit-identical.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<Moments> backbone_w;
  std::vector<Moments> backbone_b;
  std::vector<Moments> pruner_w;
  std::vector<Moments> embed_domain;
  std::vector<Moments> embed_agnostic;
};

AdamState make_adam(const AdaSparseModel& model);

void adam_update_span(std::span<double> param, std::span<const double> grad,
                      std::span<double> m, std::span<double> v, std::int64_t step,
                      double lr, double beta1, double beta2, double eps);

void adam_step(AdaSparseModel& model, const ModelGrads& grads, AdamState& state, double lr);

struct StepRecord {
  std::int64_t step = 0;
  double alpha = 0.0;
  double lambda_hat = 0.0;
  std::vector<double> layer_ratios;  // batch means; empty for the plain model
};

struct EpochRecord {
  std::int32_t epoch = 0;
  double train_loss = 0.0;
  double dev_logloss = 0.0;
  double dev_auc = 0.0;   // NaN when undefined (single-class dev)
  double dev_gauc = 0.0;  // NaN when undefined
};

struct TrainHistory {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
};

// step,layer,r_l,alpha,lambda_hat rows; layer -1 for plain-model runs.
std::string format_step_history(const TrainHistory& history);
std::string format_epoch_history(const TrainHistory& history);

struct Checkpoint {
  TrainConfig config;
  AdaSparseModel model;
  std::int64_t steps_done = 0;
  std::int64_t schedule_steps = 0;
  double alpha = 0.1;
  double lambda_hat = 0.01;
};

// Binary format: magic "ADSP", u32 version, length-prefixed sections
// (config text, vocabulary text, matrices as dims + little-endian f64,
// schedule position). Round-trips bit-exactly.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

struct TrainResult {
  Checkpoint best;    // highest dev AUC (dev logloss as tie-side fallback)
  Checkpoint final_;  // state after the last step
  TrainHistory history;
};

// Deterministic in (config, seed): seeded shuffles, per-step schedules,
// single-threaded updates. Throws NumericError on a non-finite loss.
TrainResult train(const TrainConfig& config, const std::vector<Sample>& train_set,
                  const std::vector<Sample>& dev_set, const Vocabulary& vocab);

// Forward with the checkpoint's frozen annealing value.
Vec predict(const Checkpoint& ckpt, std::span<const Sample> samples);

}  // namespace adasparse
