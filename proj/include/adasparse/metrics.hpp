#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adasparse/model.hpp"

namespace adasparse {

/// Probability that a random positive outranks a random negative, ties worth
/// 0.5. Rank-sum over midranks, which matches the pairwise count exactly.
/// Throws MetricError unless both classes are present.
double auc(std::span<const double> scores, std::span<const double> labels);

struct GaucResult {
  double value = 0.0;
  std::size_t groups_used = 0;
  std::size_t groups_skipped = 0;  // single-class groups, excluded entirely
};

// Impression-weighted mean of per-domain AUCs over groups with both classes.
GaucResult gauc(std::span<const double> scores, std::span<const double> labels,
                std::span<const std::string> group_keys);

// Mean cross-entropy of scores against binary labels.
double logloss(std::span<const double> scores, std::span<const double> labels);

/// Per-layer binary masks for one domain: majority vote of pi > 0 over the
/// domain's samples, ties kept (1).
struct DomainMask {
  std::vector<std::vector<std::uint8_t>> layers;
  std::size_t sample_count = 0;
};

// Requires a Binarization or Fusion model and at least one sample.
DomainMask domain_mask(const AdaSparseModel& model, double alpha,
                       std::span<const Sample> samples);

// |ones(a) & ones(b)| / |ones(a) | ones(b)|; 1.0 when both layers are empty.
double mask_jaccard(const DomainMask& a, const DomainMask& b, std::size_t layer);

struct EvalReport {
  std::size_t sample_count = 0;
  double logloss = 0.0;
  double auc = 0.0;
  double gauc = 0.0;
  std::size_t gauc_groups_used = 0;
  std::size_t gauc_groups_skipped = 0;
  std::vector<std::pair<std::string, double>> domain_auc;  // both-class domains only
  std::vector<double> layer_sparsity;  // mean zero fraction; empty for plain models
};

EvalReport evaluate(const AdaSparseModel& model, double alpha,
                    std::span<const Sample> samples);

std::string report_text(const EvalReport& report);
std::string report_json(const EvalReport& report);

}  // namespace adasparse
