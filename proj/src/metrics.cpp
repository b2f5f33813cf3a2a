#include "adasparse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "adasparse/textio.hpp"
#include "adasparse/training.hpp"

namespace adasparse {

double auc(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) throw ShapeError("auc: length mismatch");
  std::size_t pos = 0, neg = 0;
  for (double y : labels) {
    if (y == 1.0) {
      ++pos;
    } else if (y == 0.0) {
      ++neg;
    } else {
      throw MetricError("auc: labels must be 0 or 1");
    }
  }
  if (pos == 0 || neg == 0) {
    throw MetricError("auc undefined: need at least one positive and one negative");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Midranks within tie groups give ties exactly 0.5 pair credit.
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1.0) pos_rank_sum += midrank;
    }
    i = j;
  }
  const double p = static_cast<double>(pos);
  const double u = pos_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(neg));
}

GaucResult gauc(std::span<const double> scores, std::span<const double> labels,
                std::span<const std::string> group_keys) {
  if (scores.size() != labels.size() || scores.size() != group_keys.size()) {
    throw ShapeError("gauc: length mismatch");
  }
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < group_keys.size(); ++i) {
    groups[group_keys[i]].push_back(i);
  }

  GaucResult result;
  double weighted = 0.0;
  double weight_sum = 0.0;
  for (const auto& [key, idx] : groups) {
    std::vector<double> s, y;
    s.reserve(idx.size());
    y.reserve(idx.size());
    for (std::size_t i : idx) {
      s.push_back(scores[i]);
      y.push_back(labels[i]);
    }
    try {
      const double group_auc = auc(s, y);
      weighted += static_cast<double>(idx.size()) * group_auc;
      weight_sum += static_cast<double>(idx.size());
      result.groups_used++;
    } catch (const MetricError&) {
      result.groups_skipped++;
    }
  }
  if (result.groups_used == 0) {
    throw MetricError("gauc undefined: no group has both classes");
  }
  result.value = weighted / weight_sum;
  return result;
}

double logloss(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) throw ShapeError("logloss: length mismatch");
  if (scores.empty()) throw MetricError("logloss undefined on empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    total += cross_entropy(labels[i] == 1.0 ? 1 : 0, scores[i]);
  }
  return total / static_cast<double>(scores.size());
}

DomainMask domain_mask(const AdaSparseModel& model, double alpha,
                       std::span<const Sample> samples) {
  if (!model.has_pruner || model.pruner_settings.kind == FactorKind::kScaling) {
    throw MetricError("domain_mask requires a binarization or fusion model");
  }
  if (samples.empty()) throw MetricError("domain_mask: need at least one sample");

  const std::size_t layers = model.backbone.layer_count();
  std::vector<std::vector<std::size_t>> votes(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    votes[l].assign(model.backbone.gate_width(l), 0);
  }
  for (const Sample& s : samples) {
    SampleForward fwd = model_forward(model, s, alpha);
    for (std::size_t l = 0; l < layers; ++l) {
      const Vec& pi = fwd.factors[l].pi;
      for (std::size_t i = 0; i < pi.size(); ++i) {
        if (pi[i] > 0.0) votes[l][i]++;
      }
    }
  }

  DomainMask mask;
  mask.sample_count = samples.size();
  mask.layers.resize(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    mask.layers[l].resize(votes[l].size());
    for (std::size_t i = 0; i < votes[l].size(); ++i) {
      // Keep the neuron on ties: 2*votes >= n.
      mask.layers[l][i] = 2 * votes[l][i] >= samples.size() ? 1 : 0;
    }
  }
  return mask;
}

double mask_jaccard(const DomainMask& a, const DomainMask& b, std::size_t layer) {
  if (layer >= a.layers.size() || layer >= b.layers.size()) {
    throw ShapeError("mask_jaccard: no such layer");
  }
  const auto& la = a.layers[layer];
  const auto& lb = b.layers[layer];
  if (la.size() != lb.size()) throw ShapeError("mask_jaccard: layer width mismatch");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < la.size(); ++i) {
    if (la[i] && lb[i]) ++inter;
    if (la[i] || lb[i]) ++uni;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

EvalReport evaluate(const AdaSparseModel& model, double alpha,
                    std::span<const Sample> samples) {
  if (samples.empty()) throw MetricError("evaluate: empty sample set");
  EvalReport report;
  report.sample_count = samples.size();

  Vec preds(samples.size());
  Vec labels(samples.size());
  std::vector<std::string> keys(samples.size());
  const std::size_t layers = model.has_pruner ? model.backbone.layer_count() : 0;
  std::vector<double> ratio_sums(layers, 0.0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    SampleForward fwd = model_forward(model, samples[i], alpha);
    preds[i] = fwd.pctr;
    labels[i] = samples[i].label;
    keys[i] = domain_key(samples[i]);
    for (std::size_t l = 0; l < fwd.ratios.size(); ++l) ratio_sums[l] += fwd.ratios[l];
  }

  report.logloss = logloss(preds, labels);
  report.auc = auc(preds, labels);
  const GaucResult g = gauc(preds, labels, keys);
  report.gauc = g.value;
  report.gauc_groups_used = g.groups_used;
  report.gauc_groups_skipped = g.groups_skipped;

  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < keys.size(); ++i) groups[keys[i]].push_back(i);
  for (const auto& [key, idx] : groups) {
    std::vector<double> s, y;
    for (std::size_t i : idx) {
      s.push_back(preds[i]);
      y.push_back(labels[i]);
    }
    try {
      report.domain_auc.emplace_back(key, auc(s, y));
    } catch (const MetricError&) {
    }
  }
  for (double sum : ratio_sums) {
    report.layer_sparsity.push_back(sum / static_cast<double>(samples.size()));
  }
  return report;
}

std::string report_text(const EvalReport& report) {
  std::ostringstream out;
  out << "samples=" << report.sample_count << "\n";
  out << "logloss=" << fmt_double(report.logloss) << "\n";
  out << "auc=" << fmt_double(report.auc) << "\n";
  out << "gauc=" << fmt_double(report.gauc) << "\n";
  out << "gauc_groups_used=" << report.gauc_groups_used << "\n";
  out << "gauc_groups_skipped=" << report.gauc_groups_skipped << "\n";
  for (std::size_t l = 0; l < report.layer_sparsity.size(); ++l) {
    out << "sparsity_r_" << l << "=" << fmt_double(report.layer_sparsity[l]) << "\n";
  }
  for (const auto& [key, value] : report.domain_auc) {
    out << "domain_auc_" << key << "=" << fmt_double(value) << "\n";
  }
  return out.str();
}

std::string report_json(const EvalReport& report) {
  nlohmann::json j;
  j["samples"] = report.sample_count;
  j["logloss"] = report.logloss;
  j["auc"] = report.auc;
  j["gauc"] = report.gauc;
  j["gauc_groups_used"] = report.gauc_groups_used;
  j["gauc_groups_skipped"] = report.gauc_groups_skipped;
  j["layer_sparsity"] = report.layer_sparsity;
  nlohmann::json domains = nlohmann::json::object();
  for (const auto& [key, value] : report.domain_auc) domains[key] = value;
  j["domain_auc"] = domains;
  return j.dump(2) + "\n";
}

}  // namespace adasparse
