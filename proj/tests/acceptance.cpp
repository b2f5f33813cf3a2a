// Acceptance suite: one self-contained check per criterion, each printing a
// single PASS/FAIL line. Run with no arguments for all criteria, with an id
// (1..10) for one of them, or with `report` for the non-binding
// factor-formulation comparison. Exit code is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "adasparse/cli.hpp"
#include "adasparse/data.hpp"
#include "adasparse/metrics.hpp"
#include "adasparse/textio.hpp"
#include "adasparse/training.hpp"
#include "test_support.hpp"

using namespace adasparse;
using adasparse::testing::model_grad_check;
using adasparse::testing::pairwise_auc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Analytic gradients of the total loss match central finite differences
//    on a miniature Scaling model, 50 random seeds.
// ---------------------------------------------------------------------------
Outcome criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    DatasetSpec spec;
    spec.domain_field_cardinalities = {2};
    spec.agnostic_field_cardinalities = {3, 3};
    spec.total_samples = 4;
    spec.rule_seed = seed;
    const auto batch = generate_synthetic(spec, seed);

    TrainConfig config;
    config.hidden_sizes = {8, 4};
    config.embed_dim = 4;
    config.method = PrunerMode::kScaling;
    config.seed = seed;
    AdaSparseModel model = make_model(config, identity_vocabulary(spec));
    worst = std::max(worst, model_grad_check(model, batch, 1.0, 0.5));
  }
  const double elapsed = seconds_since(t0);
  Outcome out;
  out.pass = worst <= 1e-4 && elapsed < 30.0;
  out.detail = "max rel err " + fmt(worst) + " over 50 seeds, " + fmt(elapsed) + "s";
  return out;
}

// ---------------------------------------------------------------------------
// 2. Fusion straight-through gradients match finite differences when every
//    pre-threshold value sits well away from epsilon.
// ---------------------------------------------------------------------------
Outcome criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  const double fd_eps = 1e-5;
  double worst = 0.0;
  double min_margin = 1e300;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    DatasetSpec spec;
    spec.domain_field_cardinalities = {2};
    spec.agnostic_field_cardinalities = {3, 3};
    spec.total_samples = 4;
    spec.rule_seed = seed;
    const auto batch = generate_synthetic(spec, seed);

    TrainConfig config;
    config.hidden_sizes = {8, 4};
    config.embed_dim = 4;
    config.method = PrunerMode::kFusion;
    // All gates stay open at small alpha, so every per-layer ratio is 0 and
    // sits inside [0, 0.9]: the regularizer is identically zero nearby.
    config.r_min = 0.0;
    config.r_max = 0.9;
    config.seed = seed;
    AdaSparseModel model = make_model(config, identity_vocabulary(spec));

    const double alpha = 0.1;
    for (const Sample& s : batch) {
      const SampleForward fwd = model_forward(model, s, alpha);
      for (const FactorVector& fv : fwd.factors) {
        for (double v : fv.v_out) {
          min_margin = std::min(min_margin, std::fabs(v - config.epsilon));
        }
      }
    }
    worst = std::max(worst, model_grad_check(model, batch, alpha, 0.5, fd_eps));
  }
  const double elapsed = seconds_since(t0);
  Outcome out;
  const bool margin_ok = min_margin >= 10.0 * fd_eps;
  out.pass = margin_ok && worst <= 1e-4 && elapsed < 30.0;
  out.detail = "max rel err " + fmt(worst) + ", min margin " + fmt(min_margin) + " (>= " +
               fmt(10.0 * fd_eps) + "), " + fmt(elapsed) + "s";
  return out;
}

// ---------------------------------------------------------------------------
// 3. Rank-based AUC equals the O(P*N) pairwise oracle exactly.
// ---------------------------------------------------------------------------
Outcome criterion_3() {
  const double hand = auc(Vec{0.1, 0.4, 0.35, 0.8}, Vec{0.0, 0.0, 1.0, 1.0});
  if (hand != 0.75) return {false, "hand case gave " + fmt(hand) + ", want 0.75"};

  Rng rng(303);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(198);
    Vec scores(n), labels(n);
    const bool tie_heavy = trial % 3 != 0;
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = tie_heavy ? 0.25 * static_cast<double>(rng.below(4))
                            : rng.uniform(0.0, 1.0);
      labels[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
    labels[0] = 1.0;
    labels[n - 1] = 0.0;
    if (auc(scores, labels) != pairwise_auc(scores, labels)) ++mismatches;
  }
  Outcome out;
  out.pass = mismatches == 0;
  out.detail = std::to_string(mismatches) + " mismatches over 100 instances (n <= 200)";
  return out;
}

// ---------------------------------------------------------------------------
// 4. Factor range invariants over 1e5 random inputs per method.
// ---------------------------------------------------------------------------
Outcome criterion_4() {
  Rng rng(404);
  PrunerState state;
  state.e_d_len = 4;
  Matrix w(8, 12);
  for (auto& x : w.data) x = rng.uniform(-1.0, 1.0);
  state.weights.push_back(w);

  const std::size_t rounds = 100000 / 8;  // 8 factor entries per call
  std::size_t violations = 0;
  std::size_t checked = 0;
  for (std::size_t trial = 0; trial < rounds; ++trial) {
    Vec e_d(4), h(8);
    for (auto& x : e_d) x = rng.uniform(-2.0, 2.0);
    for (auto& x : h) x = rng.uniform(-2.0, 2.0);
    const double alpha = rng.uniform(0.1, 5.0);

    const auto fb = compute_factors(state, e_d, h, 0,
                                    {FactorKind::kBinarization, alpha, 2.0, 0.25});
    const auto fs =
        compute_factors(state, e_d, h, 0, {FactorKind::kScaling, alpha, 2.0, 0.25});
    const auto ff =
        compute_factors(state, e_d, h, 0, {FactorKind::kFusion, alpha, 2.0, 0.25});
    for (std::size_t i = 0; i < 8; ++i) {
      checked += 3;
      if (!(fb.pi[i] == 0.0 || fb.pi[i] == 1.0)) ++violations;
      if (!(fs.pi[i] > 0.0 && fs.pi[i] < 2.0)) ++violations;
      if (!(ff.pi[i] == 0.0 || (ff.pi[i] > 0.25 && ff.pi[i] <= 2.0))) ++violations;
    }
  }
  Outcome out;
  out.pass = violations == 0;
  out.detail = std::to_string(violations) + " violations over " +
               std::to_string(checked) + " factor values";
  return out;
}

// ---------------------------------------------------------------------------
// 5. Sparsity control: trained Fusion ratios land in the boundary band.
// ---------------------------------------------------------------------------
Outcome criterion_5() {
  const auto t0 = std::chrono::steady_clock::now();
  DatasetSpec spec;
  spec.domain_field_cardinalities = {5};
  spec.agnostic_field_cardinalities = {12, 12, 12, 12};
  spec.total_samples = 50000;
  spec.long_tail_exponent = 0.5;
  spec.rule_seed = 55;
  const auto samples = generate_synthetic(spec, 5);
  const Split split = split_by_timestamp(samples);

  TrainConfig config;
  config.hidden_sizes = {64, 32, 16};
  config.embed_dim = 8;
  config.method = PrunerMode::kFusion;
  config.r_min = 0.15;
  config.r_max = 0.25;
  config.batch_size = 256;
  config.epochs = 6;
  config.seed = 5;
  const TrainResult result =
      train(config, split.train, split.dev, identity_vocabulary(spec));

  const EvalReport report =
      evaluate(result.final_.model, result.final_.alpha, split.dev);
  const SparsityBoundary boundary{config.r_min, config.r_max};

  std::string ratios;
  bool in_band = true;
  bool zero_inside_ok = true;
  for (double r : report.layer_sparsity) {
    if (!ratios.empty()) ratios += " ";
    ratios += fmt(r);
    if (r < config.r_min - 0.05 || r > config.r_max + 0.05) in_band = false;
    if (boundary.contains(r) &&
        sparsity_loss(std::vector<double>{r}, boundary, result.final_.lambda_hat) != 0.0) {
      zero_inside_ok = false;
    }
  }
  const double elapsed = seconds_since(t0);
  Outcome out;
  out.pass = in_band && zero_inside_ok && elapsed < 300.0;
  out.detail = "dev r_l = [" + ratios + "] vs band [0.10, 0.30], exact-zero-inside=" +
               (zero_inside_ok ? "yes" : "NO") + ", " + fmt(elapsed) + "s";
  return out;
}

// ---------------------------------------------------------------------------
// 6. Fusion beats the plain DNN on conflicting-rule multi-domain data.
// ---------------------------------------------------------------------------
Outcome criterion_6() {
  const auto t0 = std::chrono::steady_clock::now();
  double gap_sum = 0.0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    DatasetSpec spec;
    spec.domain_field_cardinalities = {8};
    spec.agnostic_field_cardinalities = {8, 8, 8, 8};
    spec.total_samples = 200000;
    spec.long_tail_exponent = 1.2;
    spec.rule_style = RuleStyle::kConflicting;
    spec.rule_fields_per_domain = 4;
    spec.rule_weight_scale = 2.5;
    spec.rule_seed = 60 + seed;
    const auto samples = generate_synthetic(spec, 600 + seed);
    const Split split = split_by_timestamp(samples);
    const Vocabulary vocab = identity_vocabulary(spec);

    // A deliberately narrow backbone: with eight conflicting sign patterns
    // over shared features, the gap between gated and plain models is about
    // capacity interference, not optimization noise.
    TrainConfig config;
    config.hidden_sizes = {16, 8};
    config.embed_dim = 4;
    config.batch_size = 256;
    config.epochs = 3;
    config.seed = seed;

    config.method = PrunerMode::kFusion;
    const TrainResult fusion = train(config, split.train, split.dev, vocab);
    config.method = PrunerMode::kNone;
    const TrainResult plain = train(config, split.train, split.dev, vocab);

    const double auc_fusion =
        evaluate(fusion.best.model, fusion.best.alpha, split.test).auc;
    const double auc_plain =
        evaluate(plain.best.model, plain.best.alpha, split.test).auc;
    gap_sum += auc_fusion - auc_plain;
    per_seed += " seed" + std::to_string(seed) + ": " + fmt(auc_fusion) + " vs " +
                fmt(auc_plain) + ";";
  }
  const double mean_gap = gap_sum / 3.0;
  const double elapsed = seconds_since(t0);
  Outcome out;
  out.pass = mean_gap >= 0.005 && elapsed < 600.0;
  out.detail = "mean AUC gap " + fmt(mean_gap) + " (need >= 0.005);" + per_seed + " " +
               fmt(elapsed) + "s";
  return out;
}

// ---------------------------------------------------------------------------
// 7. Mask similarity: domains sharing a rule overlap more than the outlier.
// ---------------------------------------------------------------------------
Outcome criterion_7() {
  const auto t0 = std::chrono::steady_clock::now();
  int wins = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    DatasetSpec spec;
    spec.domain_field_cardinalities = {3};
    spec.agnostic_field_cardinalities = {8, 8, 8, 8};
    spec.total_samples = 30000;
    spec.rule_fields_per_domain = 2;
    spec.rule_weight_scale = 2.5;
    spec.similar_domains = {0, 1};  // Da and Da' share a rule; Db is disjoint
    spec.rule_seed = 70 + seed;
    const auto samples = generate_synthetic(spec, 700 + seed);
    const Split split = split_by_timestamp(samples);

    TrainConfig config;
    config.hidden_sizes = {32, 16};
    config.embed_dim = 4;
    config.method = PrunerMode::kFusion;
    config.batch_size = 256;
    config.epochs = 5;
    config.seed = seed;
    const TrainResult result =
        train(config, split.train, split.dev, identity_vocabulary(spec));

    const auto parts = partition_by_domain(split.test);
    auto mask_of = [&](const std::string& key) {
      std::vector<Sample> subset;
      for (std::size_t i : parts.at(key)) subset.push_back(split.test[i]);
      return domain_mask(result.final_.model, result.final_.alpha, subset);
    };
    const DomainMask da = mask_of("0");
    const DomainMask da2 = mask_of("1");
    const DomainMask db = mask_of("2");

    const std::size_t last = result.final_.model.backbone.gate_count() - 1;
    const double j_sim = mask_jaccard(da, da2, last);
    const double j_ab = mask_jaccard(da, db, last);
    const double j_a2b = mask_jaccard(da2, db, last);
    if (j_sim > std::max(j_ab, j_a2b)) ++wins;
    detail += " seed" + std::to_string(seed) + ": J(Da,Da')=" + fmt(j_sim) +
              " J(Da,Db)=" + fmt(j_ab) + " J(Da',Db)=" + fmt(j_a2b) + ";";
  }
  const double elapsed = seconds_since(t0);
  Outcome out;
  out.pass = wins == 3;
  out.detail = std::to_string(wins) + "/3 seeds;" + detail + " " + fmt(elapsed) + "s";
  return out;
}

// ---------------------------------------------------------------------------
// 8. Schedule contracts over an exported training history.
// ---------------------------------------------------------------------------
Outcome criterion_8() {
  DatasetSpec spec;
  spec.domain_field_cardinalities = {3};
  spec.agnostic_field_cardinalities = {4, 4};
  spec.total_samples = 3000;
  spec.rule_seed = 88;
  const auto samples = generate_synthetic(spec, 8);
  const Split parts = split_by_timestamp(samples);

  TrainConfig config;
  config.hidden_sizes = {8, 6};
  config.embed_dim = 3;
  config.method = PrunerMode::kFusion;
  config.batch_size = 64;
  config.epochs = 3;
  config.seed = 8;
  const TrainResult result =
      train(config, parts.train, parts.dev, identity_vocabulary(spec));

  // Go through the exported CSV, as a consumer would.
  const auto dir = testing::scratch_dir("schedules");
  const std::string path = (dir / "history.csv").string();
  write_file(path, format_step_history(result.history));
  std::istringstream in(read_file(path));

  std::string line;
  std::getline(in, line);  // header
  bool first = true;
  double first_alpha = 0.0, first_lambda = 0.0;
  double prev_alpha = -1.0, prev_lambda = -1.0;
  double last_alpha = 0.0, last_lambda = 0.0;
  std::int64_t prev_step = -1;
  bool monotone = true;
  while (std::getline(in, line)) {
    const auto cells = split(line, ',');
    const std::int64_t step = parse_int(cells[0], "step");
    const double a = parse_double(cells[3], "alpha");
    const double l = parse_double(cells[4], "lambda");
    if (first) {
      first_alpha = a;
      first_lambda = l;
      first = false;
    }
    if (step != prev_step) {
      if (a < prev_alpha || l < prev_lambda) monotone = false;
      prev_alpha = a;
      prev_lambda = l;
      prev_step = step;
    }
    last_alpha = a;
    last_lambda = l;
  }
  std::filesystem::remove_all(dir);

  Outcome out;
  out.pass = first_alpha == 0.1 && last_alpha == 5.0 && first_lambda == 0.01 &&
             last_lambda == 1.0 && monotone;
  out.detail = "alpha " + fmt(first_alpha) + " -> " + fmt(last_alpha) + ", lambda " +
               fmt(first_lambda) + " -> " + fmt(last_lambda) +
               (monotone ? ", monotone" : ", NOT monotone");
  return out;
}

// ---------------------------------------------------------------------------
// 9. Determinism of histories; bit-exact checkpoint round-trip.
// ---------------------------------------------------------------------------
Outcome criterion_9() {
  DatasetSpec spec;
  spec.domain_field_cardinalities = {4};
  spec.agnostic_field_cardinalities = {6, 6};
  spec.total_samples = 6000;
  spec.rule_seed = 99;
  const auto samples = generate_synthetic(spec, 9);
  const Split split = split_by_timestamp(samples);
  const Vocabulary vocab = identity_vocabulary(spec);

  TrainConfig config;
  config.hidden_sizes = {16, 8};
  config.embed_dim = 4;
  config.method = PrunerMode::kFusion;
  config.batch_size = 128;
  config.epochs = 2;
  config.seed = 9;

  const TrainResult a = train(config, split.train, split.dev, vocab);
  const TrainResult b = train(config, split.train, split.dev, vocab);
  const bool history_identical =
      format_step_history(a.history) == format_step_history(b.history) &&
      format_epoch_history(a.history) == format_epoch_history(b.history);

  const auto dir = testing::scratch_dir("determinism");
  const std::string path = (dir / "model.ckpt").string();
  save_checkpoint(a.final_, path);
  const Checkpoint loaded = load_checkpoint(path);

  const std::span<const Sample> thousand(samples.data(), 1000);
  const Vec before = predict(a.final_, thousand);
  const Vec after = predict(loaded, thousand);
  const bool roundtrip_identical =
      before.size() == after.size() &&
      std::memcmp(before.data(), after.data(), before.size() * sizeof(double)) == 0;
  std::filesystem::remove_all(dir);

  Outcome out;
  out.pass = history_identical && roundtrip_identical;
  out.detail = std::string("histories ") + (history_identical ? "identical" : "DIFFER") +
               ", round-trip predictions on 1000 samples " +
               (roundtrip_identical ? "bit-identical" : "DIFFER");
  return out;
}

// ---------------------------------------------------------------------------
// 10. Timestamp split: 4:1:1 with the remainder-to-train rule.
// ---------------------------------------------------------------------------
Outcome criterion_10() {
  auto sized = [](std::size_t n) {
    std::vector<Sample> samples(n);
    Rng rng(1000 + n);
    for (std::size_t i = 0; i < n; ++i) {
      samples[i].timestamp = static_cast<std::int64_t>(rng.below(100000));
      samples[i].domain_feats = {0};
      samples[i].agnostic_feats = {0};
    }
    return samples;
  };

  struct Case {
    std::size_t n, train, dev, test;
  };
  const std::vector<Case> cases{{6, 4, 1, 1}, {7, 5, 1, 1}, {601, 401, 100, 100}};
  std::string detail;
  bool pass = true;
  for (const Case& c : cases) {
    const Split split = split_by_timestamp(sized(c.n));
    const bool sizes_ok = split.train.size() == c.train && split.dev.size() == c.dev &&
                          split.test.size() == c.test;
    bool order_ok = true;
    if (!split.train.empty() && !split.dev.empty()) {
      order_ok = order_ok && split.train.back().timestamp <= split.dev.front().timestamp;
    }
    if (!split.dev.empty() && !split.test.empty()) {
      order_ok = order_ok && split.dev.back().timestamp <= split.test.front().timestamp;
    }
    pass = pass && sizes_ok && order_ok;
    detail += " n=" + std::to_string(c.n) + ": (" + std::to_string(split.train.size()) +
              "," + std::to_string(split.dev.size()) + "," +
              std::to_string(split.test.size()) + ")" + (order_ok ? "" : " ORDER-BROKEN") +
              ";";
  }
  return {pass, detail};
}

// ---------------------------------------------------------------------------
// Non-binding report: relative ordering of the three formulations.
// ---------------------------------------------------------------------------
void formulation_report() {
  DatasetSpec spec;
  spec.domain_field_cardinalities = {8};
  spec.agnostic_field_cardinalities = {8, 8, 8, 8};
  spec.total_samples = 60000;
  spec.long_tail_exponent = 1.2;
  spec.rule_style = RuleStyle::kConflicting;
  spec.rule_fields_per_domain = 3;
  spec.rule_seed = 77;
  const auto samples = generate_synthetic(spec, 777);
  const Split split = split_by_timestamp(samples);
  const Vocabulary vocab = identity_vocabulary(spec);

  TrainConfig config;
  config.hidden_sizes = {32, 16};
  config.embed_dim = 4;
  config.batch_size = 256;
  config.epochs = 3;
  config.seed = 7;

  std::printf("[INFO] non-binding formulation comparison (one seed, test AUC):\n");
  for (const PrunerMode method : {PrunerMode::kFusion, PrunerMode::kBinarization,
                                  PrunerMode::kScaling, PrunerMode::kNone}) {
    config.method = method;
    const TrainResult result = train(config, split.train, split.dev, vocab);
    const double test_auc = evaluate(result.best.model, result.best.alpha, split.test).auc;
    std::printf("[INFO]   %-14s auc=%.4f\n", to_string(method).c_str(), test_auc);
  }
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "gradient correctness (Scaling, 50 seeds)", criterion_1},
      {2, "fusion surrogate gradients away from the threshold", criterion_2},
      {3, "rank AUC equals the pairwise oracle", criterion_3},
      {4, "factor range invariants (1e5 inputs per method)", criterion_4},
      {5, "sparsity ratios land in the boundary band", criterion_5},
      {6, "fusion beats the plain DNN on conflicting domains", criterion_6},
      {7, "shared-rule domains share masks", criterion_7},
      {8, "schedule contracts over exported history", criterion_8},
      {9, "determinism and checkpoint round-trip", criterion_9},
      {10, "timestamp split 4:1:1 with remainder rule", criterion_10},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  bool with_report = false;
  if (argc > 1) {
    const std::string arg = argv[1];
    if (arg == "report") {
      formulation_report();
      return 0;
    }
    if (arg == "all") {
      with_report = true;
    } else {
      only = std::atoi(argv[1]);
    }
  }

  int failures = 0;
  for (const Criterion& c : criteria()) {
    if (only != 0 && c.id != only) continue;
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s (%s)\n", outcome.pass ? "PASS" : "FAIL", c.id,
                c.name, outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  if (with_report) formulation_report();
  return failures;
}
