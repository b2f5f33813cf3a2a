#include "adasparse/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "adasparse/metrics.hpp"
#include "adasparse/textio.hpp"

namespace adasparse {

std::string to_string(PrunerMode mode) {
  switch (mode) {
    case PrunerMode::kNone:
      return "none";
    case PrunerMode::kBinarization:
      return "binarization";
    case PrunerMode::kScaling:
      return "scaling";
    case PrunerMode::kFusion:
      return "fusion";
  }
  return "?";
}

PrunerMode pruner_mode_from_string(const std::string& s) {
  if (s == "none") return PrunerMode::kNone;
  if (s == "binarization") return PrunerMode::kBinarization;
  if (s == "scaling") return PrunerMode::kScaling;
  if (s == "fusion") return PrunerMode::kFusion;
  throw SpecError("method must be one of none|binarization|scaling|fusion, got '" + s + "'");
}

void TrainConfig::validate() const {
  if (hidden_sizes.empty()) throw SpecError("config: need at least one hidden layer");
  for (auto h : hidden_sizes) {
    if (h < 1) throw SpecError("config: hidden sizes must be >= 1");
  }
  if (embed_dim < 1) throw SpecError("config: embed_dim must be >= 1");
  if (lr <= 0.0) throw SpecError("config: lr must be > 0");
  if (batch_size < 1) throw SpecError("config: batch_size must be >= 1");
  if (epochs < 0) throw SpecError("config: epochs must be >= 0");
  if (method != PrunerMode::kNone) {
    SparsityBoundary{r_min, r_max}.validate();
    FactorMethod{FactorKind::kFusion, alpha_init, beta, epsilon}.validate();
    if (alpha_max < alpha_init) throw SpecError("config: alpha_max must be >= alpha_init");
    if (lambda_cap < lambda_init) throw SpecError("config: lambda_cap must be >= lambda_init");
  }
}

std::string format_train_config(const TrainConfig& c) {
  std::ostringstream out;
  out << "alpha_init=" << fmt_double(c.alpha_init) << "\n";
  out << "alpha_max=" << fmt_double(c.alpha_max) << "\n";
  out << "batch_size=" << c.batch_size << "\n";
  out << "beta=" << fmt_double(c.beta) << "\n";
  out << "embed_dim=" << c.embed_dim << "\n";
  out << "epochs=" << c.epochs << "\n";
  out << "epsilon=" << fmt_double(c.epsilon) << "\n";
  std::vector<std::string> hidden;
  for (auto h : c.hidden_sizes) hidden.push_back(std::to_string(h));
  out << "hidden=" << join(hidden, ',') << "\n";
  out << "lambda_cap=" << fmt_double(c.lambda_cap) << "\n";
  out << "lambda_init=" << fmt_double(c.lambda_init) << "\n";
  out << "lr=" << fmt_double(c.lr) << "\n";
  out << "method=" << to_string(c.method) << "\n";
  out << "r_max=" << fmt_double(c.r_max) << "\n";
  out << "r_min=" << fmt_double(c.r_min) << "\n";
  out << "schedule_steps=" << c.schedule_steps << "\n";
  out << "seed=" << c.seed << "\n";
  return out.str();
}

void apply_train_config_pairs(TrainConfig& c, const KvPairs& pairs) {
  for (const auto& [key, value] : pairs) {
    if (key == "alpha_init") {
      c.alpha_init = parse_double(value, key);
    } else if (key == "alpha_max") {
      c.alpha_max = parse_double(value, key);
    } else if (key == "batch_size") {
      c.batch_size = static_cast<std::int32_t>(parse_int(value, key));
    } else if (key == "beta") {
      c.beta = parse_double(value, key);
    } else if (key == "embed_dim") {
      c.embed_dim = static_cast<std::int32_t>(parse_int(value, key));
    } else if (key == "epochs") {
      c.epochs = static_cast<std::int32_t>(parse_int(value, key));
    } else if (key == "epsilon") {
      c.epsilon = parse_double(value, key);
    } else if (key == "hidden") {
      c.hidden_sizes = parse_int_list(value, key);
    } else if (key == "lambda_cap") {
      c.lambda_cap = parse_double(value, key);
    } else if (key == "lambda_init") {
      c.lambda_init = parse_double(value, key);
    } else if (key == "lr") {
      c.lr = parse_double(value, key);
    } else if (key == "method") {
      c.method = pruner_mode_from_string(value);
    } else if (key == "r_max") {
      c.r_max = parse_double(value, key);
    } else if (key == "r_min") {
      c.r_min = parse_double(value, key);
    } else if (key == "schedule_steps") {
      c.schedule_steps = parse_int(value, key);
    } else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(parse_int(value, key));
    } else {
      throw SpecError("config: unknown key '" + key + "'");
    }
  }
}

TrainConfig parse_train_config(const KvPairs& pairs) {
  TrainConfig c;
  apply_train_config_pairs(c, pairs);
  c.validate();
  return c;
}

namespace {

// Stream ids for the independent init streams derived from the config seed.
constexpr std::uint64_t kEmbeddingStream = 2;
constexpr std::uint64_t kBackboneStream = 3;
constexpr std::uint64_t kPrunerStream = 4;
constexpr std::uint64_t kShuffleStream = 5;

FactorKind factor_kind_of(PrunerMode mode) {
  switch (mode) {
    case PrunerMode::kBinarization:
      return FactorKind::kBinarization;
    case PrunerMode::kScaling:
      return FactorKind::kScaling;
    case PrunerMode::kFusion:
      return FactorKind::kFusion;
    case PrunerMode::kNone:
      break;
  }
  throw SpecError("no factor kind for method 'none'");
}

}  // namespace

AdaSparseModel make_model(const TrainConfig& config, const Vocabulary& vocab) {
  config.validate();
  AdaSparseModel model;
  model.vocab = vocab;
  Rng emb_rng(config.seed, kEmbeddingStream);
  model.embeddings = make_embeddings(vocab, config.embed_dim, emb_rng);
  const std::size_t input_width =
      model.embeddings.domain_width() + model.embeddings.agnostic_width();
  Rng bb_rng(config.seed, kBackboneStream);
  model.backbone = make_backbone(input_width, config.hidden_sizes, bb_rng);
  if (config.method != PrunerMode::kNone) {
    model.has_pruner = true;
    model.pruner_settings.kind = factor_kind_of(config.method);
    model.pruner_settings.beta = config.beta;
    model.pruner_settings.epsilon = config.epsilon;
    model.pruner_settings.boundary = SparsityBoundary{config.r_min, config.r_max};
    std::vector<std::size_t> gate_widths(model.backbone.widths.begin(),
                                         model.backbone.widths.end() - 1);
    Rng pr_rng(config.seed, kPrunerStream);
    model.pruner = make_pruner(model.embeddings.domain_width(), gate_widths, pr_rng);
  }
  return model;
}

double cross_entropy(std::int32_t label, double p) {
  const double clamped = std::min(1.0 - 1e-12, std::max(1e-12, p));
  return label ? -std::log(clamped) : -std::log(1.0 - clamped);
}

double total_loss(const AdaSparseModel& model, std::span<const Sample> batch,
                  double alpha, double lambda_hat) {
  if (batch.empty()) return 0.0;
  const bool regularize =
      model.has_pruner && model.pruner_settings.kind != FactorKind::kScaling;
  double total = 0.0;
  for (const Sample& s : batch) {
    SampleForward fwd = model_forward(model, s, alpha);
    total += cross_entropy(s.label, fwd.pctr);
    if (regularize) {
      total += sparsity_loss(fwd.ratios, model.pruner_settings.boundary, lambda_hat);
    }
  }
  return total / static_cast<double>(batch.size());
}

AdamState make_adam(const AdaSparseModel& model) {
  AdamState state;
  auto moments_for = [](std::size_t n) { return Moments{Vec(n, 0.0), Vec(n, 0.0)}; };
  for (const Matrix& w : model.backbone.weights) state.backbone_w.push_back(moments_for(w.size()));
  for (const Vec& b : model.backbone.biases) state.backbone_b.push_back(moments_for(b.size()));
  if (model.has_pruner) {
    for (const Matrix& w : model.pruner.weights) state.pruner_w.push_back(moments_for(w.size()));
  }
  for (const Matrix& t : model.embeddings.domain_tables) {
    state.embed_domain.push_back(moments_for(t.size()));
  }
  for (const Matrix& t : model.embeddings.agnostic_tables) {
    state.embed_agnostic.push_back(moments_for(t.size()));
  }
  return state;
}

void adam_update_span(std::span<double> param, std::span<const double> grad,
                      std::span<double> m, std::span<double> v, std::int64_t step,
                      double lr, double beta1, double beta2, double eps) {
  if (param.size() != grad.size() || param.size() != m.size() || param.size() != v.size()) {
    throw ShapeError("adam_update_span: length mismatch");
  }
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    m[i] = beta1 * m[i] + (1.0 - beta1) * g;
    v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    param[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

void adam_step(AdaSparseModel& model, const ModelGrads& grads, AdamState& state, double lr) {
  state.step += 1;
  const std::int64_t t = state.step;
  for (std::size_t l = 0; l < model.backbone.weights.size(); ++l) {
    adam_update_span(model.backbone.weights[l].data, grads.backbone_w[l].data,
                     state.backbone_w[l].m, state.backbone_w[l].v, t, lr, state.beta1,
                     state.beta2, state.eps);
    adam_update_span(model.backbone.biases[l], grads.backbone_b[l], state.backbone_b[l].m,
                     state.backbone_b[l].v, t, lr, state.beta1, state.beta2, state.eps);
  }
  if (model.has_pruner) {
    for (std::size_t l = 0; l < model.pruner.weights.size(); ++l) {
      adam_update_span(model.pruner.weights[l].data, grads.pruner_w[l].data,
                       state.pruner_w[l].m, state.pruner_w[l].v, t, lr, state.beta1,
                       state.beta2, state.eps);
    }
  }
  const auto dim = static_cast<std::size_t>(model.embeddings.dim);
  for (const auto& [key, grad] : grads.embed.rows) {
    Matrix& table = key.domain_side ? model.embeddings.domain_tables[key.field]
                                    : model.embeddings.agnostic_tables[key.field];
    Moments& mom = key.domain_side ? state.embed_domain[key.field]
                                   : state.embed_agnostic[key.field];
    const std::size_t off = static_cast<std::size_t>(key.row) * dim;
    adam_update_span(std::span<double>(table.data.data() + off, dim),
                     std::span<const double>(grad.data(), dim),
                     std::span<double>(mom.m.data() + off, dim),
                     std::span<double>(mom.v.data() + off, dim), t, lr, state.beta1,
                     state.beta2, state.eps);
  }
}

std::string format_step_history(const TrainHistory& history) {
  std::ostringstream out;
  out << "step,layer,r_l,alpha,lambda_hat\n";
  for (const StepRecord& rec : history.steps) {
    if (rec.layer_ratios.empty()) {
      out << rec.step << ",-1,0," << fmt_double(rec.alpha) << ','
          << fmt_double(rec.lambda_hat) << "\n";
      continue;
    }
    for (std::size_t l = 0; l < rec.layer_ratios.size(); ++l) {
      out << rec.step << ',' << l << ',' << fmt_double(rec.layer_ratios[l]) << ','
          << fmt_double(rec.alpha) << ',' << fmt_double(rec.lambda_hat) << "\n";
    }
  }
  return out.str();
}

std::string format_epoch_history(const TrainHistory& history) {
  std::ostringstream out;
  out << "epoch,train_loss,dev_logloss,dev_auc,dev_gauc\n";
  for (const EpochRecord& rec : history.epochs) {
    out << rec.epoch << ',' << fmt_double(rec.train_loss) << ','
        << fmt_double(rec.dev_logloss) << ',' << fmt_double(rec.dev_auc) << ','
        << fmt_double(rec.dev_gauc) << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Checkpoint serialization
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'A', 'D', 'S', 'P'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, sizeof(bits));
  put_u64(out, bits);
}

void put_section(std::string& out, const std::string& payload) {
  put_u64(out, payload.size());
  out += payload;
}

void put_matrix(std::string& out, const Matrix& m) {
  put_u64(out, m.rows);
  put_u64(out, m.cols);
  for (double x : m.data) put_f64(out, x);
}

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw IoError("checkpoint: truncated file");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 4;
    return x;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 8;
    return x;
  }
  double f64() {
    const std::uint64_t bits = u64();
    double x;
    std::memcpy(&x, &bits, sizeof(x));
    return x;
  }
  std::string section() {
    const std::uint64_t len = u64();
    need(len);
    std::string s = buf.substr(pos, len);
    pos += len;
    return s;
  }
  void matrix_into(Matrix& m) {
    const std::uint64_t rows = u64();
    const std::uint64_t cols = u64();
    if (rows != m.rows || cols != m.cols) {
      throw IoError("checkpoint: matrix shape does not match the config");
    }
    for (double& x : m.data) x = f64();
  }
};

std::uint64_t matrix_count(const AdaSparseModel& model) {
  std::uint64_t count = model.embeddings.domain_tables.size() +
                        model.embeddings.agnostic_tables.size() +
                        model.backbone.weights.size() + model.backbone.biases.size();
  if (model.has_pruner) count += model.pruner.weights.size();
  return count;
}

template <class Fn>
void for_each_matrix(AdaSparseModel& model, Fn&& fn) {
  for (Matrix& t : model.embeddings.domain_tables) fn(t);
  for (Matrix& t : model.embeddings.agnostic_tables) fn(t);
  for (Matrix& w : model.backbone.weights) fn(w);
  for (Vec& b : model.backbone.biases) {
    Matrix wrap(1, b.size());
    wrap.data = b;
    fn(wrap);
    b = wrap.data;
  }
  if (model.has_pruner) {
    for (Matrix& w : model.pruner.weights) fn(w);
  }
}

void put_vec_as_matrix(std::string& out, const Vec& b) {
  put_u64(out, 1);
  put_u64(out, b.size());
  for (double x : b) put_f64(out, x);
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_section(out, format_train_config(ckpt.config));
  std::ostringstream vocab_text;
  ckpt.model.vocab.save(vocab_text);
  put_section(out, vocab_text.str());

  const AdaSparseModel& model = ckpt.model;
  put_u64(out, matrix_count(model));
  for (const Matrix& t : model.embeddings.domain_tables) put_matrix(out, t);
  for (const Matrix& t : model.embeddings.agnostic_tables) put_matrix(out, t);
  for (const Matrix& w : model.backbone.weights) put_matrix(out, w);
  for (const Vec& b : model.backbone.biases) put_vec_as_matrix(out, b);
  if (model.has_pruner) {
    for (const Matrix& w : model.pruner.weights) put_matrix(out, w);
  }

  put_u64(out, static_cast<std::uint64_t>(ckpt.steps_done));
  put_u64(out, static_cast<std::uint64_t>(ckpt.schedule_steps));
  put_f64(out, ckpt.alpha);
  put_f64(out, ckpt.lambda_hat);
  write_file(path, out);
}

Checkpoint load_checkpoint(const std::string& path) {
  const std::string buf = read_file(path);
  Reader r{buf};
  r.need(4);
  if (std::memcmp(buf.data(), kMagic, 4) != 0) throw IoError(path + ": not a checkpoint file");
  r.pos = 4;
  if (r.u32() != kVersion) throw IoError(path + ": unsupported checkpoint version");

  Checkpoint ckpt;
  {
    std::istringstream cfg(r.section());
    ckpt.config = parse_train_config(parse_kv(cfg));
  }
  {
    std::istringstream vocab(r.section());
    ckpt.model = make_model(ckpt.config, Vocabulary::load(vocab));
  }
  const std::uint64_t expected = r.u64();
  if (expected != matrix_count(ckpt.model)) {
    throw IoError(path + ": matrix count mismatch");
  }
  for_each_matrix(ckpt.model, [&](Matrix& m) { r.matrix_into(m); });

  ckpt.steps_done = static_cast<std::int64_t>(r.u64());
  ckpt.schedule_steps = static_cast<std::int64_t>(r.u64());
  ckpt.alpha = r.f64();
  ckpt.lambda_hat = r.f64();
  if (r.pos != buf.size()) throw IoError(path + ": trailing bytes");
  return ckpt;
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

namespace {

struct DevScore {
  double auc = std::numeric_limits<double>::quiet_NaN();
  double gauc = std::numeric_limits<double>::quiet_NaN();
  double logloss = std::numeric_limits<double>::quiet_NaN();
  // Selection score: dev AUC when defined, otherwise -logloss.
  double selection() const { return std::isfinite(auc) ? auc : -logloss; }
};

DevScore score_dev(const AdaSparseModel& model, const std::vector<Sample>& dev,
                   double alpha) {
  DevScore score;
  if (dev.empty()) return score;
  Vec preds(dev.size());
  Vec labels(dev.size());
  std::vector<std::string> keys(dev.size());
  for (std::size_t i = 0; i < dev.size(); ++i) {
    preds[i] = model_forward(model, dev[i], alpha).pctr;
    labels[i] = dev[i].label;
    keys[i] = domain_key(dev[i]);
  }
  score.logloss = logloss(preds, labels);
  try {
    score.auc = auc(preds, labels);
  } catch (const MetricError&) {
  }
  try {
    score.gauc = gauc(preds, labels, keys).value;
  } catch (const MetricError&) {
  }
  return score;
}

}  // namespace

TrainResult train(const TrainConfig& config, const std::vector<Sample>& train_set,
                  const std::vector<Sample>& dev_set, const Vocabulary& vocab) {
  config.validate();
  TrainResult result;
  AdaSparseModel model = make_model(config, vocab);

  const std::int64_t steps_per_epoch =
      train_set.empty()
          ? 0
          : static_cast<std::int64_t>((train_set.size() + config.batch_size - 1) /
                                      static_cast<std::size_t>(config.batch_size));
  const std::int64_t total_steps = steps_per_epoch * config.epochs;
  const std::int64_t schedule_steps =
      config.schedule_steps > 0 ? config.schedule_steps : total_steps;

  const LinearSchedule alpha_sched{config.alpha_init, config.alpha_max, schedule_steps};
  const LinearSchedule lambda_sched{config.lambda_init, config.lambda_cap, schedule_steps};
  const bool regularize =
      model.has_pruner && model.pruner_settings.kind != FactorKind::kScaling;
  if (model.has_pruner && model.pruner_settings.kind == FactorKind::kScaling) {
    std::fprintf(stderr,
                 "adasparse: scaling factors never reach zero; "
                 "sparsity regularizer disabled\n");
  }

  auto snapshot = [&](std::int64_t steps_done) {
    Checkpoint ckpt;
    ckpt.config = config;
    ckpt.model = model;
    ckpt.steps_done = steps_done;
    ckpt.schedule_steps = schedule_steps;
    ckpt.alpha = alpha_sched.at(steps_done);
    ckpt.lambda_hat = lambda_sched.at(steps_done);
    return ckpt;
  };

  if (config.epochs == 0 || train_set.empty()) {
    result.best = snapshot(0);
    result.final_ = result.best;
    return result;
  }

  AdamState adam = make_adam(model);
  ModelGrads grads = make_grads(model);
  Rng shuffle_rng(config.seed, kShuffleStream);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  const std::size_t layers = model.backbone.layer_count();
  std::int64_t step = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  bool have_best = false;

  for (std::int32_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    std::int64_t epoch_batches = 0;

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const double batch_n = static_cast<double>(end - start);
      const double alpha = alpha_sched.at(step);
      const double lambda_hat = lambda_sched.at(step);

      grads.zero();
      double batch_loss = 0.0;
      std::vector<double> ratio_sums(model.has_pruner ? layers : 0, 0.0);

      for (std::size_t i = start; i < end; ++i) {
        const Sample& s = train_set[order[i]];
        SampleForward fwd = model_forward(model, s, alpha);
        batch_loss += cross_entropy(s.label, fwd.pctr);
        if (regularize) {
          batch_loss +=
              sparsity_loss(fwd.ratios, model.pruner_settings.boundary, lambda_hat);
        }
        for (std::size_t l = 0; l < fwd.ratios.size(); ++l) {
          ratio_sums[l] += fwd.ratios[l];
        }
        const double d_logit = fwd.pctr - static_cast<double>(s.label);
        model_backward(model, s, fwd, d_logit, regularize ? lambda_hat : 0.0, grads);
      }
      batch_loss /= batch_n;
      if (!std::isfinite(batch_loss)) {
        throw NumericError("training diverged: non-finite loss at step " +
                           std::to_string(step));
      }
      grads.scale(1.0 / batch_n);
      adam_step(model, grads, adam, config.lr);

      StepRecord rec;
      rec.step = step;
      rec.alpha = alpha;
      rec.lambda_hat = lambda_hat;
      for (double sum : ratio_sums) rec.layer_ratios.push_back(sum / batch_n);
      result.history.steps.push_back(std::move(rec));

      epoch_loss += batch_loss;
      epoch_batches++;
      step++;
    }

    const double cur_alpha = alpha_sched.at(step);
    const DevScore dev = score_dev(model, dev_set, cur_alpha);
    EpochRecord erec;
    erec.epoch = epoch;
    erec.train_loss = epoch_loss / static_cast<double>(epoch_batches);
    erec.dev_logloss = dev.logloss;
    erec.dev_auc = dev.auc;
    erec.dev_gauc = dev.gauc;
    result.history.epochs.push_back(erec);

    const double sel = dev_set.empty() ? -erec.train_loss : dev.selection();
    if (!have_best || sel > best_score) {
      best_score = sel;
      have_best = true;
      result.best = snapshot(step);
    }
  }

  // Terminal schedule row so exported histories cover the full ramp.
  StepRecord last;
  last.step = step;
  last.alpha = alpha_sched.at(step);
  last.lambda_hat = lambda_sched.at(step);
  if (!result.history.steps.empty()) {
    last.layer_ratios = result.history.steps.back().layer_ratios;
  }
  result.history.steps.push_back(std::move(last));

  result.final_ = snapshot(step);
  if (!have_best) result.best = result.final_;
  return result;
}

Vec predict(const Checkpoint& ckpt, std::span<const Sample> samples) {
  Vec out;
  out.reserve(samples.size());
  for (const Sample& s : samples) {
    out.push_back(model_forward(ckpt.model, s, ckpt.alpha).pctr);
  }
  return out;
}

}  // namespace adasparse
