#include "adasparse/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "adasparse/numerics.hpp"
#include "adasparse/rng.hpp"
#include "adasparse/textio.hpp"

namespace adasparse {

std::string domain_key(const Sample& s) {
  std::string key;
  for (std::size_t i = 0; i < s.domain_feats.size(); ++i) {
    if (i) key.push_back(':');
    key += std::to_string(s.domain_feats[i]);
  }
  return key;
}

std::int64_t DatasetSpec::domain_count() const {
  std::int64_t d = 1;
  for (auto c : domain_field_cardinalities) d *= c;
  return d;
}

void DatasetSpec::validate() const {
  if (domain_field_cardinalities.empty()) {
    throw SpecError("dataset spec: need at least one domain field");
  }
  for (auto c : domain_field_cardinalities) {
    if (c < 1) throw SpecError("dataset spec: domain cardinalities must be >= 1");
  }
  if (agnostic_field_cardinalities.empty()) {
    throw SpecError("dataset spec: need at least one agnostic field");
  }
  for (auto c : agnostic_field_cardinalities) {
    if (c < 1) throw SpecError("dataset spec: agnostic cardinalities must be >= 1");
  }
  if (domain_count() < 2) throw SpecError("dataset spec: need at least 2 domains");
  if (total_samples < 0) throw SpecError("dataset spec: total_samples must be >= 0");
  if (long_tail_exponent < 0.0) throw SpecError("dataset spec: long_tail_exponent must be >= 0");
  if (rule_fields_per_domain < 0) {
    throw SpecError("dataset spec: rule_fields_per_domain must be >= 0");
  }
  const auto [a, b] = similar_domains;
  if (a >= 0 || b >= 0) {
    if (a < 0 || b < 0 || a == b || a >= domain_count() || b >= domain_count()) {
      throw SpecError("dataset spec: similar_domains must name two distinct domains");
    }
  }
}

DatasetSpec parse_dataset_spec(const KvPairs& pairs) {
  DatasetSpec spec;
  for (const auto& [key, value] : pairs) {
    if (key == "domain_cards") {
      spec.domain_field_cardinalities = parse_int_list(value, key);
    } else if (key == "agnostic_cards") {
      spec.agnostic_field_cardinalities = parse_int_list(value, key);
    } else if (key == "total_samples") {
      spec.total_samples = parse_int(value, key);
    } else if (key == "long_tail_exponent") {
      spec.long_tail_exponent = parse_double(value, key);
    } else if (key == "rule_seed") {
      spec.rule_seed = static_cast<std::uint64_t>(parse_int(value, key));
    } else if (key == "rule_fields_per_domain") {
      spec.rule_fields_per_domain = static_cast<std::int32_t>(parse_int(value, key));
    } else if (key == "rule_weight_scale") {
      spec.rule_weight_scale = parse_double(value, key);
    } else if (key == "rule_bias_scale") {
      spec.rule_bias_scale = parse_double(value, key);
    } else if (key == "rule_style") {
      if (value == "independent") {
        spec.rule_style = RuleStyle::kIndependent;
      } else if (value == "conflicting") {
        spec.rule_style = RuleStyle::kConflicting;
      } else {
        throw SpecError("dataset spec: rule_style must be independent|conflicting");
      }
    } else if (key == "similar_domains") {
      const auto ids = parse_int_list(value, key);
      if (ids.size() != 2) throw SpecError("dataset spec: similar_domains wants two ids");
      spec.similar_domains = {ids[0], ids[1]};
    } else {
      throw SpecError("dataset spec: unknown key '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

DatasetSpec load_dataset_spec(const std::string& path) {
  return parse_dataset_spec(parse_kv_file(path));
}

int thread_cap() {
  const char* env = std::getenv("ADASPARSE_THREADS");
  if (!env || !*env) return 1;
  const int n = std::atoi(env);
  return n < 1 ? 1 : n;
}

namespace {

// Largest-remainder apportionment of `total` over weights; sums exactly.
std::vector<std::int64_t> apportion(std::int64_t total, const std::vector<double>& weights) {
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::int64_t> counts(weights.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double share = total * weights[i] / wsum;
    counts[i] = static_cast<std::int64_t>(std::floor(share));
    assigned += counts[i];
    remainders.push_back({share - std::floor(share), i});
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::int64_t k = 0; k < total - assigned; ++k) {
    counts[remainders[static_cast<std::size_t>(k) % remainders.size()].second]++;
  }
  return counts;
}

struct DomainRule {
  std::vector<std::int32_t> fields;            // active agnostic fields
  std::vector<std::vector<double>> weights;    // per active field: weight per value
  double bias = 0.0;
};

// Domain d reuses the rule of similar_domains.first when d is the second of
// the pair; everyone else owns rule id d.
std::int64_t rule_id_for(const DatasetSpec& spec, std::int64_t d) {
  const auto [a, b] = spec.similar_domains;
  if (a >= 0 && d == b) return a;
  return d;
}

std::vector<DomainRule> build_rules(const DatasetSpec& spec) {
  const std::int64_t domains = spec.domain_count();
  const auto fields = static_cast<std::int32_t>(spec.agnostic_field_cardinalities.size());
  const std::int32_t k = std::min(spec.rule_fields_per_domain, fields);

  // Distinct rules get disjoint field blocks (mod wrap) so "discrepant"
  // domains really depend on different features.
  std::vector<std::int64_t> distinct;
  for (std::int64_t d = 0; d < domains; ++d) {
    const auto rid = rule_id_for(spec, d);
    if (std::find(distinct.begin(), distinct.end(), rid) == distinct.end()) {
      distinct.push_back(rid);
    }
  }

  std::vector<DomainRule> rules(static_cast<std::size_t>(domains));
  for (std::size_t slot = 0; slot < distinct.size(); ++slot) {
    const std::int64_t rid = distinct[slot];
    DomainRule rule;
    Rng rng(spec.rule_seed, 0x52554c45ULL + static_cast<std::uint64_t>(rid));
    for (std::int32_t t = 0; t < k; ++t) {
      const auto f = spec.rule_style == RuleStyle::kConflicting
                         ? t % fields
                         : static_cast<std::int32_t>((slot * k + t) % fields);
      rule.fields.push_back(f);
    }
    for (std::size_t t = 0; t < rule.fields.size(); ++t) {
      const std::int32_t f = rule.fields[t];
      std::vector<double> w(static_cast<std::size_t>(spec.agnostic_field_cardinalities[f]));
      if (spec.rule_style == RuleStyle::kConflicting) {
        // Shared magnitudes across all rules; the sign of field slot t flips
        // with bit t of the rule id, so every domain gets its own sign
        // pattern over the same features.
        Rng wrng(spec.rule_seed, 0x5348415245ULL + static_cast<std::uint64_t>(f));
        for (auto& x : w) x = wrng.uniform(-spec.rule_weight_scale, spec.rule_weight_scale);
        if ((rid >> (t % 62)) & 1) {
          for (auto& x : w) x = -x;
        }
      } else {
        for (auto& x : w) x = rng.uniform(-spec.rule_weight_scale, spec.rule_weight_scale);
      }
      rule.weights.push_back(std::move(w));
    }
    rule.bias = spec.rule_bias_scale == 0.0
                    ? 0.0
                    : rng.uniform(-spec.rule_bias_scale, spec.rule_bias_scale);
    rules[static_cast<std::size_t>(rid)] = rule;
  }
  for (std::int64_t d = 0; d < domains; ++d) {
    rules[static_cast<std::size_t>(d)] = rules[static_cast<std::size_t>(rule_id_for(spec, d))];
  }
  return rules;
}

std::vector<std::int32_t> domain_digits(const DatasetSpec& spec, std::int64_t d) {
  std::vector<std::int32_t> digits(spec.domain_field_cardinalities.size());
  for (std::size_t i = spec.domain_field_cardinalities.size(); i-- > 0;) {
    const auto card = spec.domain_field_cardinalities[i];
    digits[i] = static_cast<std::int32_t>(d % card);
    d /= card;
  }
  return digits;
}

void generate_domain(const DatasetSpec& spec, std::uint64_t seed, std::int64_t d,
                     const DomainRule& rule, std::int64_t count, Sample* out) {
  Rng rng(seed, 0x444f4dULL * 131 + static_cast<std::uint64_t>(d));
  const auto digits = domain_digits(spec, d);
  for (std::int64_t i = 0; i < count; ++i) {
    Sample& s = out[i];
    s.domain_feats = digits;
    s.agnostic_feats.resize(spec.agnostic_field_cardinalities.size());
    for (std::size_t f = 0; f < s.agnostic_feats.size(); ++f) {
      s.agnostic_feats[f] = static_cast<std::int32_t>(
          rng.below(static_cast<std::uint64_t>(spec.agnostic_field_cardinalities[f])));
    }
    double logit = rule.bias;
    for (std::size_t t = 0; t < rule.fields.size(); ++t) {
      logit += rule.weights[t][static_cast<std::size_t>(
          s.agnostic_feats[static_cast<std::size_t>(rule.fields[t])])];
    }
    s.label = rng.bernoulli(sigmoid_scalar(logit)) ? 1 : 0;
    s.timestamp = static_cast<std::int64_t>(rng.below(1000000000ULL));
  }
}

}  // namespace

std::vector<Sample> generate_synthetic(const DatasetSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::int64_t domains = spec.domain_count();

  std::vector<double> weights(static_cast<std::size_t>(domains));
  for (std::int64_t d = 0; d < domains; ++d) {
    weights[static_cast<std::size_t>(d)] =
        std::pow(static_cast<double>(d + 1), -spec.long_tail_exponent);
  }
  const auto counts = apportion(spec.total_samples, weights);
  const auto rules = build_rules(spec);

  std::vector<std::int64_t> offsets(static_cast<std::size_t>(domains) + 1, 0);
  for (std::int64_t d = 0; d < domains; ++d) {
    offsets[static_cast<std::size_t>(d) + 1] =
        offsets[static_cast<std::size_t>(d)] + counts[static_cast<std::size_t>(d)];
  }

  std::vector<Sample> samples(static_cast<std::size_t>(spec.total_samples));
  const int workers = std::min<std::int64_t>(thread_cap(), domains);
  auto run_range = [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t d = lo; d < hi; ++d) {
      generate_domain(spec, seed, d, rules[static_cast<std::size_t>(d)],
                      counts[static_cast<std::size_t>(d)],
                      samples.data() + offsets[static_cast<std::size_t>(d)]);
    }
  };
  if (workers <= 1) {
    run_range(0, domains);
  } else {
    // Per-domain substreams make the result independent of sharding.
    std::vector<std::thread> pool;
    const std::int64_t chunk = (domains + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const std::int64_t lo = w * chunk;
      const std::int64_t hi = std::min<std::int64_t>(lo + chunk, domains);
      if (lo < hi) pool.emplace_back(run_range, lo, hi);
    }
    for (auto& t : pool) t.join();
  }
  return samples;
}

Vocabulary identity_vocabulary(const DatasetSpec& spec) {
  std::vector<std::string> dom, agn;
  for (std::size_t i = 0; i < spec.domain_field_cardinalities.size(); ++i) {
    dom.push_back("d" + std::to_string(i));
  }
  for (std::size_t i = 0; i < spec.agnostic_field_cardinalities.size(); ++i) {
    agn.push_back("a" + std::to_string(i));
  }
  Vocabulary vocab(dom, agn);
  for (std::size_t f = 0; f < spec.domain_field_cardinalities.size(); ++f) {
    for (std::int32_t v = 0; v < spec.domain_field_cardinalities[f]; ++v) {
      vocab.add(true, f, std::to_string(v));
    }
  }
  for (std::size_t f = 0; f < spec.agnostic_field_cardinalities.size(); ++f) {
    for (std::int32_t v = 0; v < spec.agnostic_field_cardinalities[f]; ++v) {
      vocab.add(false, f, std::to_string(v));
    }
  }
  return vocab;
}

CsvSchema load_schema(const std::string& path) {
  CsvSchema schema;
  for (const auto& [key, value] : parse_kv_file(path)) {
    if (key == "domain_fields") {
      if (!value.empty()) schema.domain_fields = split(value, ',');
    } else if (key == "agnostic_fields") {
      if (!value.empty()) schema.agnostic_fields = split(value, ',');
    } else {
      throw SchemaError("schema file: unknown key '" + key + "'");
    }
  }
  if (schema.domain_fields.empty()) throw SchemaError("schema file: no domain fields");
  if (schema.agnostic_fields.empty()) throw SchemaError("schema file: no agnostic fields");
  return schema;
}

void save_schema(const CsvSchema& schema, const std::string& path) {
  std::string text = "domain_fields=" + join(schema.domain_fields, ',') + "\n" +
                     "agnostic_fields=" + join(schema.agnostic_fields, ',') + "\n";
  write_file(path, text);
}

std::vector<Sample> load_csv(const std::string& path, const CsvSchema& schema,
                             Vocabulary& vocab, bool grow_vocab, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> expected = {"label", "timestamp"};
  expected.insert(expected.end(), schema.domain_fields.begin(), schema.domain_fields.end());
  expected.insert(expected.end(), schema.agnostic_fields.begin(), schema.agnostic_fields.end());
  const auto header = split(line, ',');
  if (header != expected) {
    throw SchemaError(path + ": header mismatch, expected '" + join(expected, ',') +
                      "' got '" + line + "'");
  }

  if (grow_vocab &&
      (vocab.domain_field_count() != schema.domain_fields.size() ||
       vocab.agnostic_field_count() != schema.agnostic_fields.size())) {
    vocab = Vocabulary(schema.domain_fields, schema.agnostic_fields);
  }
  if (vocab.domain_field_count() != schema.domain_fields.size() ||
      vocab.agnostic_field_count() != schema.agnostic_fields.size()) {
    throw SchemaError(path + ": schema does not match vocabulary field layout");
  }

  LoadReport rep;
  std::vector<Sample> samples;
  const std::size_t dn = schema.domain_fields.size();
  const std::size_t an = schema.agnostic_fields.size();
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 2 + dn + an) {
      rep.malformed_rows++;
      continue;
    }
    Sample s;
    if (cells[0] == "0") {
      s.label = 0;
    } else if (cells[0] == "1") {
      s.label = 1;
    } else {
      rep.malformed_rows++;
      continue;
    }
    try {
      s.timestamp = parse_int(cells[1], "timestamp");
    } catch (const SchemaError&) {
      rep.malformed_rows++;
      continue;
    }
    s.domain_feats.resize(dn);
    for (std::size_t f = 0; f < dn; ++f) {
      s.domain_feats[f] = grow_vocab ? vocab.add(true, f, cells[2 + f])
                                     : vocab.lookup(true, f, cells[2 + f]);
    }
    s.agnostic_feats.resize(an);
    for (std::size_t f = 0; f < an; ++f) {
      s.agnostic_feats[f] = grow_vocab ? vocab.add(false, f, cells[2 + dn + f])
                                       : vocab.lookup(false, f, cells[2 + dn + f]);
    }
    samples.push_back(std::move(s));
    rep.rows_loaded++;
  }
  if (report) *report = rep;
  return samples;
}

void write_csv(const std::string& path, const CsvSchema& schema,
               const std::vector<Sample>& samples, const Vocabulary& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "label,timestamp";
  for (const auto& f : schema.domain_fields) out << ',' << f;
  for (const auto& f : schema.agnostic_fields) out << ',' << f;
  out << "\n";
  for (const Sample& s : samples) {
    out << s.label << ',' << s.timestamp;
    for (std::size_t f = 0; f < s.domain_feats.size(); ++f) {
      out << ',' << vocab.value_of(true, f, s.domain_feats[f]);
    }
    for (std::size_t f = 0; f < s.agnostic_feats.size(); ++f) {
      out << ',' << vocab.value_of(false, f, s.agnostic_feats[f]);
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

Split split_by_timestamp(const std::vector<Sample>& samples) {
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return samples[a].timestamp < samples[b].timestamp;
  });

  const std::size_t n = samples.size();
  const std::size_t n_dev = n / 6;
  const std::size_t n_test = n / 6;
  const std::size_t n_train = n - n_dev - n_test;

  Split split;
  split.train.reserve(n_train);
  split.dev.reserve(n_dev);
  split.test.reserve(n_test);
  for (std::size_t i = 0; i < n; ++i) {
    const Sample& s = samples[order[i]];
    if (i < n_train) {
      split.train.push_back(s);
    } else if (i < n_train + n_dev) {
      split.dev.push_back(s);
    } else {
      split.test.push_back(s);
    }
  }
  return split;
}

std::map<std::string, std::vector<std::size_t>> partition_by_domain(
    const std::vector<Sample>& samples) {
  std::map<std::string, std::vector<std::size_t>> parts;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    parts[domain_key(samples[i])].push_back(i);
  }
  return parts;
}

}  // namespace adasparse
