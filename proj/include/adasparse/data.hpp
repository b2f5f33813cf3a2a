#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "adasparse/errors.hpp"
#include "adasparse/textio.hpp"
#include "adasparse/vocab.hpp"

namespace adasparse {

/// One labeled impression. Feature values are dense vocabulary indices, one
/// per field, in fixed field order. The domain id of a sample is the tuple of
/// its domain-aware feature values.
struct Sample {
  std::vector<std::int32_t> domain_feats;
  std::vector<std::int32_t> agnostic_feats;
  std::int32_t label = 0;  // {0,1}
  std::int64_t timestamp = 0;

  bool operator==(const Sample&) const = default;
};

// Domain id key, e.g. "3" for one domain field or "3:1" for two.
std::string domain_key(const Sample& s);

enum class RuleStyle {
  kIndependent,  // each domain rule draws its own fields and weights
  kConflicting,  // all rules share fields; weight signs flip per domain
};

/// Synthetic multi-domain dataset description. Each domain carries a hidden
/// linear logit rule over a subset of agnostic-feature one-hots; labels are
/// Bernoulli draws of the rule's sigmoid. Domain sizes follow a long-tail
/// power law in the domain index.
struct DatasetSpec {
  std::vector<std::int32_t> domain_field_cardinalities;
  std::vector<std::int32_t> agnostic_field_cardinalities;
  std::int64_t total_samples = 0;
  double long_tail_exponent = 0.0;  // 0 = equal-sized domains
  std::uint64_t rule_seed = 1;
  std::int32_t rule_fields_per_domain = 2;  // clamped to the agnostic field count
  double rule_weight_scale = 2.0;
  double rule_bias_scale = 0.0;
  RuleStyle rule_style = RuleStyle::kIndependent;
  // When both >= 0, the second domain reuses the first one's rule.
  std::pair<std::int32_t, std::int32_t> similar_domains{-1, -1};

  std::int64_t domain_count() const;
  void validate() const;  // throws SpecError
};

DatasetSpec parse_dataset_spec(const KvPairs& pairs);
DatasetSpec load_dataset_spec(const std::string& path);

// Deterministic in (spec, seed): per-domain substreams, domains concatenated
// in domain-index order. Honors ADASPARSE_THREADS for sharding by domain.
std::vector<Sample> generate_synthetic(const DatasetSpec& spec, std::uint64_t seed);

// Vocabulary whose value strings are the decimal ids "0".."C-1" per field,
// so generated samples are their own indices. Fields named d0.., a0...
Vocabulary identity_vocabulary(const DatasetSpec& spec);

struct CsvSchema {
  std::vector<std::string> domain_fields;
  std::vector<std::string> agnostic_fields;
};

CsvSchema load_schema(const std::string& path);
void save_schema(const CsvSchema& schema, const std::string& path);

struct LoadReport {
  std::size_t rows_loaded = 0;
  std::size_t malformed_rows = 0;
};

// CSV format: header `label,timestamp,<domain fields...>,<agnostic fields...>`,
// comma-separated, no quoting. Malformed rows (bad label, bad timestamp,
// wrong column count) are skipped and counted; a wrong header is a
// SchemaError. grow_vocab selects between building the vocabulary and frozen
// lookups with OOV fallback.
std::vector<Sample> load_csv(const std::string& path, const CsvSchema& schema,
                             Vocabulary& vocab, bool grow_vocab,
                             LoadReport* report = nullptr);

void write_csv(const std::string& path, const CsvSchema& schema,
               const std::vector<Sample>& samples, const Vocabulary& vocab);

struct Split {
  std::vector<Sample> train;
  std::vector<Sample> dev;
  std::vector<Sample> test;
};

// Stable ascending sort by timestamp, then 4:1:1 by count with dev and test
// taking floor(n/6) each and the remainder going to train.
Split split_by_timestamp(const std::vector<Sample>& samples);

// Disjoint covering partition: domain key -> indices into `samples`.
std::map<std::string, std::vector<std::size_t>> partition_by_domain(
    const std::vector<Sample>& samples);

// Worker-thread cap from ADASPARSE_THREADS (default 1, minimum 1).
int thread_cap();

}  // namespace adasparse
