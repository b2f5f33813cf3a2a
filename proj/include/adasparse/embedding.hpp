#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <tuple>
#include <vector>

#include "adasparse/data.hpp"
#include "adasparse/numerics.hpp"
#include "adasparse/rng.hpp"
#include "adasparse/vocab.hpp"

namespace adasparse {

/// Learnable per-field embedding tables. Each table has one row per known
/// value plus the reserved OOV row; dim is uniform across fields.
struct EmbeddingSet {
  std::int32_t dim = 8;
  std::vector<Matrix> domain_tables;
  std::vector<Matrix> agnostic_tables;

  std::size_t domain_width() const { return domain_tables.size() * static_cast<std::size_t>(dim); }
  std::size_t agnostic_width() const {
    return agnostic_tables.size() * static_cast<std::size_t>(dim);
  }
};

EmbeddingSet make_embeddings(const Vocabulary& vocab, std::int32_t dim, Rng& rng);

// e_d / e_a are the row concatenations in fixed field order.
// Throws SchemaError when the sample's field counts or ids don't fit the tables.
void embed(const EmbeddingSet& emb, const Sample& s, Vec& e_d, Vec& e_a);

/// Sparse per-row gradients for one training step. Rows looked up more than
/// once accumulate additively; rows never looked up are absent (zero).
struct EmbeddingGrads {
  struct Key {
    bool domain_side;
    std::uint32_t field;
    std::int32_t row;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, Vec> rows;  // ordered so optimizer application is deterministic

  void clear() { rows.clear(); }
};

void embed_backward(const EmbeddingSet& emb, const Sample& s,
                    std::span<const double> grad_e_d, std::span<const double> grad_e_a,
                    EmbeddingGrads& grads);

}  // namespace adasparse
