#include "adasparse/embedding.hpp"

#include <cmath>

namespace adasparse {

namespace {

void init_table(Matrix& table, std::int32_t dim, Rng& rng) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (auto& x : table.data) x = rng.uniform(-scale, scale);
}

void gather_side(const std::vector<Matrix>& tables, const std::vector<std::int32_t>& feats,
                 std::int32_t dim, const char* side, Vec& out) {
  if (feats.size() != tables.size()) {
    throw SchemaError(std::string("embed: sample has ") + std::to_string(feats.size()) +
                      " " + side + " fields, tables have " + std::to_string(tables.size()));
  }
  out.assign(feats.size() * static_cast<std::size_t>(dim), 0.0);
  for (std::size_t f = 0; f < feats.size(); ++f) {
    const auto row = feats[f];
    if (row < 0 || static_cast<std::size_t>(row) >= tables[f].rows) {
      throw SchemaError(std::string("embed: ") + side + " field " + std::to_string(f) +
                        " id " + std::to_string(row) + " out of range");
    }
    const auto src = tables[f].row(static_cast<std::size_t>(row));
    std::copy(src.begin(), src.end(), out.begin() + f * static_cast<std::size_t>(dim));
  }
}

void scatter_side(const std::vector<std::int32_t>& feats, std::int32_t dim,
                  bool domain_side, std::span<const double> grad, EmbeddingGrads& grads) {
  if (grad.size() != feats.size() * static_cast<std::size_t>(dim)) {
    throw ShapeError("embed_backward: gradient length mismatch");
  }
  for (std::size_t f = 0; f < feats.size(); ++f) {
    const EmbeddingGrads::Key key{domain_side, static_cast<std::uint32_t>(f), feats[f]};
    auto [it, inserted] = grads.rows.try_emplace(key, static_cast<std::size_t>(dim), 0.0);
    Vec& acc = it->second;
    for (std::int32_t j = 0; j < dim; ++j) {
      acc[static_cast<std::size_t>(j)] += grad[f * static_cast<std::size_t>(dim) +
                                               static_cast<std::size_t>(j)];
    }
  }
}

}  // namespace

EmbeddingSet make_embeddings(const Vocabulary& vocab, std::int32_t dim, Rng& rng) {
  if (dim < 1) throw SpecError("embedding dim must be >= 1");
  EmbeddingSet emb;
  emb.dim = dim;
  for (std::size_t f = 0; f < vocab.domain_field_count(); ++f) {
    Matrix t(static_cast<std::size_t>(vocab.row_count(true, f)), static_cast<std::size_t>(dim));
    init_table(t, dim, rng);
    emb.domain_tables.push_back(std::move(t));
  }
  for (std::size_t f = 0; f < vocab.agnostic_field_count(); ++f) {
    Matrix t(static_cast<std::size_t>(vocab.row_count(false, f)), static_cast<std::size_t>(dim));
    init_table(t, dim, rng);
    emb.agnostic_tables.push_back(std::move(t));
  }
  return emb;
}

void embed(const EmbeddingSet& emb, const Sample& s, Vec& e_d, Vec& e_a) {
  gather_side(emb.domain_tables, s.domain_feats, emb.dim, "domain", e_d);
  gather_side(emb.agnostic_tables, s.agnostic_feats, emb.dim, "agnostic", e_a);
}

void embed_backward(const EmbeddingSet& emb, const Sample& s,
                    std::span<const double> grad_e_d, std::span<const double> grad_e_a,
                    EmbeddingGrads& grads) {
  scatter_side(s.domain_feats, emb.dim, true, grad_e_d, grads);
  scatter_side(s.agnostic_feats, emb.dim, false, grad_e_a, grads);
}

}  // namespace adasparse
