#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "adasparse/errors.hpp"

namespace adasparse {

/// Per-field map from categorical value to a dense row index. Known values
/// occupy [0, cardinality); every field reserves one extra out-of-vocabulary
/// row at index == cardinality, so embedding tables have cardinality+1 rows.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> domain_fields,
             std::vector<std::string> agnostic_fields);

  std::size_t domain_field_count() const { return domain_fields_.size(); }
  std::size_t agnostic_field_count() const { return agnostic_fields_.size(); }
  const std::vector<std::string>& domain_fields() const { return domain_fields_; }
  const std::vector<std::string>& agnostic_fields() const { return agnostic_fields_; }

  // Returns the index of value, inserting it if unseen.
  std::int32_t add(bool domain_side, std::size_t field, const std::string& value);
  // Frozen lookup: unseen values map to the reserved OOV index.
  std::int32_t lookup(bool domain_side, std::size_t field, const std::string& value) const;

  std::int32_t cardinality(bool domain_side, std::size_t field) const;
  std::int32_t oov_index(bool domain_side, std::size_t field) const {
    return cardinality(domain_side, field);
  }
  std::int32_t row_count(bool domain_side, std::size_t field) const {
    return cardinality(domain_side, field) + 1;
  }

  // Reverse lookup of a known index; OOV index renders as "<oov>".
  std::string value_of(bool domain_side, std::size_t field, std::int32_t index) const;

  // Text form: two field-list header lines, then one field,value,index
  // triple per line.
  void save(std::ostream& out) const;
  static Vocabulary load(std::istream& in);

  bool operator==(const Vocabulary& o) const;

 private:
  struct Field {
    std::unordered_map<std::string, std::int32_t> to_index;
    std::vector<std::string> values;  // index -> value
  };

  const Field& field_at(bool domain_side, std::size_t field) const;
  Field& field_at(bool domain_side, std::size_t field);

  std::vector<std::string> domain_fields_;
  std::vector<std::string> agnostic_fields_;
  std::vector<Field> domain_maps_;
  std::vector<Field> agnostic_maps_;
};

}  // namespace adasparse
