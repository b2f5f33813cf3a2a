#include "adasparse/vocab.hpp"

#include "adasparse/textio.hpp"

namespace adasparse {

Vocabulary::Vocabulary(std::vector<std::string> domain_fields,
                       std::vector<std::string> agnostic_fields)
    : domain_fields_(std::move(domain_fields)),
      agnostic_fields_(std::move(agnostic_fields)),
      domain_maps_(domain_fields_.size()),
      agnostic_maps_(agnostic_fields_.size()) {}

const Vocabulary::Field& Vocabulary::field_at(bool domain_side, std::size_t field) const {
  const auto& maps = domain_side ? domain_maps_ : agnostic_maps_;
  if (field >= maps.size()) throw SchemaError("vocabulary: no such field index");
  return maps[field];
}

Vocabulary::Field& Vocabulary::field_at(bool domain_side, std::size_t field) {
  auto& maps = domain_side ? domain_maps_ : agnostic_maps_;
  if (field >= maps.size()) throw SchemaError("vocabulary: no such field index");
  return maps[field];
}

std::int32_t Vocabulary::add(bool domain_side, std::size_t field, const std::string& value) {
  Field& f = field_at(domain_side, field);
  auto it = f.to_index.find(value);
  if (it != f.to_index.end()) return it->second;
  const auto index = static_cast<std::int32_t>(f.values.size());
  f.to_index.emplace(value, index);
  f.values.push_back(value);
  return index;
}

std::int32_t Vocabulary::lookup(bool domain_side, std::size_t field,
                                const std::string& value) const {
  const Field& f = field_at(domain_side, field);
  auto it = f.to_index.find(value);
  if (it != f.to_index.end()) return it->second;
  return static_cast<std::int32_t>(f.values.size());  // reserved OOV row
}

std::int32_t Vocabulary::cardinality(bool domain_side, std::size_t field) const {
  return static_cast<std::int32_t>(field_at(domain_side, field).values.size());
}

std::string Vocabulary::value_of(bool domain_side, std::size_t field,
                                 std::int32_t index) const {
  const Field& f = field_at(domain_side, field);
  if (index >= 0 && static_cast<std::size_t>(index) < f.values.size()) {
    return f.values[index];
  }
  return "<oov>";
}

void Vocabulary::save(std::ostream& out) const {
  out << "#domain_fields=" << join(domain_fields_, ',') << "\n";
  out << "#agnostic_fields=" << join(agnostic_fields_, ',') << "\n";
  for (std::size_t f = 0; f < domain_fields_.size(); ++f) {
    for (std::size_t i = 0; i < domain_maps_[f].values.size(); ++i) {
      out << domain_fields_[f] << ',' << domain_maps_[f].values[i] << ',' << i << "\n";
    }
  }
  for (std::size_t f = 0; f < agnostic_fields_.size(); ++f) {
    for (std::size_t i = 0; i < agnostic_maps_[f].values.size(); ++i) {
      out << agnostic_fields_[f] << ',' << agnostic_maps_[f].values[i] << ',' << i << "\n";
    }
  }
}

Vocabulary Vocabulary::load(std::istream& in) {
  std::string line;
  std::vector<std::string> dom, agn;
  bool have_dom = false, have_agn = false;
  while ((!have_dom || !have_agn) && std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("#domain_fields=", 0) == 0) {
      const std::string v = line.substr(std::string("#domain_fields=").size());
      if (!v.empty()) dom = split(v, ',');
      have_dom = true;
    } else if (line.rfind("#agnostic_fields=", 0) == 0) {
      const std::string v = line.substr(std::string("#agnostic_fields=").size());
      if (!v.empty()) agn = split(v, ',');
      have_agn = true;
    } else if (!line.empty()) {
      throw SchemaError("vocabulary: missing field header lines");
    }
  }
  if (!have_dom || !have_agn) throw SchemaError("vocabulary: truncated header");
  Vocabulary vocab(dom, agn);

  auto side_and_field = [&](const std::string& name) -> std::pair<bool, std::size_t> {
    for (std::size_t i = 0; i < dom.size(); ++i) {
      if (dom[i] == name) return {true, i};
    }
    for (std::size_t i = 0; i < agn.size(); ++i) {
      if (agn[i] == name) return {false, i};
    }
    throw SchemaError("vocabulary: unknown field '" + name + "'");
  };

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto parts = split(line, ',');
    if (parts.size() != 3) throw SchemaError("vocabulary: bad triple: " + line);
    const auto [domain_side, field] = side_and_field(parts[0]);
    const auto expected = parse_int(parts[2], "vocabulary index");
    const auto got = vocab.add(domain_side, field, parts[1]);
    if (got != expected) {
      throw SchemaError("vocabulary: non-dense index for " + parts[0] + "," + parts[1]);
    }
  }
  return vocab;
}

bool Vocabulary::operator==(const Vocabulary& o) const {
  if (domain_fields_ != o.domain_fields_ || agnostic_fields_ != o.agnostic_fields_) {
    return false;
  }
  for (std::size_t f = 0; f < domain_maps_.size(); ++f) {
    if (domain_maps_[f].values != o.domain_maps_[f].values) return false;
  }
  for (std::size_t f = 0; f < agnostic_maps_.size(); ++f) {
    if (agnostic_maps_[f].values != o.agnostic_maps_[f].values) return false;
  }
  return true;
}

}  // namespace adasparse
