#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "adasparse/errors.hpp"

namespace adasparse {

// Flat key=value text: one pair per line, '#' comments and blank lines
// ignored. Used for config echoes, dataset specs and schema files.
using KvPairs = std::vector<std::pair<std::string, std::string>>;

KvPairs parse_kv(std::istream& in);
KvPairs parse_kv_file(const std::string& path);

std::vector<std::string> split(const std::string& s, char sep);
std::string join(const std::vector<std::string>& parts, char sep);

// Shortest exact text form of a double: round-trips bit-exactly via strtod.
std::string fmt_double(double x);

double parse_double(const std::string& s, const std::string& what);
std::int64_t parse_int(const std::string& s, const std::string& what);
std::vector<std::int32_t> parse_int_list(const std::string& s, const std::string& what);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace adasparse
