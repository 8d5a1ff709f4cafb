#pragma once

// Shared reader for the plain-text key=value config files.

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

namespace aifad::detail {

struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

/// Splits the stream into key=value entries. Blank lines and `#` comments are
/// skipped; duplicate keys and lines without `=` are ConfigErrors.
std::vector<KeyValue> read_key_values(std::istream& in);

double parse_double(const KeyValue& kv);
std::int64_t parse_int(const KeyValue& kv);
std::uint64_t parse_u64(const KeyValue& kv);
std::vector<double> parse_double_list(const KeyValue& kv);
std::vector<std::string> parse_word_list(const KeyValue& kv);

std::string trim(const std::string& s);

}  // namespace aifad::detail
