#include "kv_config.hpp"

#include <cerrno>
#include <cstdlib>
#include <set>
#include <sstream>

#include "aifad/errors.hpp"

namespace aifad::detail {

namespace {

[[noreturn]] void bad_value(const KeyValue& kv, const char* what) {
  throw ConfigError("line " + std::to_string(kv.line) + ": " + kv.key + " expects " + what +
                    ", got '" + kv.value + "'");
}

double to_double(const std::string& text, const KeyValue& kv) {
  const std::string s = trim(text);
  if (s.empty()) bad_value(kv, "a number");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (errno != 0 || end != s.c_str() + s.size()) bad_value(kv, "a number");
  return v;
}

}  // namespace

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<KeyValue> read_key_values(std::istream& in) {
  std::vector<KeyValue> out;
  std::set<std::string> seen;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(number) + ": expected key=value");
    KeyValue kv{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), number};
    if (kv.key.empty()) throw ConfigError("line " + std::to_string(number) + ": empty key");
    if (!seen.insert(kv.key).second)
      throw ConfigError("line " + std::to_string(number) + ": duplicate key '" + kv.key + "'");
    out.push_back(std::move(kv));
  }
  return out;
}

double parse_double(const KeyValue& kv) { return to_double(kv.value, kv); }

std::int64_t parse_int(const KeyValue& kv) {
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(kv.value.c_str(), &end, 10);
  if (kv.value.empty() || errno != 0 || end != kv.value.c_str() + kv.value.size())
    bad_value(kv, "an integer");
  return v;
}

std::uint64_t parse_u64(const KeyValue& kv) {
  char* end = nullptr;
  errno = 0;
  if (kv.value.empty() || kv.value[0] == '-') bad_value(kv, "a nonnegative integer");
  const unsigned long long v = std::strtoull(kv.value.c_str(), &end, 10);
  if (errno != 0 || end != kv.value.c_str() + kv.value.size())
    bad_value(kv, "a nonnegative integer");
  return v;
}

std::vector<double> parse_double_list(const KeyValue& kv) {
  std::vector<double> out;
  std::stringstream ss(kv.value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(item, kv));
  if (out.empty()) bad_value(kv, "a nonempty comma-separated list");
  return out;
}

std::vector<std::string> parse_word_list(const KeyValue& kv) {
  std::vector<std::string> out;
  std::stringstream ss(kv.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) bad_value(kv, "a comma-separated list without empty entries");
    out.push_back(item);
  }
  if (out.empty()) bad_value(kv, "a nonempty comma-separated list");
  return out;
}

}  // namespace aifad::detail
