#include "wecs/io/keyvalue.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "wecs/error.hpp"
#include "wecs/io/number.hpp"

namespace wecs::io {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& source) {
  KeyValueFile kv;
  kv.source_ = source;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(source, line_no, "expected 'key = value', got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(source, line_no, "empty key");
    if (value.empty()) throw ParseError(source, line_no, "empty value for '" + key + "'");
    if (kv.entries_.count(key))
      throw ParseError(source, line_no, "duplicate key '" + key + "'");
    kv.entries_.emplace(std::move(key), Entry{std::move(value), line_no});
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

std::optional<std::string> KeyValueFile::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.value;
}

std::optional<double> KeyValueFile::get_double(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  double x = 0.0;
  if (!parse_double(it->second.value, x) || !std::isfinite(x))
    throw ParseError(source_, it->second.line,
                     "value of '" + key + "' is not a finite number: '" + it->second.value + "'");
  return x;
}

std::optional<long long> KeyValueFile::get_int(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  const std::string& s = it->second.value;
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(source_, it->second.line,
                     "value of '" + key + "' is not an integer: '" + s + "'");
  return v;
}

std::vector<std::string> KeyValueFile::keys() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [k, _] : entries_) out.push_back(k);
  return out;
}

}  // namespace wecs::io
