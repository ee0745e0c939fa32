#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wecs::io {

/// `key = value` text with `#` comments and blank lines. Keys may be dotted
/// (`piflc.ke`). Duplicate keys and lines without `=` are parse errors.
class KeyValueFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static KeyValueFile parse(const std::string& text,
                            const std::string& source = "<string>");
  static KeyValueFile load(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return entries_.count(key) > 0; }
  std::optional<std::string> get(const std::string& key) const;

  /// Parses the whole value as a finite double; throws ParseError otherwise.
  std::optional<double> get_double(const std::string& key) const;
  std::optional<long long> get_int(const std::string& key) const;

  std::vector<std::string> keys() const;
  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::map<std::string, Entry> entries_;
};

}  // namespace wecs::io
