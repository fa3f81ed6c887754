#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace locprune {

struct ConfigKey {
  const char* name;
  const char* default_value;
  const char* help;
};

/// Every recognised run configuration key, in display order.
std::span<const ConfigKey> config_keys();
const ConfigKey* find_config_key(std::string_view name);

/// Flat key=value run configuration. Unknown keys are rejected with
/// ConfigError; unset keys read as their documented default.
class RunConfig {
 public:
  void set(std::string_view key, std::string_view value);
  void unset(std::string_view key);
  bool is_set(std::string_view key) const;
  std::string get(std::string_view key) const;

  double get_double(std::string_view key) const;
  std::int64_t get_int(std::string_view key) const;
  std::uint64_t get_u64(std::string_view key) const;
  /// Comma-separated list; empty entries dropped.
  std::vector<std::string> get_list(std::string_view key) const;

  /// Lines of "key = value"; '#' starts a comment.
  void load_text(std::string_view text);
  void load_file(const std::string& path);

  const std::map<std::string, std::string>& explicit_values() const noexcept { return values_; }
  /// Every key with its effective value, one "key=value" per line.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace locprune
