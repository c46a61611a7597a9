#pragma once

// Flat `key = value` files used for experiment configs, policies, scenarios and config echoes.
// Lines starting with '#' and blank lines are ignored. Later keys override earlier ones.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace lstlab {

class KeyValues {
 public:
  KeyValues() = default;

  /// `origin` names the source in error messages (file path or "<string>").
  static KeyValues parse(std::string_view text, const std::string& origin = "<string>");
  static KeyValues load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  void set(const std::string& key, double value);
  void set(const std::string& key, long value);
  void set(const std::string& key, int value) { set(key, static_cast<long>(value)); }
  void set(const std::string& key, std::uint64_t value);
  void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }

  /// Throws UsageError naming the key when it is missing or malformed.
  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  long get_long(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;

  std::string string_or(const std::string& key, const std::string& fallback) const;
  double double_or(const std::string& key, double fallback) const;
  long long_or(const std::string& key, long fallback) const;
  bool bool_or(const std::string& key, bool fallback) const;
  std::vector<double> doubles_or(const std::string& key, std::vector<double> fallback) const;

  /// Overlays every entry of `other` onto this set.
  void merge(const KeyValues& other);

  /// Keys present here but absent from `known`.
  std::vector<std::string> unknown_keys(const std::set<std::string>& known) const;

  const std::map<std::string, std::string>& entries() const { return values_; }
  std::string to_string() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
  std::string origin_ = "<string>";

  [[noreturn]] void bad_value(const std::string& key, const std::string& what) const;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
std::string join_doubles(const std::vector<double>& v);

}  // namespace lstlab
