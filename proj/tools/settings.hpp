#pragma once

// Effective-configuration tracking for CLI commands: every key read (with its default when absent)
// lands in the echo, and keys that no command reads are rejected.

#include "lstlab/errors.hpp"
#include "lstlab/kv_config.hpp"

#include <set>
#include <string>
#include <vector>

namespace lstlab::cli {

class Settings {
 public:
  explicit Settings(KeyValues provided) : provided_(std::move(provided)) {}

  bool has(const std::string& key) const { return provided_.has(key); }

  double real(const std::string& key, double fallback) { return record(key, provided_.double_or(key, fallback)); }
  double real(const std::string& key) { return record(key, provided_.get_double(key)); }
  long integer(const std::string& key, long fallback) { return record(key, provided_.long_or(key, fallback)); }
  std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
    const std::uint64_t v = provided_.has(key) ? provided_.get_u64(key) : fallback;
    read_.insert(key);
    effective_.set(key, v);
    return v;
  }
  bool flag(const std::string& key, bool fallback) { return record(key, provided_.bool_or(key, fallback)); }
  std::string text(const std::string& key, const std::string& fallback) {
    return record(key, provided_.string_or(key, fallback));
  }
  std::string text(const std::string& key) { return record(key, provided_.get_string(key)); }
  std::vector<double> reals(const std::string& key, const std::vector<double>& fallback) {
    auto v = provided_.doubles_or(key, fallback);
    read_.insert(key);
    effective_.set(key, join_doubles(v));
    return v;
  }

  /// Keys matching `prefix` that were provided.
  std::vector<std::string> provided_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : provided_.entries()) {
      if (k.rfind(prefix, 0) == 0) out.push_back(k);
    }
    return out;
  }

  /// Provided entries among `keys`, marked as read; their echo comes from `echo`.
  KeyValues take(const std::vector<std::string>& keys) {
    KeyValues out;
    for (const auto& k : keys) {
      read_.insert(k);
      if (provided_.has(k)) out.set(k, provided_.get_string(k));
    }
    return out;
  }
  void echo(const KeyValues& kv) { effective_.merge(kv); }

  /// Accepts provided keys under `prefix` without echoing them, so one preset can drive train and evaluate.
  void tolerate(const std::string& prefix) {
    for (const auto& k : provided_with_prefix(prefix)) read_.insert(k);
  }

  void reject_unknown() const {
    std::string unknown;
    for (const auto& [k, v] : provided_.entries()) {
      if (read_.count(k) == 0) unknown += (unknown.empty() ? "" : ", ") + k;
    }
    if (!unknown.empty()) throw UsageError("unknown configuration keys for this command: " + unknown);
  }

  const KeyValues& effective() const { return effective_; }

 private:
  template <typename T>
  T record(const std::string& key, T value) {
    read_.insert(key);
    effective_.set(key, value);
    return value;
  }

  KeyValues provided_;
  KeyValues effective_;
  std::set<std::string> read_;
};

}  // namespace lstlab::cli
