#include "lstlab/kv_config.hpp"

#include "lstlab/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lstlab {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, out);
  return res.ec == std::errc{} && res.ptr == end && !text.empty();
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i != 0) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

KeyValues KeyValues::parse(std::string_view text, const std::string& origin) {
  KeyValues kv;
  kv.origin_ = origin;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw UsageError(origin + ":" + std::to_string(line_no) + ": empty key");
    kv.values_[key] = std::string(trim(line.substr(eq + 1)));
    kv.lines_[key] = line_no;
  }
  return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void KeyValues::set(const std::string& key, double value) { values_[key] = format_double(value); }
void KeyValues::set(const std::string& key, long value) { values_[key] = std::to_string(value); }
void KeyValues::set(const std::string& key, std::uint64_t value) { values_[key] = std::to_string(value); }

void KeyValues::bad_value(const std::string& key, const std::string& what) const {
  std::string where = origin_;
  if (auto it = lines_.find(key); it != lines_.end()) where += ":" + std::to_string(it->second);
  throw UsageError(where + ": field '" + key + "' " + what);
}

std::string KeyValues::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw UsageError(origin_ + ": missing required field '" + key + "'");
  return it->second;
}

double KeyValues::get_double(const std::string& key) const {
  double v = 0.0;
  if (!parse_double(get_string(key), v)) bad_value(key, "is not a number");
  return v;
}

long KeyValues::get_long(const std::string& key) const {
  const std::string s = get_string(key);
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) {
    // accept integral scientific notation such as 1e6
    double d = 0.0;
    if (!parse_double(s, d) || d != std::floor(d) || std::fabs(d) > 9.0e18) bad_value(key, "is not an integer");
    return static_cast<long>(d);
  }
  return v;
}

std::uint64_t KeyValues::get_u64(const std::string& key) const {
  const std::string s = get_string(key);
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) {
    bad_value(key, "is not an unsigned integer");
  }
  return v;
}

bool KeyValues::get_bool(const std::string& key) const {
  const std::string s = get_string(key);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad_value(key, "is not a boolean");
}

std::vector<double> KeyValues::get_doubles(const std::string& key) const {
  const std::string s = get_string(key);
  std::vector<double> out;
  if (trim(s).empty()) return out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const auto item = std::string_view(s).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    double v = 0.0;
    if (!parse_double(item, v)) bad_value(key, "has a malformed list entry '" + std::string(trim(item)) + "'");
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string KeyValues::string_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}
double KeyValues::double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}
long KeyValues::long_or(const std::string& key, long fallback) const { return has(key) ? get_long(key) : fallback; }
bool KeyValues::bool_or(const std::string& key, bool fallback) const { return has(key) ? get_bool(key) : fallback; }
std::vector<double> KeyValues::doubles_or(const std::string& key, std::vector<double> fallback) const {
  return has(key) ? get_doubles(key) : fallback;
}

void KeyValues::merge(const KeyValues& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
  for (const auto& [k, l] : other.lines_) lines_[k] = l;
  if (origin_ == "<string>") origin_ = other.origin_;
}

std::vector<std::string> KeyValues::unknown_keys(const std::set<std::string>& known) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (known.count(k) == 0) out.push_back(k);
  }
  return out;
}

std::string KeyValues::to_string() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

void KeyValues::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_string();
}

}  // namespace lstlab
