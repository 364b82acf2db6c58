#include "bnslab_cli/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace bnslab::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

template <typename T>
T parse_number(std::string_view text, const std::string& key) {
  T v{};
  const auto t = trim(text);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
    throw ConfigError("key '" + key + "': cannot parse '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(std::string_view text,
                                                     std::string_view source) {
  std::map<std::string, std::string> out;
  std::string section;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  auto fail = [&](const std::string& why) {
    throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      const auto name = trim(line.substr(1, line.size() - 2));
      if (!valid_name(name)) fail("bad section name '" + std::string(name) + "'");
      section = name;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail("expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    if (!valid_name(key)) fail("bad key '" + std::string(key) + "'");
    if (section.empty()) fail("key '" + std::string(key) + "' appears before any [section]");
    const std::string full = section + "." + std::string(key);
    if (out.contains(full)) fail("duplicate key '" + full + "'");
    out[full] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

ExperimentConfig::ExperimentConfig(std::string command, Schema schema)
    : command_(std::move(command)), schema_(std::move(schema)) {
  for (const KeyDef& k : schema_) values_[k.key] = k.default_value;
}

void ExperimentConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  merge(parse_config_text(ss.str(), path.string()), path.string());
}

void ExperimentConfig::merge(const std::map<std::string, std::string>& values,
                             std::string_view source) {
  for (const auto& [k, v] : values) set(k, v, source);
}

void ExperimentConfig::set(const std::string& key, std::string value, std::string_view source) {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw ConfigError(std::string(source) + ": unknown key '" + key + "' for " + command_);
  }
  it->second = std::move(value);
}

bool ExperimentConfig::has_value(const std::string& key) const { return !get_string(key).empty(); }

const std::string& ExperimentConfig::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("internal: key '" + key + "' is not in the schema");
  return it->second;
}

double ExperimentConfig::get_double(const std::string& key) const {
  return parse_number<double>(get_string(key), key);
}

std::int64_t ExperimentConfig::get_int(const std::string& key) const {
  return parse_number<std::int64_t>(get_string(key), key);
}

std::uint64_t ExperimentConfig::get_u64(const std::string& key) const {
  return parse_number<std::uint64_t>(get_string(key), key);
}

bool ExperimentConfig::get_bool(const std::string& key) const {
  const auto v = trim(get_string(key));
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + std::string(v) + "'");
}

std::vector<double> ExperimentConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (auto item : split_list(get_string(key))) out.push_back(parse_number<double>(item, key));
  return out;
}

std::vector<int> ExperimentConfig::get_ints(const std::string& key) const {
  std::vector<int> out;
  for (auto item : split_list(get_string(key))) out.push_back(parse_number<int>(item, key));
  return out;
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(schema_.size());
  for (const KeyDef& k : schema_) out.emplace_back(k.key, values_.at(k.key));
  return out;
}

}  // namespace bnslab::cli
