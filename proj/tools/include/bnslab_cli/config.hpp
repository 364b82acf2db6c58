#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bnslab::cli {

/// Bad config file, unknown key or unparsable value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KeyDef {
  std::string key;  // "section.name"
  std::string default_value;
  std::string help;
};

using Schema = std::vector<KeyDef>;

/// Parses `[section]` headers and `key = value` lines. `#` and `;` start
/// comments; keys before any header are rejected. Returns "section.key" -> value.
std::map<std::string, std::string> parse_config_text(std::string_view text,
                                                     std::string_view source);

/// Subcommand settings: schema defaults, then the config file, then
/// `--section.key=value` flags. Keys outside the schema are rejected.
class ExperimentConfig {
 public:
  ExperimentConfig(std::string command, Schema schema);

  void merge_file(const std::filesystem::path& path);
  void merge(const std::map<std::string, std::string>& values, std::string_view source);
  void set(const std::string& key, std::string value, std::string_view source);

  const std::string& command() const noexcept { return command_; }
  const Schema& schema() const noexcept { return schema_; }

  bool has_value(const std::string& key) const;  // non-empty
  const std::string& get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<int> get_ints(const std::string& key) const;

  std::uint64_t seed() const { return get_u64("run.seed"); }

  /// Every resolved key in schema order, for provenance headers.
  std::vector<std::pair<std::string, std::string>> entries() const;

  std::filesystem::path out_dir;

 private:
  std::string command_;
  Schema schema_;
  std::map<std::string, std::string> values_;
};

}  // namespace bnslab::cli
