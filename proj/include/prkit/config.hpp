#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace prkit {

struct MosaicConfig;
struct RemovalConfig;
struct RenderBatchConfig;

/// Flat key/value configuration in a small TOML subset: `key = value` lines,
/// `[section]` headers that prefix following keys as `section.key`, `#`
/// comments, double-quoted strings, numbers and true/false.
class ConfigFile {
 public:
  ConfigFile() = default;

  static ConfigFile load(const std::filesystem::path& path);
  static ConfigFile parse(std::string_view text, const std::string& origin = "<config>");

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<std::int64_t> get_int(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;

  /// Throws ArgumentError naming the first key not in `known`.
  void reject_unknown(const std::set<std::string>& known) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  /// Directory relative paths in the file are resolved against.
  const std::filesystem::path& base_dir() const { return base_dir_; }

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
  std::filesystem::path base_dir_ = ".";
};

/// Every key the toolkit understands.
const std::set<std::string>& known_config_keys();

void apply_config(const ConfigFile& file, MosaicConfig& config);
void apply_config(const ConfigFile& file, RemovalConfig& config);
void apply_config(const ConfigFile& file, RenderBatchConfig& config);

}  // namespace prkit
