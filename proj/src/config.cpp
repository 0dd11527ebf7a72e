#include "prkit/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "prkit/errors.hpp"
#include "prkit/mosaic.hpp"
#include "prkit/removal.hpp"
#include "prkit/render.hpp"

namespace prkit {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

// Drops a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string unquote(const std::string& value, const std::string& where) {
  if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
    std::string out;
    for (std::size_t i = 1; i + 1 < value.size(); ++i) {
      if (value[i] == '\\' && i + 2 < value.size()) {
        ++i;
        out += value[i] == 'n' ? '\n' : value[i] == 't' ? '\t' : value[i];
      } else {
        out += value[i];
      }
    }
    return out;
  }
  if (!value.empty() && value.front() == '"') throw ArgumentError(where + ": unterminated string");
  return value;
}

}  // namespace

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::stringstream text;
  text << in.rdbuf();
  ConfigFile file = parse(text.str(), path.string());
  file.base_dir_ = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return file;
}

ConfigFile ConfigFile::parse(std::string_view text, const std::string& origin) {
  ConfigFile file;
  file.origin_ = origin;
  std::string section;
  std::istringstream in{std::string(text)};
  int number = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++number;
    const std::string where = origin + ":" + std::to_string(number);
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ArgumentError(where + ": malformed section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ArgumentError(where + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ArgumentError(where + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (file.values_.count(full)) throw ArgumentError(where + ": duplicate key '" + full + "'");
    file.values_[full] = unquote(trim(std::string_view(line).substr(eq + 1)), where);
  }
  return file;
}

std::optional<std::string> ConfigFile::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> ConfigFile::get_double(const std::string& key) const {
  const auto text = get_string(key);
  if (!text) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), value);
  if (ec != std::errc{} || ptr != text->data() + text->size()) {
    throw ArgumentError(origin_ + ": '" + key + "' must be a number, got '" + *text + "'");
  }
  return value;
}

std::optional<std::int64_t> ConfigFile::get_int(const std::string& key) const {
  const auto text = get_string(key);
  if (!text) return std::nullopt;
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), value);
  if (ec != std::errc{} || ptr != text->data() + text->size()) {
    throw ArgumentError(origin_ + ": '" + key + "' must be an integer, got '" + *text + "'");
  }
  return value;
}

std::optional<bool> ConfigFile::get_bool(const std::string& key) const {
  const auto text = get_string(key);
  if (!text) return std::nullopt;
  if (*text == "true") return true;
  if (*text == "false") return false;
  throw ArgumentError(origin_ + ": '" + key + "' must be true or false, got '" + *text + "'");
}

void ConfigFile::reject_unknown(const std::set<std::string>& known) const {
  for (const auto& [key, value] : values_) {
    if (!known.count(key)) throw ArgumentError(origin_ + ": unknown config key '" + key + "'");
  }
}

const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys{
      "seed",
      "count",
      "feather_radius",
      "allow_flip",
      "max_attempts",
      "workers",
      "background_dir",
      "sprite_dir",
      "out_dir",
      "scale_rule.base_scale",
      "scale_rule.horizon_offset",
      "scale_rule.min_scale",
      "scale_rule.max_scale",
      "render.angles",
      "render.gain_jitter",
      "render.offset_jitter",
      "render.gamma_jitter",
      "render.max_ramp",
      "render.lighting",
      "render.fit_budget",
      "removal.mode",
      "removal.restorer",
      "removal.refine_iters",
      "removal.mask_dilation",
      "removal.diffusion_iters",
      "removal.diffusion_tol",
      "removal.patch_size",
      "removal.search_radius",
      "removal.command",
      "eval.train_fraction",
      "eval.split_seed",
  };
  return keys;
}

namespace {

std::filesystem::path resolve(const ConfigFile& file, const std::string& value) {
  const std::filesystem::path p(value);
  return p.is_absolute() ? p : file.base_dir() / p;
}

template <typename T, typename Getter>
void assign(T& field, const Getter& value) {
  if (value) field = static_cast<T>(*value);
}

}  // namespace

void apply_config(const ConfigFile& file, MosaicConfig& config) {
  assign(config.seed, file.get_int("seed"));
  assign(config.count, file.get_int("count"));
  assign(config.feather_radius, file.get_int("feather_radius"));
  assign(config.allow_flip, file.get_bool("allow_flip"));
  assign(config.max_attempts, file.get_int("max_attempts"));
  assign(config.workers, file.get_int("workers"));
  if (auto v = file.get_string("background_dir")) config.background_dir = resolve(file, *v);
  if (auto v = file.get_string("sprite_dir")) config.sprite_dir = resolve(file, *v);
  if (auto v = file.get_string("out_dir")) config.out_dir = resolve(file, *v);
  assign(config.scale_rule.base_scale, file.get_double("scale_rule.base_scale"));
  assign(config.scale_rule.horizon_offset, file.get_double("scale_rule.horizon_offset"));
  assign(config.scale_rule.min_scale, file.get_double("scale_rule.min_scale"));
  assign(config.scale_rule.max_scale, file.get_double("scale_rule.max_scale"));
}

void apply_config(const ConfigFile& file, RemovalConfig& config) {
  if (auto v = file.get_string("removal.mode")) config.mode = parse_removal_mode(*v);
  if (auto v = file.get_string("removal.restorer")) config.restorer = *v;
  assign(config.refine_iters, file.get_int("removal.refine_iters"));
  assign(config.mask_dilation, file.get_int("removal.mask_dilation"));
  assign(config.diffusion.iters, file.get_int("removal.diffusion_iters"));
  assign(config.diffusion.tol, file.get_double("removal.diffusion_tol"));
  assign(config.exemplar.patch_size, file.get_int("removal.patch_size"));
  assign(config.exemplar.search_radius, file.get_int("removal.search_radius"));
  if (auto v = file.get_string("removal.command")) config.restorer_command = *v;
}

void apply_config(const ConfigFile& file, RenderBatchConfig& config) {
  assign(config.angles, file.get_int("render.angles"));
  assign(config.gain_jitter, file.get_double("render.gain_jitter"));
  assign(config.offset_jitter, file.get_double("render.offset_jitter"));
  assign(config.gamma_jitter, file.get_double("render.gamma_jitter"));
  assign(config.max_ramp, file.get_double("render.max_ramp"));
  if (auto v = file.get_string("render.lighting")) config.lighting = parse_lighting_source(*v);
  assign(config.fit_budget, file.get_int("render.fit_budget"));
}

}  // namespace prkit
