#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "prkit/metrics.hpp"
#include "prkit/mosaic.hpp"
#include "prkit/removal.hpp"
#include "prkit/render.hpp"

namespace prkit {

enum class Split { unassigned, train, test };

std::string to_string(Split split);
Split parse_split(const std::string& text);

/// One dataset triplet on disk. Paths are relative to the manifest directory
/// unless absolute.
struct ManifestEntry {
  std::string id;
  std::filesystem::path source;
  std::filesystem::path target;
  std::filesystem::path mask;
  std::optional<std::filesystem::path> depth;
  nlohmann::json provenance = nlohmann::json::object();
  Split split = Split::unassigned;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  /// Directory relative entry paths resolve against.
  std::filesystem::path base_dir = ".";

  std::filesystem::path resolve(const std::filesystem::path& p) const {
    return p.is_absolute() ? p : base_dir / p;
  }
  std::size_t count(Split split) const;
};

nlohmann::json to_json(const ManifestEntry& entry);
ManifestEntry entry_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Provenance& meta);
nlohmann::json to_json(const LightingParams& params);

/// JSON Lines, one entry per line.
Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Problems found: duplicate ids and missing files. Empty when valid.
std::vector<std::string> validate_manifest(const Manifest& manifest);

/// Writes `out/{source,target,mask}/NNNNN.png` (plus `out/depth/` when depth
/// maps are given) and `out/manifest.jsonl`; returns the manifest.
Manifest write_dataset(const std::filesystem::path& out_dir,
                       const std::vector<CompositeTriplet>& triplets,
                       const std::vector<DepthMap>* depths = nullptr);

/// Seeded shuffle, then the first round(train_fraction * N) entries become
/// train and the rest test. Entries are shuffled in id order, so manifest line
/// order does not matter.
///
/// With `incremental` set, entries already tagged keep their tag and only the
/// unassigned ones are shuffled and split so the overall train count moves as
/// close as possible to round(train_fraction * N).
Manifest split(const Manifest& manifest, double train_fraction, std::uint64_t seed,
               bool incremental = false);

struct EvalOptions {
  std::filesystem::path out_dir = "out";
  int workers = 1;
  std::string method;
  std::string dataset;
  std::map<std::string, double> lpips;
};

/// Stable 64-bit FNV-1a digest of the effective removal config, as hex.
std::string config_hash(const RemovalConfig& config);
nlohmann::json to_json(const RemovalConfig& config);

/// Removes the person from every test entry, writes `out/pred/<id>.png` and
/// scores the saved prediction against the target (RMSEw over the entry's own
/// mask). Failed entries are listed in `failures` and left out of the
/// aggregate. Rows are ordered by id whatever the worker count.
MetricsReport run_eval(const Manifest& manifest, const RemovalConfig& config,
                       const EvalOptions& options);

/// Writes report.csv and report.md into `dir`.
void write_report(const std::filesystem::path& dir, const MetricsReport& report);

}  // namespace prkit
