#include "prkit/harness.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "prkit/compose.hpp"
#include "prkit/parallel.hpp"
#include "prkit/png_io.hpp"

namespace prkit {

using nlohmann::json;

std::string to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::test: return "test";
    case Split::unassigned: return "unassigned";
  }
  return "unassigned";
}

Split parse_split(const std::string& text) {
  if (text == "train") return Split::train;
  if (text == "test") return Split::test;
  if (text == "unassigned") return Split::unassigned;
  throw ArgumentError("unknown split tag '" + text + "'");
}

std::size_t Manifest::count(Split split) const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [&](const ManifestEntry& e) { return e.split == split; }));
}

json to_json(const LightingParams& p) {
  return json{{"gain", p.gain},           {"offset", p.offset},
              {"gamma", p.gamma},         {"angle_deg", p.angle_deg},
              {"ramp_strength", p.ramp_strength}};
}

json to_json(const Provenance& meta) {
  json j{{"background", meta.background_id},
         {"sprite", meta.sprite_id},
         {"seed", meta.seed},
         {"attempts", meta.attempts},
         {"placement",
          {{"anchor_x", meta.placement.anchor_x},
           {"anchor_y", meta.placement.anchor_y},
           {"scale", meta.placement.scale},
           {"flip", meta.placement.flip}}}};
  if (meta.lighting) j["lighting"] = to_json(*meta.lighting);
  return j;
}

json to_json(const ManifestEntry& e) {
  json j{{"id", e.id},
         {"source", e.source.generic_string()},
         {"target", e.target.generic_string()},
         {"mask", e.mask.generic_string()},
         {"split", to_string(e.split)},
         {"provenance", e.provenance}};
  if (e.depth) j["depth"] = e.depth->generic_string();
  return j;
}

ManifestEntry entry_from_json(const json& j) {
  ManifestEntry e;
  e.id = j.at("id").get<std::string>();
  e.source = j.at("source").get<std::string>();
  e.target = j.at("target").get<std::string>();
  e.mask = j.at("mask").get<std::string>();
  if (j.contains("depth")) e.depth = j.at("depth").get<std::string>();
  if (j.contains("provenance")) e.provenance = j.at("provenance");
  e.split = parse_split(j.value("split", std::string("unassigned")));
  return e;
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  Manifest manifest;
  manifest.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  int number = 0;
  for (std::string line; std::getline(in, line);) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      manifest.entries.push_back(entry_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw IoError(fmt::format("{}:{}: malformed manifest entry: {}", path.string(), number,
                                e.what()));
    } catch (const ArgumentError& e) {
      throw IoError(fmt::format("{}:{}: {}", path.string(), number, e.what()));
    }
  }
  return manifest;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest '" + path.string() + "'");
  for (const auto& e : manifest.entries) out << to_json(e).dump() << '\n';
  if (!out) throw IoError("failed writing manifest '" + path.string() + "'");
}

std::vector<std::string> validate_manifest(const Manifest& manifest) {
  std::vector<std::string> problems;
  std::set<std::string> seen;
  for (const auto& e : manifest.entries) {
    if (e.id.empty()) problems.push_back("entry with empty id");
    if (!seen.insert(e.id).second) problems.push_back("duplicate id '" + e.id + "'");
    std::vector<std::filesystem::path> files{e.source, e.target, e.mask};
    if (e.depth) files.push_back(*e.depth);
    for (const auto& f : files) {
      if (!std::filesystem::exists(manifest.resolve(f))) {
        problems.push_back("entry '" + e.id + "': missing file '" + manifest.resolve(f).string() + "'");
      }
    }
  }
  return problems;
}

Manifest write_dataset(const std::filesystem::path& out_dir,
                       const std::vector<CompositeTriplet>& triplets,
                       const std::vector<DepthMap>* depths) {
  if (depths && depths->size() != triplets.size()) {
    throw ArgumentError("write_dataset: one depth map per triplet required");
  }
  Manifest manifest;
  manifest.base_dir = out_dir;
  manifest.entries.resize(triplets.size());
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    const auto& t = triplets[i];
    auto& e = manifest.entries[i];
    e.id = fmt::format("{:05d}", i);
    e.source = std::filesystem::path("source") / (e.id + ".png");
    e.target = std::filesystem::path("target") / (e.id + ".png");
    e.mask = std::filesystem::path("mask") / (e.id + ".png");
    write_image(out_dir / e.source, t.source);
    write_image(out_dir / e.target, t.target);
    write_mask(out_dir / e.mask, t.mask);
    if (depths) {
      e.depth = std::filesystem::path("depth") / (e.id + ".png");
      write_depth(out_dir / *e.depth, (*depths)[i]);
    }
    e.provenance = to_json(t.meta);
  }
  write_manifest(out_dir / "manifest.jsonl", manifest);
  return manifest;
}

Manifest split(const Manifest& manifest, double train_fraction, std::uint64_t seed,
               bool incremental) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ArgumentError("split: train_fraction must lie strictly between 0 and 1");
  }
  const std::size_t n = manifest.entries.size();
  if (n < 2) throw ArgumentError("split: need at least 2 entries, have " + std::to_string(n));

  Manifest out = manifest;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.entries[a].id < out.entries[b].id;
  });
  const auto target_train = static_cast<std::size_t>(std::llround(train_fraction * n));

  std::vector<std::size_t> pool;
  std::size_t train_needed = target_train;
  if (incremental) {
    std::size_t have = 0;
    for (const std::size_t i : order) {
      if (out.entries[i].split == Split::unassigned) {
        pool.push_back(i);
      } else if (out.entries[i].split == Split::train) {
        ++have;
      }
    }
    train_needed = target_train > have ? std::min(target_train - have, pool.size()) : 0;
  } else {
    pool = order;
  }

  std::mt19937_64 rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  for (std::size_t k = 0; k < pool.size(); ++k) {
    out.entries[pool[k]].split = k < train_needed ? Split::train : Split::test;
  }
  return out;
}

json to_json(const RemovalConfig& c) {
  return json{{"mode", to_string(c.mode)},
              {"restorer", c.restorer},
              {"refine_iters", c.refine_iters},
              {"mask_dilation", c.mask_dilation},
              {"diffusion_iters", c.diffusion.iters},
              {"diffusion_tol", c.diffusion.tol},
              {"patch_size", c.exemplar.patch_size},
              {"search_radius", c.exemplar.search_radius},
              {"command", c.restorer_command}};
}

std::string config_hash(const RemovalConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return fmt::format("{:016x}", h);
}

namespace {

struct EntryOutcome {
  std::optional<MetricsRow> row;
  std::string error;
};

EntryOutcome evaluate_entry(const Manifest& manifest, const ManifestEntry& entry,
                            const Restorer& restorer, const RemovalConfig& config,
                            const std::filesystem::path& pred_dir) {
  EntryOutcome outcome;
  try {
    const Image source = read_image(manifest.resolve(entry.source));
    const Image target = read_image(manifest.resolve(entry.target));
    const Mask mask = read_mask(manifest.resolve(entry.mask));
    require_same_size(source, target, ("entry " + entry.id).c_str());
    require_same_size(source, mask, ("entry " + entry.id).c_str());

    const RemovalOutput removed = remove_person(source, mask, restorer, config);
    for (std::size_t p = 0; p < removed.working_mask.pixel_count(); ++p) {
      if (removed.working_mask.values()[p]) continue;
      for (std::size_t c = 0; c < 3; ++c) {
        if (removed.prediction.values()[p * 3 + c] != source.values()[p * 3 + c]) {
          throw Error("prediction changed pixels outside the mask");
        }
      }
    }
    const Image saved = quantize(removed.prediction);
    write_image(pred_dir / (entry.id + ".png"), saved);
    outcome.row = evaluate_pair(entry.id, saved, target, mask);
  } catch (const std::exception& e) {
    outcome.error = e.what();
  }
  return outcome;
}

}  // namespace

MetricsReport run_eval(const Manifest& manifest, const RemovalConfig& config,
                       const EvalOptions& options) {
  validate(config);
  std::vector<const ManifestEntry*> tests;
  for (const auto& e : manifest.entries) {
    if (e.split == Split::test) tests.push_back(&e);
  }
  if (tests.empty()) throw ArgumentError("run_eval: the manifest has no test entries");
  std::sort(tests.begin(), tests.end(),
            [](const ManifestEntry* a, const ManifestEntry* b) { return a->id < b->id; });

  const auto restorer = make_restorer(config);
  const auto pred_dir = options.out_dir / "pred";
  std::filesystem::create_directories(pred_dir);

  std::vector<EntryOutcome> outcomes(tests.size());
  parallel_for(tests.size(), options.workers, [&](std::size_t i) {
    outcomes[i] = evaluate_entry(manifest, *tests[i], *restorer, config, pred_dir);
  });

  MetricsReport report;
  report.method = options.method.empty()
                      ? to_string(config.mode) + "/" + config.restorer +
                            fmt::format("/cf{}", config.refine_iters)
                      : options.method;
  report.dataset = options.dataset;
  report.config_hash = config_hash(config);
  for (std::size_t i = 0; i < tests.size(); ++i) {
    if (!outcomes[i].row) {
      spdlog::error("entry {}: {}", tests[i]->id, outcomes[i].error);
      report.failures.push_back({tests[i]->id, outcomes[i].error});
      continue;
    }
    MetricsRow row = *outcomes[i].row;
    if (const auto it = options.lpips.find(row.id); it != options.lpips.end()) row.lpips = it->second;
    report.per_image.push_back(std::move(row));
  }
  report.recompute_aggregate();
  return report;
}

void write_report(const std::filesystem::path& dir, const MetricsReport& report) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "report.csv", std::ios::binary);
  csv << report.to_csv();
  std::ofstream md(dir / "report.md", std::ios::binary);
  md << report.to_markdown();
  if (!csv || !md) throw IoError("cannot write report into '" + dir.string() + "'");
}

}  // namespace prkit
