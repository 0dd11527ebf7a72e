// prkit command line: dataset synthesis, lighting fits, person removal and
// evaluation.
//
// Exit status: 0 success, 1 runtime or entry failure, 2 usage error.

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "prkit/config.hpp"
#include "prkit/harness.hpp"
#include "prkit/lightfit.hpp"
#include "prkit/parallel.hpp"
#include "prkit/png_io.hpp"
#include "prkit/removal.hpp"
#include "prkit/render.hpp"

namespace {

using namespace prkit;
using nlohmann::json;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool verbose = false;

  ConfigFile config;

  void load() {
    if (config_path.empty()) return;
    config = ConfigFile::load(config_path);
    config.reject_unknown(known_config_keys());
  }

  // Flag, then config file, then PRKIT_WORKERS.
  int effective_workers() const {
    if (workers) return std::max(1, *workers);
    if (const auto v = config.get_int("workers")) return std::max<int>(1, static_cast<int>(*v));
    return workers_from_env();
  }
};

struct MosaicFlags {
  std::optional<int> count;
  std::optional<std::string> background_dir;
  std::optional<std::string> sprite_dir;
  std::optional<std::string> out_dir;
  std::optional<int> feather_radius;
  std::optional<int> max_attempts;
  bool no_flip = false;
  std::optional<double> base_scale;
  std::optional<double> horizon_offset;
  std::optional<double> min_scale;
  std::optional<double> max_scale;

  void add_to(CLI::App& app) {
    app.add_option("--count", count, "Number of triplets")->check(CLI::PositiveNumber);
    app.add_option("--backgrounds", background_dir, "Background directory");
    app.add_option("--sprites", sprite_dir, "Sprite directory (<stem>.png + <stem>.mask.png)");
    app.add_option("--out", out_dir, "Output dataset directory");
    app.add_option("--feather-radius", feather_radius, "Sprite feather radius in pixels")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--max-attempts", max_attempts, "Placement retries per triplet")
        ->check(CLI::PositiveNumber);
    app.add_flag("--no-flip", no_flip, "Never mirror sprites");
    app.add_option("--base-scale", base_scale, "Ground-line rule base scale");
    app.add_option("--horizon-offset", horizon_offset, "Ground-line rule horizon offset");
    app.add_option("--min-scale", min_scale, "Smallest sprite scale");
    app.add_option("--max-scale", max_scale, "Largest sprite scale");
  }

  MosaicConfig resolve(const Globals& g) const {
    MosaicConfig c;
    apply_config(g.config, c);
    if (count) c.count = *count;
    if (background_dir) c.background_dir = *background_dir;
    if (sprite_dir) c.sprite_dir = *sprite_dir;
    if (out_dir) c.out_dir = *out_dir;
    if (feather_radius) c.feather_radius = *feather_radius;
    if (max_attempts) c.max_attempts = *max_attempts;
    if (no_flip) c.allow_flip = false;
    if (base_scale) c.scale_rule.base_scale = *base_scale;
    if (horizon_offset) c.scale_rule.horizon_offset = *horizon_offset;
    if (min_scale) c.scale_rule.min_scale = *min_scale;
    if (max_scale) c.scale_rule.max_scale = *max_scale;
    if (g.seed) c.seed = *g.seed;
    c.workers = g.effective_workers();
    return c;
  }
};

struct RenderFlags {
  std::optional<int> angles;
  std::optional<std::string> lighting;
  std::optional<int> fit_budget;
  std::optional<double> gain_jitter;
  std::optional<double> offset_jitter;
  std::optional<double> gamma_jitter;
  std::optional<double> max_ramp;

  void add_to(CLI::App& app) {
    app.add_option("--angles", angles, "Number of illumination angles")->check(CLI::PositiveNumber);
    app.add_option("--lighting", lighting, "Lighting source")
        ->check(CLI::IsMember({"sampled", "fit_grid", "fit_descent"}));
    app.add_option("--fit-budget", fit_budget, "Evaluations per descent fit")
        ->check(CLI::PositiveNumber);
    app.add_option("--gain-jitter", gain_jitter, "Half-width of sampled gain range");
    app.add_option("--offset-jitter", offset_jitter, "Half-width of sampled offset range");
    app.add_option("--gamma-jitter", gamma_jitter, "Half-width of sampled gamma range");
    app.add_option("--max-ramp", max_ramp, "Largest sampled ramp strength");
  }

  RenderBatchConfig resolve(const Globals& g) const {
    RenderBatchConfig c;
    apply_config(g.config, c);
    if (angles) c.angles = *angles;
    if (lighting) c.lighting = parse_lighting_source(*lighting);
    if (fit_budget) c.fit_budget = *fit_budget;
    if (gain_jitter) c.gain_jitter = *gain_jitter;
    if (offset_jitter) c.offset_jitter = *offset_jitter;
    if (gamma_jitter) c.gamma_jitter = *gamma_jitter;
    if (max_ramp) c.max_ramp = *max_ramp;
    return c;
  }
};

struct RemovalFlags {
  std::optional<std::string> mode;
  std::optional<std::string> restorer;
  std::optional<int> refine_iters;
  std::optional<int> mask_dilation;
  std::optional<int> diffusion_iters;
  std::optional<double> diffusion_tol;
  std::optional<int> patch_size;
  std::optional<int> search_radius;
  std::optional<std::string> command;

  void add_to(CLI::App& app) {
    app.add_option("--mode", mode, "Removal pipeline")
        ->check(CLI::IsMember({"mask_guided", "legacy_inpaint", "legacy"}));
    app.add_option("--restorer", restorer, "Restorer")
        ->check(CLI::IsMember({"identity", "diffusion", "exemplar", "subprocess"}));
    app.add_option("--refine-iters", refine_iters, "Coarse-to-fine predictions (mask_guided)")
        ->check(CLI::PositiveNumber);
    app.add_option("--mask-dilation", mask_dilation, "Mask dilation radius before removal")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--diffusion-iters", diffusion_iters, "Diffusion sweep limit")
        ->check(CLI::PositiveNumber);
    app.add_option("--diffusion-tol", diffusion_tol, "Diffusion convergence tolerance");
    app.add_option("--patch-size", patch_size, "Exemplar patch size (odd)");
    app.add_option("--search-radius", search_radius, "Exemplar search radius");
    app.add_option("--restorer-cmd", command,
                   "External restorer command, run as <cmd> <source> <mask> <out>");
  }

  RemovalConfig resolve(const Globals& g) const {
    RemovalConfig c;
    apply_config(g.config, c);
    if (mode) c.mode = parse_removal_mode(*mode);
    if (restorer) c.restorer = *restorer;
    if (refine_iters) c.refine_iters = *refine_iters;
    if (mask_dilation) c.mask_dilation = *mask_dilation;
    if (diffusion_iters) c.diffusion.iters = *diffusion_iters;
    if (diffusion_tol) c.diffusion.tol = *diffusion_tol;
    if (patch_size) c.exemplar.patch_size = *patch_size;
    if (search_radius) c.exemplar.search_radius = *search_radius;
    if (command) c.restorer_command = *command;
    validate(c);
    return c;
  }
};

void check_asset_lists(const MosaicConfig& c, std::size_t backgrounds, std::size_t sprites) {
  if (backgrounds == 0) throw IoError("no backgrounds found in '" + c.background_dir.string() + "'");
  if (sprites == 0) throw IoError("no sprites found in '" + c.sprite_dir.string() + "'");
}

int run_synth_mosaic(const Globals& g, const MosaicFlags& flags) {
  const MosaicConfig config = flags.resolve(g);
  const auto backgrounds = load_backgrounds(config.background_dir);
  const auto sprites = load_sprites(config.sprite_dir);
  check_asset_lists(config, backgrounds.size(), sprites.size());
  spdlog::info("synthesizing {} triplets from {} backgrounds and {} sprites", config.count,
               backgrounds.size(), sprites.size());
  const auto triplets = synth_mosaic_batch(backgrounds, sprites, config.count, config);
  write_dataset(config.out_dir, triplets);
  std::cout << (config.out_dir / "manifest.jsonl").string() << '\n';
  return 0;
}

int run_synth_render(const Globals& g, const MosaicFlags& mflags, const RenderFlags& rflags) {
  const MosaicConfig config = mflags.resolve(g);
  const RenderBatchConfig render = rflags.resolve(g);
  const auto backgrounds = load_backgrounds(config.background_dir);
  const auto sprites = load_sprites(config.sprite_dir);
  check_asset_lists(config, backgrounds.size(), sprites.size());
  const auto scenes = synth_render_batch(backgrounds, sprites, config.count, config, render);
  std::vector<CompositeTriplet> triplets;
  std::vector<DepthMap> depths;
  triplets.reserve(scenes.size());
  depths.reserve(scenes.size());
  for (const auto& s : scenes) {
    triplets.push_back(s.triplet);
    depths.push_back(s.depth);
  }
  write_dataset(config.out_dir, triplets, &depths);
  std::cout << (config.out_dir / "manifest.jsonl").string() << '\n';
  return 0;
}

struct FitFlags {
  std::string background;
  std::string sprite;
  std::optional<std::string> sprite_mask;
  std::optional<std::string> region;
  std::optional<int> feather_radius;
  std::optional<int> anchor_x;
  std::optional<int> anchor_y;
  std::optional<double> scale;
  bool flip = false;
  std::string method = "grid";
  std::vector<std::string> grid;
  std::vector<std::string> init;
  int budget = 500;
  std::string loss = "mask";
  int ring_width = 4;
  bool trace = false;
  std::optional<std::string> out;

  void add_to(CLI::App& app) {
    app.add_option("--background", background, "Background image")->required();
    app.add_option("--sprite", sprite, "Donor image holding the person")->required();
    app.add_option("--sprite-mask", sprite_mask, "Donor person mask (default <stem>.mask.png)");
    app.add_option("--region", region, "Placement region mask used when no anchor is given");
    app.add_option("--feather-radius", feather_radius, "Sprite feather radius")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--anchor-x", anchor_x, "Anchor column (bottom-center of the sprite)");
    app.add_option("--anchor-y", anchor_y, "Anchor row");
    app.add_option("--scale", scale, "Sprite scale (default from the ground-line rule)");
    app.add_flag("--flip", flip, "Mirror the sprite");
    app.add_option("--method", method, "Search method")->check(CLI::IsMember({"grid", "descent"}));
    app.add_option("--grid", grid, "Lattice axis param=lo:hi:steps (repeatable)");
    app.add_option("--init", init, "Start or base value param=value (repeatable)");
    app.add_option("--budget", budget, "Descent evaluation budget")->check(CLI::PositiveNumber);
    app.add_option("--loss", loss, "Loss region")->check(CLI::IsMember({"mask", "ring"}));
    app.add_option("--ring-width", ring_width, "Ring width for --loss ring")
        ->check(CLI::PositiveNumber);
    app.add_flag("--trace", trace, "Include the incumbent trace in the output");
    app.add_option("--out", out, "Write the JSON result here instead of standard output");
  }
};

json params_json(const LightingParams& p) { return to_json(p); }

int run_fit_light(const Globals& g, const FitFlags& f, const MosaicFlags& mflags) {
  const MosaicConfig mosaic = mflags.resolve(g);
  const Image background = read_image(f.background);
  const std::filesystem::path sprite_path(f.sprite);
  const std::filesystem::path mask_path =
      f.sprite_mask ? std::filesystem::path(*f.sprite_mask)
                    : sprite_path.parent_path() / (sprite_path.stem().string() + ".mask.png");
  const Image donor = read_image(sprite_path);
  const Mask donor_mask = read_mask(mask_path);
  const int feather = f.feather_radius.value_or(mosaic.feather_radius);
  const PersonSprite sprite = extract_sprite(donor, donor_mask, feather, sprite_path.stem().string());

  Placement placement;
  if (f.anchor_x.has_value() != f.anchor_y.has_value()) {
    throw ArgumentError("--anchor-x and --anchor-y must be given together");
  }
  if (f.anchor_x) {
    placement.anchor_x = *f.anchor_x;
    placement.anchor_y = *f.anchor_y;
    placement.scale = f.scale.value_or(mosaic.scale_rule(*f.anchor_y));
    placement.flip = f.flip;
  } else {
    const Mask region = f.region ? read_mask(*f.region)
                                 : default_region(background.width(), background.height());
    placement = sample_placement(region, sprite, mosaic.seed, mosaic.scale_rule, mosaic.allow_flip);
    if (f.scale) placement.scale = *f.scale;
    if (f.flip) placement.flip = true;
  }

  LightingParams init;
  for (const auto& spec : f.init) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw ArgumentError("--init expects param=value, got '" + spec + "'");
    double value = 0.0;
    try {
      value = std::stod(spec.substr(eq + 1));
    } catch (const std::exception&) {
      throw ArgumentError("--init value is not a number in '" + spec + "'");
    }
    set_param(init, parse_light_param(spec.substr(0, eq)), value);
  }
  validate(init);

  FitOptions options;
  options.region = f.loss == "ring" ? LossRegion::ring : LossRegion::mask;
  options.ring_width = f.ring_width;
  options.workers = g.effective_workers();

  FitResult result;
  if (f.method == "grid") {
    ParamLattice lattice{init, {}};
    for (const auto& spec : f.grid) lattice.axes.push_back(LatticeAxis::parse(spec));
    result = fit_grid(background, sprite, placement, lattice, options);
  } else {
    if (!f.grid.empty()) throw ArgumentError("--grid only applies to --method grid");
    result = fit_descent(background, sprite, placement, init, f.budget, options);
  }

  json out{{"params", params_json(result.params)},
           {"loss", result.loss},
           {"evaluations", result.evaluations},
           {"placement",
            {{"anchor_x", placement.anchor_x},
             {"anchor_y", placement.anchor_y},
             {"scale", placement.scale},
             {"flip", placement.flip}}}};
  if (f.trace) {
    json trace = json::array();
    for (const auto& point : result.trace) {
      trace.push_back({{"params", params_json(point.params)}, {"loss", point.loss}});
    }
    out["trace"] = std::move(trace);
  }
  if (f.out) {
    std::ofstream file(*f.out);
    file << out.dump(2) << '\n';
    if (!file) throw IoError("cannot write '" + *f.out + "'");
  } else {
    std::cout << out.dump(2) << '\n';
  }
  return 0;
}

struct RemoveFlags {
  std::string in;
  std::string mask;
  std::string out;
  bool strict_mask = false;

  void add_to(CLI::App& app) {
    app.add_option("--in", in, "Source image with the person")->required();
    app.add_option("--mask", mask, "Person mask")->required();
    app.add_option("--out", out, "Output image")->required();
    app.add_flag("--strict-mask", strict_mask, "Reject mask values other than 0 and 255");
  }
};

int run_remove(const Globals& g, const RemoveFlags& f, const RemovalFlags& rflags) {
  const RemovalConfig config = rflags.resolve(g);
  const Image source = read_image(f.in);
  const Mask mask = read_mask(f.mask, f.strict_mask);
  require_same_size(source, mask, "remove");
  const auto restorer = make_restorer(config);
  const RemovalOutput result = remove_person(source, mask, *restorer, config);
  write_image(f.out, result.prediction);
  return 0;
}

struct EvalFlags {
  std::string manifest;
  std::string out = "out";
  std::optional<std::string> lpips_file;
  std::string method;
  std::string dataset;

  void add_to(CLI::App& app) {
    app.add_option("--manifest", manifest, "Dataset manifest (JSON Lines)")->required();
    app.add_option("--out", out, "Output directory for predictions and reports");
    app.add_option("--lpips-file", lpips_file, "JSON object of entry id to LPIPS value");
    app.add_option("--method", method, "Method label for the report");
    app.add_option("--dataset", dataset, "Dataset label for the report");
  }
};

int run_evaluate(const Globals& g, const EvalFlags& f, const RemovalFlags& rflags) {
  const RemovalConfig config = rflags.resolve(g);
  const Manifest manifest = read_manifest(f.manifest);
  EvalOptions options;
  options.out_dir = f.out;
  options.workers = g.effective_workers();
  options.method = f.method;
  options.dataset = f.dataset.empty() ? std::filesystem::path(f.manifest).parent_path().filename().string()
                                      : f.dataset;
  if (f.lpips_file) options.lpips = load_lpips(*f.lpips_file);
  const MetricsReport report = run_eval(manifest, config, options);
  write_report(options.out_dir, report);
  std::cout << report.to_markdown();
  return report.failures.empty() ? 0 : kExitFailure;
}

int run_validate(const std::string& path) {
  const Manifest manifest = read_manifest(path);
  const auto problems = validate_manifest(manifest);
  for (const auto& p : problems) std::cerr << p << '\n';
  if (!problems.empty()) return kExitFailure;
  std::cout << fmt::format("{} entries ({} train, {} test, {} unassigned)\n",
                           manifest.entries.size(), manifest.count(Split::train),
                           manifest.count(Split::test), manifest.count(Split::unassigned));
  return 0;
}

struct SplitFlags {
  std::string manifest;
  std::optional<double> fraction;
  bool incremental = false;
  std::optional<std::string> out;

  void add_to(CLI::App& app) {
    app.add_option("--manifest", manifest, "Dataset manifest (JSON Lines)")->required();
    app.add_option("--fraction", fraction, "Train fraction (default 0.7)");
    app.add_flag("--incremental", incremental, "Keep existing tags; split only unassigned entries");
    app.add_option("--out", out, "Write here instead of rewriting the manifest");
  }
};

int run_split(const Globals& g, const SplitFlags& f) {
  const Manifest manifest = read_manifest(f.manifest);
  const double fraction =
      f.fraction.value_or(g.config.get_double("eval.train_fraction").value_or(0.7));
  std::uint64_t seed = 0;
  if (g.seed) {
    seed = *g.seed;
  } else if (const auto s = g.config.get_int("eval.split_seed")) {
    seed = static_cast<std::uint64_t>(*s);
  }
  Manifest result = split(manifest, fraction, seed, f.incremental);
  const std::filesystem::path out = f.out ? std::filesystem::path(*f.out) : std::filesystem::path(f.manifest);
  // Keep entry paths valid when the manifest moves to another directory.
  const auto out_dir = std::filesystem::absolute(out).parent_path();
  if (std::filesystem::absolute(manifest.base_dir).lexically_normal() != out_dir.lexically_normal()) {
    for (auto& e : result.entries) {
      auto rebase = [&](std::filesystem::path& p) {
        p = std::filesystem::absolute(manifest.resolve(p)).lexically_relative(out_dir);
      };
      rebase(e.source);
      rebase(e.target);
      rebase(e.mask);
      if (e.depth) rebase(*e.depth);
    }
  }
  write_manifest(out, result);
  std::cout << fmt::format("{} train, {} test\n", result.count(Split::train),
                           result.count(Split::test));
  return 0;
}

// Help for the deepest subcommand the parser reached.
const CLI::App* active_app(const CLI::App& app) {
  for (const CLI::App* sub : app.get_subcommands()) return active_app(*sub);
  return &app;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("prkit");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("%^%l%$: %v");
  spdlog::set_level(spdlog::level::warn);

  CLI::App app{"prkit: person-removal dataset synthesis, removal and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "TOML config file providing defaults")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed (overrides the config file)");
  app.add_option("--workers", g.workers, "Worker threads (overrides config and PRKIT_WORKERS)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--verbose,-v", g.verbose, "Log progress to standard error");

  std::function<int()> action;

  MosaicFlags mosaic_flags;
  auto* synth_mosaic = app.add_subcommand("synth-mosaic", "Synthesize a mosaic triplet dataset");
  mosaic_flags.add_to(*synth_mosaic);
  synth_mosaic->callback([&] { action = [&] { return run_synth_mosaic(g, mosaic_flags); }; });

  MosaicFlags render_mosaic_flags;
  RenderFlags render_flags;
  auto* synth_render = app.add_subcommand("synth-render", "Synthesize lit billboard triplets with depth");
  render_mosaic_flags.add_to(*synth_render);
  render_flags.add_to(*synth_render);
  synth_render->callback(
      [&] { action = [&] { return run_synth_render(g, render_mosaic_flags, render_flags); }; });

  FitFlags fit_flags;
  MosaicFlags fit_mosaic_flags;
  auto* fit = app.add_subcommand("fit-light", "Fit billboard lighting to a background");
  fit_flags.add_to(*fit);
  fit->callback([&] { action = [&] { return run_fit_light(g, fit_flags, fit_mosaic_flags); }; });

  RemoveFlags remove_flags;
  RemovalFlags remove_removal;
  auto* remove = app.add_subcommand("remove", "Remove the masked person from one image");
  remove_flags.add_to(*remove);
  remove_removal.add_to(*remove);
  remove->callback([&] { action = [&] { return run_remove(g, remove_flags, remove_removal); }; });

  EvalFlags eval_flags;
  RemovalFlags eval_removal;
  auto* evaluate = app.add_subcommand("evaluate", "Run removal over the test split and report metrics");
  eval_flags.add_to(*evaluate);
  eval_removal.add_to(*evaluate);
  evaluate->callback([&] { action = [&] { return run_evaluate(g, eval_flags, eval_removal); }; });

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate-manifest", "Check ids and referenced files");
  validate_cmd->add_option("--manifest", validate_path, "Dataset manifest (JSON Lines)")->required();
  validate_cmd->callback([&] { action = [&] { return run_validate(validate_path); }; });

  SplitFlags split_flags;
  auto* split_cmd = app.add_subcommand("split", "Assign train/test tags to a manifest");
  split_flags.add_to(*split_cmd);
  split_cmd->callback([&] { action = [&] { return run_split(g, split_flags); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << active_app(app)->help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << active_app(app)->help();
    return kExitUsage;
  }

  if (g.verbose) spdlog::set_level(spdlog::level::debug);
  try {
    g.load();
    return action();
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
