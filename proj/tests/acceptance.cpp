// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <fmt/format.h>

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "oracles.hpp"
#include "prkit/compose.hpp"
#include "prkit/harness.hpp"
#include "prkit/lightfit.hpp"
#include "prkit/metrics.hpp"
#include "prkit/mosaic.hpp"
#include "prkit/png_io.hpp"
#include "prkit/removal.hpp"
#include "prkit/render.hpp"
#include "scenes.hpp"
#include "support.hpp"

using namespace prkit;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool same_outside(const Image& a, const Image& b, const Mask& m) {
  for (std::size_t p = 0; p < m.pixel_count(); ++p) {
    if (m.values()[p]) continue;
    for (int c = 0; c < 3; ++c) {
      if (a.values()[p * 3 + c] != b.values()[p * 3 + c]) return false;
    }
  }
  return true;
}

// Rewrites every pixel, masked or not, so only the combiner can keep the
// unmasked region intact.
class Scramble final : public Restorer {
 public:
  Image restore(const Image& image, const Mask&) const override {
    Image out = image;
    for (double& v : out.values()) v = 1.0 - v;
    return out;
  }
  std::string name() const override { return "scramble"; }
};

std::vector<BackgroundAsset> smooth_backgrounds(int n, int w, int h, std::uint64_t seed) {
  std::vector<BackgroundAsset> out;
  for (int i = 0; i < n; ++i) {
    out.push_back({fmt::format("bg_{:02d}", i), demo::smooth_background(w, h, seed + i),
                   default_region(w, h)});
  }
  return out;
}

std::vector<SpriteAsset> people(int n, int w, int h, std::uint64_t seed) {
  std::vector<SpriteAsset> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(demo::person_asset(w, h, seed + i, fmt::format("person_{:02d}", i)));
  }
  return out;
}

MosaicConfig mosaic_config(std::uint64_t seed, int height) {
  MosaicConfig c;
  c.seed = seed;
  c.scale_rule = {1.0, static_cast<double>(height), 0.6, 1.4};
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

bool same_tree(const std::filesystem::path& a, const std::filesystem::path& b, std::size_t& files) {
  files = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), a);
    if (!std::filesystem::exists(b / rel) || slurp(entry.path()) != slurp(b / rel)) return false;
    ++files;
  }
  std::size_t other = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(b)) {
    other += entry.is_regular_file();
  }
  return other == files;
}

// ---------------------------------------------------------------------------

Outcome composition_identity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  const Scramble g;
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    const int w = 8 + static_cast<int>(rng() % 57);
    const int h = 8 + static_cast<int>(rng() % 57);
    const Image source = testing::random_image(w, h, rng());
    const Mask mask = testing::random_mask(w, h, 0.05 + 0.5 * (rng() % 100) / 100.0, rng());
    if (!same_outside(remove_legacy(source, mask, g), source, mask)) {
      return {false, fmt::format("subtract-then-inpaint changed unmasked pixels on triplet {}", i)};
    }
    if (!same_outside(remove_mask_guided(source, mask, g), source, mask)) {
      return {false, fmt::format("mask-guided changed unmasked pixels on triplet {}", i)};
    }
    for (const auto& it : remove_coarse_to_fine(source, mask, g, 3).iterates) {
      if (!same_outside(it, source, mask)) {
        return {false, fmt::format("coarse-to-fine changed unmasked pixels on triplet {}", i)};
      }
    }
    const Image other = testing::random_image(w, h, rng());
    if (!(alpha_blend(source, other, AlphaMap(w, h, 1.0)) == source) ||
        !(alpha_blend(source, other, AlphaMap(w, h, 0.0)) == other)) {
      return {false, fmt::format("alpha_blend endpoint identity broken on triplet {}", i)};
    }
    ++checked;
  }
  const double secs = seconds_since(t0);
  return {secs < 10.0, fmt::format("{} triplets bit-exact, {:.2f} s (limit 10 s)", checked, secs)};
}

Outcome metric_oracle() {
  const auto t0 = Clock::now();
  double worst_psnr = 0.0, worst_ssim = 0.0, worst_rel = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Image a = testing::random_image(48, 40, 500 + seed);
    const Image b = oracle::noisy_copy(a, 0.005 + 0.01 * seed, 900 + seed);
#ifdef PRKIT_HAVE_OPENCV
    const double ref_psnr = cv::PSNR(oracle::to_mat(a), oracle::to_mat(b), 255.0);
    const double ref_ssim = oracle::opencv_ssim(a, b);
#else
    double sq = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) {
      const double d = 255.0 * (a.values()[i] - b.values()[i]);
      sq += d * d;
    }
    const double ref_psnr = 10.0 * std::log10(255.0 * 255.0 / (sq / a.values().size()));
    const double ref_ssim = oracle::naive_ssim(a, b);
#endif
    worst_psnr = std::max(worst_psnr, std::abs(psnr(a, b) - ref_psnr));
    worst_ssim = std::max(worst_ssim, std::abs(ssim(a, b) - ref_ssim));
    const double relation = 20.0 * std::log10(255.0 / rmse(a, b));
    worst_rel = std::max(worst_rel, std::abs(psnr(a, b) - relation) / std::abs(relation));
  }
  const double secs = seconds_since(t0);
#ifdef PRKIT_HAVE_OPENCV
  const char* ref = "OpenCV";
#else
  const char* ref = "direct windowed reference";
#endif
  const bool pass = worst_psnr <= 1e-6 && worst_ssim <= 1e-4 && worst_rel <= 1e-9 && secs < 30.0;
  return {pass, fmt::format("vs {}: max |dPSNR| {:.2e} dB, max |dSSIM| {:.2e}, psnr/rmse rel {:.2e}, "
                            "{:.2f} s",
                            ref, worst_psnr, worst_ssim, worst_rel, secs)};
}

Outcome mosaic_determinism() {
  testing::TempDir dir("accept_mosaic");
  const auto bgs = smooth_backgrounds(10, 96, 72, 11);
  const auto sps = people(5, 10, 20, 70);
  MosaicConfig config = mosaic_config(77, 72);
  const auto first = synth_mosaic_batch(bgs, sps, 50, config);
  write_dataset(dir.path() / "a", first);
  config.workers = 4;
  const auto second = synth_mosaic_batch(bgs, sps, 50, config);
  write_dataset(dir.path() / "b", second);

  std::size_t files = 0;
  if (!same_tree(dir.path() / "a", dir.path() / "b", files)) {
    return {false, "regenerated dataset differs byte-wise"};
  }
  for (std::size_t i = 0; i < first.size(); ++i) {
    const Mask reach = dilate(first[i].mask, config.feather_radius);
    if (!same_outside(first[i].source, first[i].target, reach)) {
      return {false, fmt::format("triplet {}: source differs from target outside the feather reach", i)};
    }
    if (!(first[i].target == bgs[0].image) &&
        std::none_of(bgs.begin(), bgs.end(), [&](const auto& b) { return b.image == first[i].target; })) {
      return {false, fmt::format("triplet {}: target is not an input background", i)};
    }
  }
  return {true, fmt::format("50 triplets, {} files byte-identical; changes confined to dilate(mask, {})",
                            files, config.feather_radius)};
}

// A scene whose sprite is the background under the person, pushed through
// the inverse of theta* and perturbed by noise, so that rendering with theta*
// approximately restores the background.
struct FitScene {
  Image background;
  PersonSprite sprite;
  Placement placement;
  LightingParams truth;
};

FitScene inverse_lit_scene(std::uint64_t seed, const ParamLattice& lattice) {
  std::mt19937_64 rng(seed);
  FitScene s;
  s.background = demo::smooth_background(64, 56, seed, 0.25, 0.75);
  const auto donor = demo::person_asset(12, 26, seed + 1000, "p");
  s.sprite = extract_sprite(donor.donor, donor.donor_mask, 2, "p");
  s.placement = {28 + static_cast<int>(rng() % 8), 40 + static_cast<int>(rng() % 10), 1.0, false};
  s.truth = lattice.at(rng() % lattice.size());

  const Rect fp = sprite_footprint(s.sprite, s.placement);
  const auto ramp = lighting_ramp(s.sprite.alpha, s.truth.angle_deg, s.truth.ramp_strength);
  std::normal_distribution<double> noise(0.0, 0.02);
  for (int y = 0; y < s.sprite.patch.height(); ++y) {
    for (int x = 0; x < s.sprite.patch.width(); ++x) {
      const double r = ramp[static_cast<std::size_t>(y) * s.sprite.patch.width() + x];
      for (int c = 0; c < 3; ++c) {
        const double want = s.background.at(fp.x0 + x, fp.y0 + y, c);
        const double lin = std::clamp((want - s.truth.offset - r) / s.truth.gain[c], 0.0, 1.0);
        s.sprite.patch.at(x, y, c) =
            std::clamp(std::pow(lin, 1.0 / s.truth.gamma) + noise(rng), 0.0, 1.0);
      }
    }
  }
  return s;
}

Outcome lighting_fit() {
  const auto t0 = Clock::now();
  ParamLattice lattice;
  lattice.axes = {LatticeAxis::parse("gain=0.8:1.2:5"), LatticeAxis::parse("offset=-0.1:0.1:5"),
                  LatticeAxis::parse("angle=0:270:4"), LatticeAxis::parse("gamma=0.8:1.2:3")};
  lattice.base.ramp_strength = 0.1;

  int grid_ok = 0;
  int descent_ok = 0;
  double worst_ratio = 0.0;
  int max_evals = 0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const FitScene s = inverse_lit_scene(31 + k, lattice);
    const SceneObjective objective(s.background, s.sprite, s.placement);
    const double truth_loss = objective(s.truth);

    const FitResult grid = fit_grid(s.background, s.sprite, s.placement, lattice);
    grid_ok += grid.loss <= truth_loss;

    LightingParams init = s.truth;
    init.offset += 0.3;
    const FitResult descent = fit_descent(s.background, s.sprite, s.placement, init, 500);
    const double ratio = descent.loss / truth_loss;
    worst_ratio = std::max(worst_ratio, ratio);
    max_evals = std::max(max_evals, descent.evaluations);
    descent_ok += ratio <= 1.05 && descent.evaluations <= 500;
  }
  const double secs = seconds_since(t0);
  const bool pass = grid_ok == 20 && descent_ok >= 18 && secs < 300.0;
  return {pass, fmt::format("grid <= loss(theta*) on {}/20; descent <= 1.05x on {}/20 (worst ratio "
                            "{:.3f}, max {} evaluations); {:.1f} s",
                            grid_ok, descent_ok, worst_ratio, max_evals, secs)};
}

Outcome removal_efficacy() {
  const auto t0 = Clock::now();
  const auto bgs = smooth_backgrounds(10, 96, 72, 300);
  const auto sps = people(5, 10, 20, 400);
  const auto triplets = synth_mosaic_batch(bgs, sps, 50, mosaic_config(5, 72));
  const DiffusionRestorer diffusion;
  RemovalConfig config;
  config.refine_iters = 2;

  int improved = 0;
  int refined = 0;
  for (const auto& t : triplets) {
    const RemovalOutput out = remove_person(t.source, t.mask, diffusion, config);
    improved += psnr(out.prediction, t.target) > psnr(t.source, t.target);
    const double e1 = rmse_weighted(out.iterates[0], t.target, t.mask);
    const double e2 = rmse_weighted(out.iterates[1], t.target, t.mask);
    refined += e2 <= e1;
  }
  const double secs = seconds_since(t0);
  const bool pass = improved >= 48 && refined >= 45 && secs < 180.0;
  return {pass, fmt::format("PSNR improved on {}/50 (need 48); iteration-2 RMSEw <= iteration-1 on "
                            "{}/50 (need 45); {:.1f} s",
                            improved, refined, secs)};
}

Outcome exemplar_texture() {
  std::size_t good = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Image truth = demo::periodic_texture(72, 56, 60 + seed, 7 + seed % 3, 5 + seed % 4);
    const Mask hole = testing::rect_mask(72, 56, 28 + seed, 20, 40 + seed, 33);
    const ExemplarResult r = exemplar_restore(subtract_person(truth, hole), hole, 9, 48);
    for (int y = 0; y < 56; ++y) {
      for (int x = 0; x < 72; ++x) {
        if (!hole.at(x, y)) continue;
        ++total;
        double err = 0.0;
        for (int c = 0; c < 3; ++c) err = std::max(err, std::abs(r.image.at(x, y, c) - truth.at(x, y, c)));
        good += err <= 2.0 / 255.0;
      }
    }
  }
  const double share = static_cast<double>(good) / total;
  return {share >= 0.95,
          fmt::format("{}/{} hole pixels within 2/255 ({:.1f}%, need 95%)", good, total, 100 * share)};
}

Outcome pipeline_instrumentation() {
  const auto bgs = smooth_backgrounds(3, 64, 48, 700);
  const auto sps = people(2, 8, 16, 800);
  const auto triplets = synth_mosaic_batch(bgs, sps, 10, mosaic_config(9, 48));
  const DiffusionRestorer diffusion;
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    const auto& t = triplets[i];
    RemovalConfig legacy;
    legacy.mode = RemovalMode::legacy_inpaint;
    const RecordingRestorer rec_legacy(diffusion);
    const auto out_legacy = remove_person(t.source, t.mask, rec_legacy, legacy);
    const RemovalConfig guided;
    const RecordingRestorer rec_guided(diffusion);
    const auto out_guided = remove_person(t.source, t.mask, rec_guided, guided);

    const auto legacy_calls = rec_legacy.calls();
    const auto guided_calls = rec_guided.calls();
    if (legacy_calls.size() != 1 || guided_calls.empty()) return {false, "unexpected restorer call count"};
    const Mask& m = out_legacy.working_mask;
    for (std::size_t p = 0; p < m.pixel_count(); ++p) {
      if (!m.values()[p]) continue;
      for (int c = 0; c < 3; ++c) {
        if (legacy_calls[0].image.values()[p * 3 + c] != 0.0) {
          return {false, fmt::format("triplet {}: legacy restorer input is not zero in the hole", i)};
        }
        if (guided_calls[0].image.values()[p * 3 + c] != t.source.values()[p * 3 + c]) {
          return {false, fmt::format("triplet {}: mask-guided restorer input differs from the source", i)};
        }
      }
    }
    if (!(guided_calls[0].mask == out_guided.working_mask)) return {false, "mask not forwarded"};
  }
  return {true, "10 triplets: legacy input zero under the mask, mask-guided input equals the source"};
}

Outcome end_to_end() {
  const auto t0 = Clock::now();
  testing::TempDir dir("accept_e2e");
  const auto bgs = smooth_backgrounds(50, 96, 72, 1000);
  const auto sps = people(10, 10, 20, 2000);
  const auto triplets = synth_mosaic_batch(bgs, sps, 500, mosaic_config(42, 72));
  const Manifest written = write_dataset(dir.path() / "data", triplets);
  const Manifest tagged = split(read_manifest(dir.path() / "data" / "manifest.jsonl"), 0.7, 42);
  write_manifest(dir.path() / "data" / "manifest.jsonl", tagged);
  const Manifest manifest = read_manifest(dir.path() / "data" / "manifest.jsonl");
  if (!validate_manifest(manifest).empty()) return {false, "manifest failed validation"};

  const RemovalConfig config;
  EvalOptions options{dir.path() / "run1"};
  options.workers = 4;
  options.dataset = "synthetic";
  const MetricsReport first = run_eval(manifest, config, options);
  write_report(options.out_dir, first);
  options.out_dir = dir.path() / "run2";
  options.workers = 1;
  const MetricsReport second = run_eval(manifest, config, options);
  write_report(options.out_dir, second);

  const std::string csv = slurp(dir.path() / "run1" / "report.csv");
  std::istringstream lines(csv);
  std::string header;
  int rows = 0;
  bool has_mean = false;
  for (std::string line; std::getline(lines, line);) {
    if (line.empty() || line[0] == '#') continue;
    if (header.empty()) {
      header = line;
      continue;
    }
    if (line.rfind("mean,", 0) == 0) {
      has_mean = true;
    } else {
      ++rows;
    }
  }
  const bool columns = header == "id,psnr,lpips,ssim,rmse,rmsew";
  const bool same = csv == slurp(dir.path() / "run2" / "report.csv");
  const double secs = seconds_since(t0);
  const bool pass = written.entries.size() == 500 && manifest.count(Split::train) == 350 &&
                    rows == 150 && has_mean && columns && same && first.failures.empty();
  return {pass, fmt::format("500 triplets, {} train / {} test, {} report rows + mean, columns {}, "
                            "repeat run {}, mean PSNR {:.2f} dB; {:.1f} s",
                            manifest.count(Split::train), manifest.count(Split::test), rows,
                            columns ? "ok" : "wrong", same ? "byte-identical" : "DIFFERENT",
                            first.aggregate.psnr, secs)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"composition identity", composition_identity},
      {"metric oracle agreement", metric_oracle},
      {"mosaic determinism and recoverability", mosaic_determinism},
      {"illumination fitting", lighting_fit},
      {"removal efficacy", removal_efficacy},
      {"exemplar texture fill", exemplar_texture},
      {"legacy vs mask-guided restorer input", pipeline_instrumentation},
      {"end to end", end_to_end},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria met" : fmt::format("{} criteria failed", failed)) << '\n';
  return failed == 0 ? 0 : 1;
}
