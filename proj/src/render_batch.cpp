#include <algorithm>
#include <random>

#include "prkit/lightfit.hpp"
#include "prkit/render.hpp"

namespace prkit {

std::string to_string(LightingSource source) {
  switch (source) {
    case LightingSource::sampled: return "sampled";
    case LightingSource::fit_grid: return "fit_grid";
    case LightingSource::fit_descent: return "fit_descent";
  }
  return "?";
}

LightingSource parse_lighting_source(const std::string& text) {
  if (text == "sampled") return LightingSource::sampled;
  if (text == "fit_grid") return LightingSource::fit_grid;
  if (text == "fit_descent") return LightingSource::fit_descent;
  throw ArgumentError("unknown lighting source '" + text +
                      "' (expected sampled, fit_grid or fit_descent)");
}

LightingParams sample_lighting(const RenderBatchConfig& config, std::uint64_t seed,
                               std::size_t index) {
  const auto angles = enumerate_angles(config.angles);
  std::mt19937_64 rng(seed ^ (0xA5A5A5A5ull + index * 0x9E3779B97F4A7C15ull));
  auto around = [&](double centre, double jitter) {
    if (jitter <= 0.0) return centre;
    return std::uniform_real_distribution<double>(centre - jitter, centre + jitter)(rng);
  };
  LightingParams p;
  for (double& g : p.gain) g = std::clamp(around(1.0, config.gain_jitter), 0.1, 3.0);
  p.offset = std::clamp(around(0.0, config.offset_jitter), -0.5, 0.5);
  p.gamma = std::clamp(around(1.0, config.gamma_jitter), 0.2, 5.0);
  p.angle_deg = angles[index % angles.size()];
  p.ramp_strength =
      config.max_ramp > 0.0
          ? std::uniform_real_distribution<double>(0.0, std::min(config.max_ramp, 1.0))(rng)
          : 0.0;
  validate(p);
  return p;
}

std::vector<RenderedScene> synth_render_batch(const std::vector<BackgroundAsset>& backgrounds,
                                              const std::vector<SpriteAsset>& sprites, int count,
                                              const MosaicConfig& mosaic,
                                              const RenderBatchConfig& render) {
  if (render.angles < 1) throw ArgumentError("render batch: angles must be >= 1");
  if (render.fit_budget < 1) throw ArgumentError("render batch: fit_budget must be >= 1");

  const SpriteHook relight = [&](const PersonSprite& sprite, const Image& background,
                                 const Placement& placement, std::size_t index,
                                 Provenance& meta) {
    LightingParams params = sample_lighting(render, mosaic.seed, index);
    if (render.lighting == LightingSource::fit_grid) {
      ParamLattice lattice;
      lattice.base = params;
      lattice.axes.push_back(LatticeAxis::parse("gain=0.6:1.4:5"));
      lattice.axes.push_back(LatticeAxis::parse("offset=-0.1:0.1:5"));
      params = fit_grid(background, sprite, placement, lattice).params;
    } else if (render.lighting == LightingSource::fit_descent) {
      params = fit_descent(background, sprite, placement, params, render.fit_budget).params;
    }
    meta.lighting = params;
    return apply_lighting(sprite, params);
  };

  auto triplets = synth_batch(backgrounds, sprites, count, mosaic, relight);
  std::vector<RenderedScene> scenes;
  scenes.reserve(triplets.size());
  for (auto& t : triplets) {
    DepthMap depth = billboard_depth(t.mask);
    scenes.push_back({std::move(t), std::move(depth)});
  }
  return scenes;
}

}  // namespace prkit
