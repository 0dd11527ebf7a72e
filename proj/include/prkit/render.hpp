#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prkit/lighting_params.hpp"
#include "prkit/mosaic.hpp"

namespace prkit {

/// Relights the sprite patch; alpha is left untouched.
///
/// Per channel c: out = clamp01(gain_c * in^gamma + offset + ramp(x, y)).
/// The ramp is planar along angle_deg (0 deg points towards +x, 90 deg towards
/// +y), zero-mean over the silhouette (alpha >= 0.5) and scaled so its largest
/// magnitude on the silhouette equals ramp_strength.
PersonSprite apply_lighting(const PersonSprite& sprite, const LightingParams& params);

/// Planar ramp term of apply_lighting, one value per patch pixel.
std::vector<double> lighting_ramp(const AlphaMap& alpha, double angle_deg, double ramp_strength);

struct RenderedScene {
  CompositeTriplet triplet;
  DepthMap depth;
};

/// Pastes the relit sprite as a billboard and records the lighting in the
/// provenance. Depth is 1 exactly on the mask bits and 0 elsewhere.
RenderedScene render_scene(const Image& background, const PersonSprite& sprite,
                           const Placement& placement, const LightingParams& params);

/// Depth map of a single billboard: 1 on the mask, 0 elsewhere.
DepthMap billboard_depth(const Mask& mask);

/// n azimuths uniformly spaced over [0, 360): k * 360 / n.
std::vector<double> enumerate_angles(int n);

enum class LightingSource { sampled, fit_grid, fit_descent };

std::string to_string(LightingSource source);
LightingSource parse_lighting_source(const std::string& text);

/// Lighting policy for batch rendering. Triplet i uses angle
/// enumerate_angles(angles)[i % angles]; gains, offset, gamma and ramp strength
/// are drawn uniformly within the jitter bounds around identity. The fit
/// sources then refine those params against the scene background.
struct RenderBatchConfig {
  int angles = 15;
  double gain_jitter = 0.15;
  double offset_jitter = 0.05;
  double gamma_jitter = 0.1;
  double max_ramp = 0.2;
  LightingSource lighting = LightingSource::sampled;
  int fit_budget = 200;
};

/// Sampled lighting for triplet `index`; deterministic in (seed, index).
LightingParams sample_lighting(const RenderBatchConfig& config, std::uint64_t seed,
                               std::size_t index);

/// Billboard counterpart of synth_mosaic_batch; every triplet records its
/// lighting and carries a depth map.
std::vector<RenderedScene> synth_render_batch(const std::vector<BackgroundAsset>& backgrounds,
                                              const std::vector<SpriteAsset>& sprites, int count,
                                              const MosaicConfig& mosaic,
                                              const RenderBatchConfig& render);

}  // namespace prkit
