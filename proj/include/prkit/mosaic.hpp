#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "prkit/image.hpp"
#include "prkit/lighting_params.hpp"

namespace prkit {

/// A person cut out of a donor photo: the patch covers the silhouette's tight
/// bounding box padded by the feather radius, alpha is 1 on the silhouette and
/// falls off linearly with Euclidean distance to 0 at the feather radius.
struct PersonSprite {
  Image patch;
  AlphaMap alpha;
  std::string origin_id;
  int feather_radius = 0;
};

/// Where a sprite lands. The anchor is the bottom-center pixel of the scaled
/// sprite in background coordinates.
struct Placement {
  int anchor_x = 0;
  int anchor_y = 0;
  double scale = 1.0;
  bool flip = false;

  bool operator==(const Placement&) const = default;
};

/// Linear perspective sizing: scale = base_scale * anchor_y / horizon_offset,
/// clamped to [min_scale, max_scale].
struct GroundLineRule {
  double base_scale = 1.0;
  double horizon_offset = 1.0;
  double min_scale = 0.05;
  double max_scale = 4.0;

  double operator()(int anchor_y) const;
};

struct Provenance {
  std::string background_id;
  std::string sprite_id;
  Placement placement;
  std::uint64_t seed = 0;
  int attempts = 1;
  std::optional<LightingParams> lighting;
};

/// Dataset unit: the image with the person, the untouched background and the
/// binarized pasted silhouette.
struct CompositeTriplet {
  Image source;
  Image target;
  Mask mask;
  Provenance meta;
};

PersonSprite extract_sprite(const Image& donor, const Mask& donor_mask, int feather_radius,
                            std::string origin_id = {});

/// Pixel rectangle covered by the scaled sprite before clipping.
Rect sprite_footprint(const PersonSprite& sprite, const Placement& placement);

/// Scaled, optionally mirrored sprite resampled onto the background grid.
/// Pixels outside the footprint carry alpha 0.
struct PastedLayer {
  Image layer;
  AlphaMap alpha;
};
PastedLayer rasterize_sprite(const PersonSprite& sprite, const Placement& placement,
                             int width, int height);

/// Composites the sprite over the background. The mask is the pasted alpha
/// thresholded at 0.5; the target is the background, unchanged. Pasted alpha
/// farther than the sprite's feather radius (Chebyshev) from the mask is
/// dropped, so the source only differs from the target near the mask even
/// when upscaling stretches the feather ramp.
CompositeTriplet paste(const Image& background, const PersonSprite& sprite,
                       const Placement& placement);

/// Draws an anchor uniformly from the set bits of `region`, sizes it with the
/// ground-line rule and flips with probability 1/2 when `allow_flip` is set.
Placement sample_placement(const Mask& region, const PersonSprite& sprite, std::uint64_t rng_seed,
                           const GroundLineRule& scale_rule, bool allow_flip = true);

struct BackgroundAsset {
  std::string id;
  Image image;
  Mask region;
};

struct SpriteAsset {
  std::string id;
  Image donor;
  Mask donor_mask;
};

struct MosaicConfig {
  std::uint64_t seed = 0;
  int count = 500;
  int feather_radius = 2;
  GroundLineRule scale_rule;
  bool allow_flip = true;
  int max_attempts = 100;
  int workers = 1;
  std::filesystem::path background_dir = "backgrounds";
  std::filesystem::path sprite_dir = "sprites";
  std::filesystem::path out_dir = "out";
};

/// Placement region used when a background ships without one: its lower third.
Mask default_region(int width, int height);

/// Loads every `*.png` in `dir` as a background, sorted by file name. A
/// sibling `<stem>.region.png` supplies the placement region.
std::vector<BackgroundAsset> load_backgrounds(const std::filesystem::path& dir);

/// Loads every `<stem>.png` in `dir` with its required `<stem>.mask.png`.
std::vector<SpriteAsset> load_sprites(const std::filesystem::path& dir);

/// Background/sprite pair indices for each triplet: a seeded shuffle of the
/// full cartesian product, cycled when `count` exceeds it.
std::vector<std::pair<std::size_t, std::size_t>> combine_assets(std::size_t backgrounds,
                                                                std::size_t sprites, int count,
                                                                std::uint64_t seed);

/// Synthesizes `count` triplets. Triplet i samples its placement from seed + i
/// and retries up to `max_attempts` when the paste is degenerate.
std::vector<CompositeTriplet> synth_mosaic_batch(const std::vector<BackgroundAsset>& backgrounds,
                                                 const std::vector<SpriteAsset>& sprites,
                                                 int count, const MosaicConfig& config);

/// Per-triplet sprite adjustment applied after placement sampling, before the
/// paste. May record extra provenance.
using SpriteHook = std::function<PersonSprite(const PersonSprite& sprite, const Image& background,
                                              const Placement& placement, std::size_t index,
                                              Provenance& meta)>;

/// synth_mosaic_batch with a hook between placement and paste.
std::vector<CompositeTriplet> synth_batch(const std::vector<BackgroundAsset>& backgrounds,
                                          const std::vector<SpriteAsset>& sprites, int count,
                                          const MosaicConfig& config, const SpriteHook& hook);

}  // namespace prkit
