#include "prkit/mosaic.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "prkit/compose.hpp"
#include "prkit/parallel.hpp"
#include "prkit/png_io.hpp"

namespace prkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Exact 1-D squared distance transform (lower envelope of parabolas).
void distance_transform_1d(const std::vector<double>& f, std::vector<double>& d) {
  const int n = static_cast<int>(f.size());
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s = 0.0;
    while (true) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s > z[k]) break;
      if (--k < 0) break;
    }
    ++k;
    v[k] = q;
    z[k] = k == 0 ? -kInf : s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), kInf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = q - v[j];
    d[q] = dq * dq + f[v[j]];
  }
}

// Squared Euclidean distance from each pixel to the nearest set bit.
std::vector<double> squared_distance_to_set(const Mask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<double> grid(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = mask.values()[i] ? 0.0 : kInf;
  std::vector<double> f(h);
  std::vector<double> d(h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = grid[static_cast<std::size_t>(y) * w + x];
    distance_transform_1d(f, d);
    for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = d[y];
  }
  f.resize(w);
  d.resize(w);
  for (int y = 0; y < h; ++y) {
    std::copy_n(grid.begin() + static_cast<std::ptrdiff_t>(y) * w, w, f.begin());
    distance_transform_1d(f, d);
    std::copy_n(d.begin(), w, grid.begin() + static_cast<std::ptrdiff_t>(y) * w);
  }
  return grid;
}

struct Bilinear {
  int x0, x1, y0, y1;
  double fx, fy;
};

Bilinear bilinear_taps(double sx, double sy, int w, int h) {
  const double flx = std::floor(sx);
  const double fly = std::floor(sy);
  Bilinear b{};
  b.fx = sx - flx;
  b.fy = sy - fly;
  b.x0 = std::clamp(static_cast<int>(flx), 0, w - 1);
  b.x1 = std::clamp(static_cast<int>(flx) + 1, 0, w - 1);
  b.y0 = std::clamp(static_cast<int>(fly), 0, h - 1);
  b.y1 = std::clamp(static_cast<int>(fly) + 1, 0, h - 1);
  return b;
}

template <typename R>
double sample(const R& r, const Bilinear& b, std::size_t c) {
  const double top = (1.0 - b.fx) * r.at(b.x0, b.y0, c) + b.fx * r.at(b.x1, b.y0, c);
  const double bottom = (1.0 - b.fx) * r.at(b.x0, b.y1, c) + b.fx * r.at(b.x1, b.y1, c);
  return (1.0 - b.fy) * top + b.fy * bottom;
}

std::uint64_t attempt_seed(std::uint64_t base, int attempt) {
  return base + static_cast<std::uint64_t>(attempt) * 0x9E3779B97F4A7C15ull;
}

}  // namespace

double GroundLineRule::operator()(int anchor_y) const {
  if (!(horizon_offset > 0.0)) throw ArgumentError("ground-line rule: horizon_offset must be > 0");
  if (!(base_scale > 0.0)) throw ArgumentError("ground-line rule: base_scale must be > 0");
  const double s = base_scale * static_cast<double>(anchor_y) / horizon_offset;
  return std::clamp(s, min_scale, max_scale);
}

PersonSprite extract_sprite(const Image& donor, const Mask& donor_mask, int feather_radius,
                            std::string origin_id) {
  require_same_size(donor, donor_mask, "extract_sprite");
  if (feather_radius < 0) throw ArgumentError("extract_sprite: feather_radius must be >= 0");
  const Rect box = bounding_box(donor_mask);
  if (box.empty()) {
    throw EmptySelectionError("extract_sprite: donor mask '" + origin_id + "' has no set bits");
  }
  const int pad = feather_radius;
  const int w = box.width() + 2 * pad;
  const int h = box.height() + 2 * pad;
  PersonSprite sprite{Image(w, h), AlphaMap(w, h), std::move(origin_id), feather_radius};

  Mask silhouette(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int dx = box.x0 - pad + x;
      const int dy = box.y0 - pad + y;
      const int sx = std::clamp(dx, 0, donor.width() - 1);
      const int sy = std::clamp(dy, 0, donor.height() - 1);
      set_pixel(sprite.patch, x, y, pixel(donor, sx, sy));
      silhouette.at(x, y) = donor_mask.contains(dx, dy) && donor_mask.at(dx, dy) ? 1 : 0;
    }
  }

  if (feather_radius == 0) {
    for (std::size_t i = 0; i < silhouette.pixel_count(); ++i) {
      sprite.alpha.values()[i] = silhouette.values()[i] ? 1.0 : 0.0;
    }
    return sprite;
  }
  const auto dist2 = squared_distance_to_set(silhouette);
  for (std::size_t i = 0; i < dist2.size(); ++i) {
    const double d = std::sqrt(dist2[i]);
    sprite.alpha.values()[i] = std::max(0.0, 1.0 - d / feather_radius);
  }
  return sprite;
}

Rect sprite_footprint(const PersonSprite& sprite, const Placement& placement) {
  if (!(placement.scale > 0.0) || !std::isfinite(placement.scale)) {
    throw ArgumentError("placement scale must be a positive finite number");
  }
  const int fw = std::max(1, static_cast<int>(std::lround(sprite.patch.width() * placement.scale)));
  const int fh =
      std::max(1, static_cast<int>(std::lround(sprite.patch.height() * placement.scale)));
  const int left = placement.anchor_x - fw / 2;
  const int top = placement.anchor_y - fh + 1;
  return Rect{left, top, left + fw, top + fh};
}

PastedLayer rasterize_sprite(const PersonSprite& sprite, const Placement& placement, int width,
                             int height) {
  const Rect fp = sprite_footprint(sprite, placement);
  PastedLayer out{Image(width, height), AlphaMap(width, height)};
  const Rect clip{std::max(fp.x0, 0), std::max(fp.y0, 0), std::min(fp.x1, width),
                  std::min(fp.y1, height)};
  if (clip.empty()) {
    throw PlacementError("sprite footprint [" + std::to_string(fp.x0) + "," +
                         std::to_string(fp.y0) + ")-[" + std::to_string(fp.x1) + "," +
                         std::to_string(fp.y1) + ") does not overlap the " +
                         std::to_string(width) + "x" + std::to_string(height) + " background");
  }
  const int pw = sprite.patch.width();
  const int ph = sprite.patch.height();
  const double ratio_x = static_cast<double>(pw) / fp.width();
  const double ratio_y = static_cast<double>(ph) / fp.height();
  for (int y = clip.y0; y < clip.y1; ++y) {
    const double sy = (y - fp.y0 + 0.5) * ratio_y - 0.5;
    for (int x = clip.x0; x < clip.x1; ++x) {
      int u = x - fp.x0;
      if (placement.flip) u = fp.width() - 1 - u;
      const double sx = (u + 0.5) * ratio_x - 0.5;
      const Bilinear taps = bilinear_taps(sx, sy, pw, ph);
      for (std::size_t c = 0; c < 3; ++c) out.layer.at(x, y, c) = sample(sprite.patch, taps, c);
      out.alpha.at(x, y) = std::clamp(sample(sprite.alpha, taps, 0), 0.0, 1.0);
    }
  }
  return out;
}

CompositeTriplet paste(const Image& background, const PersonSprite& sprite,
                       const Placement& placement) {
  if (!(placement.scale > 0.0)) throw ArgumentError("paste: scale must be > 0");
  const auto pasted = rasterize_sprite(sprite, placement, background.width(), background.height());

  Mask mask(background.width(), background.height());
  for (std::size_t i = 0; i < mask.pixel_count(); ++i) {
    mask.values()[i] = pasted.alpha.values()[i] >= 0.5 ? 1 : 0;
  }
  const Mask reach = dilate(mask, std::max(0, sprite.feather_radius));
  AlphaMap keep(background.width(), background.height());
  for (std::size_t i = 0; i < keep.pixel_count(); ++i) {
    keep.values()[i] = reach.values()[i] ? 1.0 - pasted.alpha.values()[i] : 1.0;
  }

  CompositeTriplet triplet;
  triplet.source = alpha_blend(background, pasted.layer, keep);
  triplet.target = background;
  triplet.mask = std::move(mask);
  triplet.meta.sprite_id = sprite.origin_id;
  triplet.meta.placement = placement;
  if (count_set(triplet.mask) == 0) {
    spdlog::warn("paste of sprite '{}' at ({}, {}) produced an empty mask", sprite.origin_id,
                 placement.anchor_x, placement.anchor_y);
  }
  return triplet;
}

Placement sample_placement(const Mask& region, const PersonSprite& sprite, std::uint64_t rng_seed,
                           const GroundLineRule& scale_rule, bool allow_flip) {
  if (sprite.patch.empty()) throw ArgumentError("sample_placement: sprite is empty");
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < region.pixel_count(); ++i) {
    if (region.values()[i]) candidates.push_back(i);
  }
  if (candidates.empty()) throw EmptySelectionError("sample_placement: placement region is empty");

  std::mt19937_64 rng(rng_seed);
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  const std::size_t index = candidates[pick(rng)];
  Placement placement;
  placement.anchor_x = static_cast<int>(index % region.width());
  placement.anchor_y = static_cast<int>(index / region.width());
  placement.scale = scale_rule(placement.anchor_y);
  placement.flip = allow_flip && std::bernoulli_distribution(0.5)(rng);
  return placement;
}

Mask default_region(int width, int height) {
  Mask region(width, height);
  for (int y = (2 * height) / 3; y < height; ++y) {
    for (int x = 0; x < width; ++x) region.at(x, y) = 1;
  }
  return region;
}

namespace {

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<std::filesystem::path> png_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("asset directory '" + dir.string() + "' does not exist");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

std::vector<BackgroundAsset> load_backgrounds(const std::filesystem::path& dir) {
  std::vector<BackgroundAsset> assets;
  for (const auto& file : png_files(dir)) {
    const std::string stem = file.stem().string();
    if (has_suffix(stem, ".region")) continue;
    BackgroundAsset asset{stem, read_image(file), {}};
    const auto region_path = dir / (stem + ".region.png");
    if (std::filesystem::exists(region_path)) {
      asset.region = read_mask(region_path);
      if (!asset.region.same_size(asset.image)) {
        throw DimensionError("region '" + region_path.string() + "' does not match background size");
      }
    } else {
      asset.region = default_region(asset.image.width(), asset.image.height());
    }
    assets.push_back(std::move(asset));
  }
  if (assets.empty()) throw IoError("no background PNGs found in '" + dir.string() + "'");
  return assets;
}

std::vector<SpriteAsset> load_sprites(const std::filesystem::path& dir) {
  std::vector<SpriteAsset> assets;
  for (const auto& file : png_files(dir)) {
    const std::string stem = file.stem().string();
    if (has_suffix(stem, ".mask")) continue;
    const auto mask_path = dir / (stem + ".mask.png");
    if (!std::filesystem::exists(mask_path)) {
      throw IoError("sprite '" + file.string() + "' has no mask file '" + mask_path.string() + "'");
    }
    SpriteAsset asset{stem, read_image(file), read_mask(mask_path)};
    if (!asset.donor_mask.same_size(asset.donor)) {
      throw DimensionError("mask '" + mask_path.string() + "' does not match its donor image");
    }
    assets.push_back(std::move(asset));
  }
  if (assets.empty()) throw IoError("no sprite PNGs found in '" + dir.string() + "'");
  return assets;
}

std::vector<std::pair<std::size_t, std::size_t>> combine_assets(std::size_t backgrounds,
                                                                std::size_t sprites, int count,
                                                                std::uint64_t seed) {
  std::vector<std::pair<std::size_t, std::size_t>> all;
  all.reserve(backgrounds * sprites);
  for (std::size_t b = 0; b < backgrounds; ++b) {
    for (std::size_t s = 0; s < sprites; ++s) all.emplace_back(b, s);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  std::vector<std::pair<std::size_t, std::size_t>> pairs(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i] = all[i % all.size()];
  return pairs;
}

std::vector<CompositeTriplet> synth_batch(const std::vector<BackgroundAsset>& backgrounds,
                                          const std::vector<SpriteAsset>& sprites, int count,
                                          const MosaicConfig& config, const SpriteHook& hook) {
  if (backgrounds.empty()) throw ArgumentError("synthesis needs at least one background");
  if (sprites.empty()) throw ArgumentError("synthesis needs at least one sprite");
  if (count < 1) throw ArgumentError("synthesis count must be >= 1");
  if (config.max_attempts < 1) throw ArgumentError("max_attempts must be >= 1");

  std::vector<PersonSprite> cut;
  cut.reserve(sprites.size());
  for (const auto& s : sprites) {
    cut.push_back(extract_sprite(s.donor, s.donor_mask, config.feather_radius, s.id));
  }
  const auto pairs = combine_assets(backgrounds.size(), sprites.size(), count, config.seed);

  std::vector<CompositeTriplet> out(static_cast<std::size_t>(count));
  parallel_for(out.size(), config.workers, [&](std::size_t i) {
    const auto& bg = backgrounds[pairs[i].first];
    const auto& sprite = cut[pairs[i].second];
    const std::uint64_t seed = config.seed + i;
    for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
      const Placement placement = sample_placement(bg.region, sprite, attempt_seed(seed, attempt),
                                                   config.scale_rule, config.allow_flip);
      Provenance meta{bg.id, sprite.origin_id, placement, seed, attempt + 1, std::nullopt};
      try {
        const PersonSprite used = hook ? hook(sprite, bg.image, placement, i, meta) : sprite;
        CompositeTriplet triplet = paste(bg.image, used, placement);
        if (count_set(triplet.mask) == 0) continue;
        triplet.meta = std::move(meta);
        out[i] = std::move(triplet);
        return;
      } catch (const PlacementError&) {
        continue;
      } catch (const EmptySelectionError&) {
        continue;
      }
    }
    throw PlacementError("triplet " + std::to_string(i) + " (background '" + bg.id +
                         "', sprite '" + sprite.origin_id + "'): no usable placement after " +
                         std::to_string(config.max_attempts) + " attempts");
  });
  return out;
}

std::vector<CompositeTriplet> synth_mosaic_batch(const std::vector<BackgroundAsset>& backgrounds,
                                                 const std::vector<SpriteAsset>& sprites,
                                                 int count, const MosaicConfig& config) {
  return synth_batch(backgrounds, sprites, count, config, nullptr);
}

}  // namespace prkit
