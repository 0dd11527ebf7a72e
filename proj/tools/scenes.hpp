#pragma once

// Procedural stand-ins for photographed assets: smooth street-like
// backgrounds and simple person cut-outs. Shared by the demo asset tool and
// the test suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "prkit/image.hpp"
#include "prkit/mosaic.hpp"

namespace prkit::demo {

/// Per channel a + b x + c y + d (x^2 - y^2) + e x y, rescaled into
/// [lo, hi]. Each term has a zero 4-neighbour discrete Laplacian, so the image
/// is exactly harmonic away from the border.
inline Image smooth_background(int width, int height, std::uint64_t seed, double lo = 0.1,
                               double hi = 0.9) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  Image out(width, height);
  const double side = std::max(width, height);
  for (int c = 0; c < 3; ++c) {
    const double b = coef(rng), cy = coef(rng), d = coef(rng), e = coef(rng);
    auto f = [&](int x, int y) {
      // one length scale for both axes, otherwise x^2 - y^2 stops being harmonic
      const double u = static_cast<double>(x) / side, v = static_cast<double>(y) / side;
      return b * u + cy * v + d * (u * u - v * v) + e * u * v;
    };
    double fmin = 1e300, fmax = -1e300;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        fmin = std::min(fmin, f(x, y));
        fmax = std::max(fmax, f(x, y));
      }
    }
    const double span = fmax - fmin > 1e-12 ? fmax - fmin : 1.0;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) out.at(x, y, c) = lo + (hi - lo) * (f(x, y) - fmin) / span;
    }
  }
  return out;
}

/// A random tile_w x tile_h tile repeated over the image.
inline Image periodic_texture(int width, int height, std::uint64_t seed, int tile_w = 8,
                              int tile_h = 6) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  Image tile(tile_w, tile_h);
  for (auto& v : tile.values()) v = u(rng);
  Image out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) set_pixel(out, x, y, pixel(tile, x % tile_w, y % tile_h));
  }
  return out;
}

/// A standing figure (head, torso, two legs) in a width x height donor frame
/// with one pixel of margin, shirt and trousers in seeded colours.
inline SpriteAsset person_asset(int width, int height, std::uint64_t seed, std::string id) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Rgb skin{0.55 + 0.35 * u(rng), 0.4 + 0.3 * u(rng), 0.3 + 0.25 * u(rng)};
  const Rgb shirt{u(rng), u(rng), u(rng)};
  const Rgb trousers{0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng)};
  const Rgb backdrop{u(rng), u(rng), u(rng)};

  SpriteAsset asset{std::move(id), Image(width, height), Mask(width, height)};
  const double cx = (width - 1) / 2.0;
  const double head_r = std::max(1.0, width * 0.18);
  const double head_cy = 1 + head_r;
  const int torso_top = static_cast<int>(head_cy + head_r);
  const int torso_bottom = static_cast<int>(height * 0.6);
  const double torso_half = width * 0.32;
  const double leg_gap = std::max(0.5, width * 0.04);
  const double leg_half = width * 0.28;
  std::normal_distribution<double> grain(0.0, 0.03);

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      Rgb colour = backdrop;
      bool on = false;
      const double dx = x - cx;
      if (std::hypot(dx, y - head_cy) <= head_r) {
        colour = skin;
        on = true;
      } else if (y >= torso_top && y < torso_bottom && std::abs(dx) <= torso_half) {
        colour = shirt;
        on = true;
      } else if (y >= torso_bottom && y < height - 1 && std::abs(dx) >= leg_gap &&
                 std::abs(dx) <= leg_half) {
        colour = trousers;
        on = true;
      }
      for (int c = 0; c < 3; ++c) {
        asset.donor.at(x, y, c) = std::clamp(colour[c] + (on ? grain(rng) : 0.0), 0.0, 1.0);
      }
      asset.donor_mask.at(x, y) = on ? 1 : 0;
    }
  }
  return asset;
}

}  // namespace prkit::demo
