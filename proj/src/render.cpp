#include "prkit/render.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace prkit {

std::string lighting_violation(const LightingParams& p) {
  std::ostringstream why;
  for (std::size_t c = 0; c < 3; ++c) {
    if (!(p.gain[c] >= 0.1 && p.gain[c] <= 3.0)) {
      why << "gain[" << c << "] = " << p.gain[c] << " outside [0.1, 3]";
      return why.str();
    }
  }
  if (!(p.offset >= -0.5 && p.offset <= 0.5)) {
    why << "offset = " << p.offset << " outside [-0.5, 0.5]";
  } else if (!(p.gamma >= 0.2 && p.gamma <= 5.0)) {
    why << "gamma = " << p.gamma << " outside [0.2, 5]";
  } else if (!(p.angle_deg >= 0.0 && p.angle_deg < 360.0)) {
    why << "angle_deg = " << p.angle_deg << " outside [0, 360)";
  } else if (!(p.ramp_strength >= 0.0 && p.ramp_strength <= 1.0)) {
    why << "ramp_strength = " << p.ramp_strength << " outside [0, 1]";
  }
  return why.str();
}

void validate(const LightingParams& params) {
  if (auto why = lighting_violation(params); !why.empty()) {
    throw ArgumentError("invalid lighting params: " + why);
  }
}

std::vector<double> lighting_ramp(const AlphaMap& alpha, double angle_deg, double ramp_strength) {
  std::vector<double> ramp(alpha.pixel_count(), 0.0);
  if (ramp_strength == 0.0) return ramp;

  double cx = 0.0;
  double cy = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < alpha.height(); ++y) {
    for (int x = 0; x < alpha.width(); ++x) {
      if (alpha.at(x, y) < 0.5) continue;
      cx += x;
      cy += y;
      ++n;
    }
  }
  if (n == 0) return ramp;
  cx /= static_cast<double>(n);
  cy /= static_cast<double>(n);

  const double theta = angle_deg * std::numbers::pi / 180.0;
  const double dx = std::cos(theta);
  const double dy = std::sin(theta);
  double peak = 0.0;
  for (int y = 0; y < alpha.height(); ++y) {
    for (int x = 0; x < alpha.width(); ++x) {
      const double p = (x - cx) * dx + (y - cy) * dy;
      ramp[static_cast<std::size_t>(y) * alpha.width() + x] = p;
      if (alpha.at(x, y) >= 0.5) peak = std::max(peak, std::abs(p));
    }
  }
  if (peak < 1e-12) {
    std::fill(ramp.begin(), ramp.end(), 0.0);
    return ramp;
  }
  const double k = ramp_strength / peak;
  for (double& r : ramp) r *= k;
  return ramp;
}

PersonSprite apply_lighting(const PersonSprite& sprite, const LightingParams& params) {
  validate(params);
  const auto ramp = lighting_ramp(sprite.alpha, params.angle_deg, params.ramp_strength);
  PersonSprite out = sprite;
  auto src = sprite.patch.values();
  auto dst = out.patch.values();
  const bool linear = params.gamma == 1.0;
  for (std::size_t p = 0; p < ramp.size(); ++p) {
    for (std::size_t c = 0; c < 3; ++c) {
      const double in = src[p * 3 + c];
      const double shaped = linear ? in : std::pow(in, params.gamma);
      const double v = params.gain[c] * shaped + params.offset + ramp[p];
      dst[p * 3 + c] = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

DepthMap billboard_depth(const Mask& mask) {
  DepthMap depth(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.pixel_count(); ++i) {
    depth.values()[i] = mask.values()[i] ? 1.0 : 0.0;
  }
  return depth;
}

RenderedScene render_scene(const Image& background, const PersonSprite& sprite,
                           const Placement& placement, const LightingParams& params) {
  RenderedScene scene{paste(background, apply_lighting(sprite, params), placement), {}};
  scene.triplet.meta.lighting = params;
  scene.depth = billboard_depth(scene.triplet.mask);
  return scene;
}

std::vector<double> enumerate_angles(int n) {
  if (n < 1) throw ArgumentError("enumerate_angles: n must be >= 1");
  std::vector<double> angles(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) angles[k] = k * 360.0 / n;
  return angles;
}

}  // namespace prkit
