#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "prkit/lighting_params.hpp"
#include "prkit/mosaic.hpp"

namespace prkit {

/// Mean absolute difference over masked pixels and all three channels.
double illum_loss(const Image& source, const Image& target, const Mask& mask);

/// Contrast-preserving variant: per channel, compares the mean of `source`
/// over the mask with the mean of `target` over the ring
/// dilate(mask, ring_width) \ mask, and averages the three absolute gaps.
double ring_loss(const Image& source, const Image& target, const Mask& mask, int ring_width);

enum class LightParam { gamma, gain, gain_r, gain_g, gain_b, offset, angle, ramp_strength };

std::string_view to_string(LightParam param);
LightParam parse_light_param(std::string_view name);

/// Reads one field; `gain` reads the red gain.
double get_param(const LightingParams& params, LightParam which);
/// Writes one field; `gain` writes all three channel gains.
void set_param(LightingParams& params, LightParam which, double value);

struct LatticeAxis {
  LightParam param = LightParam::angle;
  std::vector<double> values;

  /// Parses `param=lo:hi:steps` into `steps` evenly spaced values from lo to
  /// hi inclusive (just lo when steps is 1).
  static LatticeAxis parse(std::string_view spec);
};

/// Cartesian product of axes over a base parameter vector. Point order is
/// row-major with the first axis outermost.
struct ParamLattice {
  LightingParams base;
  std::vector<LatticeAxis> axes;

  std::size_t size() const;
  LightingParams at(std::size_t index) const;
};

struct TracePoint {
  LightingParams params;
  double loss = 0.0;
};

/// `trace` lists every incumbent in the order it was found, so its losses are
/// non-increasing and its last entry is the result.
struct FitResult {
  LightingParams params;
  double loss = 0.0;
  int evaluations = 0;
  std::vector<TracePoint> trace;
};

enum class LossRegion { mask, ring };

struct FitOptions {
  LossRegion region = LossRegion::mask;
  int ring_width = 4;
  int workers = 1;
};

/// The illumination objective for one scene: render the relit billboard and
/// compare the person region against the clean background.
class SceneObjective {
 public:
  SceneObjective(const Image& background, const PersonSprite& sprite, const Placement& placement,
                 FitOptions options = {});

  double operator()(const LightingParams& params) const;
  const Mask& mask() const { return mask_; }

 private:
  const Image& background_;
  const PersonSprite& sprite_;
  Placement placement_;
  FitOptions options_;
  Mask mask_;
};

/// Exhaustive search; ties go to the earliest lattice index.
FitResult fit_grid(const Image& background, const PersonSprite& sprite, const Placement& placement,
                   const ParamLattice& grid, const FitOptions& options = {});

/// Cyclic coordinate descent over gamma, gain_r, gain_g, gain_b, offset, angle
/// and ramp_strength with initial steps 0.5, 0.25, 0.25, 0.25, 0.1, 45 and
/// 0.25. Each coordinate tries +step then -step and halves its step when
/// neither improves. Stops after `budget` evaluations or once every step is
/// below 1e-3.
FitResult fit_descent(const Image& background, const PersonSprite& sprite,
                      const Placement& placement, const LightingParams& init, int budget,
                      const FitOptions& options = {});

}  // namespace prkit
