#pragma once

#include <array>
#include <string>

namespace prkit {

/// Editable illumination attributes of a rendered person billboard.
///
/// Ranges: gain in [0.1, 3] per channel, offset in [-0.5, 0.5], gamma in
/// [0.2, 5], angle_deg in [0, 360), ramp_strength in [0, 1].
struct LightingParams {
  std::array<double, 3> gain{1.0, 1.0, 1.0};
  double offset = 0.0;
  double gamma = 1.0;
  double angle_deg = 0.0;
  double ramp_strength = 0.0;

  bool operator==(const LightingParams&) const = default;

  static LightingParams identity() { return {}; }
};

/// Empty string when every field is in range, else a description of the first
/// violation.
std::string lighting_violation(const LightingParams& params);

/// Throws ArgumentError when a field is out of range.
void validate(const LightingParams& params);

}  // namespace prkit
