#include "prkit/lightfit.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

#include "prkit/compose.hpp"
#include "prkit/parallel.hpp"
#include "prkit/render.hpp"

namespace prkit {

double illum_loss(const Image& source, const Image& target, const Mask& mask) {
  require_same_size(source, target, "illum_loss");
  require_same_size(source, mask, "illum_loss");
  double sum = 0.0;
  std::size_t n = 0;
  auto s = source.values();
  auto t = target.values();
  for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
    if (!mask.values()[p]) continue;
    for (std::size_t c = 0; c < 3; ++c) sum += std::abs(s[p * 3 + c] - t[p * 3 + c]);
    ++n;
  }
  if (n == 0) throw EmptySelectionError("illum_loss: mask is empty");
  return sum / (3.0 * static_cast<double>(n));
}

double ring_loss(const Image& source, const Image& target, const Mask& mask, int ring_width) {
  require_same_size(source, target, "ring_loss");
  require_same_size(source, mask, "ring_loss");
  const Mask grown = dilate(mask, ring_width);
  std::array<double, 3> inner{};
  std::array<double, 3> outer{};
  std::size_t n_inner = 0;
  std::size_t n_outer = 0;
  for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
    if (mask.values()[p]) {
      for (std::size_t c = 0; c < 3; ++c) inner[c] += source.values()[p * 3 + c];
      ++n_inner;
    } else if (grown.values()[p]) {
      for (std::size_t c = 0; c < 3; ++c) outer[c] += target.values()[p * 3 + c];
      ++n_outer;
    }
  }
  if (n_inner == 0) throw EmptySelectionError("ring_loss: mask is empty");
  if (n_outer == 0) throw EmptySelectionError("ring_loss: ring around the mask is empty");
  double gap = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    gap += std::abs(inner[c] / static_cast<double>(n_inner) - outer[c] / static_cast<double>(n_outer));
  }
  return gap / 3.0;
}

namespace {

constexpr std::array<std::pair<LightParam, std::string_view>, 8> kParamNames{{
    {LightParam::gamma, "gamma"},
    {LightParam::gain, "gain"},
    {LightParam::gain_r, "gain_r"},
    {LightParam::gain_g, "gain_g"},
    {LightParam::gain_b, "gain_b"},
    {LightParam::offset, "offset"},
    {LightParam::angle, "angle"},
    {LightParam::ramp_strength, "ramp_strength"},
}};

double parse_number(std::string_view text, std::string_view spec) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ArgumentError("grid spec '" + std::string(spec) + "': '" + std::string(text) +
                        "' is not a number");
  }
  return value;
}

}  // namespace

std::string_view to_string(LightParam param) {
  for (const auto& [p, name] : kParamNames) {
    if (p == param) return name;
  }
  return "?";
}

LightParam parse_light_param(std::string_view name) {
  for (const auto& [p, n] : kParamNames) {
    if (n == name) return p;
  }
  if (name == "angle_deg") return LightParam::angle;
  throw ArgumentError("unknown lighting parameter '" + std::string(name) + "'");
}

double get_param(const LightingParams& params, LightParam which) {
  switch (which) {
    case LightParam::gamma: return params.gamma;
    case LightParam::gain:
    case LightParam::gain_r: return params.gain[0];
    case LightParam::gain_g: return params.gain[1];
    case LightParam::gain_b: return params.gain[2];
    case LightParam::offset: return params.offset;
    case LightParam::angle: return params.angle_deg;
    case LightParam::ramp_strength: return params.ramp_strength;
  }
  return 0.0;
}

void set_param(LightingParams& params, LightParam which, double value) {
  switch (which) {
    case LightParam::gamma: params.gamma = value; break;
    case LightParam::gain: params.gain = {value, value, value}; break;
    case LightParam::gain_r: params.gain[0] = value; break;
    case LightParam::gain_g: params.gain[1] = value; break;
    case LightParam::gain_b: params.gain[2] = value; break;
    case LightParam::offset: params.offset = value; break;
    case LightParam::angle: params.angle_deg = value; break;
    case LightParam::ramp_strength: params.ramp_strength = value; break;
  }
}

LatticeAxis LatticeAxis::parse(std::string_view spec) {
  const auto eq = spec.find('=');
  if (eq == std::string_view::npos) {
    throw ArgumentError("grid spec '" + std::string(spec) + "' must look like param=lo:hi:steps");
  }
  LatticeAxis axis;
  axis.param = parse_light_param(spec.substr(0, eq));
  const auto range = spec.substr(eq + 1);
  const auto c1 = range.find(':');
  const auto c2 = c1 == std::string_view::npos ? c1 : range.find(':', c1 + 1);
  if (c2 == std::string_view::npos) {
    throw ArgumentError("grid spec '" + std::string(spec) + "' must look like param=lo:hi:steps");
  }
  const double lo = parse_number(range.substr(0, c1), spec);
  const double hi = parse_number(range.substr(c1 + 1, c2 - c1 - 1), spec);
  const double steps = parse_number(range.substr(c2 + 1), spec);
  if (steps < 1 || steps != std::floor(steps)) {
    throw ArgumentError("grid spec '" + std::string(spec) + "': steps must be a positive integer");
  }
  const int n = static_cast<int>(steps);
  for (int k = 0; k < n; ++k) {
    axis.values.push_back(n == 1 ? lo : lo + (hi - lo) * k / (n - 1));
  }
  return axis;
}

std::size_t ParamLattice::size() const {
  std::size_t n = 1;
  for (const auto& axis : axes) n *= axis.values.size();
  return n;
}

LightingParams ParamLattice::at(std::size_t index) const {
  LightingParams p = base;
  for (auto it = axes.rbegin(); it != axes.rend(); ++it) {
    const std::size_t k = it->values.size();
    set_param(p, it->param, it->values[index % k]);
    index /= k;
  }
  return p;
}

SceneObjective::SceneObjective(const Image& background, const PersonSprite& sprite,
                               const Placement& placement, FitOptions options)
    : background_(background), sprite_(sprite), placement_(placement), options_(options) {
  mask_ = paste(background, sprite, placement).mask;
  if (count_set(mask_) == 0) throw EmptySelectionError("lighting fit: pasted person mask is empty");
}

double SceneObjective::operator()(const LightingParams& params) const {
  const Image lit = paste(background_, apply_lighting(sprite_, params), placement_).source;
  if (options_.region == LossRegion::ring) {
    return ring_loss(lit, background_, mask_, options_.ring_width);
  }
  return illum_loss(lit, background_, mask_);
}

FitResult fit_grid(const Image& background, const PersonSprite& sprite, const Placement& placement,
                   const ParamLattice& grid, const FitOptions& options) {
  const std::size_t n = grid.size();
  if (grid.axes.empty()) throw ArgumentError("fit_grid: lattice is empty");
  for (const auto& axis : grid.axes) {
    if (axis.values.empty()) throw ArgumentError("fit_grid: lattice axis has no values");
  }
  for (std::size_t i = 0; i < n; ++i) validate(grid.at(i));

  const SceneObjective objective(background, sprite, placement, options);
  std::vector<double> losses(n);
  parallel_for(n, options.workers, [&](std::size_t i) { losses[i] = objective(grid.at(i)); });

  FitResult result;
  result.evaluations = static_cast<int>(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || losses[i] < result.loss) {
      result.params = grid.at(i);
      result.loss = losses[i];
      result.trace.push_back({result.params, result.loss});
    }
  }
  return result;
}

namespace {

struct Coordinate {
  LightParam param;
  double step;
  double lo;
  double hi;
  bool wraps;
};

}  // namespace

FitResult fit_descent(const Image& background, const PersonSprite& sprite,
                      const Placement& placement, const LightingParams& init, int budget,
                      const FitOptions& options) {
  if (budget < 1) throw ArgumentError("fit_descent: budget must be >= 1");
  validate(init);
  constexpr double kStepFloor = 1e-3;
  std::array<Coordinate, 7> coords{{
      {LightParam::gamma, 0.5, 0.2, 5.0, false},
      {LightParam::gain_r, 0.25, 0.1, 3.0, false},
      {LightParam::gain_g, 0.25, 0.1, 3.0, false},
      {LightParam::gain_b, 0.25, 0.1, 3.0, false},
      {LightParam::offset, 0.1, -0.5, 0.5, false},
      {LightParam::angle, 45.0, 0.0, 360.0, true},
      {LightParam::ramp_strength, 0.25, 0.0, 1.0, false},
  }};

  const SceneObjective objective(background, sprite, placement, options);
  FitResult result;
  result.params = init;
  result.loss = objective(init);
  result.evaluations = 1;
  result.trace.push_back({result.params, result.loss});

  const auto active = [&] {
    return std::any_of(coords.begin(), coords.end(),
                       [&](const Coordinate& c) { return c.step >= kStepFloor; });
  };
  while (result.evaluations < budget && active()) {
    for (auto& coord : coords) {
      if (coord.step < kStepFloor) continue;
      bool improved = false;
      for (const double dir : {1.0, -1.0}) {
        if (result.evaluations >= budget) break;
        const double current = get_param(result.params, coord.param);
        double moved = current + dir * coord.step;
        if (coord.wraps) {
          moved = std::fmod(moved, 360.0);
          if (moved < 0.0) moved += 360.0;
          if (moved >= 360.0) moved = 0.0;
        } else {
          moved = std::clamp(moved, coord.lo, coord.hi);
        }
        if (moved == current) continue;
        LightingParams candidate = result.params;
        set_param(candidate, coord.param, moved);
        const double loss = objective(candidate);
        ++result.evaluations;
        if (loss < result.loss) {
          result.params = candidate;
          result.loss = loss;
          result.trace.push_back({candidate, loss});
          improved = true;
          break;
        }
      }
      if (result.evaluations >= budget) break;
      if (!improved) coord.step *= 0.5;
    }
  }
  return result;
}

}  // namespace prkit
