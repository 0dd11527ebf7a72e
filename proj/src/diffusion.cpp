#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "prkit/compose.hpp"
#include "prkit/removal.hpp"

namespace prkit {

namespace {

constexpr std::array<std::array<int, 2>, 4> kNeighbours{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

struct HoleComponent {
  std::vector<std::size_t> pixels;
  Rgb lo{1.0, 1.0, 1.0};
  Rgb hi{0.0, 0.0, 0.0};
  bool has_boundary = false;
};

std::vector<HoleComponent> hole_components(const Image& image, const Mask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<int> label(mask.pixel_count(), -1);
  std::vector<HoleComponent> components;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < mask.pixel_count(); ++start) {
    if (!mask.values()[start] || label[start] >= 0) continue;
    const int id = static_cast<int>(components.size());
    components.emplace_back();
    auto& comp = components.back();
    label[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      comp.pixels.push_back(p);
      const int x = static_cast<int>(p % w);
      const int y = static_cast<int>(p / w);
      for (const auto& [dx, dy] : kNeighbours) {
        const int nx = x + dx;
        const int ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const std::size_t q = static_cast<std::size_t>(ny) * w + nx;
        if (mask.values()[q]) {
          if (label[q] < 0) {
            label[q] = id;
            stack.push_back(q);
          }
        } else {
          comp.has_boundary = true;
          for (std::size_t c = 0; c < 3; ++c) {
            const double v = image.values()[q * 3 + c];
            comp.lo[c] = std::min(comp.lo[c], v);
            comp.hi[c] = std::max(comp.hi[c], v);
          }
        }
      }
    }
    std::sort(comp.pixels.begin(), comp.pixels.end());
  }
  return components;
}

}  // namespace

Image diffusion_restore(const Image& image, const Mask& mask, int iters, double tol) {
  require_same_size(image, mask, "diffusion_restore");
  if (iters < 1) throw ArgumentError("diffusion_restore: iters must be >= 1");
  if (!(tol > 0.0)) throw ArgumentError("diffusion_restore: tol must be > 0");
  const std::size_t holes = count_set(mask);
  if (holes == 0) return image;
  if (holes == mask.pixel_count()) {
    throw NoBoundaryError("diffusion_restore: mask covers the whole image, nothing to diffuse from");
  }

  const int w = mask.width();
  const int h = mask.height();
  Image out = image;
  auto values = out.values();

  // Hole pixels in raster order with their neighbour lists. A neighbour entry
  // >= 0 indexes the hole list; a negative entry -(q + 1) is a fixed pixel q.
  std::vector<std::size_t> hole;
  std::vector<long> slot(mask.pixel_count(), -1);
  const auto components = hole_components(image, mask);
  std::vector<const HoleComponent*> owner(mask.pixel_count(), nullptr);
  for (const auto& comp : components) {
    if (!comp.has_boundary) {
      throw NoBoundaryError("diffusion_restore: hole without known boundary pixels");
    }
    for (const std::size_t p : comp.pixels) {
      owner[p] = &comp;
      for (std::size_t c = 0; c < 3; ++c) {
        values[p * 3 + c] = std::clamp(values[p * 3 + c], comp.lo[c], comp.hi[c]);
      }
    }
  }
  for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
    if (mask.values()[p]) {
      slot[p] = static_cast<long>(hole.size());
      hole.push_back(p);
    }
  }

  std::vector<long> neighbours(hole.size() * 4, std::numeric_limits<long>::min());
  std::vector<double> weight(hole.size());
  for (std::size_t k = 0; k < hole.size(); ++k) {
    const int x = static_cast<int>(hole[k] % w);
    const int y = static_cast<int>(hole[k] / w);
    int n = 0;
    for (const auto& [dx, dy] : kNeighbours) {
      const int nx = x + dx;
      const int ny = y + dy;
      if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
      const std::size_t q = static_cast<std::size_t>(ny) * w + nx;
      neighbours[k * 4 + n++] = slot[q] >= 0 ? slot[q] : -static_cast<long>(q) - 1;
    }
    weight[k] = 1.0 / n;
  }

  std::vector<double> current(hole.size() * 3);
  for (std::size_t k = 0; k < hole.size(); ++k) {
    std::copy_n(values.begin() + hole[k] * 3, 3, current.begin() + k * 3);
  }
  std::vector<double> next(current.size());
  for (int it = 0; it < iters; ++it) {
    double change = 0.0;
    for (std::size_t k = 0; k < hole.size(); ++k) {
      std::array<double, 3> sum{};
      for (int j = 0; j < 4; ++j) {
        const long nb = neighbours[k * 4 + j];
        if (nb == std::numeric_limits<long>::min()) break;
        const double* src = nb >= 0 ? &current[static_cast<std::size_t>(nb) * 3]
                                    : &values[static_cast<std::size_t>(-nb - 1) * 3];
        sum[0] += src[0];
        sum[1] += src[1];
        sum[2] += src[2];
      }
      const HoleComponent& comp = *owner[hole[k]];
      for (std::size_t c = 0; c < 3; ++c) {
        // Clamping only absorbs rounding; the average is already in range.
        const double v = std::clamp(sum[c] * weight[k], comp.lo[c], comp.hi[c]);
        change = std::max(change, std::abs(v - current[k * 3 + c]));
        next[k * 3 + c] = v;
      }
    }
    current.swap(next);
    if (change < tol) break;
  }
  for (std::size_t k = 0; k < hole.size(); ++k) {
    std::copy_n(current.begin() + k * 3, 3, values.begin() + hole[k] * 3);
  }
  return out;
}

DiffusionRestorer::DiffusionRestorer(DiffusionOptions options) : options_(options) {
  if (options_.iters < 1) throw ArgumentError("diffusion restorer: iters must be >= 1");
  if (!(options_.tol > 0.0)) throw ArgumentError("diffusion restorer: tol must be > 0");
}

Image DiffusionRestorer::restore(const Image& image, const Mask& mask) const {
  return diffusion_restore(image, mask, options_.iters, options_.tol);
}

}  // namespace prkit
