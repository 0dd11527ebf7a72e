#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <spdlog/spdlog.h>

#include "prkit/compose.hpp"
#include "prkit/removal.hpp"

namespace prkit {

namespace {

double luma(const Image& image, int x, int y) {
  const auto i = image.index(x, y);
  const auto v = image.values();
  return 0.299 * v[i] + 0.587 * v[i + 1] + 0.114 * v[i + 2];
}

class ExemplarFill {
 public:
  ExemplarFill(const Image& image, const Mask& mask, int patch_size, int search_radius)
      : work_(image),
        hole_(mask),
        half_(patch_size / 2),
        radius_(search_radius),
        w_(image.width()),
        h_(image.height()),
        known_(mask.pixel_count()),
        confidence_(mask.pixel_count()),
        stuck_(mask.pixel_count(), 0) {
    for (std::size_t i = 0; i < known_.size(); ++i) {
      known_[i] = mask.values()[i] ? 0 : 1;
      confidence_[i] = known_[i];
    }
    find_source_centres();
  }

  ExemplarResult run() {
    while (true) {
      const auto target = best_front_pixel();
      if (target < 0) break;
      const int px = static_cast<int>(target % w_);
      const int py = static_cast<int>(target / w_);
      const long source = best_source(px, py);
      if (source < 0) {
        stuck_[static_cast<std::size_t>(target)] = 1;
        continue;
      }
      copy_patch(px, py, static_cast<int>(source % w_), static_cast<int>(source / w_));
    }

    Mask remaining(w_, h_);
    for (std::size_t i = 0; i < known_.size(); ++i) remaining.values()[i] = known_[i] ? 0 : 1;
    ExemplarResult result{std::move(work_), count_set(remaining)};
    if (result.fallback_pixels > 0) {
      spdlog::debug("exemplar fill left {} pixels to diffusion", result.fallback_pixels);
      result.image = diffusion_restore(result.image, remaining);
    }
    return result;
  }

 private:
  bool known(int x, int y) const { return known_[static_cast<std::size_t>(y) * w_ + x] != 0; }

  // Centres whose whole patch is inside the image and outside the hole.
  void find_source_centres() {
    std::vector<int> integral(static_cast<std::size_t>(w_ + 1) * (h_ + 1), 0);
    auto at = [&](int x, int y) -> int& { return integral[static_cast<std::size_t>(y) * (w_ + 1) + x]; };
    for (int y = 0; y < h_; ++y) {
      for (int x = 0; x < w_; ++x) {
        at(x + 1, y + 1) = at(x, y + 1) + at(x + 1, y) - at(x, y) + (hole_.at(x, y) ? 1 : 0);
      }
    }
    source_ok_.assign(known_.size(), 0);
    for (int y = half_; y + half_ < h_; ++y) {
      for (int x = half_; x + half_ < w_; ++x) {
        const int holes = at(x + half_ + 1, y + half_ + 1) - at(x - half_, y + half_ + 1) -
                          at(x + half_ + 1, y - half_) + at(x - half_, y - half_);
        source_ok_[static_cast<std::size_t>(y) * w_ + x] = holes == 0;
      }
    }
  }

  std::array<double, 2> gradient(int x, int y) const {
    auto diff = [&](int x0, int y0, int x1, int y1) -> double {
      const bool a = x0 >= 0 && y0 >= 0 && x0 < w_ && y0 < h_ && known(x0, y0);
      const bool b = x1 >= 0 && y1 >= 0 && x1 < w_ && y1 < h_ && known(x1, y1);
      if (a && b) return (luma(work_, x1, y1) - luma(work_, x0, y0)) / (std::abs(x1 - x0) + std::abs(y1 - y0));
      if (b && known(x, y)) return luma(work_, x1, y1) - luma(work_, x, y);
      if (a && known(x, y)) return luma(work_, x, y) - luma(work_, x0, y0);
      return 0.0;
    };
    return {diff(x - 1, y, x + 1, y), diff(x, y - 1, x, y + 1)};
  }

  double priority(int px, int py, double& conf) const {
    double sum = 0.0;
    double isophote_x = 0.0;
    double isophote_y = 0.0;
    double strongest = -1.0;
    for (int dy = -half_; dy <= half_; ++dy) {
      for (int dx = -half_; dx <= half_; ++dx) {
        const int x = px + dx;
        const int y = py + dy;
        if (x < 0 || y < 0 || x >= w_ || y >= h_) continue;
        const std::size_t i = static_cast<std::size_t>(y) * w_ + x;
        sum += confidence_[i];
        if (!known_[i]) continue;
        const auto g = gradient(x, y);
        const double mag = g[0] * g[0] + g[1] * g[1];
        if (mag > strongest) {
          strongest = mag;
          isophote_x = -g[1];
          isophote_y = g[0];
        }
      }
    }
    const int side = 2 * half_ + 1;
    conf = sum / (side * side);

    // Front normal from the known-indicator gradient.
    auto k = [&](int x, int y) -> double {
      if (x < 0 || y < 0 || x >= w_ || y >= h_) return 0.0;
      return known(x, y) ? 1.0 : 0.0;
    };
    double nx = k(px + 1, py) - k(px - 1, py);
    double ny = k(px, py + 1) - k(px, py - 1);
    const double norm = std::hypot(nx, ny);
    double data = 0.0;
    if (norm > 0.0) data = std::abs(isophote_x * nx / norm + isophote_y * ny / norm);
    return conf * (data + 1e-3);
  }

  long best_front_pixel() {
    long best = -1;
    double best_priority = -1.0;
    for (int y = 0; y < h_; ++y) {
      for (int x = 0; x < w_; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w_ + x;
        if (known_[i] || stuck_[i]) continue;
        const bool front = (x > 0 && known(x - 1, y)) || (x + 1 < w_ && known(x + 1, y)) ||
                           (y > 0 && known(x, y - 1)) || (y + 1 < h_ && known(x, y + 1));
        if (!front) continue;
        double conf = 0.0;
        const double p = priority(x, y, conf);
        if (p > best_priority) {
          best_priority = p;
          best = static_cast<long>(i);
          best_confidence_ = conf;
        }
      }
    }
    return best;
  }

  long best_source(int px, int py) const {
    long best = -1;
    double best_ssd = std::numeric_limits<double>::infinity();
    const int y0 = std::max(half_, py - radius_);
    const int y1 = std::min(h_ - 1 - half_, py + radius_);
    const int x0 = std::max(half_, px - radius_);
    const int x1 = std::min(w_ - 1 - half_, px + radius_);
    const auto v = work_.values();
    for (int sy = y0; sy <= y1; ++sy) {
      for (int sx = x0; sx <= x1; ++sx) {
        if (!source_ok_[static_cast<std::size_t>(sy) * w_ + sx]) continue;
        double ssd = 0.0;
        for (int dy = -half_; dy <= half_ && ssd < best_ssd; ++dy) {
          const int ty = py + dy;
          if (ty < 0 || ty >= h_) continue;
          for (int dx = -half_; dx <= half_; ++dx) {
            const int tx = px + dx;
            if (tx < 0 || tx >= w_ || !known(tx, ty)) continue;
            const std::size_t t = work_.index(tx, ty);
            const std::size_t s = work_.index(sx + dx, sy + dy);
            for (std::size_t c = 0; c < 3; ++c) {
              const double d = v[t + c] - v[s + c];
              ssd += d * d;
            }
          }
        }
        if (ssd < best_ssd) {
          best_ssd = ssd;
          best = static_cast<long>(sy) * w_ + sx;
        }
      }
    }
    return best;
  }

  void copy_patch(int px, int py, int sx, int sy) {
    for (int dy = -half_; dy <= half_; ++dy) {
      for (int dx = -half_; dx <= half_; ++dx) {
        const int tx = px + dx;
        const int ty = py + dy;
        if (tx < 0 || ty < 0 || tx >= w_ || ty >= h_ || known(tx, ty)) continue;
        set_pixel(work_, tx, ty, pixel(work_, sx + dx, sy + dy));
        const std::size_t i = static_cast<std::size_t>(ty) * w_ + tx;
        known_[i] = 1;
        confidence_[i] = best_confidence_;
      }
    }
  }

  Image work_;
  const Mask& hole_;
  int half_;
  int radius_;
  int w_;
  int h_;
  std::vector<std::uint8_t> known_;
  std::vector<double> confidence_;
  std::vector<std::uint8_t> stuck_;
  std::vector<std::uint8_t> source_ok_;
  double best_confidence_ = 0.0;
};

}  // namespace

ExemplarResult exemplar_restore(const Image& image, const Mask& mask, int patch_size,
                                int search_radius) {
  require_same_size(image, mask, "exemplar_restore");
  if (patch_size < 3 || patch_size % 2 == 0) {
    throw ArgumentError("exemplar_restore: patch_size must be odd and >= 3");
  }
  if (search_radius < patch_size) {
    throw ArgumentError("exemplar_restore: search_radius must be >= patch_size");
  }
  if (count_set(mask) == 0) return {image, 0};
  if (count_set(mask) == mask.pixel_count()) {
    throw NoBoundaryError("exemplar_restore: mask covers the whole image");
  }
  return ExemplarFill(image, mask, patch_size, search_radius).run();
}

ExemplarRestorer::ExemplarRestorer(ExemplarOptions options) : options_(options) {
  if (options_.patch_size < 3 || options_.patch_size % 2 == 0) {
    throw ArgumentError("exemplar restorer: patch_size must be odd and >= 3");
  }
  if (options_.search_radius < options_.patch_size) {
    throw ArgumentError("exemplar restorer: search_radius must be >= patch_size");
  }
}

Image ExemplarRestorer::restore(const Image& image, const Mask& mask) const {
  auto result = exemplar_restore(image, mask, options_.patch_size, options_.search_radius);
  if (result.fallback_pixels > 0) {
    spdlog::info("exemplar restorer: {} pixels filled by diffusion fallback", result.fallback_pixels);
  }
  return std::move(result.image);
}

}  // namespace prkit
