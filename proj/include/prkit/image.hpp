#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "prkit/errors.hpp"

namespace prkit {

/// Dense row-major 2-D grid with a fixed number of interleaved channels.
///
/// The tag parameter keeps images, masks and alpha maps distinct types even
/// when their storage matches. A default-constructed raster is 0x0 and only
/// serves as a placeholder; every raster produced by an operation is at least
/// 1x1.
template <typename T, std::size_t Channels, typename Tag>
class Raster {
 public:
  using value_type = T;
  static constexpr std::size_t channels = Channels;

  Raster() = default;

  Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw ArgumentError("raster dimensions must be at least 1x1, got " +
                          std::to_string(width) + "x" + std::to_string(height));
    }
    values_.assign(static_cast<std::size_t>(width) * height * Channels, fill);
  }

  Raster(int width, int height, std::vector<T> values) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw ArgumentError("raster dimensions must be at least 1x1");
    }
    if (values.size() != static_cast<std::size_t>(width) * height * Channels) {
      throw DimensionError("raster value count does not match " + std::to_string(width) +
                           "x" + std::to_string(height) + "x" + std::to_string(Channels));
    }
    values_ = std::move(values);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
  bool empty() const { return values_.empty(); }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * width_ + x) * Channels;
  }

  T& at(int x, int y, std::size_t c = 0) { return values_[index(x, y) + c]; }
  const T& at(int x, int y, std::size_t c = 0) const { return values_[index(x, y) + c]; }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  template <typename U, std::size_t C, typename G>
  bool same_size(const Raster<U, C, G>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Raster&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> values_;
};

struct ImageTag {};
struct MaskTag {};
struct AlphaTag {};
struct DepthTag {};

/// RGB image, channel values are reals in [0, 1].
using Image = Raster<double, 3, ImageTag>;
/// Binary mask, 1 marks the person region.
using Mask = Raster<std::uint8_t, 1, MaskTag>;
/// Per-pixel blend weights in [0, 1].
using AlphaMap = Raster<double, 1, AlphaTag>;
/// Per-pixel depth plane index, 0 for the background plane.
using DepthMap = Raster<double, 1, DepthTag>;

using Rgb = std::array<double, 3>;

inline Rgb pixel(const Image& image, int x, int y) {
  const auto i = image.index(x, y);
  const auto v = image.values();
  return {v[i], v[i + 1], v[i + 2]};
}

inline void set_pixel(Image& image, int x, int y, const Rgb& rgb) {
  const auto i = image.index(x, y);
  auto v = image.values();
  v[i] = rgb[0];
  v[i + 1] = rgb[1];
  v[i + 2] = rgb[2];
}

/// Inclusive-exclusive pixel rectangle.
struct Rect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool empty() const { return x1 <= x0 || y1 <= y0; }
  bool operator==(const Rect&) const = default;
};

std::size_t count_set(const Mask& mask);

/// Tight bounding box of the set bits; empty rect when the mask is empty.
Rect bounding_box(const Mask& mask);

/// True when every channel value lies in [0, 1].
bool in_unit_range(const Image& image);

template <typename A, typename B>
void require_same_size(const A& a, const B& b, const char* what) {
  if (!a.same_size(b)) {
    throw DimensionError(std::string(what) + ": resolution mismatch (" +
                         std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                         " vs " + std::to_string(b.width()) + "x" +
                         std::to_string(b.height()) + ")");
  }
}

}  // namespace prkit
