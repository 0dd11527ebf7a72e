#include "prkit/compose.hpp"

#include <algorithm>
#include <deque>

namespace prkit {

std::size_t count_set(const Mask& mask) {
  return static_cast<std::size_t>(
      std::count_if(mask.values().begin(), mask.values().end(), [](auto b) { return b != 0; }));
}

Rect bounding_box(const Mask& mask) {
  Rect box{mask.width(), mask.height(), 0, 0};
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.at(x, y) == 0) continue;
      box.x0 = std::min(box.x0, x);
      box.y0 = std::min(box.y0, y);
      box.x1 = std::max(box.x1, x + 1);
      box.y1 = std::max(box.y1, y + 1);
    }
  }
  if (box.empty()) return Rect{};
  return box;
}

bool in_unit_range(const Image& image) {
  return std::all_of(image.values().begin(), image.values().end(),
                     [](double v) { return v >= 0.0 && v <= 1.0; });
}

Image alpha_blend(const Image& target, const Image& layer, const AlphaMap& alpha) {
  require_same_size(target, layer, "alpha_blend");
  require_same_size(target, alpha, "alpha_blend");
  Image out(target.width(), target.height());
  auto t = target.values();
  auto o = layer.values();
  auto a = alpha.values();
  auto dst = out.values();
  for (std::size_t p = 0; p < a.size(); ++p) {
    const double w = a[p];
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t i = p * 3 + c;
      dst[i] = std::clamp(w * t[i] + (1.0 - w) * o[i], 0.0, 1.0);
    }
  }
  return out;
}

Image compose_masked(const Image& source, const Image& prediction, const Mask& mask) {
  require_same_size(source, prediction, "compose_masked");
  require_same_size(source, mask, "compose_masked");
  Image out = source;
  auto m = mask.values();
  auto p = prediction.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 0) continue;
    std::copy_n(p.begin() + i * 3, 3, dst.begin() + i * 3);
  }
  return out;
}

Image subtract_person(const Image& source, const Mask& mask) {
  require_same_size(source, mask, "subtract_person");
  Image out = source;
  auto m = mask.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] != 0) std::fill_n(dst.begin() + i * 3, 3, 0.0);
  }
  return out;
}

namespace {

// Sliding-window maximum over a 1-D line of bits, window [i - r, i + r].
void max_filter_line(const std::vector<std::uint8_t>& in, std::vector<std::uint8_t>& out,
                     int radius) {
  const int n = static_cast<int>(in.size());
  std::deque<int> window;  // indices of set bits inside the current window
  int next = 0;
  for (int i = 0; i < n; ++i) {
    while (next < n && next <= i + radius) {
      if (in[next]) window.push_back(next);
      ++next;
    }
    while (!window.empty() && window.front() < i - radius) window.pop_front();
    out[i] = window.empty() ? 0 : 1;
  }
}

}  // namespace

Mask dilate(const Mask& mask, int radius) {
  if (radius < 0) throw ArgumentError("dilate: radius must be >= 0");
  if (radius == 0 || mask.empty()) return mask;
  const int w = mask.width();
  const int h = mask.height();
  Mask rows(w, h);
  std::vector<std::uint8_t> line;
  std::vector<std::uint8_t> filtered;
  line.resize(w);
  filtered.resize(w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) line[x] = mask.at(x, y) != 0;
    max_filter_line(line, filtered, radius);
    for (int x = 0; x < w; ++x) rows.at(x, y) = filtered[x];
  }
  Mask out(w, h);
  line.resize(h);
  filtered.resize(h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) line[y] = rows.at(x, y);
    max_filter_line(line, filtered, radius);
    for (int y = 0; y < h; ++y) out.at(x, y) = filtered[y];
  }
  return out;
}

}  // namespace prkit
