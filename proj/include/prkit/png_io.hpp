#pragma once

#include <cstdint>
#include <filesystem>

#include "prkit/image.hpp"

namespace prkit {

/// 8-bit value v maps to v / 255.
double from_byte(std::uint8_t v);
/// Rounds v * 255 to the nearest byte after clamping to [0, 1].
std::uint8_t to_byte(double v);

/// Loads any 8-bit PNG as RGB. Gray inputs are replicated, alpha is dropped.
Image read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Image& image);

/// Loads a single-channel PNG mask. Zero maps to 0 and anything else to 1;
/// with `strict` set, values other than 0 and 255 raise an IoError.
Mask read_mask(const std::filesystem::path& path, bool strict = false);
/// Writes 0 / 255.
void write_mask(const std::filesystem::path& path, const Mask& mask);

/// Writes depth as 8-bit gray with values clamped to [0, 1] and scaled by 255.
void write_depth(const std::filesystem::path& path, const DepthMap& depth);

/// Rounds every channel through the 8-bit representation used on disk.
Image quantize(const Image& image);

}  // namespace prkit
