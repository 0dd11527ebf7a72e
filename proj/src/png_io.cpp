#include "prkit/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

namespace prkit {

namespace {

struct PngReader {
  png_image image;

  explicit PngReader(const std::filesystem::path& path) {
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
      std::string message = image.message;
      png_image_free(&image);
      throw IoError("cannot read PNG '" + path.string() + "': " + message);
    }
  }
  ~PngReader() { png_image_free(&image); }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;

  std::vector<std::uint8_t> finish(const std::filesystem::path& path, png_uint_32 format) {
    image.format = format;
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
      throw IoError("cannot decode PNG '" + path.string() + "': " + image.message);
    }
    return buffer;
  }
};

void write_png(const std::filesystem::path& path, int width, int height, png_uint_32 format,
               const std::vector<std::uint8_t>& buffer) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    std::string message = image.message;
    png_image_free(&image);
    throw IoError("cannot write PNG '" + path.string() + "': " + message);
  }
  png_image_free(&image);
}

}  // namespace

double from_byte(std::uint8_t v) { return static_cast<double>(v) / 255.0; }

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

Image read_image(const std::filesystem::path& path) {
  PngReader reader(path);
  const int w = static_cast<int>(reader.image.width);
  const int h = static_cast<int>(reader.image.height);
  const auto bytes = reader.finish(path, PNG_FORMAT_RGB);
  std::vector<double> values(bytes.size());
  std::transform(bytes.begin(), bytes.end(), values.begin(), from_byte);
  return Image(w, h, std::move(values));
}

void write_image(const std::filesystem::path& path, const Image& image) {
  std::vector<std::uint8_t> bytes(image.values().size());
  std::transform(image.values().begin(), image.values().end(), bytes.begin(), to_byte);
  write_png(path, image.width(), image.height(), PNG_FORMAT_RGB, bytes);
}

Mask read_mask(const std::filesystem::path& path, bool strict) {
  PngReader reader(path);
  const int w = static_cast<int>(reader.image.width);
  const int h = static_cast<int>(reader.image.height);
  const auto bytes = reader.finish(path, PNG_FORMAT_GRAY);
  std::vector<std::uint8_t> bits(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (strict && bytes[i] != 0 && bytes[i] != 255) {
      throw IoError("mask '" + path.string() + "' holds value " + std::to_string(bytes[i]) +
                    " (strict masks allow only 0 and 255)");
    }
    bits[i] = bytes[i] != 0;
  }
  return Mask(w, h, std::move(bits));
}

void write_mask(const std::filesystem::path& path, const Mask& mask) {
  std::vector<std::uint8_t> bytes(mask.values().size());
  std::transform(mask.values().begin(), mask.values().end(), bytes.begin(),
                 [](std::uint8_t b) -> std::uint8_t { return b ? 255 : 0; });
  write_png(path, mask.width(), mask.height(), PNG_FORMAT_GRAY, bytes);
}

void write_depth(const std::filesystem::path& path, const DepthMap& depth) {
  std::vector<std::uint8_t> bytes(depth.values().size());
  std::transform(depth.values().begin(), depth.values().end(), bytes.begin(), to_byte);
  write_png(path, depth.width(), depth.height(), PNG_FORMAT_GRAY, bytes);
}

Image quantize(const Image& image) {
  Image out = image;
  for (double& v : out.values()) v = from_byte(to_byte(v));
  return out;
}

}  // namespace prkit
