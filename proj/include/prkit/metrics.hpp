#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prkit/image.hpp"

namespace prkit {

/// Value reported for identical images.
inline constexpr double kPsnrCap = 99.0;

/// 20 log10(255 / rmse). Identical images give kPsnrCap.
double psnr(const Image& a, const Image& b);

/// Mean SSIM over every fully contained 11x11 window, Gaussian-weighted with
/// sigma 1.5, on ITU-R 601 luma in the 0-255 range with C1 = (0.01 * 255)^2
/// and C2 = (0.03 * 255)^2. Both sides must be at least 11 pixels.
double ssim(const Image& a, const Image& b);

/// Root mean square error over all pixels and channels, 0-255 scale.
double rmse(const Image& a, const Image& b);

/// rmse restricted to the masked pixels.
double rmse_weighted(const Image& a, const Image& b, const Mask& mask);

struct MetricsRow {
  std::string id;
  double psnr = 0.0;
  double ssim = 0.0;
  double rmse = 0.0;
  /// Absent when the entry's mask is empty.
  std::optional<double> rmsew;
  /// Filled from an external side-file only.
  std::optional<double> lpips;
};

struct MetricsFailure {
  std::string id;
  std::string message;
};

struct MetricsReport {
  std::vector<MetricsRow> per_image;
  MetricsRow aggregate;
  std::string method;
  std::string dataset;
  std::string config_hash;
  std::vector<MetricsFailure> failures;

  /// Sets `aggregate` to the column means of `per_image`. Optional columns
  /// average over the rows that have a value.
  void recompute_aggregate();

  /// Columns id, psnr, lpips, ssim, rmse, rmsew; one row per image and a final
  /// `mean` row. Provenance goes in leading `#` comment lines.
  std::string to_csv() const;

  /// Aligned Markdown table with the same columns plus a failures section.
  std::string to_markdown() const;
};

MetricsRow evaluate_pair(const std::string& id, const Image& prediction, const Image& target,
                         const Mask& mask);

/// Reads a JSON object mapping entry ids to LPIPS values.
std::map<std::string, double> load_lpips(const std::filesystem::path& path);

}  // namespace prkit
