#include "prkit/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "prkit/compose.hpp"

namespace prkit {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

std::array<double, kWindow> gaussian_window() {
  std::array<double, kWindow> k{};
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    k[i] = std::exp(-(d * d) / (2.0 * kSigma * kSigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

std::vector<double> luma255(const Image& image) {
  std::vector<double> y(image.pixel_count());
  const auto v = image.values();
  for (std::size_t p = 0; p < y.size(); ++p) {
    y[p] = 255.0 * (0.299 * v[p * 3] + 0.587 * v[p * 3 + 1] + 0.114 * v[p * 3 + 2]);
  }
  return y;
}

// Separable Gaussian filter keeping only windows fully inside the image.
std::vector<double> filter_valid(const std::vector<double>& in, int w, int h,
                                 const std::array<double, kWindow>& k) {
  const int ow = w - kWindow + 1;
  const int oh = h - kWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kWindow; ++i) s += k[i] * in[static_cast<std::size_t>(y) * w + x + i];
      rows[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kWindow; ++i) s += k[i] * rows[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  return out;
}

double squared_error_sum(const Image& a, const Image& b, const Mask* mask, std::size_t& count) {
  double sum = 0.0;
  count = 0;
  const auto va = a.values();
  const auto vb = b.values();
  for (std::size_t p = 0; p < a.pixel_count(); ++p) {
    if (mask && !mask->values()[p]) continue;
    for (std::size_t c = 0; c < 3; ++c) {
      const double d = 255.0 * (va[p * 3 + c] - vb[p * 3 + c]);
      sum += d * d;
    }
    count += 3;
  }
  return sum;
}

std::string fixed(double v) { return fmt::format("{:.6f}", v); }
std::string fixed(const std::optional<double>& v) { return v ? fixed(*v) : std::string(); }

}  // namespace

double rmse(const Image& a, const Image& b) {
  require_same_size(a, b, "rmse");
  std::size_t n = 0;
  const double sum = squared_error_sum(a, b, nullptr, n);
  return std::sqrt(sum / static_cast<double>(n));
}

double rmse_weighted(const Image& a, const Image& b, const Mask& mask) {
  require_same_size(a, b, "rmse_weighted");
  require_same_size(a, mask, "rmse_weighted");
  std::size_t n = 0;
  const double sum = squared_error_sum(a, b, &mask, n);
  if (n == 0) throw EmptySelectionError("rmse_weighted: mask is empty");
  return std::sqrt(sum / static_cast<double>(n));
}

double psnr(const Image& a, const Image& b) {
  const double e = rmse(a, b);
  if (e == 0.0) return kPsnrCap;
  return 20.0 * std::log10(255.0 / e);
}

double ssim(const Image& a, const Image& b) {
  require_same_size(a, b, "ssim");
  const int w = a.width();
  const int h = a.height();
  if (w < kWindow || h < kWindow) {
    throw DimensionError(fmt::format("ssim: image {}x{} is smaller than the {}x{} window", w, h,
                                     kWindow, kWindow));
  }
  const auto k = gaussian_window();
  const auto x = luma255(a);
  const auto y = luma255(b);
  std::vector<double> xx(x.size());
  std::vector<double> yy(x.size());
  std::vector<double> xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mu_x = filter_valid(x, w, h, k);
  const auto mu_y = filter_valid(y, w, h, k);
  const auto e_xx = filter_valid(xx, w, h, k);
  const auto e_yy = filter_valid(yy, w, h, k);
  const auto e_xy = filter_valid(xy, w, h, k);

  constexpr double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  constexpr double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    const double mx = mu_x[i];
    const double my = mu_y[i];
    const double vx = e_xx[i] - mx * mx;
    const double vy = e_yy[i] - my * my;
    const double cov = e_xy[i] - mx * my;
    total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
             ((mx * mx + my * my + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mu_x.size());
}

MetricsRow evaluate_pair(const std::string& id, const Image& prediction, const Image& target,
                         const Mask& mask) {
  MetricsRow row;
  row.id = id;
  row.psnr = psnr(prediction, target);
  row.ssim = ssim(prediction, target);
  row.rmse = rmse(prediction, target);
  if (count_set(mask) > 0) row.rmsew = rmse_weighted(prediction, target, mask);
  return row;
}

void MetricsReport::recompute_aggregate() {
  aggregate = MetricsRow{};
  aggregate.id = "mean";
  if (per_image.empty()) return;
  double n = static_cast<double>(per_image.size());
  double rmsew_sum = 0.0;
  double lpips_sum = 0.0;
  std::size_t rmsew_n = 0;
  std::size_t lpips_n = 0;
  for (const auto& row : per_image) {
    aggregate.psnr += row.psnr;
    aggregate.ssim += row.ssim;
    aggregate.rmse += row.rmse;
    if (row.rmsew) {
      rmsew_sum += *row.rmsew;
      ++rmsew_n;
    }
    if (row.lpips) {
      lpips_sum += *row.lpips;
      ++lpips_n;
    }
  }
  aggregate.psnr /= n;
  aggregate.ssim /= n;
  aggregate.rmse /= n;
  if (rmsew_n) aggregate.rmsew = rmsew_sum / static_cast<double>(rmsew_n);
  if (lpips_n) aggregate.lpips = lpips_sum / static_cast<double>(lpips_n);
}

std::string MetricsReport::to_csv() const {
  std::string out;
  out += "# method=" + method + "\n";
  out += "# dataset=" + dataset + "\n";
  out += "# config_hash=" + config_hash + "\n";
  out += "id,psnr,lpips,ssim,rmse,rmsew\n";
  auto line = [&](const MetricsRow& r) {
    out += fmt::format("{},{},{},{},{},{}\n", r.id, fixed(r.psnr), fixed(r.lpips), fixed(r.ssim),
                       fixed(r.rmse), fixed(r.rmsew));
  };
  for (const auto& row : per_image) line(row);
  line(aggregate);
  return out;
}

std::string MetricsReport::to_markdown() const {
  const std::array<std::string, 6> header{"id", "PSNR↑", "LPIPS↓", "SSIM↑", "RMSE↓", "RMSEw↓"};
  std::vector<std::array<std::string, 6>> cells;
  auto cells_of = [](const MetricsRow& r) {
    return std::array<std::string, 6>{r.id, fmt::format("{:.4f}", r.psnr),
                                      r.lpips ? fmt::format("{:.4f}", *r.lpips) : "",
                                      fmt::format("{:.4f}", r.ssim), fmt::format("{:.4f}", r.rmse),
                                      r.rmsew ? fmt::format("{:.4f}", *r.rmsew) : ""};
  };
  for (const auto& row : per_image) cells.push_back(cells_of(row));
  auto mean = cells_of(aggregate);
  mean[0] = "**mean**";
  cells.push_back(mean);

  // Display width; the arrows are 3-byte UTF-8 sequences shown as one column.
  auto display = [](const std::string& s) {
    std::size_t n = 0;
    for (unsigned char ch : s) n += (ch & 0xC0) != 0x80;
    return n;
  };
  std::array<std::size_t, 6> width{};
  for (std::size_t c = 0; c < 6; ++c) {
    width[c] = std::max<std::size_t>(3, display(header[c]));
    for (const auto& row : cells) width[c] = std::max(width[c], display(row[c]));
  }
  auto pad = [&](const std::string& s, std::size_t c, bool right) {
    const std::string fill(width[c] - display(s), ' ');
    return right ? fill + s : s + fill;
  };

  std::string out = "# Person removal report\n\n";
  out += "- method: " + method + "\n";
  out += "- dataset: " + dataset + "\n";
  out += "- config hash: " + config_hash + "\n";
  out += fmt::format("- images: {}\n\n", per_image.size());
  out += "|";
  for (std::size_t c = 0; c < 6; ++c) out += " " + pad(header[c], c, c > 0) + " |";
  out += "\n|";
  for (std::size_t c = 0; c < 6; ++c) {
    out += c == 0 ? " " + std::string(width[c], '-') + " |"
                  : " " + std::string(width[c] - 1, '-') + ": |";
  }
  out += "\n";
  for (const auto& row : cells) {
    out += "|";
    for (std::size_t c = 0; c < 6; ++c) out += " " + pad(row[c], c, c > 0) + " |";
    out += "\n";
  }
  if (!failures.empty()) {
    out += "\n## Failures\n\n";
    for (const auto& f : failures) out += "- " + f.id + ": " + f.message + "\n";
  }
  return out;
}

std::map<std::string, double> load_lpips(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open LPIPS file '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("LPIPS file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw IoError("LPIPS file '" + path.string() + "' must hold a JSON object");
  std::map<std::string, double> values;
  for (const auto& [id, value] : doc.items()) {
    if (!value.is_number()) {
      throw IoError("LPIPS file '" + path.string() + "': value for '" + id + "' is not a number");
    }
    values[id] = value.get<double>();
  }
  return values;
}

}  // namespace prkit
