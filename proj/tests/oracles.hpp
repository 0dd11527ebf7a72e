#pragma once

// Reference implementations used to cross-check the metrics.

#include <algorithm>
#include <cmath>
#include <random>

#include "prkit/image.hpp"

#ifdef PRKIT_HAVE_OPENCV
#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>
#endif

namespace prkit::oracle {


// Direct 2-D windowed SSIM, no separability, no shared code with the library.
inline double naive_ssim(const Image& a, const Image& b) {
  const int w = a.width(), h = a.height();
  double kernel[11][11];
  double ksum = 0.0;
  for (int j = 0; j < 11; ++j) {
    for (int i = 0; i < 11; ++i) {
      kernel[j][i] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
      ksum += kernel[j][i];
    }
  }
  auto luma = [](const Image& im, int x, int y) {
    return 255.0 * (0.299 * im.at(x, y, 0) + 0.587 * im.at(x, y, 1) + 0.114 * im.at(x, y, 2));
  };
  const double c1 = 6.5025, c2 = 58.5225;
  double total = 0.0;
  int windows = 0;
  for (int y0 = 0; y0 + 11 <= h; ++y0) {
    for (int x0 = 0; x0 + 11 <= w; ++x0) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (int j = 0; j < 11; ++j) {
        for (int i = 0; i < 11; ++i) {
          const double k = kernel[j][i] / ksum;
          const double p = luma(a, x0 + i, y0 + j), q = luma(b, x0 + i, y0 + j);
          mx += k * p;
          my += k * q;
          sxx += k * p * p;
          syy += k * q * q;
          sxy += k * p * q;
        }
      }
      const double vx = sxx - mx * mx, vy = syy - my * my, cov = sxy - mx * my;
      total += (2 * mx * my + c1) * (2 * cov + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++windows;
    }
  }
  return total / windows;
}

inline Image noisy_copy(const Image& src, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  Image out = src;
  for (double& v : out.values()) v = std::clamp(v + n(rng), 0.0, 1.0);
  return out;
}

#ifdef PRKIT_HAVE_OPENCV
inline cv::Mat to_mat(const Image& im) {
  cv::Mat m(im.height(), im.width(), CV_64FC3);
  for (int y = 0; y < im.height(); ++y) {
    for (int x = 0; x < im.width(); ++x) {
      m.at<cv::Vec3d>(y, x) = {255.0 * im.at(x, y, 0), 255.0 * im.at(x, y, 1), 255.0 * im.at(x, y, 2)};
    }
  }
  return m;
}

inline double opencv_ssim(const Image& a, const Image& b) {
  cv::Mat x, y;
  cv::transform(to_mat(a), x, cv::Matx13d(0.299, 0.587, 0.114));
  cv::transform(to_mat(b), y, cv::Matx13d(0.299, 0.587, 0.114));
  const cv::Size k(11, 11);
  cv::Mat mx, my, sxx, syy, sxy;
  cv::GaussianBlur(x, mx, k, 1.5, 1.5);
  cv::GaussianBlur(y, my, k, 1.5, 1.5);
  cv::GaussianBlur(x.mul(x), sxx, k, 1.5, 1.5);
  cv::GaussianBlur(y.mul(y), syy, k, 1.5, 1.5);
  cv::GaussianBlur(x.mul(y), sxy, k, 1.5, 1.5);
  const cv::Rect valid(5, 5, x.cols - 10, x.rows - 10);
  mx = mx(valid);
  my = my(valid);
  cv::Mat vx = sxx(valid) - mx.mul(mx);
  cv::Mat vy = syy(valid) - my.mul(my);
  cv::Mat cov = sxy(valid) - mx.mul(my);
  const double c1 = 6.5025, c2 = 58.5225;
  cv::Mat num = (2 * mx.mul(my) + c1).mul(2 * cov + c2);
  cv::Mat den = (mx.mul(mx) + my.mul(my) + c1).mul(vx + vy + c2);
  cv::Mat map;
  cv::divide(num, den, map);
  return cv::mean(map)[0];
}
#endif

}  // namespace prkit::oracle
