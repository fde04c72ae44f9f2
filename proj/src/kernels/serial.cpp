#include <algorithm>
#include <cmath>

#include "common.hpp"
#include "usmask/kernels.hpp"

namespace usmask::kernels {

std::vector<double> gaussian_taps(int size, double sigma) {
  require(size >= 1 && size % 2 == 1, "gaussian_taps: size must be odd");
  require(sigma > 0, "gaussian_taps: sigma must be positive");
  const int r = size / 2;
  std::vector<double> taps(size);
  double sum = 0;
  for (int i = -r; i <= r; ++i) {
    taps[i + r] = std::exp(-(double(i) * i) / (2.0 * sigma * sigma));
    sum += taps[i + r];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

namespace serial {

double mean_ssim(const GrayImage& x, const GrayImage& y, std::span<const double> taps,
                 SsimConstants c) {
  const int win = static_cast<int>(taps.size());
  const int ow = x.width - win + 1;
  const int oh = x.height - win + 1;
  std::vector<double> row_sums(oh, 0.0);
  for (int oy = 0; oy < oh; ++oy) {
    double row = 0;
    for (int ox = 0; ox < ow; ++ox) {
      double mx = 0, my = 0, exx = 0, eyy = 0, exy = 0;
      for (int j = 0; j < win; ++j) {
        for (int i = 0; i < win; ++i) {
          const double w = taps[j] * taps[i];
          const double a = x.at(ox + i, oy + j);
          const double b = y.at(ox + i, oy + j);
          mx += w * a;
          my += w * b;
          exx += w * (a * a);
          eyy += w * (b * b);
          exy += w * (a * b);
        }
      }
      row += detail::ssim_window(mx, my, exx, eyy, exy, c.c1, c.c2);
    }
    row_sums[oy] = row;
  }
  double total = 0;
  for (double r : row_sums) total += r;
  return total / (static_cast<double>(ow) * oh);
}

GrayImage rect_filter(const GrayImage& img, int kw, int kh, bool take_max) {
  GrayImage out(img.width, img.height);
  const int rx = kw / 2, ry = kh / 2;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      int best = take_max ? 0 : 255;
      for (int dy = -ry; dy <= ry; ++dy) {
        const int sy = detail::clampi(y + dy, 0, img.height - 1);
        for (int dx = -rx; dx <= rx; ++dx) {
          const int v = img.at(detail::clampi(x + dx, 0, img.width - 1), sy);
          best = take_max ? std::max(best, v) : std::min(best, v);
        }
      }
      out.at(x, y) = static_cast<std::uint8_t>(best);
    }
  }
  return out;
}

GrayImage downsample_mean(const GrayImage& img, int factor) {
  const int ow = (img.width + factor - 1) / factor;
  const int oh = (img.height + factor - 1) / factor;
  GrayImage out(ow, oh);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      unsigned sum = 0, n = 0;
      for (int y = oy * factor; y < std::min(img.height, (oy + 1) * factor); ++y)
        for (int x = ox * factor; x < std::min(img.width, (ox + 1) * factor); ++x) {
          sum += img.at(x, y);
          ++n;
        }
      out.at(ox, oy) = static_cast<std::uint8_t>((sum + n / 2) / n);
    }
  }
  return out;
}

double jacobi_sweep(std::span<const double> cur, std::span<double> next, int width, int height,
                    std::span<const std::size_t> masked) {
  double max_change = 0;
  for (std::size_t p : masked) {
    const int x = static_cast<int>(p % width);
    const int y = static_cast<int>(p / width);
    double sum = 0;
    int n = 0;
    if (y > 0) { sum += cur[p - width]; ++n; }
    if (x > 0) { sum += cur[p - 1]; ++n; }
    if (x + 1 < width) { sum += cur[p + 1]; ++n; }
    if (y + 1 < height) { sum += cur[p + width]; ++n; }
    const double v = n ? sum / n : cur[p];
    max_change = std::max(max_change, std::abs(v - cur[p]));
    next[p] = v;
  }
  return max_change;
}

}  // namespace serial
}  // namespace usmask::kernels
