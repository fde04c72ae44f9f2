#include <algorithm>
#include <cmath>

#include "common.hpp"
#include "usmask/kernels.hpp"

namespace usmask::kernels::parallel {

// Separable form: five moment planes are filtered horizontally, then
// vertically. Row sums land in a buffer and are reduced in row order so the
// result does not depend on the thread count.
double mean_ssim(const GrayImage& x, const GrayImage& y, std::span<const double> taps,
                 SsimConstants c) {
  const int win = static_cast<int>(taps.size());
  const int w = x.width, h = x.height;
  const int ow = w - win + 1;
  const int oh = h - win + 1;
  const std::size_t plane = static_cast<std::size_t>(h) * ow;
  std::vector<double> hx(plane), hy(plane), hxx(plane), hyy(plane), hxy(plane);

#pragma omp parallel for schedule(static)
  for (int r = 0; r < h; ++r) {
    const std::uint8_t* xr = x.data.data() + static_cast<std::size_t>(r) * w;
    const std::uint8_t* yr = y.data.data() + static_cast<std::size_t>(r) * w;
    const std::size_t base = static_cast<std::size_t>(r) * ow;
    for (int ox = 0; ox < ow; ++ox) {
      double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      for (int i = 0; i < win; ++i) {
        const double t = taps[i];
        const double a = xr[ox + i];
        const double b = yr[ox + i];
        sx += t * a;
        sy += t * b;
        sxx += t * (a * a);
        syy += t * (b * b);
        sxy += t * (a * b);
      }
      hx[base + ox] = sx;
      hy[base + ox] = sy;
      hxx[base + ox] = sxx;
      hyy[base + ox] = syy;
      hxy[base + ox] = sxy;
    }
  }

  std::vector<double> row_sums(oh, 0.0);
#pragma omp parallel for schedule(static)
  for (int oy = 0; oy < oh; ++oy) {
    double row = 0;
    for (int ox = 0; ox < ow; ++ox) {
      double mx = 0, my = 0, exx = 0, eyy = 0, exy = 0;
      for (int j = 0; j < win; ++j) {
        const double t = taps[j];
        const std::size_t k = static_cast<std::size_t>(oy + j) * ow + ox;
        mx += t * hx[k];
        my += t * hy[k];
        exx += t * hxx[k];
        eyy += t * hyy[k];
        exy += t * hxy[k];
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
  const int w = img.width, h = img.height;
  const int rx = kw / 2, ry = kh / 2;
  GrayImage tmp(w, h);
  GrayImage out(w, h);

#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int best = take_max ? 0 : 255;
      for (int dx = -rx; dx <= rx; ++dx) {
        const int v = img.at(detail::clampi(x + dx, 0, w - 1), y);
        best = take_max ? std::max(best, v) : std::min(best, v);
      }
      tmp.at(x, y) = static_cast<std::uint8_t>(best);
    }
  }

#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int best = take_max ? 0 : 255;
      for (int dy = -ry; dy <= ry; ++dy) {
        const int v = tmp.at(x, detail::clampi(y + dy, 0, h - 1));
        best = take_max ? std::max(best, v) : std::min(best, v);
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

#pragma omp parallel for schedule(static)
  for (int oy = 0; oy < oh; ++oy) {
    const int y1 = std::min(img.height, (oy + 1) * factor);
    for (int ox = 0; ox < ow; ++ox) {
      const int x1 = std::min(img.width, (ox + 1) * factor);
      unsigned sum = 0, n = 0;
      for (int y = oy * factor; y < y1; ++y) {
        const std::uint8_t* row = img.data.data() + static_cast<std::size_t>(y) * img.width;
        for (int x = ox * factor; x < x1; ++x) sum += row[x];
        n += static_cast<unsigned>(x1 - ox * factor);
      }
      out.at(ox, oy) = static_cast<std::uint8_t>((sum + n / 2) / n);
    }
  }
  return out;
}

double jacobi_sweep(std::span<const double> cur, std::span<double> next, int width, int height,
                    std::span<const std::size_t> masked) {
  double max_change = 0;
  const std::ptrdiff_t n_masked = static_cast<std::ptrdiff_t>(masked.size());

#pragma omp parallel for schedule(static) reduction(max : max_change)
  for (std::ptrdiff_t k = 0; k < n_masked; ++k) {
    const std::size_t p = masked[k];
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

}  // namespace usmask::kernels::parallel
