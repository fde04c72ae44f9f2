#include "usmask/ssim.hpp"

#include <algorithm>

#include "usmask/kernels.hpp"

namespace usmask {

std::vector<double> gaussian_window(int size, double sigma) {
  require(size >= 3 && size % 2 == 1, "gaussian_window: size must be odd and >= 3");
  require(sigma > 0, "gaussian_window: sigma must be positive");
  const auto taps = kernels::gaussian_taps(size, sigma);
  std::vector<double> k(static_cast<std::size_t>(size) * size);
  for (int j = 0; j < size; ++j)
    for (int i = 0; i < size; ++i) k[static_cast<std::size_t>(j) * size + i] = taps[j] * taps[i];
  return k;
}

GrayImage downsample_mean(const GrayImage& img, int factor) {
  require(factor >= 1, "downsample_mean: factor must be >= 1");
  require(!img.empty(), "downsample_mean: empty image");
  if (factor == 1) return img;
  return kernels::parallel::downsample_mean(img, factor);
}

double mssim(const GrayImage& x, const GrayImage& y, const SsimParams& p) {
  require(x.same_shape(y), "mssim: image dimensions differ");
  require(p.k1 > 0 && p.k2 > 0, "mssim: k1 and k2 must be positive");
  require(p.window_size >= 1 && p.window_size % 2 == 1, "mssim: window size must be odd");
  const GrayImage xs = downsample_mean(x, p.downsample);
  const GrayImage ys = downsample_mean(y, p.downsample);
  require(p.window_size <= std::min(xs.width, xs.height),
          "mssim: window larger than the (downsampled) image");
  const auto taps = kernels::gaussian_taps(p.window_size, p.gaussian_sigma);
  const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
  const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);
  return kernels::parallel::mean_ssim(xs, ys, taps, {c1, c2});
}

}  // namespace usmask
