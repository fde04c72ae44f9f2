#pragma once

// Data-parallel image kernels. Every kernel has an OpenMP implementation in
// `parallel` (used by the library) and a direct, single-threaded reference in
// `serial` that tests and the benchmark compare against. Both variants produce
// results independent of the thread count.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "usmask/image.hpp"

namespace usmask::kernels {

struct SsimConstants {
  double c1 = 0;
  double c2 = 0;
};

// Normalized 1-D Gaussian taps of odd length.
std::vector<double> gaussian_taps(int size, double sigma);

namespace serial {

// Mean SSIM over all fully interior windows, direct 2-D weighted sums.
double mean_ssim(const GrayImage& x, const GrayImage& y, std::span<const double> taps,
                 SsimConstants c);

// Windowed min (take_max = false) or max over a kw x kh rectangle centred on
// each pixel, with edge replication.
GrayImage rect_filter(const GrayImage& img, int kw, int kh, bool take_max);

GrayImage downsample_mean(const GrayImage& img, int factor);

// One Jacobi sweep over the masked pixels listed in `masked`: next[p] becomes
// the mean of the in-bounds 4-neighbours of p in `cur`. Returns max |change|.
double jacobi_sweep(std::span<const double> cur, std::span<double> next, int width, int height,
                    std::span<const std::size_t> masked);

}  // namespace serial

namespace parallel {

double mean_ssim(const GrayImage& x, const GrayImage& y, std::span<const double> taps,
                 SsimConstants c);
GrayImage rect_filter(const GrayImage& img, int kw, int kh, bool take_max);
GrayImage downsample_mean(const GrayImage& img, int factor);
double jacobi_sweep(std::span<const double> cur, std::span<double> next, int width, int height,
                    std::span<const std::size_t> masked);

}  // namespace parallel

}  // namespace usmask::kernels
