#pragma once

#include <vector>

#include "usmask/image.hpp"

namespace usmask {

struct SsimParams {
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255;
  int window_size = 11;
  double gaussian_sigma = 1.5;
  int downsample = 1;
};

// Normalized size x size Gaussian kernel, row-major.
std::vector<double> gaussian_window(int size, double sigma);

// Block-mean reduction; trailing partial blocks average what is available.
GrayImage downsample_mean(const GrayImage& img, int factor);

// Mean SSIM over every fully interior Gaussian window, after optional
// downsampling of both inputs by p.downsample.
double mssim(const GrayImage& x, const GrayImage& y, const SsimParams& p = {});

}  // namespace usmask
