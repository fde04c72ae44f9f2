#include "usmask/imgproc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "usmask/kernels.hpp"

namespace usmask {

int otsu_threshold(const GrayImage& img) {
  require(!img.empty(), "otsu_threshold: empty image");
  std::array<std::uint64_t, 256> hist{};
  for (std::uint8_t v : img.data) ++hist[v];

  const std::uint64_t total = img.data.size();
  std::uint64_t total_sum = 0;
  for (int v = 0; v < 256; ++v) total_sum += hist[v] * static_cast<std::uint64_t>(v);

  const double n = static_cast<double>(total);
  std::uint64_t n0 = 0, s0 = 0;
  int best_t = -1;
  double best_var = -1;
  for (int t = 0; t < 255; ++t) {
    n0 += hist[t];
    s0 += hist[t] * static_cast<std::uint64_t>(t);
    const std::uint64_t n1 = total - n0;
    if (n0 == 0 || n1 == 0) continue;
    const double w0 = static_cast<double>(n0) / n;
    const double w1 = static_cast<double>(n1) / n;
    const double mu0 = static_cast<double>(s0) / static_cast<double>(n0);
    const double mu1 = static_cast<double>(total_sum - s0) / static_cast<double>(n1);
    const double var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (var > best_var) {
      best_var = var;
      best_t = t;
    }
  }
  if (best_t < 0) throw Error(ErrorCode::kConstantImage, "otsu_threshold: single intensity");
  return best_t;
}

BinaryMask hysteresis_threshold(const GrayImage& img, int low, int high) {
  require(0 <= low && low <= high && high <= 255, "hysteresis_threshold: need 0 <= low <= high <= 255");
  const int w = img.width, h = img.height;
  BinaryMask mask(w, h);
  std::vector<std::size_t> stack;
  for (std::size_t p = 0; p < img.data.size(); ++p) {
    if (img.data[p] >= high) {
      mask.bits[p] = 1;
      stack.push_back(p);
    }
  }
  while (!stack.empty()) {
    const std::size_t p = stack.back();
    stack.pop_back();
    const int x = static_cast<int>(p % w), y = static_cast<int>(p / w);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx, ny = y + dy;
        if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const std::size_t q = static_cast<std::size_t>(ny) * w + nx;
        if (!mask.bits[q] && img.data[q] >= low) {
          mask.bits[q] = 1;
          stack.push_back(q);
        }
      }
    }
  }
  return mask;
}

GrayImage morphology(const GrayImage& img, MorphOp op, StructuringElement se) {
  require(se.width >= 1 && se.height >= 1 && se.width % 2 == 1 && se.height % 2 == 1,
          "morphology: structuring element sides must be odd and >= 1");
  require(se.width <= img.width && se.height <= img.height,
          "morphology: structuring element larger than image");
  using kernels::parallel::rect_filter;
  switch (op) {
    case MorphOp::kErode: return rect_filter(img, se.width, se.height, false);
    case MorphOp::kDilate: return rect_filter(img, se.width, se.height, true);
    case MorphOp::kOpen:
      return rect_filter(rect_filter(img, se.width, se.height, false), se.width, se.height, true);
    case MorphOp::kTopHat: {
      const GrayImage opened = morphology(img, MorphOp::kOpen, se);
      GrayImage out(img.width, img.height);
      for (std::size_t i = 0; i < img.data.size(); ++i)
        out.data[i] = static_cast<std::uint8_t>(std::max(0, int(img.data[i]) - int(opened.data[i])));
      return out;
    }
  }
  return img;
}

BinaryMask text_cleanup_mask(const GrayImage& img, const TextMaskParams& params) {
  require(!img.empty(), "text_cleanup_mask: empty image");
  const auto [lo_it, hi_it] = std::minmax_element(img.data.begin(), img.data.end());
  if (*lo_it == *hi_it) throw Error(ErrorCode::kConstantImage, "text_cleanup_mask: constant image");

  require(params.min_contrast >= 0 && params.min_contrast <= 255, "text_cleanup_mask: min_contrast must be in [0,255]");
  const GrayImage tophat = morphology(img, MorphOp::kTopHat, params.tophat);

  int low = 0;
  if (params.low) {
    low = *params.low;
  } else {
    const auto [tlo, thi] = std::minmax_element(tophat.data.begin(), tophat.data.end());
    // A flat top-hat means no small-scale bright structure at all.
    if (*tlo == *thi) return BinaryMask(img.width, img.height);
    // Top-hat responses of a few levels come from ramps meeting the border
    // and from quantization, not from overlays.
    low = std::max(otsu_threshold(tophat) + 1, params.min_contrast);
  }
  const int high = params.high ? *params.high : std::min(255, 2 * low);
  const BinaryMask seeds = hysteresis_threshold(tophat, low, high);

  GrayImage as_image(img.width, img.height);
  for (std::size_t i = 0; i < seeds.bits.size(); ++i) as_image.data[i] = seeds.bits[i] ? 255 : 0;
  const GrayImage grown = morphology(as_image, MorphOp::kDilate, params.recover);
  BinaryMask out(img.width, img.height);
  for (std::size_t i = 0; i < grown.data.size(); ++i) out.bits[i] = grown.data[i] ? 1 : 0;
  return out;
}

GrayImage inpaint(const GrayImage& img, const BinaryMask& mask, double tol, int max_iters) {
  require(mask.width == img.width && mask.height == img.height, "inpaint: mask size differs");
  require(tol > 0 && max_iters >= 0, "inpaint: need tol > 0 and max_iters >= 0");
  const int w = img.width, h = img.height;
  const std::size_t n = img.data.size();

  std::vector<std::size_t> masked;
  for (std::size_t p = 0; p < n; ++p)
    if (mask.bits[p]) masked.push_back(p);
  if (masked.empty()) return img;
  if (masked.size() == n) throw Error(ErrorCode::kNoBoundaryData, "inpaint: every pixel is masked");

  std::vector<double> cur(img.data.begin(), img.data.end());
  auto for_neighbours = [w, h](std::size_t p, auto&& fn) {
    const int x = static_cast<int>(p % w), y = static_cast<int>(p / w);
    if (y > 0) fn(p - w);
    if (x > 0) fn(p - 1);
    if (x + 1 < w) fn(p + 1);
    if (y + 1 < h) fn(p + w);
  };

  // Start from an onion-peel fill so the iteration begins near the solution.
  std::vector<std::uint8_t> known(n);
  for (std::size_t p = 0; p < n; ++p) known[p] = mask.bits[p] ? 0 : 1;
  std::vector<std::size_t> pending = masked;
  while (!pending.empty()) {
    std::vector<std::size_t> ring, rest;
    std::vector<double> values;
    for (std::size_t p : pending) {
      double sum = 0;
      int cnt = 0;
      for_neighbours(p, [&](std::size_t q) {
        if (known[q]) { sum += cur[q]; ++cnt; }
      });
      if (cnt) {
        ring.push_back(p);
        values.push_back(sum / cnt);
      } else {
        rest.push_back(p);
      }
    }
    for (std::size_t k = 0; k < ring.size(); ++k) {
      cur[ring[k]] = values[k];
      known[ring[k]] = 1;
    }
    pending = std::move(rest);
  }

  std::vector<double> next = cur;
  for (int it = 0; it < max_iters; ++it) {
    const double change = kernels::parallel::jacobi_sweep(cur, next, w, h, masked);
    std::swap(cur, next);
    if (change < tol) break;
  }

  GrayImage out = img;
  for (std::size_t p : masked)
    out.data[p] = static_cast<std::uint8_t>(std::clamp(std::lround(cur[p]), 0L, 255L));
  return out;
}

}  // namespace usmask
