#pragma once

#include <optional>

#include "usmask/image.hpp"

namespace usmask {

// Rectangular structuring element anchored at its centre; odd sides.
struct StructuringElement {
  int width = 3;
  int height = 3;
};

// Otsu level t: classes are {v <= t} and {v > t}; ties go to the lowest t.
// Throws kConstantImage when the image holds a single intensity.
int otsu_threshold(const GrayImage& img);

// Seeds are pixels >= high; the mask adds every pixel >= low that is
// 8-connected to a seed through pixels >= low.
BinaryMask hysteresis_threshold(const GrayImage& img, int low, int high);

enum class MorphOp { kErode, kDilate, kOpen, kTopHat };

// Edge-replicated rectangular morphology. Top-hat saturates at 0.
GrayImage morphology(const GrayImage& img, MorphOp op, StructuringElement se);

struct TextMaskParams {
  StructuringElement tophat{7, 7};
  StructuringElement recover{3, 3};
  std::optional<int> low;   // default: first level above the Otsu split of the top-hat
  std::optional<int> high;  // default: min(255, 2 * low)
  int min_contrast = 8;     // floor for the derived low level
};

// Mask of small bright overlays (text, markers): top-hat, hysteresis, then a
// dilation to recover stroke edges.
BinaryMask text_cleanup_mask(const GrayImage& img, const TextMaskParams& params = {});

inline constexpr double kDefaultInpaintTol = 1e-3;
inline constexpr int kDefaultInpaintIters = 500;

// Harmonic fill: masked pixels converge to the mean of their 4-neighbours.
// Unmasked pixels are returned untouched. Throws kNoBoundaryData if every
// pixel is masked.
GrayImage inpaint(const GrayImage& img, const BinaryMask& mask, double tol = kDefaultInpaintTol,
                  int max_iters = kDefaultInpaintIters);

}  // namespace usmask
