#pragma once

#include <algorithm>

namespace usmask::kernels::detail {

inline double ssim_window(double mx, double my, double exx, double eyy, double exy,
                          double c1, double c2) {
  // E[x^2] - mu^2 can dip below zero from rounding.
  const double vx = std::max(0.0, exx - mx * mx);
  const double vy = std::max(0.0, eyy - my * my);
  const double cxy = exy - mx * my;
  const double num = (2.0 * (mx * my) + c1) * (2.0 * cxy + c2);
  const double den = (mx * mx + my * my + c1) * (vx + vy + c2);
  return num / den;
}

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace usmask::kernels::detail
