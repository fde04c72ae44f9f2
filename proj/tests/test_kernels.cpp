#include <omp.h>

#include <cmath>
#include <random>

#include "doctest.h"
#include "usmask/kernels.hpp"

using namespace usmask;
namespace k = usmask::kernels;

namespace {

GrayImage random_image(std::mt19937_64& rng, int w, int h) {
  std::uniform_int_distribution<int> v(0, 255);
  GrayImage img(w, h);
  for (auto& p : img.data) p = static_cast<std::uint8_t>(v(rng));
  return img;
}

const k::SsimConstants kC{(0.01 * 255) * (0.01 * 255), (0.03 * 255) * (0.03 * 255)};

struct ThreadCount {
  int saved = omp_get_max_threads();
  explicit ThreadCount(int n) { omp_set_num_threads(n); }
  ~ThreadCount() { omp_set_num_threads(saved); }
};

}  // namespace

TEST_CASE("mean_ssim serial and parallel agree") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 20; ++i) {
    std::uniform_int_distribution<int> dim(11, 60);
    const int w = dim(rng), h = dim(rng);
    const auto x = random_image(rng, w, h);
    auto y = x;
    for (auto& p : y.data) p = static_cast<std::uint8_t>(std::min(255, p + int(rng() % 40)));
    for (int win : {3, 7, 11}) {
      const auto taps = k::gaussian_taps(win, 1.5);
      const double s = k::serial::mean_ssim(x, y, taps, kC);
      const double p = k::parallel::mean_ssim(x, y, taps, kC);
      CHECK(std::abs(s - p) <= 1e-12);
    }
  }
}

TEST_CASE("parallel kernels do not depend on the thread count") {
  std::mt19937_64 rng(23);
  const auto x = random_image(rng, 97, 61);
  const auto y = random_image(rng, 97, 61);
  const auto taps = k::gaussian_taps(11, 1.5);
  std::vector<double> ref_cur(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) ref_cur[i] = x.data[i];
  std::vector<std::size_t> masked;
  for (std::size_t i = 0; i < x.size(); i += 3) masked.push_back(i);

  double ssim1 = 0;
  GrayImage dil1, ds1;
  std::vector<double> next1(x.size());
  double change1 = 0;
  {
    ThreadCount t(1);
    ssim1 = k::parallel::mean_ssim(x, y, taps, kC);
    dil1 = k::parallel::rect_filter(x, 5, 3, true);
    ds1 = k::parallel::downsample_mean(x, 3);
    next1 = ref_cur;
    change1 = k::parallel::jacobi_sweep(ref_cur, next1, x.width, x.height, masked);
  }
  for (int n : {2, 3, 7}) {
    ThreadCount t(n);
    CHECK(k::parallel::mean_ssim(x, y, taps, kC) == ssim1);
    CHECK(k::parallel::rect_filter(x, 5, 3, true) == dil1);
    CHECK(k::parallel::downsample_mean(x, 3) == ds1);
    auto next = ref_cur;
    CHECK(k::parallel::jacobi_sweep(ref_cur, next, x.width, x.height, masked) == change1);
    CHECK(next == next1);
  }
}

TEST_CASE("rect_filter and downsample serial and parallel agree exactly") {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 30; ++i) {
    std::uniform_int_distribution<int> dim(1, 40), side(0, 4);
    const auto img = random_image(rng, dim(rng), dim(rng));
    const int kw = 2 * side(rng) + 1, kh = 2 * side(rng) + 1;
    for (bool mx : {false, true})
      CHECK(k::serial::rect_filter(img, kw, kh, mx) == k::parallel::rect_filter(img, kw, kh, mx));
    for (int f : {1, 2, 3, 5})
      CHECK(k::serial::downsample_mean(img, f) == k::parallel::downsample_mean(img, f));
  }
}

TEST_CASE("jacobi_sweep serial and parallel agree exactly") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> v(0, 255);
  const int w = 23, h = 17;
  std::vector<double> cur(w * h);
  for (auto& c : cur) c = v(rng);
  std::vector<std::size_t> masked;
  for (std::size_t i = 0; i < cur.size(); ++i)
    if (rng() % 4 == 0) masked.push_back(i);
  auto a = cur, b = cur;
  const double ca = k::serial::jacobi_sweep(cur, a, w, h, masked);
  const double cb = k::parallel::jacobi_sweep(cur, b, w, h, masked);
  CHECK(ca == cb);
  CHECK(a == b);

  // Corner pixel: mean of its two in-bounds neighbours.
  std::vector<std::size_t> corner = {0};
  auto n = cur;
  k::serial::jacobi_sweep(cur, n, w, h, corner);
  CHECK(n[0] == doctest::Approx((cur[1] + cur[w]) / 2));
}
