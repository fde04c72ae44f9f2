// Serial reference versus OpenMP kernels on 384x384 frames.

#include <benchmark/benchmark.h>

#include <random>

#include "usmask/kernels.hpp"

using namespace usmask;
namespace k = usmask::kernels;

namespace {

GrayImage frame(std::uint64_t seed, int side) {
  std::mt19937_64 rng(seed);
  GrayImage img(side, side);
  for (auto& p : img.data) p = static_cast<std::uint8_t>(rng());
  return img;
}

const k::SsimConstants kC{6.5025, 58.5225};

template <auto Fn>
void BM_mean_ssim(benchmark::State& st) {
  const int side = static_cast<int>(st.range(0));
  const auto x = frame(1, side), y = frame(2, side);
  const auto taps = k::gaussian_taps(11, 1.5);
  for (auto _ : st) benchmark::DoNotOptimize(Fn(x, y, taps, kC));
  st.SetItemsProcessed(st.iterations());
}

template <auto Fn>
void BM_rect_filter(benchmark::State& st) {
  const auto x = frame(3, 384);
  const int se = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(Fn(x, se, se, true));
}

template <auto Fn>
void BM_downsample(benchmark::State& st) {
  const auto x = frame(4, 384);
  for (auto _ : st) benchmark::DoNotOptimize(Fn(x, 2));
}

template <auto Fn>
void BM_jacobi(benchmark::State& st) {
  const int side = 384;
  const auto x = frame(5, side);
  std::vector<double> cur(x.data.begin(), x.data.end()), next = cur;
  std::vector<std::size_t> masked;
  for (std::size_t i = 0; i < cur.size(); i += 4) masked.push_back(i);
  for (auto _ : st) benchmark::DoNotOptimize(Fn(cur, next, side, side, masked));
}

}  // namespace

BENCHMARK(BM_mean_ssim<k::serial::mean_ssim>)->Name("mean_ssim/serial")->Arg(192)->Arg(384);
BENCHMARK(BM_mean_ssim<k::parallel::mean_ssim>)->Name("mean_ssim/parallel")->Arg(192)->Arg(384);
BENCHMARK(BM_rect_filter<k::serial::rect_filter>)->Name("rect_filter/serial")->Arg(3)->Arg(7);
BENCHMARK(BM_rect_filter<k::parallel::rect_filter>)->Name("rect_filter/parallel")->Arg(3)->Arg(7);
BENCHMARK(BM_downsample<k::serial::downsample_mean>)->Name("downsample/serial");
BENCHMARK(BM_downsample<k::parallel::downsample_mean>)->Name("downsample/parallel");
BENCHMARK(BM_jacobi<k::serial::jacobi_sweep>)->Name("jacobi_sweep/serial");
BENCHMARK(BM_jacobi<k::parallel::jacobi_sweep>)->Name("jacobi_sweep/parallel");

BENCHMARK_MAIN();
