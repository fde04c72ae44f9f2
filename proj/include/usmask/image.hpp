#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "usmask/error.hpp"

namespace usmask {

// 8-bit single-channel raster, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0);
  GrayImage(int w, int h, std::vector<std::uint8_t> pixels);

  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }
  bool same_shape(const GrayImage& o) const { return width == o.width && height == o.height; }

  std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

  bool operator==(const GrayImage&) const = default;
};

// One byte per pixel, 0 or 1; 1 marks a selected pixel.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v = true) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  std::size_t count() const;

  bool operator==(const BinaryMask&) const = default;
};

}  // namespace usmask
