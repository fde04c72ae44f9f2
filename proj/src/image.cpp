#include "usmask/image.hpp"

#include <algorithm>
#include <utility>

namespace usmask {

GrayImage::GrayImage(int w, int h, std::uint8_t fill) : width(w), height(h) {
  require(w >= 1 && h >= 1, "GrayImage: dimensions must be >= 1");
  data.assign(static_cast<std::size_t>(w) * h, fill);
}

GrayImage::GrayImage(int w, int h, std::vector<std::uint8_t> pixels)
    : width(w), height(h), data(std::move(pixels)) {
  require(w >= 1 && h >= 1, "GrayImage: dimensions must be >= 1");
  require(data.size() == static_cast<std::size_t>(w) * h, "GrayImage: pixel count mismatch");
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

}  // namespace usmask
