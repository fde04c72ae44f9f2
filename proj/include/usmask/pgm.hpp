#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <vector>

#include "usmask/image.hpp"

namespace usmask {

// Reads binary (P5) or ASCII (P2) graymaps with maxval <= 255. Samples are
// kept as stored.
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);

// Always binary P5 with maxval 255: "P5\n<w> <h>\n255\n" followed by pixels.
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);

GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

// Raw frame stream: a 9-byte header ("USRS", version 1, width and height as
// big-endian u16) followed by width*height bytes per frame until EOF.
inline constexpr char kRawStreamMagic[4] = {'U', 'S', 'R', 'S'};
inline constexpr std::uint8_t kRawStreamVersion = 1;
inline constexpr std::size_t kRawStreamHeaderSize = 9;

class RawStreamReader {
 public:
  explicit RawStreamReader(const std::filesystem::path& path);

  int width() const { return width_; }
  int height() const { return height_; }
  // Next frame, or nullopt at a clean end of stream. A partial trailing
  // frame throws kTruncated.
  std::optional<GrayImage> next();

 private:
  std::ifstream in_;
  int width_ = 0;
  int height_ = 0;
};

class RawStreamWriter {
 public:
  RawStreamWriter(const std::filesystem::path& path, int width, int height);

  void write(const GrayImage& frame);

 private:
  std::ofstream out_;
  int width_;
  int height_;
};

bool is_raw_stream(const std::filesystem::path& path);

}  // namespace usmask
