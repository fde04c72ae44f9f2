#include "usmask/pgm.hpp"

#include <cctype>
#include <cstring>
#include <iterator>
#include <string>

namespace usmask {
namespace {

class HeaderScanner {
 public:
  explicit HeaderScanner(std::span<const std::uint8_t> b) : b_(b) {}

  void skip_space_and_comments() {
    while (pos_ < b_.size()) {
      if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n' && b_[pos_] != '\r') ++pos_;
      } else if (std::isspace(b_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long number(const char* what) {
    skip_space_and_comments();
    if (pos_ >= b_.size() || !std::isdigit(b_[pos_]))
      throw Error(ErrorCode::kParse, std::string("pgm: expected ") + what);
    long v = 0;
    while (pos_ < b_.size() && std::isdigit(b_[pos_])) {
      v = v * 10 + (b_[pos_++] - '0');
      if (v > 1'000'000) throw Error(ErrorCode::kParse, std::string("pgm: ") + what + " too large");
    }
    return v;
  }

  std::size_t pos() const { return pos_; }
  void advance() { ++pos_; }
  bool at_end() const { return pos_ >= b_.size(); }
  std::uint8_t peek() const { return b_[pos_]; }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

}  // namespace

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2'))
    throw Error(ErrorCode::kParse, "pgm: missing P5/P2 magic");
  const bool binary = bytes[1] == '5';
  if (bytes.size() < 3 || !(std::isspace(bytes[2]) || bytes[2] == '#'))
    throw Error(ErrorCode::kParse, "pgm: missing separator after magic");
  HeaderScanner s(bytes.subspan(2));
  const long w = s.number("width");
  const long h = s.number("height");
  const long maxval = s.number("maxval");
  if (w < 1 || h < 1) throw Error(ErrorCode::kParse, "pgm: empty image");
  if (maxval < 1 || maxval > 255) throw Error(ErrorCode::kParse, "pgm: only 8-bit maxval supported");

  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  std::vector<std::uint8_t> pixels(n);
  if (binary) {
    // Exactly one whitespace byte separates maxval from the raster.
    if (s.at_end() || !std::isspace(s.peek())) throw Error(ErrorCode::kParse, "pgm: bad header end");
    const std::size_t start = 2 + s.pos() + 1;
    if (bytes.size() < start + n) throw Error(ErrorCode::kTruncated, "pgm: raster too short");
    std::memcpy(pixels.data(), bytes.data() + start, n);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const long v = s.number("sample");
      if (v > maxval) throw Error(ErrorCode::kParse, "pgm: sample exceeds maxval");
      pixels[i] = static_cast<std::uint8_t>(v);
    }
  }
  return GrayImage(static_cast<int>(w), static_cast<int>(h), std::move(pixels));
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  const std::string header =
      "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out;
  out.reserve(header.size() + img.data.size());
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), img.data.begin(), img.data.end());
  return out;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_pgm(bytes);
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot create " + path.string());
  const auto bytes = encode_pgm(img);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

RawStreamReader::RawStreamReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
  if (!in_) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::uint8_t hdr[kRawStreamHeaderSize];
  if (!in_.read(reinterpret_cast<char*>(hdr), sizeof hdr))
    throw Error(ErrorCode::kTruncated, "raw stream: short header");
  if (std::memcmp(hdr, kRawStreamMagic, 4) != 0) throw Error(ErrorCode::kBadMagic, "raw stream: bad magic");
  if (hdr[4] != kRawStreamVersion) throw Error(ErrorCode::kUnsupportedVersion, "raw stream: version");
  width_ = (hdr[5] << 8) | hdr[6];
  height_ = (hdr[7] << 8) | hdr[8];
  if (width_ == 0 || height_ == 0) throw Error(ErrorCode::kParse, "raw stream: zero dimension");
}

std::optional<GrayImage> RawStreamReader::next() {
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width_) * height_);
  in_.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  const auto got = static_cast<std::size_t>(in_.gcount());
  if (got == 0) return std::nullopt;
  if (got != pixels.size()) throw Error(ErrorCode::kTruncated, "raw stream: partial frame");
  return GrayImage(width_, height_, std::move(pixels));
}

RawStreamWriter::RawStreamWriter(const std::filesystem::path& path, int width, int height)
    : out_(path, std::ios::binary), width_(width), height_(height) {
  if (!out_) throw Error(ErrorCode::kIo, "cannot create " + path.string());
  require(width >= 1 && width <= 0xFFFF && height >= 1 && height <= 0xFFFF,
          "raw stream: dimensions must fit in 16 bits");
  const std::uint8_t hdr[kRawStreamHeaderSize] = {
      'U', 'S', 'R', 'S', kRawStreamVersion,
      static_cast<std::uint8_t>(width >> 8), static_cast<std::uint8_t>(width & 0xFF),
      static_cast<std::uint8_t>(height >> 8), static_cast<std::uint8_t>(height & 0xFF)};
  out_.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
}

void RawStreamWriter::write(const GrayImage& frame) {
  if (frame.width != width_ || frame.height != height_)
    throw Error(ErrorCode::kStreamInconsistency, "raw stream: frame size changed");
  out_.write(reinterpret_cast<const char*>(frame.data.data()),
             static_cast<std::streamsize>(frame.data.size()));
  if (!out_) throw Error(ErrorCode::kIo, "raw stream: write failed");
}

bool is_raw_stream(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) return false;
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::memcmp(magic, kRawStreamMagic, 4) == 0;
}

}  // namespace usmask
