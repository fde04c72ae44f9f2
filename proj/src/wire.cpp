#include "usmask/wire.hpp"

#include <algorithm>
#include <cstring>

namespace usmask::wire {
namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) {
    buf_.push_back(static_cast<std::uint8_t>(v >> 8));
    buf_.push_back(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void bytes(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
  void box(const Box& b) {
    u16(b.x0);
    u16(b.y0);
    u16(b.x1);
    u16(b.y1);
    u8(static_cast<std::uint8_t>(b.category));
  }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

  std::uint8_t u8() {
    need(1);
    return b_[pos_++];
  }
  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>((b_[pos_] << 8) | b_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | b_[pos_ + i];
    pos_ += 4;
    return v;
  }
  std::vector<std::uint8_t> bytes(std::size_t n) {
    need(n);
    std::vector<std::uint8_t> out(b_.begin() + pos_, b_.begin() + pos_ + n);
    pos_ += n;
    return out;
  }
  Box box() {
    Box b;
    b.x0 = u16();
    b.y0 = u16();
    b.x1 = u16();
    b.y1 = u16();
    const auto cat = category_from_code(u8());
    if (!cat) throw Error(ErrorCode::kMalformed, "unknown category code");
    b.category = *cat;
    return b;
  }
  std::size_t remaining() const { return b_.size() - pos_; }
  void expect_end() const {
    if (remaining() != 0) throw Error(ErrorCode::kMalformed, "trailing bytes in payload");
  }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw Error(ErrorCode::kTruncated, "payload ends early");
  }

  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

bool known_type(std::uint8_t t) { return t >= 1 && t <= 4; }

}  // namespace

std::vector<std::uint8_t> encode_message(const Message& m) {
  if (m.payload.size() > kMaxPayload) throw Error(ErrorCode::kOversize, "payload exceeds 16 MiB");
  Writer w;
  w.bytes(kMagic);
  w.u8(kVersion);
  w.u8(static_cast<std::uint8_t>(m.type));
  w.u32(static_cast<std::uint32_t>(m.payload.size()));
  w.bytes(m.payload);
  return w.take();
}

Header decode_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) throw Error(ErrorCode::kTruncated, "short header");
  if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
    throw Error(ErrorCode::kBadMagic, "magic is not USMK");
  if (bytes[4] != kVersion)
    throw Error(ErrorCode::kUnsupportedVersion, "version " + std::to_string(bytes[4]));
  if (!known_type(bytes[5])) throw Error(ErrorCode::kMalformed, "unknown message type");
  Reader r(bytes.subspan(6, 4));
  Header h{static_cast<MsgType>(bytes[5]), r.u32()};
  if (h.payload_len > kMaxPayload)
    throw Error(ErrorCode::kOversize, "declared payload of " + std::to_string(h.payload_len) + " bytes");
  return h;
}

Message decode_message(std::span<const std::uint8_t> bytes, std::size_t* consumed) {
  const Header h = decode_header(bytes);
  if (bytes.size() - kHeaderSize < h.payload_len) throw Error(ErrorCode::kTruncated, "payload incomplete");
  Message m{h.type, std::vector<std::uint8_t>(bytes.begin() + kHeaderSize,
                                              bytes.begin() + kHeaderSize + h.payload_len)};
  if (consumed) *consumed = kHeaderSize + h.payload_len;
  return m;
}

std::vector<std::uint8_t> encode_frame(const FramePayload& p) {
  require(p.detections.size() <= 0xFFFF, "encode_frame: too many detections");
  require(p.pixels.size() == std::size_t{p.width} * p.height, "encode_frame: pixel count mismatch");
  Writer w;
  w.u32(p.frame_index);
  w.u16(p.width);
  w.u16(p.height);
  w.u16(static_cast<std::uint16_t>(p.detections.size()));
  for (const auto& d : p.detections) {
    require(d.conf_milli <= 1000, "encode_frame: conf_milli above 1000");
    w.box(d.box);
    w.u16(d.conf_milli);
  }
  w.bytes(p.pixels);
  return w.take();
}

FramePayload decode_frame(std::span<const std::uint8_t> payload) {
  Reader r(payload);
  FramePayload p;
  p.frame_index = r.u32();
  p.width = r.u16();
  p.height = r.u16();
  if (p.width == 0 || p.height == 0) throw Error(ErrorCode::kMalformed, "zero frame dimension");
  const std::uint16_t n = r.u16();
  p.detections.reserve(std::min<std::size_t>(n, r.remaining() / 11));
  for (std::uint16_t i = 0; i < n; ++i) {
    WireDetection d;
    d.box = r.box();
    d.conf_milli = r.u16();
    if (d.conf_milli > 1000) throw Error(ErrorCode::kMalformed, "conf_milli above 1000");
    p.detections.push_back(d);
  }
  p.pixels = r.bytes(std::size_t{p.width} * p.height);
  r.expect_end();
  return p;
}

std::vector<std::uint8_t> encode_masked(const MaskedPayload& p) {
  require(p.boxes.size() <= 0xFFFF, "encode_masked: too many boxes");
  Writer w;
  w.u32(p.frame_index);
  w.u8(static_cast<std::uint8_t>(p.source));
  w.u16(static_cast<std::uint16_t>(p.boxes.size()));
  for (const auto& b : p.boxes) w.box(b);
  w.bytes(p.pixels);
  return w.take();
}

MaskedPayload decode_masked(std::span<const std::uint8_t> payload) {
  Reader r(payload);
  MaskedPayload p;
  p.frame_index = r.u32();
  const std::uint8_t src = r.u8();
  if (src > 3) throw Error(ErrorCode::kMalformed, "unknown source tag");
  p.source = static_cast<DecisionSource>(src);
  const std::uint16_t n = r.u16();
  p.boxes.reserve(std::min<std::size_t>(n, r.remaining() / 9));
  for (std::uint16_t i = 0; i < n; ++i) p.boxes.push_back(r.box());
  p.pixels = r.bytes(r.remaining());
  return p;
}

std::vector<std::uint8_t> encode_config(const ConfigPayload& p) {
  Writer w;
  w.u16(p.conf_milli);
  w.u8(static_cast<std::uint8_t>(p.mode));
  w.u16(p.hold_frames);
  w.u16(p.ssim_threshold_milli);
  w.u8(p.downsample);
  return w.take();
}

ConfigPayload decode_config(std::span<const std::uint8_t> payload) {
  Reader r(payload);
  ConfigPayload p;
  p.conf_milli = r.u16();
  const std::uint8_t mode = r.u8();
  p.hold_frames = r.u16();
  p.ssim_threshold_milli = r.u16();
  p.downsample = r.u8();
  r.expect_end();
  if (p.conf_milli > 1000 || p.ssim_threshold_milli > 1000)
    throw Error(ErrorCode::kMalformed, "threshold above 1000 milli");
  if (mode > 2) throw Error(ErrorCode::kMalformed, "unknown hold mode");
  if (p.downsample == 0) throw Error(ErrorCode::kMalformed, "downsample must be >= 1");
  p.mode = static_cast<HoldMode>(mode);
  return p;
}

std::vector<std::uint8_t> encode_error(const ErrorPayload& p) {
  Writer w;
  w.u8(static_cast<std::uint8_t>(p.code));
  w.bytes(std::span(reinterpret_cast<const std::uint8_t*>(p.message.data()), p.message.size()));
  return w.take();
}

ErrorPayload decode_error(std::span<const std::uint8_t> payload) {
  Reader r(payload);
  const std::uint8_t code = r.u8();
  if (code > static_cast<std::uint8_t>(ErrorCode::kMalformed))
    throw Error(ErrorCode::kMalformed, "unknown error code");
  const auto rest = r.bytes(r.remaining());
  return {static_cast<ErrorCode>(code), std::string(rest.begin(), rest.end())};
}

}  // namespace usmask::wire
