#pragma once

// Length-prefixed binary protocol of the masking service. Every message is
//
//   magic "USMK" | version u8 (= 1) | type u8 | payload_len u32 BE | payload
//
// and all multi-byte payload fields are big-endian.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "usmask/core.hpp"
#include "usmask/temporal.hpp"

namespace usmask::wire {

inline constexpr std::uint8_t kMagic[4] = {'U', 'S', 'M', 'K'};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 10;
inline constexpr std::uint32_t kMaxPayload = 16u << 20;

enum class MsgType : std::uint8_t { kFrame = 1, kMasked = 2, kError = 3, kConfig = 4 };

struct Header {
  MsgType type = MsgType::kFrame;
  std::uint32_t payload_len = 0;
};

struct Message {
  MsgType type = MsgType::kFrame;
  std::vector<std::uint8_t> payload;

  bool operator==(const Message&) const = default;
};

std::vector<std::uint8_t> encode_message(const Message& m);

// Validates the 10-byte header: kTruncated, kBadMagic, kUnsupportedVersion,
// kMalformed (unknown type) or kOversize, checked in that order.
Header decode_header(std::span<const std::uint8_t> bytes);

// Decodes one complete message from the front of `bytes`; `consumed`
// receives its total size. Trailing bytes are left alone.
Message decode_message(std::span<const std::uint8_t> bytes, std::size_t* consumed = nullptr);

struct Box {
  std::uint16_t x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  Category category = Category::kTransverse;

  bool operator==(const Box&) const = default;
};

struct WireDetection {
  Box box;
  std::uint16_t conf_milli = 0;  // 0..1000

  bool operator==(const WireDetection&) const = default;
};

// frame_index u32 | width u16 | height u16 | n_dets u16 |
// n_dets x (x0 y0 x1 y1 u16, category u8, conf_milli u16) | width*height pixels
struct FramePayload {
  std::uint32_t frame_index = 0;
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::vector<WireDetection> detections;
  std::vector<std::uint8_t> pixels;

  bool operator==(const FramePayload&) const = default;
};

// frame_index u32 | source u8 | n_boxes u16 | n_boxes x (x0 y0 x1 y1 u16,
// category u8) | pixels (same dimensions as the request frame)
struct MaskedPayload {
  std::uint32_t frame_index = 0;
  DecisionSource source = DecisionSource::kNone;
  std::vector<Box> boxes;
  std::vector<std::uint8_t> pixels;

  bool operator==(const MaskedPayload&) const = default;
};

// conf_milli u16 | mode u8 (0 off, 1 hold, 2 hold_sim) | hold_frames u16 |
// ssim_threshold_milli u16 | downsample u8
struct ConfigPayload {
  std::uint16_t conf_milli = 318;
  HoldMode mode = HoldMode::kBBoxHoldSim;
  std::uint16_t hold_frames = 15;
  std::uint16_t ssim_threshold_milli = 850;
  std::uint8_t downsample = 2;

  bool operator==(const ConfigPayload&) const = default;
};

// code u8 (an ErrorCode value) | UTF-8 message
struct ErrorPayload {
  ErrorCode code = ErrorCode::kMalformed;
  std::string message;

  bool operator==(const ErrorPayload&) const = default;
};

std::vector<std::uint8_t> encode_frame(const FramePayload& p);
FramePayload decode_frame(std::span<const std::uint8_t> payload);

std::vector<std::uint8_t> encode_masked(const MaskedPayload& p);
MaskedPayload decode_masked(std::span<const std::uint8_t> payload);

std::vector<std::uint8_t> encode_config(const ConfigPayload& p);
ConfigPayload decode_config(std::span<const std::uint8_t> payload);

std::vector<std::uint8_t> encode_error(const ErrorPayload& p);
ErrorPayload decode_error(std::span<const std::uint8_t> payload);

}  // namespace usmask::wire
