#include <random>

#include "doctest.h"
#include "usmask/wire.hpp"

using namespace usmask;
using namespace usmask::wire;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kPrecondition;
}

std::vector<std::uint8_t> header(const char* magic, std::uint8_t ver, std::uint8_t type, std::uint32_t len) {
  return {std::uint8_t(magic[0]), std::uint8_t(magic[1]), std::uint8_t(magic[2]), std::uint8_t(magic[3]),
          ver, type, std::uint8_t(len >> 24), std::uint8_t(len >> 16), std::uint8_t(len >> 8), std::uint8_t(len)};
}

FramePayload random_frame(std::mt19937_64& rng) {
  FramePayload f;
  f.frame_index = static_cast<std::uint32_t>(rng());
  f.width = static_cast<std::uint16_t>(1 + rng() % 32);
  f.height = static_cast<std::uint16_t>(1 + rng() % 32);
  const int n = int(rng() % 5);
  for (int i = 0; i < n; ++i) {
    WireDetection d;
    d.box = {std::uint16_t(rng()), std::uint16_t(rng()), std::uint16_t(rng()), std::uint16_t(rng()),
             Category(rng() % 2)};
    d.conf_milli = static_cast<std::uint16_t>(rng() % 1001);
    f.detections.push_back(d);
  }
  f.pixels.resize(std::size_t(f.width) * f.height);
  for (auto& p : f.pixels) p = static_cast<std::uint8_t>(rng());
  return f;
}

}  // namespace

TEST_CASE("header layout is bit-exact") {
  const Message m{MsgType::kConfig, {1, 2, 3}};
  const auto b = encode_message(m);
  REQUIRE(b.size() == 13);
  CHECK(std::vector<std::uint8_t>(b.begin(), b.begin() + 10) == header("USMK", 1, 4, 3));
  CHECK(b[10] == 1);
  std::size_t used = 0;
  CHECK(decode_message(b, &used) == m);
  CHECK(used == 13);
}

TEST_CASE("frame payload layout") {
  FramePayload f;
  f.frame_index = 0x01020304;
  f.width = 2;
  f.height = 1;
  f.detections = {{{1, 2, 3, 4, Category::kMidSagittal}, 1000}};
  f.pixels = {9, 8};
  const std::vector<std::uint8_t> expected = {1, 2, 3, 4, 0, 2, 0, 1, 0, 1, 0, 1, 0, 2, 0, 3, 0, 4, 1, 0x03, 0xE8, 9, 8};
  CHECK(encode_frame(f) == expected);
  CHECK(decode_frame(expected) == f);

  MaskedPayload m;
  m.frame_index = 7;
  m.source = DecisionSource::kHeldSim;
  m.boxes = {{0, 0, 5, 6, Category::kTransverse}};
  m.pixels = {0, 0, 3};
  const std::vector<std::uint8_t> mexp = {0, 0, 0, 7, 3, 0, 1, 0, 0, 0, 0, 0, 5, 0, 6, 0, 0, 0, 3};
  CHECK(encode_masked(m) == mexp);
  CHECK(decode_masked(mexp) == m);
}

TEST_CASE("malformed headers") {
  CHECK(code_of([] { decode_header(header("XXXX", 1, 1, 0)); }) == ErrorCode::kBadMagic);
  CHECK(code_of([] { decode_header(header("USMK", 2, 1, 0)); }) == ErrorCode::kUnsupportedVersion);
  CHECK(code_of([] { decode_header(header("USMK", 1, 9, 0)); }) == ErrorCode::kMalformed);
  CHECK(code_of([] { decode_header(header("USMK", 1, 1, 32u << 20)); }) == ErrorCode::kOversize);
  CHECK(decode_header(header("USMK", 1, 1, kMaxPayload)).payload_len == kMaxPayload);
  CHECK(code_of([] { decode_header(header("USMK", 1, 1, kMaxPayload + 1)); }) == ErrorCode::kOversize);
  auto h = header("USMK", 1, 1, 0);
  h.pop_back();
  CHECK(code_of([&] { decode_header(h); }) == ErrorCode::kTruncated);
  CHECK(code_of([] { decode_message(header("USMK", 1, 1, 5)); }) == ErrorCode::kTruncated);
}

TEST_CASE("malformed payloads") {
  std::mt19937_64 rng(81);
  const auto f = random_frame(rng);
  auto bytes = encode_frame(f);
  bytes.pop_back();
  CHECK(code_of([&] { decode_frame(bytes); }) == ErrorCode::kTruncated);
  bytes.push_back(0);
  bytes.push_back(0);
  CHECK(code_of([&] { decode_frame(bytes); }) == ErrorCode::kMalformed);

  auto conf = encode_frame(FramePayload{0, 1, 1, {{{0, 0, 1, 1, Category::kTransverse}, 1000}}, {0}});
  conf[10 + 10] = 0xE9;  // conf_milli 1001
  CHECK(code_of([&] { decode_frame(conf); }) == ErrorCode::kMalformed);
  FramePayload too_sure = f;
  too_sure.detections = {{{0, 0, 1, 1, Category::kTransverse}, 1001}};
  CHECK_THROWS_AS(encode_frame(too_sure), Error);

  auto cat = encode_frame(FramePayload{0, 1, 1, {{{0, 0, 1, 1, Category::kTransverse}, 5}}, {0}});
  cat[10 + 8] = 7;  // category byte
  CHECK(code_of([&] { decode_frame(cat); }) == ErrorCode::kMalformed);

  std::vector<std::uint8_t> zero_dim = {0, 0, 0, 0, 0, 0, 0, 1, 0, 0};
  CHECK(code_of([&] { decode_frame(zero_dim); }) == ErrorCode::kMalformed);

  std::vector<std::uint8_t> bad_source = {0, 0, 0, 0, 9, 0, 0};
  CHECK(code_of([&] { decode_masked(bad_source); }) == ErrorCode::kMalformed);
}

TEST_CASE("round trips") {
  std::mt19937_64 rng(83);
  for (int i = 0; i < 500; ++i) {
    const auto f = random_frame(rng);
    CHECK(decode_frame(encode_frame(f)) == f);

    MaskedPayload m;
    m.frame_index = f.frame_index;
    m.source = DecisionSource(rng() % 4);
    for (const auto& d : f.detections) m.boxes.push_back(d.box);
    m.pixels = f.pixels;
    CHECK(decode_masked(encode_masked(m)) == m);

    ConfigPayload c{std::uint16_t(rng() % 1001), HoldMode(rng() % 3), std::uint16_t(rng()),
                    std::uint16_t(rng() % 1001), std::uint8_t(1 + rng() % 8)};
    CHECK(decode_config(encode_config(c)) == c);

    const Message msg{MsgType(1 + rng() % 4), encode_frame(f)};
    const auto enc = encode_message(msg);
    CHECK(decode_message(enc) == msg);
    CHECK(encode_message(decode_message(enc)) == enc);
  }
  const ErrorPayload e{ErrorCode::kStreamInconsistency, "frame is 3x3, stream is 4x4"};
  CHECK(decode_error(encode_error(e)) == e);
}

TEST_CASE("decode_message leaves trailing bytes") {
  auto a = encode_message({MsgType::kFrame, {1}});
  const auto b = encode_message({MsgType::kConfig, {2, 3}});
  a.insert(a.end(), b.begin(), b.end());
  std::size_t used = 0;
  CHECK(decode_message(a, &used).payload == std::vector<std::uint8_t>{1});
  CHECK(decode_message(std::span(a).subspan(used)).type == MsgType::kConfig);
}

TEST_CASE("fuzzed buffers never crash") {
  std::mt19937_64 rng(89);
  for (int i = 0; i < 20000; ++i) {
    std::vector<std::uint8_t> buf(rng() % 40);
    for (auto& v : buf) v = static_cast<std::uint8_t>(rng());
    if (!buf.empty() && rng() % 2) {
      const auto h = header("USMK", std::uint8_t(rng() % 3), std::uint8_t(rng() % 6), std::uint32_t(rng() % 64));
      std::copy(h.begin(), h.begin() + std::min(h.size(), buf.size()), buf.begin());
    }
    try {
      const auto m = decode_message(buf);
      switch (m.type) {
        case MsgType::kFrame: decode_frame(m.payload); break;
        case MsgType::kMasked: decode_masked(m.payload); break;
        case MsgType::kConfig: decode_config(m.payload); break;
        case MsgType::kError: decode_error(m.payload); break;
      }
    } catch (const Error&) {
    }
  }
}
