#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "usmask/core.hpp"
#include "usmask/image.hpp"
#include "usmask/temporal.hpp"

namespace usmask {

inline constexpr double kDefaultConfThr = 0.318;
inline constexpr double kDefaultIouThr = 0.6;

struct MaskStyle {
  enum class Kind { kSolid, kPixelate };
  Kind kind = Kind::kSolid;
  int block = 8;  // pixelate block side
};

// Fills every pixel the (clamped) boxes touch. Solid style writes 0;
// pixelate sets the covered part of each frame-aligned block x block tile to
// its rounded mean. Pixels outside all boxes are untouched.
GrayImage render_mask(const GrayImage& frame, std::span<const BBox> boxes, const MaskStyle& style = {});

struct MaskerConfig {
  double conf_thr = kDefaultConfThr;
  HoldConfig hold;
  MaskStyle style;

  void validate() const;
};

// The per-stream path shared by the offline pipeline and the service:
// confidence filter, clamp, temporal step, render.
class FrameMasker {
 public:
  struct Output {
    MaskDecision decision;
    GrayImage masked;
    std::size_t skipped_boxes = 0;  // boxes entirely outside the frame
  };

  explicit FrameMasker(MaskerConfig cfg);

  Output process(const GrayImage& frame, std::span<const Detection> detections);

  // Swaps thresholds and hold settings mid-stream; the hold state is kept.
  void reconfigure(const MaskerConfig& cfg);
  const MaskerConfig& config() const { return cfg_; }
  const HoldState& state() const { return state_; }

 private:
  MaskerConfig cfg_;
  HoldState state_;
};

struct Frame {
  FrameIndex index = 0;
  GrayImage image;
  std::string name;  // source file name, empty for raw streams
};

// Frames from a directory of numbered PGM files (index = last digit run in
// the file stem) or from a raw stream file (index = position).
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::optional<Frame> next() = 0;

  static std::unique_ptr<FrameSource> open(const std::filesystem::path& path);
};

class FrameSink {
 public:
  virtual ~FrameSink() = default;
  virtual void write(const Frame& frame) = 0;

  // Mirrors the input layout: a directory of PGMs or a raw stream file.
  static std::unique_ptr<FrameSink> create(const std::filesystem::path& path, bool raw, int width,
                                           int height);
};

struct RunConfig {
  std::filesystem::path frames_in;
  std::filesystem::path predictions;
  std::filesystem::path frames_out;       // empty: masked frames are not written
  std::filesystem::path decisions_out;    // empty: no decision log
  std::filesystem::path roi_ground_truth; // optional: frame-level FN report
  double conf_thr = kDefaultConfThr;
  double iou_thr = kDefaultIouThr;
  HoldConfig hold;
  MaskStyle style;

  MaskerConfig masker() const { return {conf_thr, hold, style}; }
};

struct RunSummary {
  std::size_t frames = 0;
  std::array<std::size_t, 4> by_source{};  // indexed by DecisionSource
  std::size_t skipped_boxes = 0;
  double seconds = 0;
  double fps = 0;
  std::optional<FnRateReport> fn;
};

// Throws Error with the offending frame index when the stream is inconsistent.
RunSummary run(const RunConfig& cfg);

}  // namespace usmask
