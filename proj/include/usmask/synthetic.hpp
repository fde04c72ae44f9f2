#pragma once

// Synthetic ultrasound-like frame streams with a known region of interest and
// detector dropout, for exercising the hold rules end to end.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "usmask/core.hpp"
#include "usmask/image.hpp"

namespace usmask {

struct SyntheticSpec {
  int width = 384;
  int height = 384;
  std::size_t frames = 300;
  std::uint64_t seed = 1;
  std::size_t min_span = 10;      // scene segment length bounds
  std::size_t max_span = 60;
  double roi_fraction = 0.5;      // probability a segment contains the ROI
  double dropout_rate = 0.15;     // per-frame probability a detector gap starts
  std::size_t max_gap = 12;       // longest detector gap
  double noise = 2.0;             // per-frame pixel noise amplitude
  bool quantize_conf = true;      // confidences on a 1/1000 grid
};

struct SyntheticStream {
  std::vector<GrayImage> frames;
  std::vector<std::vector<Detection>> detections;  // per frame, unfiltered
  std::vector<bool> roi;                           // frame should be masked
  std::vector<BBox> roi_boxes;                     // true ROI box per frame (ROI frames only)
  std::vector<Category> roi_categories;
};

// Scene segments each get their own texture, so SSIM across a cut is low.
// ROI segments carry a bright square that drifts slowly; the detector
// reports it with confidence >= 0.4 except inside random gaps, and
// occasionally emits sub-threshold false alarms.
SyntheticStream make_synthetic_stream(const SyntheticSpec& spec);

// Fixed textured frame repeated `total` times, detected everywhere except
// frames [gap_start, gap_start + gap_len). Every frame is an ROI frame.
SyntheticStream make_gap_fixture(std::size_t total, std::size_t gap_start, std::size_t gap_len,
                                 int width = 64, int height = 64);

// Writes frames (PGM directory, or raw stream when `raw`), predictions JSONL
// and ROI ground truth JSONL.
void write_synthetic_stream(const SyntheticStream& s, const std::filesystem::path& frames_out,
                            bool raw, const std::filesystem::path& predictions_out,
                            const std::filesystem::path& roi_out);

}  // namespace usmask
