#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "usmask/core.hpp"
#include "usmask/image.hpp"
#include "usmask/ssim.hpp"

namespace usmask {

enum class HoldMode { kOff, kBBoxHold, kBBoxHoldSim };

std::string_view to_string(HoldMode m);
std::optional<HoldMode> hold_mode_from_string(std::string_view s);

inline constexpr int kDefaultHoldFrames = 15;
inline constexpr double kDefaultSsimThreshold = 0.85;

struct HoldConfig {
  HoldMode mode = HoldMode::kBBoxHoldSim;
  int hold_frames = kDefaultHoldFrames;            // N
  double ssim_threshold = kDefaultSsimThreshold;  // tau
  SsimParams ssim_params{.downsample = 2};

  void validate() const;
};

struct LabeledBox {
  BBox bbox;
  Category category = Category::kTransverse;

  bool operator==(const LabeledBox&) const = default;
};

enum class DecisionSource : std::uint8_t { kNone = 0, kFresh = 1, kHeld = 2, kHeldSim = 3 };

std::string_view to_string(DecisionSource s);
std::optional<DecisionSource> decision_source_from_string(std::string_view s);

struct MaskDecision {
  std::vector<LabeledBox> boxes;
  DecisionSource source = DecisionSource::kNone;
  std::optional<double> ssim;  // set when the similarity gate was evaluated

  bool masked() const { return !boxes.empty(); }
};

// Per-stream memory. reference_frame is present iff last_boxes is non-empty.
struct HoldState {
  std::vector<LabeledBox> last_boxes;
  std::size_t frames_since_detection = 0;
  std::optional<GrayImage> reference_frame;
  int width = 0;  // stream dimensions, fixed by the first frame
  int height = 0;
};

// Advances one frame. `fresh` must already be filtered by the operating
// confidence threshold. Fresh detections always replace any hold. In
// BBoxHoldSim mode a frame whose SSIM to the last detected frame exceeds tau
// replays the held boxes without consuming the hold budget.
// Throws kStreamInconsistency if the frame size changes within the stream.
MaskDecision step(HoldState& state, const GrayImage& frame, std::span<const Detection> fresh,
                  const HoldConfig& cfg);

std::vector<MaskDecision> run_stream(std::span<const GrayImage> frames,
                                     std::span<const std::vector<Detection>> per_frame_detections,
                                     const HoldConfig& cfg);

struct FnRateReport {
  std::size_t roi_frames = 0;
  std::size_t raw_misses = 0;   // ROI frames without a fresh detection
  std::size_t post_misses = 0;  // ROI frames left unmasked
  double raw_fn_rate = 0;
  double post_fn_rate = 0;
  double reduction_fraction = 0;  // 1 - post/raw, 0 when raw == 0
};

// Frame-level false-negative accounting; roi[i] says frame i should be masked.
FnRateReport fn_rate_report(std::span<const MaskDecision> decisions, const std::vector<bool>& roi);

}  // namespace usmask
