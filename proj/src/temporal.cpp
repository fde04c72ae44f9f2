#include "usmask/temporal.hpp"

#include <string>

namespace usmask {

std::string_view to_string(HoldMode m) {
  switch (m) {
    case HoldMode::kOff: return "off";
    case HoldMode::kBBoxHold: return "hold";
    case HoldMode::kBBoxHoldSim: return "hold_sim";
  }
  return "off";
}

std::optional<HoldMode> hold_mode_from_string(std::string_view s) {
  if (s == "off") return HoldMode::kOff;
  if (s == "hold") return HoldMode::kBBoxHold;
  if (s == "hold_sim") return HoldMode::kBBoxHoldSim;
  return std::nullopt;
}

std::string_view to_string(DecisionSource s) {
  switch (s) {
    case DecisionSource::kNone: return "none";
    case DecisionSource::kFresh: return "fresh";
    case DecisionSource::kHeld: return "held";
    case DecisionSource::kHeldSim: return "held_sim";
  }
  return "none";
}

std::optional<DecisionSource> decision_source_from_string(std::string_view s) {
  if (s == "none") return DecisionSource::kNone;
  if (s == "fresh") return DecisionSource::kFresh;
  if (s == "held") return DecisionSource::kHeld;
  if (s == "held_sim") return DecisionSource::kHeldSim;
  return std::nullopt;
}

void HoldConfig::validate() const {
  require(hold_frames >= 0, "HoldConfig: hold_frames must be >= 0");
  require(ssim_threshold >= 0 && ssim_threshold <= 1, "HoldConfig: ssim_threshold must be in [0,1]");
  require(ssim_params.downsample >= 1, "HoldConfig: downsample must be >= 1");
}

MaskDecision step(HoldState& state, const GrayImage& frame, std::span<const Detection> fresh,
                  const HoldConfig& cfg) {
  if (state.width == 0) {
    state.width = frame.width;
    state.height = frame.height;
  } else if (frame.width != state.width || frame.height != state.height) {
    throw Error(ErrorCode::kStreamInconsistency,
                "frame is " + std::to_string(frame.width) + "x" + std::to_string(frame.height) +
                    ", stream is " + std::to_string(state.width) + "x" +
                    std::to_string(state.height));
  }

  MaskDecision d;
  if (!fresh.empty()) {
    d.source = DecisionSource::kFresh;
    d.boxes.reserve(fresh.size());
    for (const auto& det : fresh) d.boxes.push_back({det.bbox, det.category});
    state.last_boxes = d.boxes;
    state.frames_since_detection = 0;
    state.reference_frame = frame;
    return d;
  }

  const bool have_boxes = !state.last_boxes.empty();
  if (cfg.mode == HoldMode::kBBoxHoldSim && have_boxes) {
    d.ssim = mssim(frame, *state.reference_frame, cfg.ssim_params);
    if (*d.ssim > cfg.ssim_threshold) {
      d.source = DecisionSource::kHeldSim;
      d.boxes = state.last_boxes;
      return d;
    }
  }

  if (cfg.mode != HoldMode::kOff && have_boxes &&
      state.frames_since_detection < static_cast<std::size_t>(cfg.hold_frames)) {
    d.source = DecisionSource::kHeld;
    d.boxes = state.last_boxes;
  }
  ++state.frames_since_detection;
  return d;
}

std::vector<MaskDecision> run_stream(std::span<const GrayImage> frames,
                                     std::span<const std::vector<Detection>> per_frame_detections,
                                     const HoldConfig& cfg) {
  require(frames.size() == per_frame_detections.size(),
          "run_stream: frames and detections differ in length");
  cfg.validate();
  HoldState state;
  std::vector<MaskDecision> out;
  out.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i)
    out.push_back(step(state, frames[i], per_frame_detections[i], cfg));
  return out;
}

FnRateReport fn_rate_report(std::span<const MaskDecision> decisions, const std::vector<bool>& roi) {
  require(decisions.size() == roi.size(), "fn_rate_report: length mismatch");
  FnRateReport r;
  for (std::size_t i = 0; i < roi.size(); ++i) {
    if (!roi[i]) continue;
    ++r.roi_frames;
    r.raw_misses += decisions[i].source != DecisionSource::kFresh;
    r.post_misses += decisions[i].source == DecisionSource::kNone;
  }
  if (r.roi_frames > 0) {
    r.raw_fn_rate = static_cast<double>(r.raw_misses) / static_cast<double>(r.roi_frames);
    r.post_fn_rate = static_cast<double>(r.post_misses) / static_cast<double>(r.roi_frames);
  }
  if (r.raw_misses > 0)
    r.reduction_fraction =
        1.0 - static_cast<double>(r.post_misses) / static_cast<double>(r.raw_misses);
  return r;
}

}  // namespace usmask
