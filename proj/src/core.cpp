#include "usmask/core.hpp"

#include <algorithm>
#include <cmath>

namespace usmask {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kPrecondition: return "PreconditionViolation";
    case ErrorCode::kEmptyAfterClamp: return "EmptyAfterClamp";
    case ErrorCode::kNoGroundTruth: return "NoGroundTruth";
    case ErrorCode::kConstantImage: return "ConstantImage";
    case ErrorCode::kNoBoundaryData: return "NoBoundaryData";
    case ErrorCode::kStreamInconsistency: return "StreamInconsistency";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kSchema: return "SchemaError";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::kOversize: return "Oversize";
    case ErrorCode::kTruncated: return "Truncated";
    case ErrorCode::kMalformed: return "Malformed";
  }
  return "Unknown";
}

bool BBox::valid() const {
  return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
         std::isfinite(y_max) && x_min < x_max && y_min < y_max;
}

std::string_view to_string(Category c) {
  return c == Category::kTransverse ? "transverse" : "mid_sagittal";
}

std::optional<Category> category_from_string(std::string_view s) {
  if (s == "transverse") return Category::kTransverse;
  if (s == "mid_sagittal") return Category::kMidSagittal;
  return std::nullopt;
}

std::optional<Category> category_from_code(int code) {
  if (code == 0) return Category::kTransverse;
  if (code == 1) return Category::kMidSagittal;
  return std::nullopt;
}

double iou(const BBox& a, const BBox& b) {
  require(a.valid() && b.valid(), "iou: box with non-positive area");
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

BBox clamp_to_frame(const BBox& b, int width, int height) {
  require(width > 0 && height > 0, "clamp_to_frame: frame must be non-empty");
  const double w = width, h = height;
  BBox out{std::clamp(b.x_min, 0.0, w), std::clamp(b.y_min, 0.0, h),
           std::clamp(b.x_max, 0.0, w), std::clamp(b.y_max, 0.0, h)};
  if (!out.valid()) throw Error(ErrorCode::kEmptyAfterClamp, "box lies outside the frame");
  return out;
}

ValidationReport validate_annotations(std::span<const GroundTruth> gts, double squareness_tol) {
  require(squareness_tol >= 0, "validate_annotations: tolerance must be >= 0");
  ValidationReport report;
  report.checked = gts.size();
  for (std::size_t i = 0; i < gts.size(); ++i) {
    const BBox& b = gts[i].bbox;
    const bool in_range = b.x_min >= 0 && b.y_min >= 0;
    if (!b.valid() || !in_range) {
      report.violations.push_back({i, gts[i].frame_index, AnnotationViolation::Kind::kInvalidBox, 0});
      continue;
    }
    const double dev = std::abs(b.width() - b.height()) / std::max(b.width(), b.height());
    if (dev > squareness_tol)
      report.violations.push_back({i, gts[i].frame_index, AnnotationViolation::Kind::kNotSquare, dev});
  }
  return report;
}

}  // namespace usmask
