#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "usmask/error.hpp"

namespace usmask {

using FrameIndex = std::uint32_t;

// Half-open axis-aligned box [x_min, x_max) x [y_min, y_max) in pixels.
struct BBox {
  double x_min = 0;
  double y_min = 0;
  double x_max = 0;
  double y_max = 0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  bool valid() const;

  bool operator==(const BBox&) const = default;
};

enum class Category : std::uint8_t { kTransverse = 0, kMidSagittal = 1 };

inline constexpr Category kAllCategories[] = {Category::kTransverse, Category::kMidSagittal};

std::string_view to_string(Category c);
std::optional<Category> category_from_string(std::string_view s);
std::optional<Category> category_from_code(int code);

struct Detection {
  FrameIndex frame_index = 0;
  BBox bbox;
  Category category = Category::kTransverse;
  double confidence = 0;

  bool operator==(const Detection&) const = default;
};

struct GroundTruth {
  FrameIndex frame_index = 0;
  BBox bbox;
  Category category = Category::kTransverse;

  bool operator==(const GroundTruth&) const = default;
};

// Intersection over union. Throws kPrecondition on a box with non-positive area.
double iou(const BBox& a, const BBox& b);

// Clips to [0,width] x [0,height]. Throws kEmptyAfterClamp if nothing is left.
BBox clamp_to_frame(const BBox& b, int width, int height);

struct AnnotationViolation {
  enum class Kind { kInvalidBox, kNotSquare };

  std::size_t index = 0;  // position in the input list
  FrameIndex frame_index = 0;
  Kind kind = Kind::kInvalidBox;
  double deviation = 0;  // |w-h|/max(w,h) for kNotSquare
};

struct ValidationReport {
  std::size_t checked = 0;
  std::vector<AnnotationViolation> violations;

  bool conforming() const { return violations.empty(); }
};

inline constexpr double kDefaultSquarenessTol = 0.01;

// Flags annotations that are not valid boxes or whose aspect deviates from
// square by more than `squareness_tol` (relative to the longer side).
ValidationReport validate_annotations(std::span<const GroundTruth> gts,
                                      double squareness_tol = kDefaultSquarenessTol);

}  // namespace usmask
