#pragma once

// Sidecar file formats: JSON Lines predictions / ground truth, YOLO text
// annotations, evaluation reports and decision logs.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "usmask/core.hpp"
#include "usmask/metrics.hpp"
#include "usmask/temporal.hpp"

namespace usmask {

// Per-frame detections. Frames the file never mentions read as empty.
class DetectionSource {
 public:
  void add(const Detection& d);
  void touch(FrameIndex frame) { frames_.insert(frame); }

  const std::vector<Detection>& at(FrameIndex frame) const;
  std::vector<Detection> all() const;
  const std::set<FrameIndex>& frames() const { return frames_; }
  std::size_t size() const;

 private:
  std::map<FrameIndex, std::vector<Detection>> by_frame_;
  std::set<FrameIndex> frames_;
};

struct GroundTruthSet {
  std::vector<GroundTruth> boxes;
  std::set<FrameIndex> frames;  // includes frames with no boxes (negatives)
};

// `{"frame": n, "detections": [{"bbox": [x0,y0,x1,y1], "category": ..., "conf": c}]}`
// per line. Malformed JSON throws kParse, bad fields kSchema; both name the
// 1-based line number.
DetectionSource parse_predictions(std::istream& in);
DetectionSource load_predictions(const std::filesystem::path& path);

// Same schema with "conf" omitted.
GroundTruthSet parse_ground_truth(std::istream& in);
GroundTruthSet load_ground_truth(const std::filesystem::path& path);

void write_predictions(std::ostream& out, const DetectionSource& src);
void write_ground_truth(std::ostream& out, const GroundTruthSet& gts);

// YOLO lines "category cx cy w h", normalized. One file per image; files are
// taken in lexicographic order and numbered from 0.
std::vector<GroundTruth> parse_yolo_lines(std::istream& in, FrameIndex frame, int width, int height);
GroundTruthSet import_yolo_txt(const std::filesystem::path& dir, int width, int height);

std::string report_json(const EvalReport& r);
std::string report_csv(const EvalReport& r);
std::string sweep_csv(const SweepCurve& c);
std::string sweep_json(const SweepCurve& c);

// One JSON Lines record of the decision log.
std::string decision_json(FrameIndex frame, const MaskDecision& d);

struct DecisionRecord {
  FrameIndex frame = 0;
  MaskDecision decision;
};
DecisionRecord parse_decision_json(const std::string& line);

}  // namespace usmask
