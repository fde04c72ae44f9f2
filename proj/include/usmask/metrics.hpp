#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "usmask/core.hpp"

namespace usmask {

struct MatchPair {
  std::size_t det_id = 0;  // index into the detection list passed in
  std::size_t gt_id = 0;   // index into the ground-truth list passed in
  double iou = 0;
};

struct MatchResult {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::vector<MatchPair> matched_pairs;
};

// Greedy matching on one frame. Detections are visited by descending
// confidence (input order on ties); each takes the unmatched same-category GT
// with the highest IoU >= iou_thr, lowest GT index on IoU ties.
MatchResult match_frame(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                        double iou_thr);

struct Prf {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

Prf precision_recall_f1(std::size_t tp, std::size_t fp, std::size_t fn);

// 101-point interpolated AP for one category over all frames.
// Throws kNoGroundTruth if the category has no ground truth.
double average_precision(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                         double iou_thr, Category category);

// Category-mean AP at IoU 0.5.
double ap_50(std::span<const Detection> dets, std::span<const GroundTruth> gts);

// Mean over IoU thresholds 0.50, 0.55, ..., 0.95 of the category-mean AP.
// Categories with no ground truth are left out of the category mean; throws
// kNoGroundTruth when no category has any.
double ap_range(std::span<const Detection> dets, std::span<const GroundTruth> gts);

// IoU thresholds used by ap_range, exactly k/100 for k = 50, 55, ..., 95.
std::vector<double> ap_range_thresholds();

// Total counts after keeping detections with confidence >= conf_thr and
// matching frame by frame.
MatchResult match_all(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                      double conf_thr, double iou_thr);

// False positives per evaluated frame; n_images includes negative frames.
double fppi(std::span<const Detection> dets, std::span<const GroundTruth> gts, double conf_thr,
            double iou_thr, std::size_t n_images);

struct SweepPoint {
  double conf_thr = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double fppi = 0;
};

struct SweepCurve {
  std::vector<SweepPoint> points;  // ascending conf_thr
  double best_conf = 0;            // lowest threshold attaining best_f1
  double best_f1 = 0;
};

SweepCurve sweep_confidence(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                            double iou_thr, std::span<const double> grid, std::size_t n_images);

// Evenly spaced grid lo, lo+step, ..., hi (inclusive, computed as lo + k*step).
std::vector<double> uniform_grid(double lo, double hi, double step);

struct EvalReport {
  double ap_50 = 0;
  double ap_50_95 = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double fppi = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double conf_thr = 0;
  double iou_thr = 0;
};

// Full operating-point report. AP figures use the detections that pass
// conf_thr; P/R/F1/FPPI are micro-aggregated at (conf_thr, iou_thr).
EvalReport evaluate(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                    double conf_thr, double iou_thr, std::size_t n_images);

}  // namespace usmask
