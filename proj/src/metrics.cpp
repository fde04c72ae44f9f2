#include "usmask/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace usmask {
namespace {

struct FrameGroup {
  std::vector<std::size_t> dets;
  std::vector<std::size_t> gts;
};

std::map<FrameIndex, FrameGroup> group_by_frame(std::span<const Detection> dets,
                                                std::span<const GroundTruth> gts,
                                                double conf_thr) {
  std::map<FrameIndex, FrameGroup> frames;
  for (std::size_t i = 0; i < dets.size(); ++i)
    if (dets[i].confidence >= conf_thr) frames[dets[i].frame_index].dets.push_back(i);
  for (std::size_t i = 0; i < gts.size(); ++i) frames[gts[i].frame_index].gts.push_back(i);
  return frames;
}

// Greedy matching over index subsets of the full lists. Marks matched
// detections in `det_is_tp` (indexed like `dets`) when provided.
MatchResult match_indices(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                          std::span<const std::size_t> det_ids,
                          std::span<const std::size_t> gt_ids, double iou_thr) {
  std::vector<std::size_t> order(det_ids.begin(), det_ids.end());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].confidence > dets[b].confidence;
  });

  std::vector<bool> gt_taken(gt_ids.size(), false);
  MatchResult r;
  for (std::size_t d : order) {
    double best_iou = -1;
    std::size_t best = gt_ids.size();
    for (std::size_t k = 0; k < gt_ids.size(); ++k) {
      const GroundTruth& g = gts[gt_ids[k]];
      if (gt_taken[k] || g.category != dets[d].category) continue;
      const double v = iou(dets[d].bbox, g.bbox);
      if (v >= iou_thr && v > best_iou) {
        best_iou = v;
        best = k;
      }
    }
    if (best < gt_ids.size()) {
      gt_taken[best] = true;
      r.matched_pairs.push_back({d, gt_ids[best], best_iou});
    }
  }
  r.tp = r.matched_pairs.size();
  r.fp = det_ids.size() - r.tp;
  r.fn = gt_ids.size() - r.tp;
  return r;
}

void check_iou_thr(double iou_thr) {
  require(iou_thr > 0 && iou_thr <= 1, "IoU threshold must be in (0, 1]");
}

bool has_gt(std::span<const GroundTruth> gts, Category c) {
  return std::any_of(gts.begin(), gts.end(), [c](const GroundTruth& g) { return g.category == c; });
}

// Category mean over categories that have ground truth.
double category_mean_ap(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                        double iou_thr) {
  double sum = 0;
  int n = 0;
  for (Category c : kAllCategories) {
    if (!has_gt(gts, c)) continue;
    sum += average_precision(dets, gts, iou_thr, c);
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::kNoGroundTruth, "no ground truth in any category");
  return sum / n;
}

std::vector<Detection> filter_by_conf(std::span<const Detection> dets, double conf_thr) {
  std::vector<Detection> out;
  std::copy_if(dets.begin(), dets.end(), std::back_inserter(out),
               [conf_thr](const Detection& d) { return d.confidence >= conf_thr; });
  return out;
}

}  // namespace

MatchResult match_frame(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                        double iou_thr) {
  check_iou_thr(iou_thr);
  std::optional<FrameIndex> frame;
  auto check = [&frame](FrameIndex f) {
    if (!frame) frame = f;
    require(*frame == f, "match_frame: inputs span more than one frame");
  };
  for (const auto& d : dets) check(d.frame_index);
  for (const auto& g : gts) check(g.frame_index);

  std::vector<std::size_t> det_ids(dets.size()), gt_ids(gts.size());
  std::iota(det_ids.begin(), det_ids.end(), 0);
  std::iota(gt_ids.begin(), gt_ids.end(), 0);
  return match_indices(dets, gts, det_ids, gt_ids, iou_thr);
}

Prf precision_recall_f1(std::size_t tp, std::size_t fp, std::size_t fn) {
  Prf r;
  if (tp + fp > 0) r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (r.precision + r.recall > 0)
    r.f1 = 2 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

MatchResult match_all(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                      double conf_thr, double iou_thr) {
  check_iou_thr(iou_thr);
  MatchResult total;
  for (const auto& [frame, group] : group_by_frame(dets, gts, conf_thr)) {
    MatchResult r = match_indices(dets, gts, group.dets, group.gts, iou_thr);
    total.tp += r.tp;
    total.fp += r.fp;
    total.fn += r.fn;
    total.matched_pairs.insert(total.matched_pairs.end(), r.matched_pairs.begin(),
                               r.matched_pairs.end());
  }
  return total;
}

double average_precision(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                         double iou_thr, Category category) {
  check_iou_thr(iou_thr);
  std::size_t n_gt = 0;
  for (const auto& g : gts) n_gt += g.category == category;
  if (n_gt == 0)
    throw Error(ErrorCode::kNoGroundTruth,
                "no ground truth for category " + std::string(to_string(category)));

  // Per-frame greedy matching decides which detections are true positives.
  std::vector<bool> is_tp(dets.size(), false);
  std::map<FrameIndex, FrameGroup> frames;
  for (std::size_t i = 0; i < dets.size(); ++i)
    if (dets[i].category == category) frames[dets[i].frame_index].dets.push_back(i);
  for (std::size_t i = 0; i < gts.size(); ++i)
    if (gts[i].category == category) frames[gts[i].frame_index].gts.push_back(i);
  std::vector<std::size_t> ranked;
  for (const auto& [frame, group] : frames) {
    for (const auto& m : match_indices(dets, gts, group.dets, group.gts, iou_thr).matched_pairs)
      is_tp[m.det_id] = true;
  }
  for (std::size_t i = 0; i < dets.size(); ++i)
    if (dets[i].category == category) ranked.push_back(i);
  if (ranked.empty()) return 0.0;
  std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].confidence > dets[b].confidence;
  });

  const std::size_t n = ranked.size();
  std::vector<double> precision(n), recall(n);
  std::size_t tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    tp += is_tp[ranked[k]];
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(n_gt);
  }
  // Precision envelope: max precision at any later (higher-recall) point.
  for (std::size_t k = n - 1; k-- > 0;) precision[k] = std::max(precision[k], precision[k + 1]);

  double sum = 0;
  std::size_t k = 0;
  for (int r = 0; r <= 100; ++r) {
    const double level = r / 100.0;
    while (k < n && recall[k] < level) ++k;
    if (k == n) break;
    sum += precision[k];
  }
  return sum / 101.0;
}

double ap_50(std::span<const Detection> dets, std::span<const GroundTruth> gts) {
  return category_mean_ap(dets, gts, 0.5);
}

std::vector<double> ap_range_thresholds() {
  std::vector<double> t;
  for (int k = 50; k <= 95; k += 5) t.push_back(k / 100.0);
  return t;
}

double ap_range(std::span<const Detection> dets, std::span<const GroundTruth> gts) {
  const auto thresholds = ap_range_thresholds();
  double sum = 0;
  for (double t : thresholds) sum += category_mean_ap(dets, gts, t);
  return sum / static_cast<double>(thresholds.size());
}

double fppi(std::span<const Detection> dets, std::span<const GroundTruth> gts, double conf_thr,
            double iou_thr, std::size_t n_images) {
  require(n_images > 0, "fppi: n_images must be positive");
  return static_cast<double>(match_all(dets, gts, conf_thr, iou_thr).fp) /
         static_cast<double>(n_images);
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
  require(step > 0 && hi >= lo, "uniform_grid: need step > 0 and hi >= lo");
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> grid;
  grid.reserve(n + 1);
  for (long k = 0; k <= n; ++k) grid.push_back(std::round((lo + k * step) * 1e9) / 1e9);
  return grid;
}

SweepCurve sweep_confidence(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                            double iou_thr, std::span<const double> grid, std::size_t n_images) {
  require(!grid.empty(), "sweep_confidence: empty grid");
  require(n_images > 0, "sweep_confidence: n_images must be positive");
  check_iou_thr(iou_thr);
  for (double g : grid) require(g >= 0 && g <= 1, "sweep_confidence: grid values must be in [0,1]");

  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  SweepCurve curve;
  curve.points.resize(sorted.size());
  const auto n_points = static_cast<std::ptrdiff_t>(sorted.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n_points; ++i) {
    const MatchResult m = match_all(dets, gts, sorted[i], iou_thr);
    const Prf prf = precision_recall_f1(m.tp, m.fp, m.fn);
    curve.points[i] = {sorted[i], prf.precision, prf.recall, prf.f1,
                       static_cast<double>(m.fp) / static_cast<double>(n_images)};
  }

  curve.best_conf = curve.points.front().conf_thr;
  curve.best_f1 = curve.points.front().f1;
  for (const auto& p : curve.points) {
    if (p.f1 > curve.best_f1) {
      curve.best_f1 = p.f1;
      curve.best_conf = p.conf_thr;
    }
  }
  return curve;
}

EvalReport evaluate(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                    double conf_thr, double iou_thr, std::size_t n_images) {
  require(conf_thr >= 0 && conf_thr <= 1, "evaluate: conf_thr must be in [0,1]");
  require(n_images > 0, "evaluate: n_images must be positive");
  const std::vector<Detection> kept = filter_by_conf(dets, conf_thr);

  EvalReport r;
  r.conf_thr = conf_thr;
  r.iou_thr = iou_thr;
  r.ap_50 = ap_50(kept, gts);
  r.ap_50_95 = ap_range(kept, gts);
  const MatchResult m = match_all(kept, gts, 0.0, iou_thr);
  const Prf prf = precision_recall_f1(m.tp, m.fp, m.fn);
  r.precision = prf.precision;
  r.recall = prf.recall;
  r.f1 = prf.f1;
  r.tp = m.tp;
  r.fp = m.fp;
  r.fn = m.fn;
  r.fppi = static_cast<double>(m.fp) / static_cast<double>(n_images);
  return r;
}

}  // namespace usmask
