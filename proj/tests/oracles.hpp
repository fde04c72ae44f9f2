#pragma once

// Independent brute-force reference implementations used only by tests.
// None of these call into the library's metric / threshold code paths.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "usmask/core.hpp"
#include "usmask/image.hpp"

namespace oracle {

using usmask::BBox;
using usmask::Category;
using usmask::Detection;
using usmask::FrameIndex;
using usmask::GroundTruth;

inline double box_iou(const BBox& a, const BBox& b) {
  const double ix0 = std::max(a.x_min, b.x_min), ix1 = std::min(a.x_max, b.x_max);
  const double iy0 = std::max(a.y_min, b.y_min), iy1 = std::min(a.y_max, b.y_max);
  const double inter = (ix1 > ix0 && iy1 > iy0) ? (ix1 - ix0) * (iy1 - iy0) : 0.0;
  const double ua = (a.x_max - a.x_min) * (a.y_max - a.y_min);
  const double ub = (b.x_max - b.x_min) * (b.y_max - b.y_min);
  return inter / (ua + ub - inter);
}

// Visiting order: confidence descending, then input position.
inline std::vector<std::size_t> greedy_order(const std::vector<Detection>& dets,
                                             const std::vector<std::size_t>& ids) {
  std::vector<std::pair<double, std::size_t>> keyed;
  for (std::size_t id : ids) keyed.push_back({-dets[id].confidence, id});
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::size_t> out;
  for (auto& k : keyed) out.push_back(k.second);
  return out;
}

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

// Marks each detection TP/FP. Works frame by frame over all input.
inline std::vector<bool> tp_flags(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                                  double iou_thr, Counts* counts = nullptr) {
  std::set<FrameIndex> frames;
  for (auto& d : dets) frames.insert(d.frame_index);
  for (auto& g : gts) frames.insert(g.frame_index);
  std::vector<bool> flags(dets.size(), false);
  Counts c;
  for (FrameIndex f : frames) {
    std::vector<std::size_t> di, gi;
    for (std::size_t i = 0; i < dets.size(); ++i)
      if (dets[i].frame_index == f) di.push_back(i);
    for (std::size_t i = 0; i < gts.size(); ++i)
      if (gts[i].frame_index == f) gi.push_back(i);
    std::vector<bool> used(gts.size(), false);
    for (std::size_t d : greedy_order(dets, di)) {
      std::size_t best = SIZE_MAX;
      double best_v = 0;
      for (std::size_t g : gi) {  // ascending GT index: first max wins ties
        if (used[g] || gts[g].category != dets[d].category) continue;
        const double v = box_iou(dets[d].bbox, gts[g].bbox);
        if (v >= iou_thr && (best == SIZE_MAX || v > best_v)) {
          best = g;
          best_v = v;
        }
      }
      if (best != SIZE_MAX) {
        used[best] = true;
        flags[d] = true;
        ++c.tp;
      } else {
        ++c.fp;
      }
    }
    for (std::size_t g : gi) c.fn += !used[g];
  }
  if (counts) *counts = c;
  return flags;
}

inline std::vector<Detection> above(const std::vector<Detection>& dets, double conf) {
  std::vector<Detection> out;
  for (auto& d : dets)
    if (d.confidence >= conf) out.push_back(d);
  return out;
}

inline std::array<double, 3> prf(std::size_t tp, std::size_t fp, std::size_t fn) {
  const double p = tp + fp ? double(tp) / double(tp + fp) : 0.0;
  const double r = tp + fn ? double(tp) / double(tp + fn) : 0.0;
  const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  return {p, r, f};
}

// 101-point AP by scanning every ranked prefix for each recall level.
// Returns -1 when the category has no ground truth.
inline double ap(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts, double iou_thr,
                 Category cat) {
  std::vector<Detection> cd;
  std::vector<GroundTruth> cg;
  for (auto& d : dets)
    if (d.category == cat) cd.push_back(d);
  for (auto& g : gts)
    if (g.category == cat) cg.push_back(g);
  if (cg.empty()) return -1;
  const auto flags = tp_flags(cd, cg, iou_thr);
  std::vector<std::size_t> all(cd.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto order = greedy_order(cd, all);
  std::vector<double> prec, rec;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    tp += flags[order[k]];
    prec.push_back(double(tp) / double(k + 1));
    rec.push_back(double(tp) / double(cg.size()));
  }
  double sum = 0;
  for (int r = 0; r <= 100; ++r) {
    double best = 0;
    for (std::size_t k = 0; k < prec.size(); ++k)
      if (rec[k] >= r / 100.0) best = std::max(best, prec[k]);
    sum += best;
  }
  return sum / 101.0;
}

inline double mean_ap(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts, double iou_thr) {
  double s = 0;
  int n = 0;
  for (Category c : {Category::kTransverse, Category::kMidSagittal}) {
    const double v = ap(dets, gts, iou_thr, c);
    if (v >= 0) {
      s += v;
      ++n;
    }
  }
  return n ? s / n : -1;
}

inline double ap_range(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts) {
  double s = 0;
  for (int k = 0; k < 10; ++k) s += mean_ap(dets, gts, (50 + 5 * k) / 100.0);
  return s / 10;
}

struct Report {
  double ap50, ap5095, p, r, f1, fppi;
  Counts counts;
};

inline Report evaluate(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts, double conf,
                       double iou_thr, std::size_t n_images) {
  const auto kept = above(dets, conf);
  Report rep{};
  rep.ap50 = mean_ap(kept, gts, 0.5);
  rep.ap5095 = ap_range(kept, gts);
  tp_flags(kept, gts, iou_thr, &rep.counts);
  const auto v = prf(rep.counts.tp, rep.counts.fp, rep.counts.fn);
  rep.p = v[0];
  rep.r = v[1];
  rep.f1 = v[2];
  rep.fppi = double(rep.counts.fp) / double(n_images);
  return rep;
}

// Exhaustive Otsu: recomputes both classes from the histogram for every t.
inline int otsu(const std::array<std::uint64_t, 256>& hist) {
  std::uint64_t total = 0;
  for (auto h : hist) total += h;
  int best_t = -1;
  double best = -1;
  for (int t = 0; t < 255; ++t) {
    std::uint64_t n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (int v = 0; v < 256; ++v) {
      if (v <= t) {
        n0 += hist[v];
        s0 += hist[v] * std::uint64_t(v);
      } else {
        n1 += hist[v];
        s1 += hist[v] * std::uint64_t(v);
      }
    }
    if (n0 == 0 || n1 == 0) continue;
    const double w0 = double(n0) / double(total), w1 = double(n1) / double(total);
    const double m0 = double(s0) / double(n0), m1 = double(s1) / double(n1);
    const double var = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (var > best) {
      best = var;
      best_t = t;
    }
  }
  return best_t;
}

// Random metric instance: <= max_frames frames, <= max_boxes GT and
// detections per frame, at least one GT overall.
struct Instance {
  std::vector<Detection> dets;
  std::vector<GroundTruth> gts;
  std::size_t n_images = 0;
};

inline Instance random_instance(std::mt19937_64& rng, int max_frames = 5, int max_boxes = 4) {
  std::uniform_int_distribution<int> nf(1, max_frames), nb(0, max_boxes), cat(0, 1), coarse(0, 3);
  std::uniform_real_distribution<double> pos(0, 40), size(4, 20), jitter(-6, 6), conf(0, 1);
  Instance in;
  const int frames = nf(rng);
  in.n_images = static_cast<std::size_t>(frames + coarse(rng));  // some negative-only frames
  for (int f = 0; f < frames; ++f) {
    const int ng = nb(rng), nd = nb(rng);
    std::vector<GroundTruth> frame_gts;
    for (int i = 0; i < ng; ++i) {
      const double x = pos(rng), y = pos(rng), s = size(rng);
      frame_gts.push_back({FrameIndex(f), {x, y, x + s, y + s}, Category(cat(rng))});
    }
    for (int i = 0; i < nd; ++i) {
      BBox b;
      if (!frame_gts.empty() && coarse(rng) != 0) {
        const auto& g = frame_gts[std::uniform_int_distribution<std::size_t>(0, frame_gts.size() - 1)(rng)].bbox;
        b = {g.x_min + jitter(rng) * 0.5, g.y_min + jitter(rng) * 0.5, g.x_max + jitter(rng) * 0.5,
             g.y_max + jitter(rng) * 0.5};
        if (!(b.x_min < b.x_max && b.y_min < b.y_max)) b = g;
      } else {
        const double x = pos(rng), y = pos(rng), s = size(rng);
        b = {x, y, x + s, y + s};
      }
      // Coarse confidences create ties that exercise the ordering rule.
      double c = conf(rng);
      if (coarse(rng) == 0) c = std::round(c * 4) / 4;
      in.dets.push_back({FrameIndex(f), b, Category(cat(rng)), c});
    }
    in.gts.insert(in.gts.end(), frame_gts.begin(), frame_gts.end());
  }
  if (in.gts.empty()) in.gts.push_back({0, {1, 1, 11, 11}, Category::kTransverse});
  return in;
}

}  // namespace oracle
