#include "usmask/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "usmask/pgm.hpp"
#include "usmask/records.hpp"

namespace usmask {
namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Inclusive integer range.
  long range(long lo, long hi) { return lo + static_cast<long>(gen_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  bool chance(double p) { return uniform() < p; }

 private:
  std::mt19937_64 gen_;
};

std::uint8_t clamp_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

GrayImage make_texture(Rng& rng, int w, int h) {
  const double base = rng.uniform(40, 120), amp = rng.uniform(20, 60);
  const double fx = rng.uniform(0.02, 0.15), fy = rng.uniform(0.02, 0.15);
  const double px = rng.uniform(0, 6.283), py = rng.uniform(0, 6.283);
  GrayImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img.at(x, y) = clamp_u8(base + amp * std::sin(fx * x + px) * std::sin(fy * y + py) +
                              rng.uniform(-15, 15));
  return img;
}

double quantize(double c, bool on) { return on ? std::round(c * 1000.0) / 1000.0 : c; }

}  // namespace

SyntheticStream make_synthetic_stream(const SyntheticSpec& spec) {
  require(spec.width >= 16 && spec.height >= 16, "synthetic: frames must be at least 16x16");
  require(spec.min_span >= 1 && spec.max_span >= spec.min_span, "synthetic: bad span bounds");
  require(spec.max_gap >= 1, "synthetic: max_gap must be >= 1");
  Rng rng(spec.seed);
  SyntheticStream s;
  const int side = std::max(4, std::min(spec.width, spec.height) / 6);

  std::size_t gap_left = 0;
  while (s.frames.size() < spec.frames) {
    const auto span = static_cast<std::size_t>(
        rng.range(static_cast<long>(spec.min_span), static_cast<long>(spec.max_span)));
    const bool has_roi = rng.chance(spec.roi_fraction);
    const Category cat = rng.chance(0.5) ? Category::kTransverse : Category::kMidSagittal;
    const GrayImage texture = make_texture(rng, spec.width, spec.height);
    double rx = rng.uniform(0, spec.width - side), ry = rng.uniform(0, spec.height - side);
    double vx = rng.uniform(-0.5, 0.5), vy = rng.uniform(-0.5, 0.5);
    gap_left = 0;

    for (std::size_t k = 0; k < span && s.frames.size() < spec.frames; ++k) {
      const auto index = static_cast<FrameIndex>(s.frames.size());
      GrayImage frame = texture;
      for (auto& px : frame.data) px = clamp_u8(px + rng.uniform(-spec.noise, spec.noise));

      std::vector<Detection> dets;
      BBox roi_box{};
      if (has_roi) {
        rx = std::clamp(rx + vx, 0.0, double(spec.width - side));
        ry = std::clamp(ry + vy, 0.0, double(spec.height - side));
        const int ix = static_cast<int>(rx), iy = static_cast<int>(ry);
        for (int y = iy; y < iy + side; ++y)
          for (int x = ix; x < ix + side; ++x) frame.at(x, y) = 230;
        roi_box = {double(ix), double(iy), double(ix + side), double(iy + side)};

        if (gap_left == 0 && rng.chance(spec.dropout_rate))
          gap_left = static_cast<std::size_t>(rng.range(1, static_cast<long>(spec.max_gap)));
        if (gap_left > 0) {
          --gap_left;
        } else {
          const double j = rng.uniform(-1, 1);
          dets.push_back({index,
                          {roi_box.x_min + j, roi_box.y_min + j, roi_box.x_max + j, roi_box.y_max + j},
                          cat,
                          quantize(rng.uniform(0.4, 1.0), spec.quantize_conf)});
        }
      }
      if (rng.chance(0.05)) {
        const double x0 = rng.uniform(0, spec.width - side), y0 = rng.uniform(0, spec.height - side);
        dets.push_back({index, {x0, y0, x0 + side, y0 + side},
                        rng.chance(0.5) ? Category::kTransverse : Category::kMidSagittal,
                        quantize(rng.uniform(0.05, 0.3), spec.quantize_conf)});
      }
      s.frames.push_back(std::move(frame));
      s.detections.push_back(std::move(dets));
      s.roi.push_back(has_roi);
      s.roi_boxes.push_back(roi_box);
      s.roi_categories.push_back(cat);
    }
  }
  return s;
}

SyntheticStream make_gap_fixture(std::size_t total, std::size_t gap_start, std::size_t gap_len,
                                 int width, int height) {
  Rng rng(7);
  const GrayImage texture = make_texture(rng, width, height);
  const BBox box{width / 4.0, height / 4.0, width / 2.0, height / 2.0};
  SyntheticStream s;
  for (std::size_t i = 0; i < total; ++i) {
    const auto index = static_cast<FrameIndex>(i);
    s.frames.push_back(texture);
    s.roi.push_back(true);
    s.roi_boxes.push_back(box);
    s.roi_categories.push_back(Category::kTransverse);
    std::vector<Detection> dets;
    if (i < gap_start || i >= gap_start + gap_len)
      dets.push_back({index, box, Category::kTransverse, 0.9});
    s.detections.push_back(std::move(dets));
  }
  return s;
}

void write_synthetic_stream(const SyntheticStream& s, const std::filesystem::path& frames_out,
                            bool raw, const std::filesystem::path& predictions_out,
                            const std::filesystem::path& roi_out) {
  if (!frames_out.empty() && !s.frames.empty()) {
    if (raw) {
      RawStreamWriter w(frames_out, s.frames.front().width, s.frames.front().height);
      for (const auto& f : s.frames) w.write(f);
    } else {
      std::filesystem::create_directories(frames_out);
      char name[32];
      for (std::size_t i = 0; i < s.frames.size(); ++i) {
        std::snprintf(name, sizeof name, "frame_%06zu.pgm", i);
        write_pgm(frames_out / name, s.frames[i]);
      }
    }
  }
  if (!predictions_out.empty()) {
    DetectionSource src;
    for (std::size_t i = 0; i < s.detections.size(); ++i) {
      src.touch(static_cast<FrameIndex>(i));
      for (const auto& d : s.detections[i]) src.add(d);
    }
    std::ofstream out(predictions_out);
    if (!out) throw Error(ErrorCode::kIo, "cannot create " + predictions_out.string());
    write_predictions(out, src);
  }
  if (!roi_out.empty()) {
    GroundTruthSet gts;
    for (std::size_t i = 0; i < s.roi.size(); ++i) {
      gts.frames.insert(static_cast<FrameIndex>(i));
      if (s.roi[i]) gts.boxes.push_back({static_cast<FrameIndex>(i), s.roi_boxes[i], s.roi_categories[i]});
    }
    std::ofstream out(roi_out);
    if (!out) throw Error(ErrorCode::kIo, "cannot create " + roi_out.string());
    write_ground_truth(out, gts);
  }
}

}  // namespace usmask
