#include "usmask/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>

#include "usmask/pgm.hpp"
#include "usmask/records.hpp"

namespace usmask {
namespace {

struct PixelRect {
  int x0, y0, x1, y1;  // half-open
};

PixelRect covered_pixels(const BBox& b, int width, int height) {
  return {std::clamp(static_cast<int>(std::floor(b.x_min)), 0, width),
          std::clamp(static_cast<int>(std::floor(b.y_min)), 0, height),
          std::clamp(static_cast<int>(std::ceil(b.x_max)), 0, width),
          std::clamp(static_cast<int>(std::ceil(b.y_max)), 0, height)};
}

}  // namespace

GrayImage render_mask(const GrayImage& frame, std::span<const BBox> boxes, const MaskStyle& style) {
  if (boxes.empty()) return frame;
  GrayImage out = frame;
  if (style.kind == MaskStyle::Kind::kSolid) {
    for (const BBox& b : boxes) {
      const PixelRect r = covered_pixels(b, frame.width, frame.height);
      for (int y = r.y0; y < r.y1; ++y)
        std::fill_n(out.data.begin() + static_cast<std::ptrdiff_t>(y) * frame.width + r.x0,
                    std::max(0, r.x1 - r.x0), std::uint8_t{0});
    }
    return out;
  }

  // Pixelate on a frame-aligned tile grid, averaging each tile over the
  // covered pixels only; re-applying the same boxes is then a no-op.
  require(style.block >= 1, "render_mask: pixelate block must be >= 1");
  std::vector<std::uint8_t> covered(frame.data.size(), 0);
  for (const BBox& b : boxes) {
    const PixelRect r = covered_pixels(b, frame.width, frame.height);
    for (int y = r.y0; y < r.y1; ++y)
      for (int x = r.x0; x < r.x1; ++x) covered[static_cast<std::size_t>(y) * frame.width + x] = 1;
  }
  const int bs = style.block;
  for (int ty = 0; ty < frame.height; ty += bs) {
    for (int tx = 0; tx < frame.width; tx += bs) {
      unsigned sum = 0, n = 0;
      const int ty1 = std::min(frame.height, ty + bs), tx1 = std::min(frame.width, tx + bs);
      for (int y = ty; y < ty1; ++y)
        for (int x = tx; x < tx1; ++x)
          if (covered[static_cast<std::size_t>(y) * frame.width + x]) {
            sum += frame.at(x, y);
            ++n;
          }
      if (n == 0) continue;
      const auto mean = static_cast<std::uint8_t>((sum + n / 2) / n);
      for (int y = ty; y < ty1; ++y)
        for (int x = tx; x < tx1; ++x)
          if (covered[static_cast<std::size_t>(y) * frame.width + x]) out.at(x, y) = mean;
    }
  }
  return out;
}

void MaskerConfig::validate() const {
  require(conf_thr >= 0 && conf_thr <= 1, "conf_thr must be in [0,1]");
  hold.validate();
}

FrameMasker::FrameMasker(MaskerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

void FrameMasker::reconfigure(const MaskerConfig& cfg) {
  cfg.validate();
  cfg_ = cfg;
}

FrameMasker::Output FrameMasker::process(const GrayImage& frame, std::span<const Detection> detections) {
  Output out;
  std::vector<Detection> fresh;
  for (const Detection& d : detections) {
    if (d.confidence < cfg_.conf_thr) continue;
    if (!d.bbox.valid()) {
      ++out.skipped_boxes;
      continue;
    }
    try {
      Detection c = d;
      c.bbox = clamp_to_frame(d.bbox, frame.width, frame.height);
      fresh.push_back(c);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyAfterClamp) throw;
      ++out.skipped_boxes;
    }
  }
  out.decision = step(state_, frame, fresh, cfg_.hold);
  std::vector<BBox> boxes;
  boxes.reserve(out.decision.boxes.size());
  for (const auto& b : out.decision.boxes) boxes.push_back(b.bbox);
  out.masked = render_mask(frame, boxes, cfg_.style);
  return out;
}

namespace {

std::optional<FrameIndex> trailing_number(const std::string& stem) {
  auto end = stem.find_last_of("0123456789");
  if (end == std::string::npos) return std::nullopt;
  auto begin = end;
  while (begin > 0 && std::isdigit(static_cast<unsigned char>(stem[begin - 1]))) --begin;
  const std::string digits = stem.substr(begin, end - begin + 1);
  if (digits.size() > 9) return std::nullopt;
  return static_cast<FrameIndex>(std::stoul(digits));
}

class PgmDirSource : public FrameSource {
 public:
  explicit PgmDirSource(const std::filesystem::path& dir) {
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      if (!e.is_regular_file() || e.path().extension() != ".pgm") continue;
      const auto idx = trailing_number(e.path().stem().string());
      if (!idx) throw Error(ErrorCode::kParse, "frame file without index: " + e.path().string());
      files_.push_back({*idx, e.path()});
    }
    std::sort(files_.begin(), files_.end());
    for (std::size_t i = 1; i < files_.size(); ++i)
      if (files_[i].first == files_[i - 1].first)
        throw Error(ErrorCode::kStreamInconsistency,
                    "duplicate frame index " + std::to_string(files_[i].first));
  }

  std::optional<Frame> next() override {
    if (pos_ >= files_.size()) return std::nullopt;
    const auto& [idx, path] = files_[pos_++];
    return Frame{idx, read_pgm(path), path.filename().string()};
  }

 private:
  std::vector<std::pair<FrameIndex, std::filesystem::path>> files_;
  std::size_t pos_ = 0;
};

class RawSource : public FrameSource {
 public:
  explicit RawSource(const std::filesystem::path& path) : reader_(path) {}

  std::optional<Frame> next() override {
    auto img = reader_.next();
    if (!img) return std::nullopt;
    return Frame{index_++, std::move(*img), {}};
  }

 private:
  RawStreamReader reader_;
  FrameIndex index_ = 0;
};

class PgmDirSink : public FrameSink {
 public:
  explicit PgmDirSink(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  void write(const Frame& f) override {
    const std::string name = f.name.empty() ? "frame_" + std::to_string(f.index) + ".pgm" : f.name;
    write_pgm(dir_ / name, f.image);
  }

 private:
  std::filesystem::path dir_;
};

class RawSink : public FrameSink {
 public:
  RawSink(const std::filesystem::path& path, int w, int h) : writer_(path, w, h) {}
  void write(const Frame& f) override { writer_.write(f.image); }

 private:
  RawStreamWriter writer_;
};

}  // namespace

std::unique_ptr<FrameSource> FrameSource::open(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) return std::make_unique<PgmDirSource>(path);
  if (is_raw_stream(path)) return std::make_unique<RawSource>(path);
  throw Error(ErrorCode::kIo, "not a PGM directory or raw frame stream: " + path.string());
}

std::unique_ptr<FrameSink> FrameSink::create(const std::filesystem::path& path, bool raw, int width,
                                             int height) {
  if (raw) return std::make_unique<RawSink>(path, width, height);
  return std::make_unique<PgmDirSink>(path);
}

RunSummary run(const RunConfig& cfg) {
  require(cfg.iou_thr > 0 && cfg.iou_thr <= 1, "iou_thr must be in (0,1]");
  const DetectionSource dets =
      cfg.predictions.empty() ? DetectionSource{} : load_predictions(cfg.predictions);
  std::optional<std::set<FrameIndex>> roi_frames;
  if (!cfg.roi_ground_truth.empty()) {
    roi_frames.emplace();
    for (const auto& g : load_ground_truth(cfg.roi_ground_truth).boxes) roi_frames->insert(g.frame_index);
  }

  auto source = FrameSource::open(cfg.frames_in);
  const bool raw = !std::filesystem::is_directory(cfg.frames_in);
  std::unique_ptr<FrameSink> sink;
  std::ofstream log;
  if (!cfg.decisions_out.empty()) {
    log.open(cfg.decisions_out);
    if (!log) throw Error(ErrorCode::kIo, "cannot create " + cfg.decisions_out.string());
  }

  FrameMasker masker(cfg.masker());
  RunSummary summary;
  std::vector<MaskDecision> decisions;
  std::vector<bool> roi;
  const auto t0 = std::chrono::steady_clock::now();
  while (auto frame = source->next()) {
    FrameMasker::Output out;
    try {
      out = masker.process(frame->image, dets.at(frame->index));
      if (!cfg.frames_out.empty()) {
        if (!sink) sink = FrameSink::create(cfg.frames_out, raw, frame->image.width, frame->image.height);
        sink->write({frame->index, out.masked, frame->name});
      }
    } catch (const Error& e) {
      throw Error(e.code(), "frame " + std::to_string(frame->index) + ": " + e.what());
    }
    if (out.skipped_boxes)
      std::cerr << "frame " << frame->index << ": skipped " << out.skipped_boxes
                << " box(es) outside the frame\n";
    if (log) log << decision_json(frame->index, out.decision) << '\n';
    ++summary.frames;
    ++summary.by_source[static_cast<std::size_t>(out.decision.source)];
    summary.skipped_boxes += out.skipped_boxes;
    if (roi_frames) {
      roi.push_back(roi_frames->count(frame->index) > 0);
      decisions.push_back(std::move(out.decision));
    }
  }
  summary.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  summary.fps = summary.seconds > 0 ? static_cast<double>(summary.frames) / summary.seconds : 0;
  if (roi_frames) summary.fn = fn_rate_report(decisions, roi);
  return summary;
}

}  // namespace usmask
