#include "usmask/records.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace usmask {
namespace {

using nlohmann::json;

[[noreturn]] void schema_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kSchema, "line " + std::to_string(line) + ": " + what);
}

BBox parse_bbox(const json& j, std::size_t line) {
  if (!j.is_array() || j.size() != 4) schema_error(line, "bbox must be [x0, y0, x1, y1]");
  BBox b;
  double* dst[4] = {&b.x_min, &b.y_min, &b.x_max, &b.y_max};
  for (int i = 0; i < 4; ++i) {
    if (!j[i].is_number()) schema_error(line, "bbox coordinate is not a number");
    *dst[i] = j[i].get<double>();
  }
  if (!b.valid()) schema_error(line, "bbox has non-positive area");
  return b;
}

Category parse_category(const json& j, std::size_t line) {
  if (!j.is_string()) schema_error(line, "category must be a string");
  const auto c = category_from_string(j.get<std::string>());
  if (!c) schema_error(line, "unknown category '" + j.get<std::string>() + "'");
  return *c;
}

// Calls fn(frame, detection_object, line) for every detection on every line.
template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); }))
      continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("frame") || !j["frame"].is_number_integer())
      schema_error(line, "record needs an integer \"frame\"");
    const auto frame = j["frame"].get<std::int64_t>();
    if (frame < 0 || frame > std::int64_t{0xFFFFFFFF}) schema_error(line, "frame out of range");
    const json dets = j.value("detections", json::array());
    if (!dets.is_array()) schema_error(line, "\"detections\" must be an array");
    fn(static_cast<FrameIndex>(frame), dets, line);
  }
}

json boxes_json(const std::vector<LabeledBox>& boxes) {
  json arr = json::array();
  for (const auto& b : boxes)
    arr.push_back({{"bbox", {b.bbox.x_min, b.bbox.y_min, b.bbox.x_max, b.bbox.y_max}},
                   {"category", to_string(b.category)}});
  return arr;
}

}  // namespace

void DetectionSource::add(const Detection& d) {
  by_frame_[d.frame_index].push_back(d);
  frames_.insert(d.frame_index);
}

const std::vector<Detection>& DetectionSource::at(FrameIndex frame) const {
  static const std::vector<Detection> kEmpty;
  const auto it = by_frame_.find(frame);
  return it == by_frame_.end() ? kEmpty : it->second;
}

std::vector<Detection> DetectionSource::all() const {
  std::vector<Detection> out;
  for (const auto& [f, v] : by_frame_) out.insert(out.end(), v.begin(), v.end());
  return out;
}

std::size_t DetectionSource::size() const {
  std::size_t n = 0;
  for (const auto& [f, v] : by_frame_) n += v.size();
  return n;
}

DetectionSource parse_predictions(std::istream& in) {
  DetectionSource src;
  for_each_record(in, [&](FrameIndex frame, const json& dets, std::size_t line) {
    src.touch(frame);
    for (const auto& d : dets) {
      if (!d.is_object()) schema_error(line, "detection must be an object");
      Detection det;
      det.frame_index = frame;
      det.bbox = parse_bbox(d.value("bbox", json()), line);
      det.category = parse_category(d.value("category", json()), line);
      if (!d.contains("conf") || !d["conf"].is_number()) schema_error(line, "detection needs \"conf\"");
      det.confidence = d["conf"].get<double>();
      if (!(det.confidence >= 0 && det.confidence <= 1)) schema_error(line, "conf outside [0,1]");
      src.add(det);
    }
  });
  return src;
}

DetectionSource load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return parse_predictions(in);
}

GroundTruthSet parse_ground_truth(std::istream& in) {
  GroundTruthSet set;
  for_each_record(in, [&](FrameIndex frame, const json& dets, std::size_t line) {
    set.frames.insert(frame);
    for (const auto& d : dets) {
      if (!d.is_object()) schema_error(line, "annotation must be an object");
      set.boxes.push_back({frame, parse_bbox(d.value("bbox", json()), line),
                           parse_category(d.value("category", json()), line)});
    }
  });
  return set;
}

GroundTruthSet load_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return parse_ground_truth(in);
}

void write_predictions(std::ostream& out, const DetectionSource& src) {
  for (FrameIndex f : src.frames()) {
    json dets = json::array();
    for (const auto& d : src.at(f))
      dets.push_back({{"bbox", {d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max}},
                      {"category", to_string(d.category)},
                      {"conf", d.confidence}});
    out << json{{"frame", f}, {"detections", dets}}.dump() << '\n';
  }
}

void write_ground_truth(std::ostream& out, const GroundTruthSet& gts) {
  std::map<FrameIndex, json> by_frame;
  for (FrameIndex f : gts.frames) by_frame[f] = json::array();
  for (const auto& g : gts.boxes)
    by_frame[g.frame_index].push_back(
        {{"bbox", {g.bbox.x_min, g.bbox.y_min, g.bbox.x_max, g.bbox.y_max}},
         {"category", to_string(g.category)}});
  for (const auto& [f, dets] : by_frame) out << json{{"frame", f}, {"detections", dets}}.dump() << '\n';
}

std::vector<GroundTruth> parse_yolo_lines(std::istream& in, FrameIndex frame, int width, int height) {
  require(width > 0 && height > 0, "import_yolo_txt: image dimensions must be positive");
  std::vector<GroundTruth> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    std::istringstream ls(text);
    std::string first;
    if (!(ls >> first)) continue;
    int code = 0;
    double cx, cy, w, h;
    try {
      std::size_t used = 0;
      code = std::stoi(first, &used);
      if (used != first.size()) throw std::invalid_argument(first);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": bad category field");
    }
    if (!(ls >> cx >> cy >> w >> h))
      throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": expected 5 fields");
    const auto cat = category_from_code(code);
    if (!cat) schema_error(line, "unknown category code " + std::to_string(code));
    for (double v : {cx, cy, w, h})
      if (!(v >= 0 && v <= 1)) schema_error(line, "normalized value outside [0,1]");
    const BBox b{(cx - w / 2) * width, (cy - h / 2) * height, (cx + w / 2) * width,
                 (cy + h / 2) * height};
    if (!b.valid()) schema_error(line, "box has zero extent");
    out.push_back({frame, b, *cat});
  }
  return out;
}

GroundTruthSet import_yolo_txt(const std::filesystem::path& dir, int width, int height) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::kIo, "not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  GroundTruthSet set;
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::ifstream in(files[i]);
    if (!in) throw Error(ErrorCode::kIo, "cannot open " + files[i].string());
    const auto frame = static_cast<FrameIndex>(i);
    set.frames.insert(frame);
    try {
      auto boxes = parse_yolo_lines(in, frame, width, height);
      set.boxes.insert(set.boxes.end(), boxes.begin(), boxes.end());
    } catch (const Error& e) {
      throw Error(e.code(), files[i].filename().string() + ": " + e.what());
    }
  }
  return set;
}

std::string report_json(const EvalReport& r) {
  const json j = {{"ap_50", r.ap_50},       {"ap_50_95", r.ap_50_95}, {"precision", r.precision},
                  {"recall", r.recall},     {"f1", r.f1},             {"fppi", r.fppi},
                  {"tp", r.tp},             {"fp", r.fp},             {"fn", r.fn},
                  {"conf_thr", r.conf_thr}, {"iou_thr", r.iou_thr}};
  return j.dump(2);
}

std::string report_csv(const EvalReport& r) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "ap_50,ap_50_95,precision,recall,f1,fppi,tp,fp,fn,conf_thr,iou_thr\n";
  os << r.ap_50 << ',' << r.ap_50_95 << ',' << r.precision << ',' << r.recall << ',' << r.f1
     << ',' << r.fppi << ',' << r.tp << ',' << r.fp << ',' << r.fn << ',' << r.conf_thr << ','
     << r.iou_thr << '\n';
  return os.str();
}

std::string sweep_csv(const SweepCurve& c) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "conf,precision,recall,f1,fppi\n";
  for (const auto& p : c.points)
    os << p.conf_thr << ',' << p.precision << ',' << p.recall << ',' << p.f1 << ',' << p.fppi << '\n';
  return os.str();
}

std::string sweep_json(const SweepCurve& c) {
  json pts = json::array();
  for (const auto& p : c.points)
    pts.push_back({{"conf", p.conf_thr}, {"precision", p.precision}, {"recall", p.recall},
                   {"f1", p.f1}, {"fppi", p.fppi}});
  return json{{"best_conf", c.best_conf}, {"best_f1", c.best_f1}, {"points", pts}}.dump(2);
}

std::string decision_json(FrameIndex frame, const MaskDecision& d) {
  json j = {{"frame", frame}, {"source", to_string(d.source)}, {"boxes", boxes_json(d.boxes)}};
  if (d.ssim) j["ssim"] = *d.ssim;
  return j.dump();
}

DecisionRecord parse_decision_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
  DecisionRecord r;
  try {
    r.frame = j.at("frame").get<FrameIndex>();
    const auto src = decision_source_from_string(j.at("source").get<std::string>());
    if (!src) throw Error(ErrorCode::kSchema, "unknown decision source");
    r.decision.source = *src;
    for (const auto& b : j.at("boxes"))
      r.decision.boxes.push_back({parse_bbox(b.at("bbox"), 1), parse_category(b.at("category"), 1)});
    if (j.contains("ssim")) r.decision.ssim = j["ssim"].get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema, e.what());
  }
  return r;
}

}  // namespace usmask
