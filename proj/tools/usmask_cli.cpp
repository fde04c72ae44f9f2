// usmask: real-time ROI masking for ultrasound frame streams, plus the
// evaluation and preprocessing tools around it.

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "usmask/core.hpp"
#include "usmask/imgproc.hpp"
#include "usmask/metrics.hpp"
#include "usmask/pgm.hpp"
#include "usmask/pipeline.hpp"
#include "usmask/records.hpp"
#include "usmask/service.hpp"
#include "usmask/synthetic.hpp"

namespace fs = std::filesystem;
using namespace usmask;

namespace {

struct MaskerFlags {
  double conf = kDefaultConfThr;
  std::string mode = "hold_sim";
  int hold_frames = kDefaultHoldFrames;
  double ssim_threshold = kDefaultSsimThreshold;
  int downsample = 2;
  std::string style = "solid";
  int block = 8;

  void add_to(CLI::App* app) {
    app->add_option("--conf", conf, "Detection confidence threshold")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    app->add_option("--hold-mode", mode, "Hold rule: off | hold | hold_sim")
        ->capture_default_str()
        ->check(CLI::IsMember({"off", "hold", "hold_sim"}));
    app->add_option("--hold-frames", hold_frames, "Frames a box is held after the detector goes silent (N)")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    app->add_option("--ssim-threshold", ssim_threshold, "SSIM gate for hold_sim (tau)")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--ssim-downsample", downsample, "Block-mean downsampling before SSIM")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--style", style, "Mask style: solid | pixelate")
        ->capture_default_str()
        ->check(CLI::IsMember({"solid", "pixelate"}));
    app->add_option("--block", block, "Pixelate block size")->capture_default_str()->check(CLI::PositiveNumber);
  }

  MaskerConfig config() const {
    MaskerConfig c;
    c.conf_thr = conf;
    c.hold.mode = *hold_mode_from_string(mode);
    c.hold.hold_frames = hold_frames;
    c.hold.ssim_threshold = ssim_threshold;
    c.hold.ssim_params.downsample = downsample;
    c.style.kind = style == "pixelate" ? MaskStyle::Kind::kPixelate : MaskStyle::Kind::kSolid;
    c.style.block = block;
    return c;
  }
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot create " + path);
  out << text;
}

std::size_t count_images(const GroundTruthSet& gt, const DetectionSource& pred) {
  std::set<FrameIndex> frames = gt.frames;
  frames.insert(pred.frames().begin(), pred.frames().end());
  return frames.size();
}

GrayImage mask_to_image(const BinaryMask& m) {
  GrayImage img(m.width, m.height);
  for (std::size_t i = 0; i < m.bits.size(); ++i) img.data[i] = m.bits[i] ? 255 : 0;
  return img;
}

BinaryMask image_to_mask(const GrayImage& img) {
  BinaryMask m(img.width, img.height);
  for (std::size_t i = 0; i < img.data.size(); ++i) m.bits[i] = img.data[i] ? 1 : 0;
  return m;
}

MaskServer* g_server = nullptr;
extern "C" void on_signal(int) {
  if (g_server) g_server->interrupt();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real-time ROI masking for ultrasound frame streams"};
  app.require_subcommand(1);
  app.footer(
      "Defaults: confidence 0.318, IoU 0.6, hold mode hold_sim, hold frames N = 15,\n"
      "SSIM threshold tau = 0.85, SSIM downsample 2. Run '<subcommand> --help' for flags.");

  // mask
  RunConfig run_cfg;
  MaskerFlags mask_flags;
  std::string frames_in, preds, frames_out, decisions, roi;
  auto* mask = app.add_subcommand("mask", "Mask a frame stream using a predictions sidecar");
  mask->add_option("--frames", frames_in, "PGM directory or raw frame stream")->required();
  mask->add_option("--predictions", preds, "Predictions JSONL (frames not listed have no detections)");
  mask->add_option("--out", frames_out, "Masked output (same layout as --frames)");
  mask->add_option("--decisions", decisions, "Decision log JSONL");
  mask->add_option("--roi", roi, "ROI ground-truth JSONL; prints frame-level FN rates");
  mask->add_option("--iou", run_cfg.iou_thr, "IoU threshold for evaluation")->capture_default_str();
  mask_flags.add_to(mask);

  // eval
  std::string gt_path, pred_path, json_out, csv_out;
  double eval_conf = kDefaultConfThr, eval_iou = kDefaultIouThr;
  std::size_t n_images = 0;
  auto* eval = app.add_subcommand("eval", "Detection metrics at one operating point");
  eval->add_option("--gt", gt_path, "Ground-truth JSONL")->required();
  eval->add_option("--pred", pred_path, "Predictions JSONL")->required();
  eval->add_option("--conf", eval_conf, "Confidence threshold")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  eval->add_option("--iou", eval_iou, "IoU threshold")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  eval->add_option("--n-images", n_images, "Frames evaluated, negatives included (default: frames listed in either file)");
  eval->add_option("--json", json_out, "Report JSON path (default stdout)");
  eval->add_option("--csv", csv_out, "Report CSV path");

  // sweep
  double lo = 0.0, hi = 1.0, step = 0.001, sweep_iou = kDefaultIouThr;
  auto* sweep = app.add_subcommand("sweep", "F1 / precision / recall / FPPI versus confidence threshold");
  sweep->add_option("--gt", gt_path, "Ground-truth JSONL")->required();
  sweep->add_option("--pred", pred_path, "Predictions JSONL")->required();
  sweep->add_option("--iou", sweep_iou, "IoU threshold")->capture_default_str();
  sweep->add_option("--lo", lo, "Lowest threshold")->capture_default_str();
  sweep->add_option("--hi", hi, "Highest threshold")->capture_default_str();
  sweep->add_option("--step", step, "Grid step")->capture_default_str();
  sweep->add_option("--n-images", n_images, "Frames evaluated, negatives included");
  sweep->add_option("--csv", csv_out, "Curve CSV path (default stdout)");
  sweep->add_option("--json", json_out, "Curve JSON path");

  // preprocess
  std::string pre_in, pre_out, pre_mask, pre_mask_in;
  TextMaskParams text_params;
  int tophat = 7, recover = 3, low = -1, high = -1, max_iters = kDefaultInpaintIters;
  double tol = kDefaultInpaintTol;
  auto* pre = app.add_subcommand("preprocess", "Remove overlaid text/markers: top-hat mask + inpaint");
  pre->add_option("--in", pre_in, "Input PGM")->required();
  pre->add_option("--out", pre_out, "Inpainted PGM")->required();
  pre->add_option("--mask-out", pre_mask, "Write the text mask as PGM {0,255}");
  pre->add_option("--mask-in", pre_mask_in, "Use this PGM mask instead of computing one");
  pre->add_option("--tophat", tophat, "Top-hat square side")->capture_default_str();
  pre->add_option("--dilate", recover, "Edge-recovery dilation square side")->capture_default_str();
  pre->add_option("--low", low, "Hysteresis low level (default: above the Otsu split of the top-hat)");
  pre->add_option("--high", high, "Hysteresis high level (default: min(255, 2*low))");
  pre->add_option("--min-contrast", text_params.min_contrast, "Lowest top-hat level the derived low may take")
      ->capture_default_str();
  pre->add_option("--tol", tol, "Inpaint convergence tolerance")->capture_default_str();
  pre->add_option("--max-iters", max_iters, "Inpaint iteration cap")->capture_default_str();

  // validate
  std::string yolo_dir;
  int img_w = 384, img_h = 384;
  double sq_tol = kDefaultSquarenessTol;
  auto* validate = app.add_subcommand("validate", "Check annotations are valid square boxes");
  validate->add_option("--gt", gt_path, "Ground-truth JSONL");
  validate->add_option("--yolo", yolo_dir, "Directory of YOLO .txt annotations");
  validate->add_option("--width", img_w, "Image width for --yolo")->capture_default_str();
  validate->add_option("--height", img_h, "Image height for --yolo")->capture_default_str();
  validate->add_option("--tol", sq_tol, "Relative squareness tolerance |w-h|/max(w,h)")->capture_default_str();

  // import-yolo
  std::string import_out;
  auto* import = app.add_subcommand("import-yolo", "Convert YOLO .txt annotations to ground-truth JSONL");
  import->add_option("--dir", yolo_dir, "Directory of YOLO .txt files")->required();
  import->add_option("--width", img_w, "Image width")->capture_default_str();
  import->add_option("--height", img_h, "Image height")->capture_default_str();
  import->add_option("--out", import_out, "Output JSONL (default stdout)");

  // simulate
  SyntheticSpec sim;
  bool sim_raw = false;
  std::string sim_frames, sim_preds, sim_roi;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic stream with detector dropout");
  simulate->add_option("--out-frames", sim_frames, "Frame output (directory, or file with --raw)");
  simulate->add_flag("--raw", sim_raw, "Write a raw frame stream instead of PGM files");
  simulate->add_option("--predictions", sim_preds, "Predictions JSONL output");
  simulate->add_option("--roi", sim_roi, "ROI ground-truth JSONL output");
  simulate->add_option("--frames", sim.frames, "Number of frames")->capture_default_str();
  simulate->add_option("--width", sim.width, "Frame width")->capture_default_str();
  simulate->add_option("--height", sim.height, "Frame height")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
  simulate->add_option("--dropout", sim.dropout_rate, "Per-frame probability a detector gap starts")->capture_default_str();
  simulate->add_option("--max-gap", sim.max_gap, "Longest detector gap")->capture_default_str();

  // serve
  std::string host = "127.0.0.1";
  std::uint16_t port = 9000;
  MaskerFlags serve_flags;
  auto* serve = app.add_subcommand("serve", "Streaming masking service over TCP");
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--port", port, "TCP port")->capture_default_str();
  serve_flags.add_to(serve);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*mask) {
      run_cfg.frames_in = frames_in;
      run_cfg.predictions = preds;
      run_cfg.frames_out = frames_out;
      run_cfg.decisions_out = decisions;
      run_cfg.roi_ground_truth = roi;
      const MaskerConfig mc = mask_flags.config();
      run_cfg.conf_thr = mc.conf_thr;
      run_cfg.hold = mc.hold;
      run_cfg.style = mc.style;
      const RunSummary s = run(run_cfg);
      std::cout << "frames " << s.frames << "  fresh " << s.by_source[1] << "  held " << s.by_source[2]
                << "  held_sim " << s.by_source[3] << "  none " << s.by_source[0] << "\n"
                << "throughput " << std::fixed << std::setprecision(1) << s.fps << " frames/s\n";
      if (s.fn) {
        std::cout << std::setprecision(4) << "roi frames " << s.fn->roi_frames << "  raw FN rate "
                  << s.fn->raw_fn_rate << "  post FN rate " << s.fn->post_fn_rate << "  reduction "
                  << s.fn->reduction_fraction << "\n";
      }
    } else if (*eval) {
      const GroundTruthSet gt = load_ground_truth(gt_path);
      const DetectionSource pred = load_predictions(pred_path);
      const std::size_t n = n_images ? n_images : count_images(gt, pred);
      const EvalReport r = evaluate(pred.all(), gt.boxes, eval_conf, eval_iou, n);
      write_text(json_out, report_json(r));
      if (!csv_out.empty()) write_text(csv_out, report_csv(r));
    } else if (*sweep) {
      const GroundTruthSet gt = load_ground_truth(gt_path);
      const DetectionSource pred = load_predictions(pred_path);
      const std::size_t n = n_images ? n_images : count_images(gt, pred);
      const auto grid = uniform_grid(lo, hi, step);
      const SweepCurve c = sweep_confidence(pred.all(), gt.boxes, sweep_iou, grid, n);
      write_text(csv_out, sweep_csv(c));
      if (!json_out.empty()) write_text(json_out, sweep_json(c));
      std::cerr << "best F1 " << c.best_f1 << " at conf " << c.best_conf << "\n";
    } else if (*pre) {
      const GrayImage img = read_pgm(pre_in);
      BinaryMask m;
      if (!pre_mask_in.empty()) {
        m = image_to_mask(read_pgm(pre_mask_in));
      } else {
        text_params.tophat = {tophat, tophat};
        text_params.recover = {recover, recover};
        if (low >= 0) text_params.low = low;
        if (high >= 0) text_params.high = high;
        m = text_cleanup_mask(img, text_params);
      }
      if (!pre_mask.empty()) write_pgm(pre_mask, mask_to_image(m));
      write_pgm(pre_out, inpaint(img, m, tol, max_iters));
      std::cout << "masked " << m.count() << " of " << m.bits.size() << " pixels\n";
    } else if (*validate) {
      if (gt_path.empty() == yolo_dir.empty()) throw Error(ErrorCode::kPrecondition, "give exactly one of --gt or --yolo");
      const GroundTruthSet gt = gt_path.empty() ? import_yolo_txt(yolo_dir, img_w, img_h) : load_ground_truth(gt_path);
      const ValidationReport rep = validate_annotations(gt.boxes, sq_tol);
      for (const auto& v : rep.violations) {
        std::cout << "frame " << v.frame_index << " annotation " << v.index << ": "
                  << (v.kind == AnnotationViolation::Kind::kNotSquare ? "not square (deviation " + std::to_string(v.deviation) + ")"
                                                                      : std::string("invalid box"))
                  << "\n";
      }
      std::cout << rep.checked << " annotations checked, " << rep.violations.size() << " violation(s)\n";
      return rep.conforming() ? 0 : 1;
    } else if (*import) {
      const GroundTruthSet gt = import_yolo_txt(yolo_dir, img_w, img_h);
      std::ostringstream os;
      write_ground_truth(os, gt);
      write_text(import_out, os.str());
    } else if (*simulate) {
      const SyntheticStream s = make_synthetic_stream(sim);
      write_synthetic_stream(s, sim_frames, sim_raw, sim_preds, sim_roi);
      std::size_t roi_frames = 0;
      for (bool r : s.roi) roi_frames += r;
      std::cout << s.frames.size() << " frames, " << roi_frames << " with ROI\n";
    } else if (*serve) {
      MaskServer server(serve_flags.config());
      const auto bound = server.listen(host, port);
      std::cerr << "listening on " << host << ":" << bound << "\n";
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      server.serve();
      g_server = nullptr;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
