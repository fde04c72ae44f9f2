#include <random>

#include "doctest.h"
#include "usmask/synthetic.hpp"
#include "usmask/temporal.hpp"

using namespace usmask;

namespace {

HoldConfig config(HoldMode mode, int n, double tau = 0.85) {
  HoldConfig c;
  c.mode = mode;
  c.hold_frames = n;
  c.ssim_threshold = tau;
  c.ssim_params.downsample = 1;
  return c;
}

std::vector<DecisionSource> sources(const std::vector<MaskDecision>& d) {
  std::vector<DecisionSource> s;
  for (const auto& x : d) s.push_back(x.source);
  return s;
}

// Noise frames: every pair is dissimilar.
std::vector<GrayImage> noise_frames(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<GrayImage> out;
  for (std::size_t i = 0; i < n; ++i) {
    GrayImage g(32, 32);
    for (auto& p : g.data) p = static_cast<std::uint8_t>(rng());
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<std::vector<Detection>> detections_with_gaps(std::size_t n,
                                                         const std::vector<bool>& detected) {
  std::vector<std::vector<Detection>> out(n);
  for (std::size_t i = 0; i < n; ++i)
    if (detected[i])
      out[i].push_back({FrameIndex(i), {4, 4, 20, 20}, Category::kTransverse, 0.9});
  return out;
}

using S = DecisionSource;

}  // namespace

TEST_CASE("short gap is held") {
  const auto frames = noise_frames(13, 1);
  std::vector<bool> det(13, true);
  for (int i = 10; i < 13; ++i) det[i] = false;
  const auto d = run_stream(frames, detections_with_gaps(13, det), config(HoldMode::kBBoxHold, 5));
  for (int i = 0; i < 10; ++i) CHECK(d[i].source == S::kFresh);
  for (int i = 10; i < 13; ++i) {
    CHECK(d[i].source == S::kHeld);
    CHECK(d[i].boxes == d[9].boxes);
  }
}

TEST_CASE("gap of 8 with N = 5") {
  const auto fx = make_gap_fixture(20, 6, 8);
  SUBCASE("hold exhausts its budget") {
    const auto d = run_stream(fx.frames, fx.detections, config(HoldMode::kBBoxHold, 5));
    for (int i = 6; i < 11; ++i) CHECK(d[i].source == S::kHeld);
    for (int i = 11; i < 14; ++i) CHECK(d[i].source == S::kNone);
    CHECK(d[14].source == S::kFresh);
    const auto r = fn_rate_report(d, fx.roi);
    CHECK(r.raw_misses == 8);
    CHECK(r.post_misses == 3);
    CHECK(r.reduction_fraction == 0.625);
  }
  SUBCASE("identical frames are held by similarity") {
    const auto d = run_stream(fx.frames, fx.detections, config(HoldMode::kBBoxHoldSim, 5));
    for (int i = 6; i < 14; ++i) {
      CHECK(d[i].source == S::kHeldSim);
      REQUIRE(d[i].ssim.has_value());
      CHECK(*d[i].ssim == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(fn_rate_report(d, fx.roi).reduction_fraction == 1.0);
  }
}

TEST_CASE("fn_rate_report examples") {
  // 100 ROI frames, one gap of 8, N = 5.
  const auto fx = make_gap_fixture(100, 40, 8, 16, 16);
  const auto d = run_stream(fx.frames, fx.detections, config(HoldMode::kBBoxHold, 5));
  const auto r = fn_rate_report(d, fx.roi);
  CHECK(r.roi_frames == 100);
  CHECK(r.raw_fn_rate == doctest::Approx(0.08));
  CHECK(r.post_fn_rate == doctest::Approx(0.03));
  CHECK(r.reduction_fraction == 0.625);

  // Ten misses, all inside short gaps.
  std::vector<bool> det(100, true);
  for (int g : {5, 20, 33, 60, 90}) det[g] = det[g + 1] = false;
  const auto frames = noise_frames(100, 2);
  const auto d2 = run_stream(frames, detections_with_gaps(100, det), config(HoldMode::kBBoxHold, 5));
  const std::vector<bool> roi(100, true);
  const auto r2 = fn_rate_report(d2, roi);
  CHECK(r2.raw_fn_rate == doctest::Approx(0.10));
  CHECK(r2.post_fn_rate == 0.0);
  CHECK(r2.reduction_fraction == 1.0);

  // No misses.
  const auto d3 = run_stream(frames, detections_with_gaps(100, std::vector<bool>(100, true)),
                             config(HoldMode::kOff, 5));
  const auto r3 = fn_rate_report(d3, roi);
  CHECK(r3.raw_fn_rate == 0.0);
  CHECK(r3.post_fn_rate == 0.0);
  CHECK(r3.reduction_fraction == 0.0);

  CHECK_THROWS_AS(fn_rate_report(d3, std::vector<bool>(99, true)), Error);
}

TEST_CASE("run_stream basics") {
  CHECK(run_stream({}, {}, config(HoldMode::kBBoxHoldSim, 5)).empty());
  const auto frames = noise_frames(6, 3);
  const auto all = run_stream(frames, detections_with_gaps(6, std::vector<bool>(6, true)),
                              config(HoldMode::kBBoxHold, 5));
  for (const auto& d : all) CHECK(d.source == S::kFresh);
  CHECK_THROWS_AS(run_stream(frames, detections_with_gaps(5, std::vector<bool>(5, true)),
                             config(HoldMode::kOff, 5)),
                  Error);
}

TEST_CASE("nothing is held before the first detection") {
  const auto frames = noise_frames(4, 4);
  std::vector<bool> det = {false, false, true, false};
  for (auto mode : {HoldMode::kOff, HoldMode::kBBoxHold, HoldMode::kBBoxHoldSim}) {
    const auto d = run_stream(frames, detections_with_gaps(4, det), config(mode, 5));
    CHECK(d[0].source == S::kNone);
    CHECK(d[1].source == S::kNone);
    CHECK(!d[0].ssim.has_value());
    CHECK(d[2].source == S::kFresh);
  }
}

TEST_CASE("off mode never holds") {
  const auto fx = make_gap_fixture(12, 3, 4);
  const auto d = run_stream(fx.frames, fx.detections, config(HoldMode::kOff, 15));
  for (int i = 3; i < 7; ++i) {
    CHECK(d[i].source == S::kNone);
    CHECK(d[i].boxes.empty());
  }
}

TEST_CASE("similarity keeps the hold past N and the budget resumes afterwards") {
  // Frames 0..1 detected, 2..5 identical to frame 1, 6..9 unrelated noise.
  auto fx = make_gap_fixture(10, 2, 8, 32, 32);
  const auto noise = noise_frames(4, 9);
  for (int i = 0; i < 4; ++i) fx.frames[6 + i] = noise[i];
  const auto d = run_stream(fx.frames, fx.detections, config(HoldMode::kBBoxHoldSim, 2));
  for (int i = 2; i < 6; ++i) CHECK(d[i].source == S::kHeldSim);
  // The similar run did not consume the budget of 2.
  CHECK(d[6].source == S::kHeld);
  CHECK(d[7].source == S::kHeld);
  CHECK(d[8].source == S::kNone);
  CHECK(d[9].source == S::kNone);
}

TEST_CASE("frame size change is rejected") {
  HoldState st;
  const auto cfg = config(HoldMode::kBBoxHoldSim, 5);
  step(st, GrayImage(32, 32), {}, cfg);
  try {
    step(st, GrayImage(32, 31), {}, cfg);
    FAIL("expected StreamInconsistency");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kStreamInconsistency);
  }
}

TEST_CASE("fresh detections reset the counter and replace the hold") {
  HoldState st;
  const auto cfg = config(HoldMode::kBBoxHold, 3);
  const auto frames = noise_frames(3, 5);
  const std::vector<Detection> a = {{0, {1, 1, 5, 5}, Category::kTransverse, 0.9}};
  const std::vector<Detection> b = {{2, {8, 8, 12, 12}, Category::kMidSagittal, 0.5}};
  step(st, frames[0], a, cfg);
  step(st, frames[1], {}, cfg);
  CHECK(st.frames_since_detection == 1);
  const auto d = step(st, frames[2], b, cfg);
  CHECK(st.frames_since_detection == 0);
  REQUIRE(st.last_boxes.size() == 1);
  CHECK(st.last_boxes[0].bbox == b[0].bbox);
  CHECK(st.last_boxes[0].category == Category::kMidSagittal);
  CHECK(d.boxes == st.last_boxes);
  CHECK(st.reference_frame.has_value());
  CHECK(*st.reference_frame == frames[2]);
}

TEST_CASE("config validation") {
  HoldConfig c;
  CHECK(c.mode == HoldMode::kBBoxHoldSim);
  CHECK(c.hold_frames == 15);
  CHECK(c.ssim_threshold == 0.85);
  c.hold_frames = -1;
  CHECK_THROWS_AS(c.validate(), Error);
  c.hold_frames = 1;
  c.ssim_threshold = 1.5;
  CHECK_THROWS_AS(c.validate(), Error);
  for (auto m : {HoldMode::kOff, HoldMode::kBBoxHold, HoldMode::kBBoxHoldSim})
    CHECK(hold_mode_from_string(to_string(m)) == m);
  for (auto s : {S::kNone, S::kFresh, S::kHeld, S::kHeldSim})
    CHECK(decision_source_from_string(to_string(s)) == s);
}

TEST_CASE("random synthetic streams: dominance, N = 0, replay, determinism") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 25; ++trial) {
    SyntheticSpec spec;
    spec.width = 48;
    spec.height = 48;
    spec.frames = 80;
    spec.seed = rng();
    const auto s = make_synthetic_stream(spec);
    std::vector<std::vector<Detection>> kept(s.detections.size());
    for (std::size_t i = 0; i < kept.size(); ++i)
      for (const auto& det : s.detections[i])
        if (det.confidence >= 0.318) kept[i].push_back(det);

    const auto off = run_stream(s.frames, kept, config(HoldMode::kOff, 5));
    const auto hold = run_stream(s.frames, kept, config(HoldMode::kBBoxHold, 5));
    const auto sim = run_stream(s.frames, kept, config(HoldMode::kBBoxHoldSim, 5));
    for (std::size_t i = 0; i < s.frames.size(); ++i) {
      if (!s.roi[i]) continue;
      const bool raw_miss = off[i].source == S::kNone;
      const bool hold_miss = hold[i].source == S::kNone;
      const bool sim_miss = sim[i].source == S::kNone;
      CHECK(sim_miss <= hold_miss);
      CHECK(hold_miss <= raw_miss);
    }

    CHECK(sources(run_stream(s.frames, kept, config(HoldMode::kBBoxHold, 0))) == sources(off));

    // Held boxes are exactly those of the latest fresh decision.
    const MaskDecision* last_fresh = nullptr;
    for (const auto& d : sim) {
      if (d.source == S::kFresh) last_fresh = &d;
      if (d.source == S::kHeld || d.source == S::kHeldSim) {
        REQUIRE(last_fresh != nullptr);
        CHECK(d.boxes == last_fresh->boxes);
      }
      CHECK((d.source == S::kNone) == d.boxes.empty());
    }

    const auto again = run_stream(s.frames, kept, config(HoldMode::kBBoxHoldSim, 5));
    REQUIRE(again.size() == sim.size());
    for (std::size_t i = 0; i < sim.size(); ++i) {
      CHECK(again[i].source == sim[i].source);
      CHECK(again[i].ssim == sim[i].ssim);
    }

    // Step determinism from a copied state.
    HoldState st;
    const auto cfg = config(HoldMode::kBBoxHoldSim, 5);
    for (std::size_t i = 0; i + 1 < s.frames.size(); ++i) {
      HoldState copy = st;
      const auto d1 = step(st, s.frames[i], kept[i], cfg);
      const auto d2 = step(copy, s.frames[i], kept[i], cfg);
      CHECK(d1.source == d2.source);
      CHECK(d1.boxes == d2.boxes);
      CHECK(st.frames_since_detection == copy.frames_since_detection);
      CHECK(st.last_boxes == copy.last_boxes);
    }
  }
}
