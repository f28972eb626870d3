// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "oracles.hpp"
#include "phyot/annotations.hpp"
#include "phyot/evaluation.hpp"
#include "phyot/flow_analysis.hpp"
#include "phyot/image.hpp"
#include "phyot/kalman.hpp"
#include "phyot/optical_flow.hpp"
#include "phyot/simulator.hpp"
#include "phyot/tracker.hpp"

using namespace phyot;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

// 1. Recursive filter vs dense batch least squares.
Outcome kalman_oracle() {
  std::mt19937_64 rng(1001);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix4 q = oracle::random_spd(rng, 0.01, 2.0);
    const Matrix4 r = oracle::random_spd(rng, 0.05, 5.0);
    const Matrix4 p0 = oracle::random_spd(rng, 0.5, 20.0);
    const Vector4 m0(g(rng) * 10, g(rng) * 10, g(rng), g(rng));
    const MotionModel model(q, r);
    std::vector<Eigen::Vector2d> accels;
    std::vector<Eigen::Vector4d> zs;
    StateEstimate e{StateVector::from_eigen(m0), p0, 0};
    for (int k = 0; k < 5; ++k) {
      accels.emplace_back(0.3 * g(rng), 0.3 * g(rng));
      zs.emplace_back(g(rng) * 10, g(rng) * 10, g(rng), g(rng));
      e = step(e, {accels.back()(0), accels.back()(1)}, StateVector::from_eigen(zs.back()), model);
    }
    const Vector4 batch = oracle::batch_map_final_state(m0, p0, accels, zs, q, r);
    worst = std::max(worst, (e.state.to_eigen() - batch).norm() / std::max(1e-12, batch.norm()));
  }
  return {worst <= 1e-6, fmt("max relative error %.2e over 20 problems", worst)};
}

// 2. Q = R = 0 with exact observations follows truth.
Outcome noise_free() {
  const MotionModel model(Matrix4::Zero(), Matrix4::Zero());
  std::mt19937_64 rng(1002);
  std::uniform_real_distribution<double> ua(-0.3, 0.3);
  StateVector truth{10.0, -4.0, 1.25, -0.5};
  StateEstimate e{truth, Matrix4::Zero(), 0};
  double worst = 0.0;
  for (int t = 1; t <= 100; ++t) {
    const Acceleration a{ua(rng), ua(rng)};
    truth = {truth.px + truth.vx, truth.py + truth.vy, truth.vx + a.ax, truth.vy + a.ay};
    e = step(e, a, truth, model);
    worst = std::max(worst, (e.state.to_eigen() - truth.to_eigen()).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-9, fmt("max per-step state error %.2e over 100 frames", worst)};
}

// 3. Covariance stays symmetric and PSD under fuzzing.
Outcome covariance_health() {
  std::mt19937_64 rng(1003);
  std::normal_distribution<double> g(0.0, 5.0);
  std::bernoulli_distribution observed(0.75);
  StateEstimate e{{0, 0, 0, 0}, 10.0 * Matrix4::Identity(), 0};
  double worst_sym = 0.0, worst_eig = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 1000; ++i) {
    const MotionModel model(oracle::random_spd(rng, 1e-5, 3.0), oracle::random_spd(rng, 1e-4, 10.0));
    std::optional<StateVector> z;
    if (observed(rng)) z = StateVector{g(rng), g(rng), g(rng), g(rng)};
    e = step(e, {0.05 * g(rng), 0.05 * g(rng)}, z, model);
    const double scale = std::max(1e-300, e.cov.cwiseAbs().maxCoeff());
    worst_sym = std::max(worst_sym, symmetry_error(e.cov) / scale);
    worst_eig = std::min(worst_eig, min_eigenvalue(e.cov) / e.cov.trace());
  }
  return {worst_sym <= 1e-9 && worst_eig >= -1e-9,
          fmt("max relative asymmetry %.2e, min eigenvalue/trace %.2e", worst_sym, worst_eig)};
}

// 4. Dense flow on textured translations.
Outcome flow_recovery() {
  std::mt19937_64 rng(1004);
  std::uniform_real_distribution<double> radius(0.0, 2.0), angle(0.0, 2.0 * std::numbers::pi);
  double total = 0.0, worst = 0.0;
  for (int i = 0; i < 30; ++i) {
    const double r = radius(rng), th = angle(rng);
    const double dx = r * std::cos(th), dy = r * std::sin(th);
    const oracle::BlobField field(5000 + static_cast<std::uint64_t>(i), 64.0);
    const FlowField f = estimate_flow(field.render(64, 64), field.render(64, 64, dx, dy));
    double sum = 0.0;
    int n = 0;
    for (int y = 8; y < 56; ++y) {
      for (int x = 8; x < 56; ++x, ++n) sum += std::hypot(f.u(x, y) - dx, f.v(x, y) - dy);
    }
    total += sum / n;
    worst = std::max(worst, sum / n);
  }
  const double mean = total / 30.0;
  return {mean <= 0.25, fmt("mean interior EPE %.3f px (worst sequence %.3f)", mean, worst)};
}

// 5. Acceleration from flow pairs of an accelerating object.
Outcome acceleration_recovery() {
  std::mt19937_64 rng(1005);
  std::uniform_real_distribution<double> uv(-1.5, 1.5), ua(-0.4, 0.4), up(16.0, 24.0);
  double worst = 0.0;

  // Exact flow pairs: a rigid 16x16 object over a static background.
  const int w = 48, h = 48;
  for (int trial = 0; trial < 200; ++trial) {
    const double px = up(rng), py = up(rng), vx = uv(rng), vy = uv(rng), ax = ua(rng), ay = ua(rng);
    auto object_flow = [&](double ox, double oy, double fu, double fv) {
      FlowField f(w, h);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (x + 0.5 >= ox && x + 0.5 < ox + 16 && y + 0.5 >= oy && y + 0.5 < oy + 16) {
            f.u(x, y) = fu;
            f.v(x, y) = fv;
          }
        }
      }
      return f;
    };
    const FlowField current = object_flow(px, py, vx, vy);
    const FlowField next = object_flow(px + vx, py + vy, vx + ax, vy + ay);
    // Bilinear samples near the object edge mix in background; keep the interior.
    AttentionMask mask = attention_mask(current, {vx, vy}, TurnConstraint{});
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const bool interior = x + 0.5 >= px + 2 && x + 0.5 < px + 14 && y + 0.5 >= py + 2 && y + 0.5 < py + 14;
        if (!interior) mask.set(x, y, false);
      }
    }
    const Acceleration est = estimate_acceleration(current, next, mask);
    worst = std::max(worst, std::hypot(est.ax - ax, est.ay - ay));
  }

  // Flow estimated from rendered frames of a textured plane under constant acceleration.
  double worst_images = 0.0;
  for (int s = 0; s < 8; ++s) {
    const oracle::BlobField field(7000 + static_cast<std::uint64_t>(s), 64.0);
    const double ax = ua(rng) * 0.5, ay = ua(rng) * 0.5;
    double px = 0.0, py = 0.0, vx = uv(rng) * 0.6, vy = uv(rng) * 0.6;
    std::vector<GrayImage> frames;
    for (int t = 0; t < 3; ++t) {
      frames.push_back(field.render(64, 64, px, py));
      px += vx;
      py += vy;
      vx += ax;
      vy += ay;
    }
    const FlowField f01 = estimate_flow(frames[0], frames[1]);
    const FlowField f12 = estimate_flow(frames[1], frames[2]);
    const Acceleration est = estimate_acceleration(f01, f12, rectangle_mask(64, 64, 12, 12, 52, 52));
    worst_images = std::max(worst_images, std::hypot(est.ax - ax, est.ay - ay));
  }
  return {worst <= 0.1 && worst_images <= 0.1,
          fmt("max error %.2e px/frame^2 on exact flow pairs, %.3f on estimated flow", worst, worst_images)};
}

// 6. Mask equals brute-force evaluation.
Outcome mask_enumeration() {
  std::mt19937_64 rng(1006);
  std::uniform_int_distribution<int> dim(1, 8);
  std::uniform_real_distribution<double> uf(-3.0, 3.0), uk(0.0, 1.0), ufl(0.0, 1.0);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int w = dim(rng), h = dim(rng);
    FlowField f(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        f.u(x, y) = uf(rng);
        f.v(x, y) = uf(rng);
      }
    }
    const Velocity2 prior{uf(rng), uf(rng)};
    const TurnConstraint c{uk(rng), ufl(rng)};
    const std::vector<double> u(f.u.values().begin(), f.u.values().end());
    const std::vector<double> v(f.v.values().begin(), f.v.values().end());
    if (attention_mask(f, prior, c).bits != oracle::brute_force_mask(u, v, prior.vx, prior.vy, c.angle_fraction, c.floor)) {
      ++mismatches;
    }
  }
  return {mismatches == 0, fmt("%.0f mismatching grids of 100", mismatches)};
}

// 7. Fused tracker vs raw sensor on the benchmark suite.
Outcome suite_analog() {
  const SuiteOptions options;
  const auto suite = make_benchmark_suite(20, 1, options);
  const auto trackers = benchmark_trackers(options.noise);
  const EvalReport report = run_ope(suite, trackers);
  const TrackerResult* raw = nullptr;
  const TrackerResult* fused = nullptr;
  for (const auto& t : report.trackers) {
    if (t.tracker == "raw") raw = &t;
    if (t.tracker == "phyot") fused = &t;
  }
  if (!raw || !fused || report.any_crashed()) return {false, "tracker missing or crashed"};
  int wins = 0;
  for (std::size_t s = 0; s < suite.size(); ++s) wins += fused->sequences[s].auc >= raw->sequences[s].auc;
  const double ratio = fused->mean_sequence_auc() / raw->mean_sequence_auc();
  const double pooled_ratio = fused->auc / raw->auc;
  return {ratio >= 1.10 && pooled_ratio >= 1.10 && wins >= 18,
          fmt("mean AUC %.3f vs %.3f (x%.3f, pooled x%.3f)", fused->mean_sequence_auc(),
              raw->mean_sequence_auc(), ratio, pooled_ratio) +
              fmt(", fused >= raw on %.0f/20", wins)};
}

// 8. Bridging a 5-frame sensor gap on constant-velocity motion.
Outcome occlusion_extrapolation() {
  constexpr int kGapFirst = 15, kGapLast = 19;
  double worst_fused = 1.0, worst_hold = 0.0;
  int cases = 0;
  for (double speed : {1.5, 1.75, 2.0}) {
    for (double heading : {0.0, 1.9, 3.6, 5.1}) {
      ScenarioSpec spec;
      spec.name = "gap";
      spec.frames = 30;
      spec.initial = {64.0 - 14.0 * speed * std::cos(heading), 64.0 - 14.0 * speed * std::sin(heading),
                      speed * std::cos(heading), speed * std::sin(heading)};
      spec.noise.position_sigma = 1.0;
      spec.seed = static_cast<std::uint64_t>(++cases);
      PreparedScenario prepared = prepare_scenario(spec);
      for (int t = kGapFirst; t <= kGapLast; ++t) prepared.observations[static_cast<std::size_t>(t)].reset();

      const auto trackers = benchmark_trackers(spec.noise);
      for (const auto& cfg : trackers) {
        if (cfg.mode != FusionMode::PhyOT && cfg.mode != FusionMode::Hold) continue;
        const Trajectory traj = run_tracker(prepared, cfg);
        const auto& end_box = traj.points[kGapLast].box;
        const auto& post_box = traj.points[kGapLast + 1].box;
        const double at_end = end_box ? iou(*end_box, prepared.truth.boxes[kGapLast]) : 0.0;
        const double post = post_box ? iou(*post_box, prepared.truth.boxes[kGapLast + 1]) : 0.0;
        if (cfg.mode == FusionMode::PhyOT) worst_fused = std::min({worst_fused, at_end, post});
        else worst_hold = std::max(worst_hold, at_end);
      }
    }
  }
  return {worst_fused >= 0.5 && worst_hold < 0.5,
          fmt("fused min iou %.3f, frozen max iou at gap end %.3f over %.0f cases", worst_fused,
              worst_hold, cases)};
}

// 9. Golden evaluation cases.
Outcome evaluation_golden() {
  bool ok = true;
  const BoundingBox a{1, 1, 2, 2};
  ok &= iou(a, a) == 1.0;
  ok &= iou(a, {10, 10, 2, 2}) == 0.0;
  ok &= iou(a, {2, 1, 2, 2}) == 1.0 / 3.0;
  const std::vector<double> ov{0.5}, taus{0.0, 0.5, 1.0};
  const SuccessCurve curve = success_curve(ov, taus);
  ok &= curve.rates == std::vector<double>{1.0, 1.0, 0.0};
  ok &= auc(curve) == 2.0 / 3.0;
  const std::vector<BoundingBox> truth{a, {3, 3, 2, 2}};
  const std::vector<std::optional<BoundingBox>> same(truth.begin(), truth.end());
  const SuccessCurve perfect = success_curve(same, truth, default_thresholds());
  ok &= perfect.rates.back() == 1.0 && auc(perfect) == 1.0;
  const std::vector<std::optional<BoundingBox>> miss{BoundingBox{50, 50, 2, 2}, std::nullopt};
  const SuccessCurve missed = success_curve(miss, truth, default_thresholds());
  ok &= missed.rates.front() == 1.0 && missed.rates[1] == 0.0;
  ok &= auc({{0, 0.5, 1}, {0, 0, 0}}) == 0.0;
  return {ok, ok ? "all golden values exact" : "golden value mismatch"};
}

// 10. simulate -> track -> eval, serialized, run twice.
std::string pipeline_digest() {
  ScenarioSpec spec;
  spec.name = "determinism";
  spec.motion = MotionKind::Turning;
  spec.turn_rate = 0.04;
  spec.initial = {40.0, 60.0, 1.4, -0.3};
  spec.distractors = 2;
  spec.occlusions = {{12, 15}};
  spec.seed = 42;
  spec.noise = {2.0, 0.05, 0.05};
  const PreparedScenario prepared = prepare_scenario(spec);

  std::string out;
  std::vector<GrayImage> frames;
  for (const auto& f : prepared.frames) {
    const auto bytes = encode_pgm(f);
    out.append(bytes.begin(), bytes.end());
    frames.push_back(decode_pnm(bytes));
  }
  const auto truth_text = serialize_annotations(to_annotations(prepared.truth.boxes));
  const auto obs_text = serialize_annotations(to_annotations(prepared.observations));
  out += truth_text + obs_text;

  const auto truth = to_stream(parse_annotations(truth_text), frames.size());
  const auto obs = to_stream(parse_annotations(obs_text), frames.size());
  std::vector<BoundingBox> truth_boxes;
  for (const auto& b : truth) truth_boxes.push_back(*b);
  const BoundingBox init = *truth[0];

  for (const auto& cfg : benchmark_trackers(spec.noise)) {
    ReplayPositionSensor replay(obs);
    FlowMotionSensor motion(cfg.flow, cfg.turn, cfg.search_inflation);
    const Trajectory traj = track_sequence(frames, init, cfg, replay, &motion);
    out += serialize_annotations(to_annotations(traj.boxes()));
    out += format_number(auc(success_curve(traj.boxes(), truth_boxes, default_thresholds())));
  }
  const Trajectory ncc = track_sequence(frames, init, TrackerConfig{});
  out += serialize_annotations(to_annotations(ncc.boxes()));
  return out;
}

Outcome determinism() {
  const std::string a = pipeline_digest();
  const std::string b = pipeline_digest();
  return {a == b, fmt("%.0f bytes compared", static_cast<double>(a.size()))};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "kalman batch equivalence", 1.0, kalman_oracle},
      {2, "noise-free consistency", 1.0, noise_free},
      {3, "covariance health", 5.0, covariance_health},
      {4, "flow recovery", 30.0, flow_recovery},
      {5, "acceleration recovery", 10.0, acceleration_recovery},
      {6, "mask enumeration", 1.0, mask_enumeration},
      {7, "fused vs raw suite", 120.0, suite_analog},
      {8, "occlusion extrapolation", 10.0, occlusion_extrapolation},
      {9, "evaluation golden cases", 1.0, evaluation_golden},
      {10, "pipeline determinism", 60.0, determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.limit_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("%s %2d %-26s %6.2fs (limit %gs)  %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                secs, c.limit_s, o.detail.c_str(), in_time ? "" : " (over time limit)");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
