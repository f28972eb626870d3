#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "phyot/error.hpp"
#include "phyot/simulator.hpp"

using namespace phyot;

namespace {

constexpr double kFlat = 0.45;

ScenarioSpec flat_scene() {
  ScenarioSpec s;
  s.width = s.height = 64;
  s.frames = 6;
  s.initial = {24.0, 32.0, 1.0, 0.0};
  s.background_contrast = 0.0;
  return s;
}

double stddev(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= xs.size();
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / (xs.size() - 1));
}

}  // namespace

TEST(Trajectory, ConstantVelocityPositions) {
  ScenarioSpec s;
  s.frames = 4;
  s.initial = {0, 0, 1, 0};
  const auto truth = generate_trajectory(s);
  for (int t = 0; t < 4; ++t) EXPECT_DOUBLE_EQ(truth.states[t].px, t);
}

TEST(Trajectory, ConstantAccelerationIsDiscrete) {
  ScenarioSpec s;
  s.frames = 4;
  s.motion = MotionKind::ConstantAcceleration;
  s.initial = {0, 0, 1, 0};
  s.accel = {1, 0};
  const auto truth = generate_trajectory(s);
  const double want[] = {0, 1, 3, 6};
  for (int t = 0; t < 4; ++t) EXPECT_DOUBLE_EQ(truth.states[t].px, want[t]);
}

TEST(Trajectory, TurnRotatesVelocity) {
  ScenarioSpec s;
  s.frames = 3;
  s.motion = MotionKind::Turning;
  s.initial = {0, 0, 1, 0};
  s.turn_rate = std::numbers::pi / 6.0;
  const auto truth = generate_trajectory(s);
  EXPECT_NEAR(truth.states[1].vx, std::sqrt(3.0) / 2.0, 1e-12);
  EXPECT_NEAR(truth.states[1].vy, 0.5, 1e-12);
  EXPECT_NEAR(truth.states[2].vx, 0.5, 1e-12);
}

TEST(Trajectory, SatisfiesModelWithRecordedAccelerations) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    ScenarioSpec s;
    s.motion = static_cast<MotionKind>(trial % 3);
    s.initial = {u(rng) * 10, u(rng) * 10, u(rng), u(rng)};
    s.accel = {0.1 * u(rng), 0.1 * u(rng)};
    s.turn_rate = 0.5 * u(rng);
    s.frames = 25;
    const auto truth = generate_trajectory(s);
    for (std::size_t t = 0; t + 1 < truth.size(); ++t) {
      const auto& x = truth.states[t];
      const auto& a = truth.accels[t];
      const StateVector next{x.px + x.vx, x.py + x.vy, x.vx + a.ax, x.vy + a.ay};
      ASSERT_EQ(truth.states[t + 1], next);
    }
    if (s.motion == MotionKind::ConstantVelocity) {
      for (const auto& a : truth.accels) ASSERT_EQ(a, Acceleration{});
    }
  }
}

TEST(Trajectory, TurnNeverExceedsBound) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> rate(-std::numbers::pi / 6.0, std::numbers::pi / 6.0);
  for (int trial = 0; trial < 30; ++trial) {
    ScenarioSpec s;
    s.motion = MotionKind::Turning;
    s.turn_rate = rate(rng);
    s.frames = 20;
    const auto truth = generate_trajectory(s);
    for (std::size_t t = 0; t + 1 < truth.size(); ++t) {
      const auto& a = truth.states[t];
      const auto& b = truth.states[t + 1];
      const double cross = a.vx * b.vy - a.vy * b.vx;
      const double dot = a.vx * b.vx + a.vy * b.vy;
      ASSERT_LE(std::abs(std::atan2(cross, dot)), std::numbers::pi / 6.0 + 1e-12);
    }
  }
}

TEST(Trajectory, RejectsInvalidSpecs) {
  ScenarioSpec s;
  s.frames = 1;
  EXPECT_THROW(generate_trajectory(s), Error);
  s = {};
  s.turn_rate = 0.6;
  EXPECT_THROW(generate_trajectory(s), Error);
  s = {};
  s.occlusions = {{30, 45}};
  EXPECT_THROW(generate_trajectory(s), Error);
  s = {};
  s.noise.dropout = 1.5;
  EXPECT_THROW(generate_trajectory(s), Error);
}

TEST(Render, FlatSceneHasOneTexturedRectangle) {
  const auto spec = flat_scene();
  const auto truth = generate_trajectory(spec);
  const auto frames = render_scene(truth, spec);
  ASSERT_EQ(frames.size(), 6u);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto& b = truth.boxes[t];
    int inside_changed = 0;
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        const bool inside = x >= b.left() && x + 1 <= b.right() && y >= b.top() && y + 1 <= b.bottom();
        if (!inside) {
          ASSERT_EQ(frames[t](x, y), kFlat) << "frame " << t << " at " << x << "," << y;
        } else if (frames[t](x, y) != kFlat) {
          ++inside_changed;
        }
      }
    }
    EXPECT_GT(inside_changed, 240);
    // Integer motion moves the texture rigidly.
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 16; ++x) {
        ASSERT_EQ(frames[t](static_cast<int>(b.left()) + x, 24 + y), frames[0](16 + x, 24 + y));
      }
    }
  }
}

TEST(Render, OccluderCoversTarget) {
  auto spec = flat_scene();
  spec.frames = 12;
  spec.occlusions = {{5, 8}};
  const auto truth = generate_trajectory(spec);
  const auto frames = render_scene(truth, spec);
  for (int t = 0; t < 12; ++t) {
    const auto& b = truth.boxes[t];
    int occluded = 0;
    for (int y = static_cast<int>(b.top()); y < b.bottom(); ++y)
      for (int x = static_cast<int>(b.left()); x < b.right(); ++x) occluded += frames[t](x, y) == spec.occluder_intensity;
    if (t >= 5 && t <= 8) {
      EXPECT_EQ(occluded, 256) << "frame " << t;
      EXPECT_TRUE(truth.occluded[t]);
    } else {
      EXPECT_LT(occluded, 16) << "frame " << t;
      EXPECT_FALSE(truth.occluded[t]);
    }
  }
}

TEST(Render, DistractorsShareTheTargetTexture) {
  ScenarioSpec spec;
  spec.background_contrast = 0.0;
  spec.distractors = 2;
  spec.frames = 20;
  spec.seed = 4;
  const auto truth = generate_trajectory(spec);
  const auto frames = render_scene(truth, spec);
  int checked = 0;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    std::vector<BoundingBox> rects = truth.distractors[t];
    rects.push_back(truth.boxes[t]);
    bool separate = true;
    for (std::size_t i = 0; i < rects.size(); ++i)
      for (std::size_t j = i + 1; j < rects.size(); ++j)
        separate &= std::abs(rects[i].cx - rects[j].cx) > 18 || std::abs(rects[i].cy - rects[j].cy) > 18;
    if (!separate) continue;
    ++checked;
    int changed = 0;
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x) changed += frames[t](x, y) != kFlat;
    // Three rectangles, each covering 256 to 289 pixels.
    EXPECT_GE(changed, 3 * 250);
    EXPECT_LE(changed, 3 * 289);
    std::vector<double> means;
    for (const auto& r : rects) {
      double sum = 0.0;
      int n = 0;
      for (int y = static_cast<int>(std::ceil(r.top())); y + 1 <= r.bottom(); ++y)
        for (int x = static_cast<int>(std::ceil(r.left())); x + 1 <= r.right(); ++x, ++n) sum += frames[t](x, y);
      means.push_back(sum / n);
    }
    EXPECT_NEAR(means[0], means[2], 0.03);
    EXPECT_NEAR(means[1], means[2], 0.03);
  }
  EXPECT_GT(checked, 0);
}

TEST(Render, TargetLeavingFrameThrows) {
  ScenarioSpec spec;
  spec.initial = {120.0, 64.0, 2.0, 0.0};
  const auto truth = generate_trajectory(spec);
  EXPECT_FALSE(in_bounds(truth, spec));
  EXPECT_THROW(render_scene(truth, spec), Error);
}

TEST(Render, DeterministicPerSeed) {
  ScenarioSpec spec;
  spec.distractors = 2;
  spec.seed = 8;
  const auto truth = generate_trajectory(spec);
  EXPECT_EQ(render_scene(truth, spec), render_scene(truth, spec));
  auto other = spec;
  other.seed = 9;
  EXPECT_NE(render_scene(generate_trajectory(other), other), render_scene(truth, spec));
}

TEST(Corrupt, NoiselessEqualsTruth) {
  const auto truth = generate_trajectory(ScenarioSpec{});
  const auto obs = corrupt_observations(truth, {}, 1);
  ASSERT_EQ(obs.size(), truth.size());
  for (std::size_t t = 0; t < obs.size(); ++t) EXPECT_EQ(obs[t], truth.boxes[t]);
}

TEST(Corrupt, FullDropoutIsSilent) {
  const auto truth = generate_trajectory(ScenarioSpec{});
  for (const auto& o : corrupt_observations(truth, {0.0, 1.0, 0.0}, 1)) EXPECT_FALSE(o);
}

TEST(Corrupt, NoiseHasRequestedSpread) {
  ScenarioSpec spec;
  spec.frames = 1000;
  spec.initial = {64, 64, 0, 0};
  const auto truth = generate_trajectory(spec);
  const auto obs = corrupt_observations(truth, {2.0, 0.0, 0.0}, 3);
  std::vector<double> dx, dy;
  for (std::size_t t = 0; t < obs.size(); ++t) {
    dx.push_back(obs[t]->cx - truth.boxes[t].cx);
    dy.push_back(obs[t]->cy - truth.boxes[t].cy);
  }
  EXPECT_GE(stddev(dx), 1.8);
  EXPECT_LE(stddev(dx), 2.2);
  EXPECT_GE(stddev(dy), 1.8);
  EXPECT_LE(stddev(dy), 2.2);
}

TEST(Corrupt, SwapPicksNearestDistractor) {
  ScenarioSpec spec;
  spec.distractors = 3;
  spec.seed = 2;
  const auto truth = generate_trajectory(spec);
  const auto obs = corrupt_observations(truth, {0.0, 0.0, 1.0}, 5);
  for (std::size_t t = 0; t < obs.size(); ++t) {
    ASSERT_TRUE(obs[t]);
    double best = 1e300;
    for (const auto& d : truth.distractors[t]) {
      best = std::min(best, std::hypot(d.cx - truth.boxes[t].cx, d.cy - truth.boxes[t].cy));
    }
    EXPECT_NEAR(std::hypot(obs[t]->cx - truth.boxes[t].cx, obs[t]->cy - truth.boxes[t].cy), best, 1e-9);
  }
}

TEST(Corrupt, OccludedFramesAreSilent) {
  ScenarioSpec spec;
  spec.occlusions = {{3, 6}};
  const auto truth = generate_trajectory(spec);
  const auto obs = corrupt_observations(truth, {}, 1);
  for (int t = 0; t < spec.frames; ++t) EXPECT_EQ(obs[t].has_value(), t < 3 || t > 6);
}

TEST(Corrupt, DeterministicPerSeed) {
  const auto truth = generate_trajectory(ScenarioSpec{});
  const NoiseSpec n{2.0, 0.2, 0.0};
  EXPECT_EQ(corrupt_observations(truth, n, 7), corrupt_observations(truth, n, 7));
  EXPECT_NE(corrupt_observations(truth, n, 7), corrupt_observations(truth, n, 8));
}

TEST(Suite, MixesMotionKindsAndStaysInFrame) {
  const SuiteOptions opt;
  const auto suite = make_benchmark_suite(12, 3, opt);
  ASSERT_EQ(suite.size(), 12u);
  for (std::size_t i = 0; i < suite.size(); ++i) {
    EXPECT_EQ(suite[i].motion, static_cast<MotionKind>(i % 3));
    EXPECT_EQ(suite[i].occlusions.size(), 1u);
    EXPECT_EQ(suite[i].distractors, opt.distractors);
    const auto truth = generate_trajectory(suite[i]);
    EXPECT_TRUE(in_bounds(truth, suite[i]));
    for (const auto& s : truth.states) EXPECT_LE(std::hypot(s.vx, s.vy), opt.max_speed + 1e-9);
  }
}

TEST(Suite, Deterministic) {
  const auto a = make_benchmark_suite(5, 11);
  const auto b = make_benchmark_suite(5, 11);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].initial, b[i].initial);
    EXPECT_EQ(a[i].occlusions, b[i].occlusions);
    EXPECT_EQ(a[i].seed, b[i].seed);
  }
}

TEST(MotionKind, NamesRoundTrip) {
  for (auto k : {MotionKind::ConstantVelocity, MotionKind::ConstantAcceleration, MotionKind::Turning}) {
    EXPECT_EQ(parse_motion_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_motion_kind("zigzag"), Error);
}
