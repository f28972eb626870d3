#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "phyot/geometry.hpp"
#include "phyot/simulator.hpp"
#include "phyot/tracker.hpp"

namespace phyot {

double iou(const BoundingBox& a, const BoundingBox& b);

struct SuccessCurve {
  std::vector<double> thresholds;
  std::vector<double> rates;
};

/// {0, 0.01, ..., 1}.
std::vector<double> default_thresholds();

/// Per-frame overlaps; a missing prediction scores 0.
std::vector<double> overlaps(std::span<const std::optional<BoundingBox>> pred,
                             std::span<const BoundingBox> truth);

/// rate(tau) = fraction of overlaps >= tau.
SuccessCurve success_curve(std::span<const double> overlaps, std::span<const double> thresholds);
SuccessCurve success_curve(std::span<const std::optional<BoundingBox>> pred,
                           std::span<const BoundingBox> truth, std::span<const double> thresholds);

/// Mean success rate over the threshold grid.
double auc(const SuccessCurve& curve);

struct SequenceResult {
  std::string scenario;
  double auc = 0.0;
  std::vector<double> overlaps;
  std::optional<std::string> error;
};

struct TrackerResult {
  std::string tracker;
  SuccessCurve curve;  // pooled over every frame of every sequence
  double auc = 0.0;
  std::vector<SequenceResult> sequences;

  double mean_sequence_auc() const;
  bool crashed() const;
};

struct EvalReport {
  std::vector<TrackerResult> trackers;
  std::vector<std::string> scenarios;

  bool any_crashed() const;
};

/// Everything a tracker needs for one scenario, built once and shared.
struct PreparedScenario {
  ScenarioSpec spec;
  GroundTruth truth;
  std::vector<GrayImage> frames;
  ObservationStream observations;
};

PreparedScenario prepare_scenario(const ScenarioSpec& spec);

/// One-pass run of `config` on a prepared scenario, initialized from truth frame 0.
Trajectory run_tracker(const PreparedScenario& scenario, const TrackerConfig& config);

/// One-Pass Evaluation of every tracker on every scenario. Sequences run in
/// parallel, capped by PHYOT_THREADS; per-sequence failures are recorded, not thrown.
EvalReport run_ope(std::span<const ScenarioSpec> scenarios, std::span<const TrackerConfig> trackers);

/// Worker count from PHYOT_THREADS, defaulting to the hardware concurrency.
unsigned evaluation_threads();

/// The four comparison trackers (raw, hold, cv, phyot) tuned for a position
/// sensor with the given noise: R_pos = sigma^2 (at least 1) and, for the
/// fused modes, a 99.9% chi-square innovation gate with a 5-frame patience.
std::vector<TrackerConfig> benchmark_trackers(const NoiseSpec& noise);

/// tracker,threshold,success_rate rows.
void write_report_csv(std::ostream& out, const EvalReport& report);
/// tracker,scenario,auc,error rows.
void write_sequence_csv(std::ostream& out, const EvalReport& report);
/// Success plot with one polyline per tracker and AUC in the legend.
void write_success_svg(std::ostream& out, const EvalReport& report);

}  // namespace phyot
