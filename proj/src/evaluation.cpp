#include "phyot/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>

#include "phyot/error.hpp"

namespace phyot {

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.left(), b.left()));
  const double ih = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top()));
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (inter <= 0.0 || uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::vector<double> default_thresholds() {
  std::vector<double> t(101);
  for (int i = 0; i <= 100; ++i) t[static_cast<std::size_t>(i)] = i / 100.0;
  return t;
}

std::vector<double> overlaps(std::span<const std::optional<BoundingBox>> pred,
                             std::span<const BoundingBox> truth) {
  if (pred.size() != truth.size()) {
    throw Error(ErrorCode::InvalidInput, "overlaps: prediction/truth length mismatch");
  }
  std::vector<double> out(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    out[i] = pred[i] ? iou(*pred[i], truth[i]) : 0.0;
  }
  return out;
}

SuccessCurve success_curve(std::span<const double> ov, std::span<const double> thresholds) {
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw Error(ErrorCode::InvalidInput, "success_curve: thresholds must ascend");
  }
  SuccessCurve curve;
  curve.thresholds.assign(thresholds.begin(), thresholds.end());
  curve.rates.reserve(thresholds.size());
  for (double tau : thresholds) {
    const auto hits = std::count_if(ov.begin(), ov.end(), [tau](double o) { return o >= tau; });
    curve.rates.push_back(ov.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(ov.size()));
  }
  return curve;
}

SuccessCurve success_curve(std::span<const std::optional<BoundingBox>> pred,
                           std::span<const BoundingBox> truth, std::span<const double> thresholds) {
  const auto ov = overlaps(pred, truth);
  return success_curve(ov, thresholds);
}

double auc(const SuccessCurve& curve) {
  if (curve.rates.empty()) throw Error(ErrorCode::InvalidInput, "auc: empty curve");
  return std::accumulate(curve.rates.begin(), curve.rates.end(), 0.0) /
         static_cast<double>(curve.rates.size());
}

double TrackerResult::mean_sequence_auc() const {
  if (sequences.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : sequences) sum += s.auc;
  return sum / static_cast<double>(sequences.size());
}

bool TrackerResult::crashed() const {
  return std::any_of(sequences.begin(), sequences.end(),
                     [](const SequenceResult& s) { return s.error.has_value(); });
}

bool EvalReport::any_crashed() const {
  return std::any_of(trackers.begin(), trackers.end(),
                     [](const TrackerResult& t) { return t.crashed(); });
}

PreparedScenario prepare_scenario(const ScenarioSpec& spec) {
  PreparedScenario s;
  s.spec = spec;
  s.truth = generate_trajectory(spec);
  s.frames = render_scene(s.truth, spec);
  s.observations = corrupt_observations(s.truth, spec.noise, spec.seed);
  return s;
}

Trajectory run_tracker(const PreparedScenario& scenario, const TrackerConfig& config) {
  std::unique_ptr<PositionSensor> position;
  switch (config.position_source) {
    case PositionSource::Synthetic:
      position = std::make_unique<ReplayPositionSensor>(scenario.observations);
      break;
    case PositionSource::Truth:
      position = std::make_unique<ReplayPositionSensor>(
          ObservationStream(scenario.truth.boxes.begin(), scenario.truth.boxes.end()));
      break;
    case PositionSource::Ncc:
      position = std::make_unique<NccPositionSensor>(config.search_inflation, config.ncc_min_score);
      break;
  }

  std::unique_ptr<MotionSensor> motion;
  if (config.motion_source == MotionSource::Flow) {
    motion = std::make_unique<FlowMotionSensor>(config.flow, config.turn, config.search_inflation);
  } else {
    const auto& truth = scenario.truth;
    std::vector<std::optional<Velocity2>> velocities;
    std::vector<Acceleration> accels;
    for (std::size_t t = 0; t < truth.size(); ++t) {
      velocities.push_back(Velocity2{truth.states[t].vx, truth.states[t].vy});
      accels.push_back(t == 0 ? Acceleration{} : truth.accels[t - 1]);
    }
    motion = std::make_unique<ReplayMotionSensor>(std::move(velocities), std::move(accels));
  }

  return track_sequence(scenario.frames, scenario.truth.boxes.front(), config, *position,
                        motion.get());
}

unsigned evaluation_threads() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PHYOT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
  }
  return n;
}

EvalReport run_ope(std::span<const ScenarioSpec> scenarios, std::span<const TrackerConfig> trackers) {
  if (scenarios.empty() || trackers.empty()) {
    throw Error(ErrorCode::InvalidInput, "run_ope: need at least one scenario and one tracker");
  }
  const std::vector<double> thresholds = default_thresholds();
  const std::size_t ns = scenarios.size(), nt = trackers.size();

  // results[s * nt + k]: scenario s, tracker k.
  std::vector<SequenceResult> results(ns * nt);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t s = next++; s < ns; s = next++) {
      std::optional<PreparedScenario> prepared;
      std::optional<std::string> prep_error;
      try {
        prepared = prepare_scenario(scenarios[s]);
      } catch (const std::exception& e) {
        prep_error = e.what();
      }
      for (std::size_t k = 0; k < nt; ++k) {
        SequenceResult& r = results[s * nt + k];
        r.scenario = scenarios[s].name;
        if (prep_error) {
          r.error = "scenario: " + *prep_error;
          continue;
        }
        try {
          const Trajectory traj = run_tracker(*prepared, trackers[k]);
          r.overlaps = overlaps(traj.boxes(), prepared->truth.boxes);
          r.auc = auc(success_curve(r.overlaps, thresholds));
        } catch (const std::exception& e) {
          r.error = e.what();
          r.overlaps.assign(prepared->truth.size(), 0.0);
        }
      }
    }
  };

  const unsigned threads = std::min<unsigned>(evaluation_threads(), static_cast<unsigned>(ns));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  EvalReport report;
  for (const auto& s : scenarios) report.scenarios.push_back(s.name);
  for (std::size_t k = 0; k < nt; ++k) {
    TrackerResult tr;
    tr.tracker = trackers[k].name;
    std::vector<double> pooled;
    for (std::size_t s = 0; s < ns; ++s) {
      SequenceResult& r = results[s * nt + k];
      pooled.insert(pooled.end(), r.overlaps.begin(), r.overlaps.end());
      tr.sequences.push_back(std::move(r));
    }
    tr.curve = success_curve(pooled, thresholds);
    tr.auc = auc(tr.curve);
    report.trackers.push_back(std::move(tr));
  }
  return report;
}

std::vector<TrackerConfig> benchmark_trackers(const NoiseSpec& noise) {
  constexpr double kChiSquare2Dof999 = 13.815510557964274;
  std::vector<TrackerConfig> out;
  for (auto mode : {FusionMode::Raw, FusionMode::Hold, FusionMode::ConstantVelocity, FusionMode::PhyOT}) {
    TrackerConfig c;
    c.mode = mode;
    c.name = to_string(mode);
    c.kalman.position_noise = std::max(1.0, noise.position_sigma * noise.position_sigma);
    if (mode == FusionMode::ConstantVelocity || mode == FusionMode::PhyOT) {
      c.gate = kChiSquare2Dof999;
      c.gate_patience = 5;
    }
    out.push_back(c);
  }
  return out;
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << "tracker,threshold,success_rate\n";
  out << std::setprecision(10);
  for (const auto& t : report.trackers) {
    for (std::size_t i = 0; i < t.curve.thresholds.size(); ++i) {
      out << t.tracker << ',' << t.curve.thresholds[i] << ',' << t.curve.rates[i] << '\n';
    }
  }
}

void write_sequence_csv(std::ostream& out, const EvalReport& report) {
  out << "tracker,scenario,auc,error\n";
  out << std::setprecision(10);
  for (const auto& t : report.trackers) {
    for (const auto& s : t.sequences) {
      std::string err = s.error.value_or("");
      std::replace(err.begin(), err.end(), ',', ';');
      out << t.tracker << ',' << s.scenario << ',' << s.auc << ',' << err << '\n';
    }
  }
}

namespace {

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_success_svg(std::ostream& out, const EvalReport& report) {
  constexpr double kW = 520, kH = 400, kLeft = 60, kRight = 20, kTop = 30, kBottom = 50;
  constexpr double kPw = kW - kLeft - kRight, kPh = kH - kTop - kBottom;
  static constexpr const char* kColors[] = {"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e",
                                            "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  auto px = [&](double t) { return kLeft + t * kPw; };
  auto py = [&](double r) { return kTop + (1.0 - r) * kPh; };

  out << std::fixed << std::setprecision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"18\" text-anchor=\"middle\">Success plots of OPE</text>\n";
  for (int i = 0; i <= 10; ++i) {
    const double v = i / 10.0;
    out << "<line x1=\"" << px(v) << "\" y1=\"" << py(0) << "\" x2=\"" << px(v) << "\" y2=\""
        << py(1) << "\" stroke=\"#eee\"/>\n";
    out << "<line x1=\"" << px(0) << "\" y1=\"" << py(v) << "\" x2=\"" << px(1) << "\" y2=\""
        << py(v) << "\" stroke=\"#eee\"/>\n";
    out << "<text x=\"" << px(v) << "\" y=\"" << py(0) + 16 << "\" text-anchor=\"middle\">"
        << std::setprecision(1) << v << std::setprecision(2) << "</text>\n";
    out << "<text x=\"" << px(0) - 6 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\">"
        << std::setprecision(1) << v << std::setprecision(2) << "</text>\n";
  }
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kPw << "\" height=\"" << kPh
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << px(0.5) << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">Overlap threshold</text>\n";
  out << "<text transform=\"translate(16," << py(0.5) << ") rotate(-90)\" text-anchor=\"middle\">Success rate</text>\n";

  // Legend ordered by AUC, best first.
  std::vector<std::size_t> order(report.trackers.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.trackers[a].auc > report.trackers[b].auc;
  });
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const auto& t = report.trackers[order[rank]];
    const char* color = kColors[order[rank] % std::size(kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < t.curve.thresholds.size(); ++i) {
      out << px(t.curve.thresholds[i]) << ',' << py(t.curve.rates[i]) << ' ';
    }
    out << "\"/>\n";
    const double ly = kTop + 16 + 16 * static_cast<double>(rank);
    out << "<line x1=\"" << px(0.03) << "\" y1=\"" << ly - 4 << "\" x2=\"" << px(0.1) << "\" y2=\""
        << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << px(0.12) << "\" y=\"" << ly << "\">" << xml_escape(t.tracker) << " ["
        << std::setprecision(3) << t.auc << std::setprecision(2) << "]</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace phyot
