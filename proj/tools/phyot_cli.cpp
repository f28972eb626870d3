// phyot: simulate scenes, track targets, compute and compare success plots.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phyot/annotations.hpp"
#include "phyot/config.hpp"
#include "phyot/error.hpp"
#include "phyot/evaluation.hpp"
#include "phyot/flow_analysis.hpp"
#include "phyot/optical_flow.hpp"
#include "phyot/simulator.hpp"
#include "phyot/tracker.hpp"

namespace fs = std::filesystem;
using namespace phyot;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

std::vector<GrayImage> load_frames(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::InvalidInput, "no .pgm frames in " + dir.string());
  std::vector<GrayImage> frames;
  for (const auto& f : files) frames.push_back(read_pgm(f));
  return frames;
}

Velocity2 parse_velocity(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw Error(ErrorCode::Parse, "expected vx,vy");
  try {
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  } catch (const std::exception&) {
    throw Error(ErrorCode::Parse, "expected vx,vy, got '" + text + "'");
  }
}

void print_report(const EvalReport& report) {
  std::cout << std::fixed << std::setprecision(4);
  for (const auto& t : report.trackers) {
    std::cout << t.tracker << " AUC " << t.auc << " mean-sequence-AUC " << t.mean_sequence_auc()
              << (t.crashed() ? " (failures)" : "") << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kalman fusion of position and optical-flow sensors for single-target tracking"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Render a scenario to PGM frames plus truth CSV");
  std::string sim_spec, sim_out;
  std::optional<std::uint64_t> sim_seed;
  simulate->add_option("--spec", sim_spec, "Scenario config file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", sim_out, "Output directory")->required();
  simulate->add_option("--seed", sim_seed, "Override the scenario seed");

  // track
  auto* track = app.add_subcommand("track", "Track a target through a PGM frame directory");
  std::string trk_frames, trk_init, trk_config, trk_out, trk_obs, trk_trace;
  track->add_option("--frames", trk_frames, "Directory of PGM frames")->required()->check(CLI::ExistingDirectory);
  track->add_option("--init", trk_init, "Initial box cx,cy,w,h")->required();
  track->add_option("--config", trk_config, "Tracker config file")->check(CLI::ExistingFile);
  track->add_option("--out", trk_out, "Trajectory annotation CSV")->required();
  track->add_option("--observations", trk_obs, "Pre-computed position observations (annotation CSV)")
      ->check(CLI::ExistingFile);
  track->add_option("--trace", trk_trace, "Full state trace CSV");

  // flow
  auto* flow = app.add_subcommand("flow", "Dump flow between two frames (and optionally a mask)");
  std::string flw_a, flw_b, flw_out, flw_mask, flw_prior = "0,0", flw_config;
  flow->add_option("--a", flw_a, "First frame")->required()->check(CLI::ExistingFile);
  flow->add_option("--b", flw_b, "Second frame")->required()->check(CLI::ExistingFile);
  flow->add_option("--out", flw_out, "Flow file (PHOF)")->required();
  flow->add_option("--mask", flw_mask, "Attention mask output (PBM)");
  flow->add_option("--prior", flw_prior, "Prior velocity vx,vy for the mask");
  flow->add_option("--config", flw_config, "Tracker config supplying [flow] and [mask]")->check(CLI::ExistingFile);

  // eval
  auto* eval = app.add_subcommand("eval", "Success plot and AUC of one trajectory");
  std::string ev_pred, ev_truth, ev_plot, ev_report, ev_name = "tracker";
  eval->add_option("--pred", ev_pred, "Predicted annotation CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--truth", ev_truth, "Ground-truth annotation CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--plot", ev_plot, "SVG success plot");
  eval->add_option("--report", ev_report, "Report CSV (default: stdout only)");
  eval->add_option("--name", ev_name, "Tracker name in the report");

  // report
  auto* report = app.add_subcommand("report", "OPE comparison of trackers on a seeded synthetic suite");
  int rep_count = 20;
  std::uint64_t rep_seed = 1;
  std::vector<std::string> rep_trackers;
  std::string rep_out, rep_seq, rep_plot;
  report->add_option("--scenarios", rep_count, "Number of scenarios")->check(CLI::PositiveNumber);
  report->add_option("--seed", rep_seed, "Suite seed");
  report->add_option("--tracker", rep_trackers, "Tracker config file (repeatable; default raw, hold, cv, phyot)")
      ->check(CLI::ExistingFile);
  report->add_option("--out", rep_out, "Report CSV")->required();
  report->add_option("--sequences", rep_seq, "Per-sequence AUC CSV");
  report->add_option("--plot", rep_plot, "SVG success plot");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) {
      ScenarioSpec spec = scenario_from_config(Config::load(sim_spec));
      if (sim_seed) spec.seed = *sim_seed;
      const PreparedScenario scene = prepare_scenario(spec);
      const fs::path dir(sim_out);
      fs::create_directories(dir);
      for (std::size_t t = 0; t < scene.frames.size(); ++t) {
        std::ostringstream name;
        name << "frame_" << std::setw(4) << std::setfill('0') << t << ".pgm";
        write_pgm(dir / name.str(), scene.frames[t]);
      }
      open_out(dir / "truth.csv") << serialize_annotations(to_annotations(std::span<const BoundingBox>(scene.truth.boxes)));
      open_out(dir / "observations.csv")
          << serialize_annotations(to_annotations(std::span<const std::optional<BoundingBox>>(scene.observations)));
      open_out(dir / "scenario.cfg") << scenario_to_config(spec);
      std::cout << "wrote " << scene.frames.size() << " frames to " << dir.string() << '\n';
    } else if (*track) {
      const TrackerConfig config = trk_config.empty() ? TrackerConfig{} : tracker_from_config(Config::load(trk_config));
      const std::vector<GrayImage> frames = load_frames(trk_frames);
      const BoundingBox init = parse_box(trk_init);
      Trajectory traj;
      FlowMotionSensor motion(config.flow, config.turn, config.search_inflation);
      if (!trk_obs.empty()) {
        ReplayPositionSensor position(to_stream(load_annotations(trk_obs), frames.size()));
        traj = track_sequence(frames, init, config, position, &motion);
      } else {
        NccPositionSensor position(config.search_inflation, config.ncc_min_score);
        traj = track_sequence(frames, init, config, position, &motion);
      }
      open_out(trk_out) << serialize_annotations(to_annotations(traj.boxes()));
      if (!trk_trace.empty()) {
        auto out = open_out(trk_trace);
        write_state_trace(out, traj);
      }
      std::cout << "tracked " << traj.size() << " frames\n";
    } else if (*flow) {
      const TrackerConfig config = flw_config.empty() ? TrackerConfig{} : tracker_from_config(Config::load(flw_config));
      const FlowField field = estimate_flow(read_pgm(flw_a), read_pgm(flw_b), config.flow);
      write_flow(flw_out, field);
      const AttentionMask full(field.width(), field.height(), true);
      const auto mean = velocity_from_flow(field, full);
      std::cout << std::setprecision(6) << "mean flow " << mean->vx << ' ' << mean->vy << '\n';
      if (!flw_mask.empty()) {
        const AttentionMask mask = attention_mask(field, parse_velocity(flw_prior), config.turn);
        write_pbm(flw_mask, mask);
        std::cout << "mask pixels " << mask.count() << '\n';
      }
    } else if (*eval) {
      const auto truth_records = load_annotations(ev_truth);
      const auto pred_records = load_annotations(ev_pred);
      if (truth_records.empty()) throw Error(ErrorCode::InvalidInput, "truth file has no records");
      const auto frames = static_cast<std::size_t>(truth_records.back().frame_index) + 1;
      const auto pred = to_stream(pred_records, frames);
      std::vector<std::optional<BoundingBox>> scored_pred;
      std::vector<BoundingBox> scored_truth;
      for (const auto& r : truth_records) {
        if (!r.box) continue;
        scored_truth.push_back(*r.box);
        scored_pred.push_back(pred[static_cast<std::size_t>(r.frame_index)]);
      }
      EvalReport rep;
      TrackerResult tr;
      tr.tracker = ev_name;
      tr.curve = success_curve(scored_pred, scored_truth, default_thresholds());
      tr.auc = auc(tr.curve);
      rep.trackers.push_back(tr);
      if (!ev_report.empty()) {
        auto out = open_out(ev_report);
        write_report_csv(out, rep);
      }
      if (!ev_plot.empty()) {
        auto out = open_out(ev_plot);
        write_success_svg(out, rep);
      }
      std::cout << std::fixed << std::setprecision(6) << "AUC " << tr.auc << '\n';
    } else if (*report) {
      std::vector<TrackerConfig> trackers;
      for (const auto& path : rep_trackers) trackers.push_back(tracker_from_config(Config::load(path)));
      const SuiteOptions options;
      if (trackers.empty()) trackers = benchmark_trackers(options.noise);
      const auto suite = make_benchmark_suite(rep_count, rep_seed, options);
      const EvalReport rep = run_ope(suite, trackers);
      {
        auto out = open_out(rep_out);
        write_report_csv(out, rep);
      }
      if (!rep_seq.empty()) {
        auto out = open_out(rep_seq);
        write_sequence_csv(out, rep);
      }
      if (!rep_plot.empty()) {
        auto out = open_out(rep_plot);
        write_success_svg(out, rep);
      }
      print_report(rep);
      if (rep.any_crashed()) {
        std::cerr << "error: at least one tracker failed on a sequence\n";
        return 1;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
