// Command-line front end: detect | synth | eval | serve.

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <pthread.h>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "veasyguide/serve.hpp"
#include "veasyguide/veasyguide.hpp"

namespace fs = std::filesystem;
namespace vg = veasyguide;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBelowThreshold = 1;
constexpr int kExitInput = 2;
constexpr int kExitBadFlag = 3;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("veasyguide");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  const char* env = std::getenv("VG_LOG");
  const std::string level = env ? env : "info";
  if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else if (level == "warn") {
    spdlog::set_level(spdlog::level::warn);
  } else {
    spdlog::set_level(spdlog::level::info);
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw vg::Error("cannot write " + path.string());
  out << text;
}

struct DetectArgs {
  std::string input;
  std::string out = "manifest.json";
  std::string format = "auto";
  int diff_tau = 25;
  double min_area_pct = 0.01;
  double temporal_s = 3.0;
  double spatial_pct = 5.0;
  double hu_merge = 0.5;
  double same_pos_iou = 0.6;
  double cut_threshold = 0.30;
  int min_shot_frames = 10;
  std::int64_t min_duration_ms = 0;
  int workers = 0;
  bool no_merge = false;
  std::string dump_graph;
  std::string dump_masks;
};

int run_detect(const DetectArgs& a) {
  vg::DetectConfig cfg;
  cfg.diff_tau = a.diff_tau;
  cfg.min_area_frac = a.min_area_pct / 100.0;
  cfg.temporal_ms = std::llround(a.temporal_s * 1000.0);
  cfg.spatial_frac = a.spatial_pct / 100.0;
  cfg.merge_hu = a.hu_merge;
  cfg.same_pos_iou = a.same_pos_iou;
  cfg.cut_threshold = a.cut_threshold;
  cfg.min_shot_frames = a.min_shot_frames;
  cfg.min_duration_ms = a.min_duration_ms;
  cfg.merge = !a.no_merge;
  cfg.worker_count = a.workers;
  try {
    cfg.validate();
  } catch (const vg::InvalidParameter& e) {
    spdlog::error("invalid value for {}", e.what());
    return kExitBadFlag;
  }

  vg::FormatHint hint = vg::FormatHint::kAuto;
  if (a.format == "y4m") hint = vg::FormatHint::kY4m;
  if (a.format == "image_dir") hint = vg::FormatHint::kImageDir;

  std::unique_ptr<vg::FrameSource> source;
  try {
    source = vg::open_frame_source(a.input, hint);
  } catch (const vg::Error& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  }
  const auto& m = source->meta();
  spdlog::info("input {}x{} @ {}/{} fps, {} frames", m.width, m.height, m.fps.num, m.fps.den, m.frame_count);

  vg::DetectOptions opts;
  if (!a.dump_masks.empty()) opts.dump_masks_dir = fs::path(a.dump_masks);
  vg::DetectResult result;
  try {
    result = vg::run_detection(*source, cfg, opts);
  } catch (const vg::Error& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  }
  spdlog::info("{} shots, {} activities", result.shots.size(), result.manifest.activities.size());
  write_text(a.out, vg::write_manifest(result.manifest));
  if (!a.dump_graph.empty()) write_text(a.dump_graph, vg::graph_dump(result.graphs).dump());
  spdlog::debug("manifest written to {}", a.out);
  return kExitOk;
}

struct SynthArgs {
  std::string script;
  std::string out;
  std::string ext = ".png";
  std::string y4m;
};

int run_synth(const SynthArgs& a) {
  vg::ScenarioScript script;
  try {
    std::ifstream in(a.script);
    if (!in) throw vg::ScriptInvalid("cannot read " + a.script);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw vg::ScriptInvalid(std::string("malformed JSON: ") + e.what());
    }
    script = vg::parse_script(j);
  } catch (const vg::ScriptInvalid& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  }
  auto rendered = vg::render_scenario(script);
  const fs::path out(a.out);
  vg::write_image_dir(out, rendered.frames, a.ext);
  write_text(out / "gt.json", vg::ground_truth_to_json(rendered.truth).dump());
  if (!a.y4m.empty()) vg::write_y4m(a.y4m, rendered.frames);
  spdlog::info("{} frames, {} ground-truth activities -> {}", rendered.frames.meta().frame_count,
               rendered.truth.activities.size(), out.string());
  return kExitOk;
}

struct EvalArgs {
  std::string pred;
  std::string gt;
  double t_iou = 0.5;
  double s_iou = 0.3;
  double min_f1 = 0.0;
  std::string report;
};

int run_eval(const EvalArgs& a) {
  vg::ActivityManifest pred;
  vg::GroundTruth gt;
  try {
    pred = vg::parse_manifest(vg::read_file(a.pred));
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(vg::read_file(a.gt));
    } catch (const nlohmann::json::parse_error& e) {
      throw vg::SchemaViolation("$", std::string("malformed JSON: ") + e.what());
    }
    gt = vg::parse_ground_truth(j);
  } catch (const vg::Error& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  }
  vg::EvalReport report;
  try {
    report = vg::evaluate(pred, gt, {a.t_iou, a.s_iou});
  } catch (const vg::TimelineMismatch& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  }
  const std::string text = vg::report_to_json(report).dump();
  std::cout << text << '\n';
  if (!a.report.empty()) write_text(a.report, text);
  return report.f1 >= a.min_f1 ? kExitOk : kExitBelowThreshold;
}

struct ServeArgs {
  std::string manifest;
  std::string video;
  std::string assets;
  std::string host = "127.0.0.1";
  int port = 8080;
};

int run_serve(const ServeArgs& a) {
  // Block termination signals in every thread; a dedicated thread waits for them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  httplib::Server server;
  vg::ServeConfig cfg{a.manifest, a.video, std::nullopt};
  if (!a.assets.empty()) cfg.assets = fs::path(a.assets);
  try {
    vg::configure_server(server, cfg);
  } catch (const vg::Error& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  }
  server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    spdlog::info("{} {} {} {}", req.method, req.path, res.status, res.body.size());
  });
  if (!server.bind_to_port(a.host, a.port)) {
    spdlog::error("cannot bind {}:{}", a.host, a.port);
    return kExitInput;
  }
  std::atomic<bool> done{false};
  std::jthread waiter([&] {
    const timespec tick{0, 200'000'000};
    while (!done) {
      const int sig = sigtimedwait(&signals, nullptr, &tick);
      if (sig > 0) {
        spdlog::info("signal {}, shutting down", sig);
        server.stop();
        return;
      }
    }
  });
  spdlog::info("serving on http://{}:{}/", a.host, a.port);
  server.listen_after_bind();
  done = true;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"VeasyGuide: detect instructor activities in presentation videos"};
  app.require_subcommand(1);

  DetectArgs det;
  auto* detect = app.add_subcommand("detect", "Detect activities and write a manifest");
  detect->add_option("input", det.input, "Y4M file or image directory")->required();
  detect->add_option("--out", det.out, "Manifest output path")->capture_default_str();
  detect->add_option("--format", det.format, "Input format: auto, y4m, image_dir")->capture_default_str();
  detect->add_option("--diff-tau", det.diff_tau, "Grayscale difference threshold, 0..254")->capture_default_str();
  detect->add_option("--min-area-pct", det.min_area_pct, "Minimum region area, percent of frame area")
      ->capture_default_str();
  detect->add_option("--temporal-s", det.temporal_s, "Temporal closeness bound, seconds")->capture_default_str();
  detect->add_option("--spatial-pct", det.spatial_pct, "Spatial closeness bound, percent of frame diagonal (0, 100]")
      ->capture_default_str();
  detect->add_option("--hu-merge", det.hu_merge, "Shape dissimilarity bound for transient merging")
      ->capture_default_str();
  detect->add_option("--same-pos-iou", det.same_pos_iou, "Box IoU counted as the same position (0, 1]")
      ->capture_default_str();
  detect->add_option("--cut-threshold", det.cut_threshold, "Shot cut threshold, normalized mean luma change [0, 1]")
      ->capture_default_str();
  detect->add_option("--min-shot-frames", det.min_shot_frames, "Minimum frames per shot")->capture_default_str();
  detect->add_option("--min-duration-ms", det.min_duration_ms, "Drop activities shorter than this")
      ->capture_default_str();
  detect->add_option("--workers", det.workers, "Worker threads (0 = auto)")->capture_default_str();
  detect->add_flag("--no-merge", det.no_merge, "Disable transient merging");
  detect->add_option("--dump-graph", det.dump_graph, "Write the region graph as JSON");
  detect->add_option("--dump-masks", det.dump_masks, "Write per-segment difference masks as PGM");

  SynthArgs syn;
  auto* synth = app.add_subcommand("synth", "Render a scenario script to frames and ground truth");
  synth->add_option("script", syn.script, "Scenario JSON")->required();
  synth->add_option("--out", syn.out, "Output directory")->required();
  synth->add_option("--ext", syn.ext, "Frame image extension: .png, .pgm")->capture_default_str();
  synth->add_option("--y4m", syn.y4m, "Also write the frames as a Y4M file");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Score a manifest against ground truth");
  eval->add_option("pred", ev.pred, "Manifest JSON")->required();
  eval->add_option("gt", ev.gt, "Ground-truth JSON")->required();
  eval->add_option("--t-iou", ev.t_iou, "Temporal IoU threshold")->capture_default_str();
  eval->add_option("--s-iou", ev.s_iou, "Spatial IoU threshold")->capture_default_str();
  eval->add_option("--min-f1", ev.min_f1, "Exit 1 when F1 falls below this")->capture_default_str();
  eval->add_option("--report", ev.report, "Also write the report to this file");

  ServeArgs srv;
  auto* serve = app.add_subcommand("serve", "Serve the player, manifest and video");
  serve->add_option("--manifest", srv.manifest, "Manifest JSON")->required();
  serve->add_option("--video", srv.video, "Video file")->required();
  serve->add_option("--assets", srv.assets, "Player asset directory");
  serve->add_option("--host", srv.host, "Bind address")->capture_default_str();
  serve->add_option("--port", srv.port, "TCP port")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadFlag;
  }

  try {
    if (*detect) return run_detect(det);
    if (*synth) return run_synth(syn);
    if (*eval) return run_eval(ev);
    if (*serve) return run_serve(srv);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  }
  return kExitOk;
}
