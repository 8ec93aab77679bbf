#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "veasyguide/detect.hpp"
#include "veasyguide/error.hpp"
#include "veasyguide/frame_source.hpp"
#include "veasyguide/image_io.hpp"
#include "veasyguide/ingest.hpp"
#include "veasyguide/manifest.hpp"
#include "veasyguide/rocgraph.hpp"

namespace veasyguide {

/// Every detection tunable. Defaults reproduce the reference constants.
struct DetectConfig {
  int diff_tau = 25;
  double min_area_frac = 0.0001;
  std::int64_t temporal_ms = 3000;
  double spatial_frac = 0.05;
  double merge_hu = 0.5;
  double same_pos_iou = 0.6;
  double cut_threshold = 0.30;
  int min_shot_frames = 10;
  std::int64_t min_duration_ms = 0;
  bool merge = true;
  int worker_count = 0;  // 0 = hardware concurrency

  GraphParams graph_params() const { return {temporal_ms, spatial_frac, merge_hu, same_pos_iou}; }
  ShotParams shot_params() const { return {cut_threshold, min_shot_frames}; }

  void validate() const {
    if (diff_tau < 0 || diff_tau > 254) throw InvalidParameter("--diff-tau", "must be in [0, 254]");
    if (!(min_area_frac >= 0.0 && min_area_frac < 1.0)) throw InvalidParameter("--min-area-pct", "must be in [0, 100)");
    graph_params().validate();
    if (!(cut_threshold >= 0.0 && cut_threshold <= 1.0)) throw InvalidParameter("--cut-threshold", "must be in [0, 1]");
    if (min_shot_frames < 1) throw InvalidParameter("--min-shot-frames", "must be >= 1");
    if (min_duration_ms < 0) throw InvalidParameter("--min-duration-ms", "must be >= 0");
    if (worker_count < 0) throw InvalidParameter("--workers", "must be >= 0");
  }

  /// Parameters echoed into the manifest. The worker count is left out: it
  /// never changes the output.
  nlohmann::json to_json() const {
    return {{"diff_tau", diff_tau},
            {"min_area_frac", min_area_frac},
            {"temporal_ms", temporal_ms},
            {"spatial_frac", spatial_frac},
            {"merge_hu", merge_hu},
            {"same_pos_iou", same_pos_iou},
            {"cut_threshold", cut_threshold},
            {"min_shot_frames", min_shot_frames},
            {"min_duration_ms", min_duration_ms},
            {"merge", merge}};
  }
};

struct DetectOptions {
  std::optional<std::filesystem::path> dump_masks_dir;
};

struct DetectResult {
  ActivityManifest manifest;
  std::vector<Shot> shots;
  std::vector<RocGraph> graphs;  // one per shot, after merging when enabled
};

/// Fixed-size pool running void() jobs; `wait()` blocks until the queue drains.
class WorkerPool {
 public:
  explicit WorkerPool(int workers) {
    for (int k = 0; k < workers; ++k) threads_.emplace_back([this] { run(); });
  }
  ~WorkerPool() {
    {
      std::lock_guard lock(mu_);
      stop_ = true;
    }
    cv_.notify_all();
  }
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  void submit(std::function<void()> job) {
    if (threads_.empty()) {
      job();
      return;
    }
    std::unique_lock lock(mu_);
    // Bound the queue so that frames are not decoded far ahead of the workers.
    idle_.wait(lock, [&] { return queue_.size() < 2 * threads_.size(); });
    queue_.push_back(std::move(job));
    ++pending_;
    cv_.notify_one();
  }

  void wait() {
    std::unique_lock lock(mu_);
    idle_.wait(lock, [&] { return pending_ == 0; });
    if (error_) std::rethrow_exception(std::exchange(error_, nullptr));
  }

 private:
  void run() {
    while (true) {
      std::function<void()> job;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return stop_ || !queue_.empty(); });
        if (queue_.empty()) return;
        job = std::move(queue_.front());
        queue_.pop_front();
      }
      idle_.notify_all();
      try {
        job();
      } catch (...) {
        std::lock_guard lock(mu_);
        if (!error_) error_ = std::current_exception();
      }
      {
        std::lock_guard lock(mu_);
        --pending_;
      }
      idle_.notify_all();
    }
  }

  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable idle_;
  std::deque<std::function<void()>> queue_;
  std::size_t pending_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
  std::vector<std::jthread> threads_;
};

inline int effective_workers(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

inline std::string mask_dump_name(int shot, int seg) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "shot%d_seg%03d.pgm", shot, seg);
  return buf;
}

/// Detects activities in `source`: shots, segment differencing, region
/// extraction, graph construction, transient merging, and components.
/// Output is independent of the worker count.
inline DetectResult run_detection(FrameSource& source, const DetectConfig& cfg, const DetectOptions& opts = {}) {
  cfg.validate();
  const VideoMeta meta = source.meta();
  if (meta.frame_count <= 0) throw EmptySource("detect: source has no frames");

  // Pass 1: consecutive-frame differences for shot boundaries.
  const std::vector<Shot> shots = detect_shots(source, cfg.shot_params());

  std::vector<SegmentSpan> segments;
  for (std::size_t s = 0; s < shots.size(); ++s) {
    for (const auto& seg : partition_segments(shots[s], meta.fps, static_cast<int>(s))) segments.push_back(seg);
  }
  if (opts.dump_masks_dir) std::filesystem::create_directories(*opts.dump_masks_dir);

  // Pass 2: difference each segment's endpoints on the worker pool.
  const std::int64_t frame_area = std::int64_t{meta.width} * meta.height;
  std::vector<std::vector<RocNode>> per_segment(segments.size());
  {
    const int workers = effective_workers(cfg.worker_count);
    WorkerPool pool(workers == 1 ? 0 : workers);
    source.rewind();
    std::size_t next_seg = 0;
    std::optional<LumaPlane> first;
    while (auto f = source.next()) {
      if (next_seg >= segments.size()) break;
      const SegmentSpan& seg = segments[next_seg];
      if (f->index == seg.first_frame) first = luma_of(*f);
      if (f->index != seg.last_frame) continue;
      pool.submit([&, idx = next_seg, a = std::move(*first), b = luma_of(*f)] {
        const SegmentSpan& sp = segments[idx];
        const BinaryMask mask = diff_mask(a, b, cfg.diff_tau);
        if (opts.dump_masks_dir) {
          image_io::Image img{mask.width, mask.height, 1, {}};
          img.pixels.reserve(mask.bits.size());
          for (auto bit : mask.bits) img.pixels.push_back(bit ? 255 : 0);
          image_io::write_pnm(*opts.dump_masks_dir / mask_dump_name(sp.shot_id, sp.seg_index), img);
        }
        auto rocs = extract_regions(mask, sp.t_ms, frame_area, cfg.min_area_frac, sp.shot_id, sp.seg_index);
        std::vector<RocNode> nodes;
        nodes.reserve(rocs.size());
        for (auto& r : rocs) nodes.push_back(make_node(std::move(r)));
        per_segment[idx] = std::move(nodes);
      });
      first.reset();
      ++next_seg;
    }
    pool.wait();
  }

  // Per shot: graph, merge, components. Sequential and ordered.
  const double diag = diagonal(meta.width, meta.height);
  const std::int64_t seg_ms = segment_duration_ms(meta.fps);
  const GraphParams gp = cfg.graph_params();
  DetectResult result;
  result.shots = shots;
  std::vector<Activity> activities;
  std::size_t cursor = 0;
  for (std::size_t s = 0; s < shots.size(); ++s) {
    std::vector<RocNode> nodes;
    while (cursor < segments.size() && segments[cursor].shot_id == static_cast<int>(s)) {
      for (auto& n : per_segment[cursor]) nodes.push_back(std::move(n));
      ++cursor;
    }
    RocGraph g = build_graph(std::move(nodes), diag, gp);
    if (cfg.merge) g = merge_transients(g);
    for (Activity a : extract_activities(g, seg_ms)) {
      a.end_ms = std::min(a.end_ms, shots[s].end_ms);
      activities.push_back(std::move(a));
    }
    result.graphs.push_back(std::move(g));
  }
  result.manifest = build_manifest(activities, meta, shots, cfg.min_duration_ms, cfg.to_json());
  return result;
}

/// Debug view of the per-shot graphs: nodes with geometry, edges with weights
/// rounded to six decimals.
inline nlohmann::json graph_dump(const std::vector<RocGraph>& graphs) {
  nlohmann::json out;
  out["shots"] = nlohmann::json::array();
  for (std::size_t s = 0; s < graphs.size(); ++s) {
    nlohmann::json shot;
    shot["shot"] = s;
    shot["nodes"] = nlohmann::json::array();
    shot["edges"] = nlohmann::json::array();
    const auto& g = graphs[s];
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const auto& r = g.nodes[i].roc;
      shot["nodes"].push_back({{"id", i},
                               {"t_ms", r.t_ms},
                               {"bbox", {{"x", r.bbox.x}, {"y", r.bbox.y}, {"w", r.bbox.w}, {"h", r.bbox.h}}},
                               {"area_px", r.area_px}});
    }
    for (const auto& e : g.edges) {
      shot["edges"].push_back({{"i", e.i}, {"j", e.j}, {"weight", std::round(e.weight * 1e6) / 1e6}});
    }
    out["shots"].push_back(std::move(shot));
  }
  return out;
}

}  // namespace veasyguide
