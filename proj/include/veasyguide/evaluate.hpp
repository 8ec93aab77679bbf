#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "veasyguide/error.hpp"
#include "veasyguide/geometry.hpp"
#include "veasyguide/manifest.hpp"
#include "veasyguide/synth.hpp"

namespace veasyguide {

struct EvalThresholds {
  double t_iou = 0.5;
  double s_iou = 0.3;
};

struct EvalMatch {
  int pred_id = 0;
  int gt_id = 0;
  double temporal_iou = 0.0;
  double spatial_iou = 0.0;
};

struct EvalReport {
  std::vector<EvalMatch> matches;
  std::size_t n_pred = 0;
  std::size_t n_gt = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double mean_onset_error_ms = 0.0;
};

/// Interval IoU on [start, end].
inline double temporal_iou(std::int64_t a0, std::int64_t a1, std::int64_t b0, std::int64_t b1) {
  const std::int64_t inter = std::max<std::int64_t>(0, std::min(a1, b1) - std::max(a0, b0));
  const std::int64_t uni = (a1 - a0) + (b1 - b0) - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

/// Greedy one-to-one matching of predictions to ground truth in descending
/// temporal-IoU order; a pair is eligible only if it clears both thresholds.
inline EvalReport evaluate(const ActivityManifest& pred, const GroundTruth& gt, const EvalThresholds& thr = {}) {
  if (gt.duration_ms) {
    const std::int64_t frame_ms = div_round(1000 * pred.video.fps.den, pred.video.fps.num);
    if (std::abs(pred.video.duration_ms - *gt.duration_ms) > frame_ms) {
      throw TimelineMismatch("evaluate: prediction lasts " + std::to_string(pred.video.duration_ms) +
                             " ms, ground truth " + std::to_string(*gt.duration_ms) + " ms");
    }
  }

  std::vector<EvalMatch> candidates;
  for (std::size_t p = 0; p < pred.activities.size(); ++p) {
    const auto& a = pred.activities[p];
    for (std::size_t g = 0; g < gt.activities.size(); ++g) {
      const auto& b = gt.activities[g];
      const double tiou = temporal_iou(a.start_ms, a.end_ms, b.start_ms, b.end_ms);
      const double siou = iou(a.bbox, b.bbox);
      if (tiou >= thr.t_iou && siou >= thr.s_iou) {
        candidates.push_back({static_cast<int>(p), static_cast<int>(g), tiou, siou});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const EvalMatch& x, const EvalMatch& y) {
    if (x.temporal_iou != y.temporal_iou) return x.temporal_iou > y.temporal_iou;
    return std::tie(x.gt_id, x.pred_id) < std::tie(y.gt_id, y.pred_id);
  });

  EvalReport r;
  r.n_pred = pred.activities.size();
  r.n_gt = gt.activities.size();
  std::vector<bool> pred_used(r.n_pred, false), gt_used(r.n_gt, false);
  double onset_sum = 0.0;
  for (const auto& c : candidates) {
    if (pred_used[static_cast<std::size_t>(c.pred_id)] || gt_used[static_cast<std::size_t>(c.gt_id)]) continue;
    pred_used[static_cast<std::size_t>(c.pred_id)] = gt_used[static_cast<std::size_t>(c.gt_id)] = true;
    onset_sum += static_cast<double>(std::abs(pred.activities[static_cast<std::size_t>(c.pred_id)].start_ms -
                                              gt.activities[static_cast<std::size_t>(c.gt_id)].start_ms));
    r.matches.push_back(c);
  }
  // Report prediction ids as published in the manifest.
  for (auto& m : r.matches) m.pred_id = pred.activities[static_cast<std::size_t>(m.pred_id)].id;

  const double k = static_cast<double>(r.matches.size());
  r.precision = r.n_pred == 0 ? 1.0 : k / static_cast<double>(r.n_pred);
  r.recall = r.n_gt == 0 ? 1.0 : k / static_cast<double>(r.n_gt);
  r.f1 = (r.precision + r.recall) > 0 && k > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  if (r.n_pred == 0 && r.n_gt == 0) r.f1 = 1.0;
  r.mean_onset_error_ms = r.matches.empty() ? 0.0 : onset_sum / k;
  return r;
}

inline nlohmann::json report_to_json(const EvalReport& r) {
  nlohmann::json j;
  j["matches"] = nlohmann::json::array();
  for (const auto& m : r.matches) {
    j["matches"].push_back(
        {{"pred_id", m.pred_id}, {"gt_id", m.gt_id}, {"temporal_iou", m.temporal_iou}, {"spatial_iou", m.spatial_iou}});
  }
  j["n_pred"] = r.n_pred;
  j["n_gt"] = r.n_gt;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["mean_onset_error_ms"] = r.mean_onset_error_ms;
  return j;
}

/// Ground truth recast as a manifest; evaluating it against its source gives f1 = 1.
inline ActivityManifest manifest_from_ground_truth(const GroundTruth& gt, const VideoMeta& meta) {
  ActivityManifest m;
  m.video = meta;
  m.shots.push_back({0, meta.duration_ms});
  for (std::size_t k = 0; k < gt.activities.size(); ++k) {
    const auto& a = gt.activities[k];
    m.activities.push_back({static_cast<int>(k), 0, a.start_ms, a.end_ms, a.bbox});
  }
  std::stable_sort(m.activities.begin(), m.activities.end(),
                   [](const ActivityRecord& a, const ActivityRecord& b) { return a.start_ms < b.start_ms; });
  for (std::size_t k = 0; k < m.activities.size(); ++k) m.activities[k].id = static_cast<int>(k);
  return m;
}

}  // namespace veasyguide
