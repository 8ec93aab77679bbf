#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "veasyguide/error.hpp"
#include "veasyguide/geometry.hpp"
#include "veasyguide/ingest.hpp"
#include "veasyguide/rocgraph.hpp"

namespace veasyguide {

struct ShotTimes {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  friend bool operator==(const ShotTimes&, const ShotTimes&) = default;
};

/// An activity as published to players.
struct ActivityRecord {
  int id = 0;
  int shot = 0;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  Rect bbox;
  friend bool operator==(const ActivityRecord&, const ActivityRecord&) = default;
};

struct ActivityManifest {
  int version = 1;
  VideoMeta video;
  std::vector<ShotTimes> shots;
  nlohmann::json params = nlohmann::json::object();
  std::vector<ActivityRecord> activities;

  friend bool operator==(const ActivityManifest&, const ActivityManifest&) = default;
};

struct SelectionQuery {
  std::int64_t t_ms = 0;
  std::int64_t lead_ms = 1500;
};

/// Drops activities shorter than `min_duration_ms`, orders the rest by start
/// time and renumbers them.
inline ActivityManifest build_manifest(const std::vector<Activity>& activities, const VideoMeta& meta,
                                       const std::vector<Shot>& shots, std::int64_t min_duration_ms = 0,
                                       nlohmann::json params = nlohmann::json::object()) {
  ActivityManifest m;
  m.video = meta;
  m.params = std::move(params);
  for (const Shot& s : shots) m.shots.push_back({s.start_ms, s.end_ms});
  for (const Activity& a : activities) {
    if (a.end_ms - a.start_ms < min_duration_ms) continue;
    m.activities.push_back({0, a.shot_id, a.start_ms, a.end_ms, a.bbox});
  }
  std::stable_sort(m.activities.begin(), m.activities.end(), [](const ActivityRecord& a, const ActivityRecord& b) {
    return std::tie(a.start_ms, a.shot, a.bbox.y, a.bbox.x) < std::tie(b.start_ms, b.shot, b.bbox.y, b.bbox.x);
  });
  for (std::size_t k = 0; k < m.activities.size(); ++k) m.activities[k].id = static_cast<int>(k);
  return m;
}

/// Among activities whose lead-extended window [start - lead, end] contains
/// the query time, the one whose start is nearest; ties go to the smaller id.
inline std::optional<int> select_active(const ActivityManifest& m, const SelectionQuery& q) {
  std::optional<int> best;
  std::int64_t best_dist = 0;
  for (const ActivityRecord& a : m.activities) {
    if (q.t_ms < a.start_ms - q.lead_ms || q.t_ms > a.end_ms) continue;
    const std::int64_t dist = std::abs(a.start_ms - q.t_ms);
    if (!best || dist < best_dist || (dist == best_dist && a.id < *best)) {
      best = a.id;
      best_dist = dist;
    }
  }
  return best;
}

namespace detail {

inline const nlohmann::json& field(const nlohmann::json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw SchemaViolation(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaViolation(path.empty() ? key : path + "." + key, "missing field");
  return *it;
}

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

inline std::int64_t int_field(const nlohmann::json& obj, const std::string& key, const std::string& path) {
  const auto& v = field(obj, key, path);
  if (!v.is_number_integer()) throw SchemaViolation(join(path, key), "expected an integer");
  return v.get<std::int64_t>();
}

inline const nlohmann::json& array_field(const nlohmann::json& obj, const std::string& key, const std::string& path) {
  const auto& v = field(obj, key, path);
  if (!v.is_array()) throw SchemaViolation(join(path, key), "expected an array");
  return v;
}

inline nlohmann::json rect_to_json(const Rect& r) { return {{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}}; }

inline Rect rect_from_json(const nlohmann::json& j, const std::string& path) {
  return {static_cast<int>(int_field(j, "x", path)), static_cast<int>(int_field(j, "y", path)),
          static_cast<int>(int_field(j, "w", path)), static_cast<int>(int_field(j, "h", path))};
}

}  // namespace detail

/// Checks every manifest invariant; throws SchemaViolation naming the path.
inline void validate_manifest(const ActivityManifest& m) {
  if (m.version != 1) throw SchemaViolation("version", "unsupported version " + std::to_string(m.version));
  const VideoMeta& v = m.video;
  if (v.width <= 0) throw SchemaViolation("video.width", "must be > 0");
  if (v.height <= 0) throw SchemaViolation("video.height", "must be > 0");
  if (v.fps.num <= 0) throw SchemaViolation("video.fps_num", "must be > 0");
  if (v.fps.den <= 0) throw SchemaViolation("video.fps_den", "must be > 0");
  if (v.duration_ms < 0) throw SchemaViolation("video.duration_ms", "must be >= 0");
  for (std::size_t i = 0; i < m.shots.size(); ++i) {
    const auto& s = m.shots[i];
    const std::string p = "shots[" + std::to_string(i) + "]";
    if (s.start_ms < 0 || s.end_ms < s.start_ms) throw SchemaViolation(p, "invalid time range");
  }
  const Rect frame{0, 0, v.width, v.height};
  for (std::size_t i = 0; i < m.activities.size(); ++i) {
    const auto& a = m.activities[i];
    const std::string p = "activities[" + std::to_string(i) + "]";
    if (a.start_ms < 0) throw SchemaViolation(p + ".start_ms", "must be >= 0");
    if (a.end_ms < a.start_ms) throw SchemaViolation(p + ".end_ms", "must be >= start_ms");
    if (a.bbox.w <= 0 || a.bbox.h <= 0 || !frame.contains(a.bbox)) {
      throw SchemaViolation(p + ".bbox", "must be non-empty and inside the video frame");
    }
    if (a.shot < 0 || static_cast<std::size_t>(a.shot) >= m.shots.size()) {
      throw SchemaViolation(p + ".shot", "references an unknown shot");
    }
    const auto& s = m.shots[static_cast<std::size_t>(a.shot)];
    if (a.start_ms < s.start_ms || a.end_ms > s.end_ms) throw SchemaViolation(p, "lies outside its shot");
    if (i > 0) {
      const auto& prev = m.activities[i - 1];
      if (std::tie(prev.start_ms, prev.id) >= std::tie(a.start_ms, a.id)) {
        throw SchemaViolation(p, "activities must be sorted by (start_ms, id)");
      }
    }
  }
}

inline nlohmann::json manifest_to_json(const ActivityManifest& m) {
  nlohmann::json j;
  j["version"] = m.version;
  j["video"] = {{"width", m.video.width},
                {"height", m.video.height},
                {"fps_num", m.video.fps.num},
                {"fps_den", m.video.fps.den},
                {"duration_ms", m.video.duration_ms}};
  j["shots"] = nlohmann::json::array();
  for (const auto& s : m.shots) j["shots"].push_back({{"start_ms", s.start_ms}, {"end_ms", s.end_ms}});
  j["params"] = m.params;
  j["activities"] = nlohmann::json::array();
  for (const auto& a : m.activities) {
    j["activities"].push_back({{"id", a.id},
                               {"shot", a.shot},
                               {"start_ms", a.start_ms},
                               {"end_ms", a.end_ms},
                               {"bbox", detail::rect_to_json(a.bbox)}});
  }
  return j;
}

inline ActivityManifest manifest_from_json(const nlohmann::json& j) {
  using namespace detail;
  ActivityManifest m;
  m.version = static_cast<int>(int_field(j, "version", ""));
  const auto& v = field(j, "video", "");
  m.video.width = static_cast<int>(int_field(v, "width", "video"));
  m.video.height = static_cast<int>(int_field(v, "height", "video"));
  m.video.fps.num = int_field(v, "fps_num", "video");
  m.video.fps.den = int_field(v, "fps_den", "video");
  m.video.duration_ms = int_field(v, "duration_ms", "video");
  if (m.video.fps.num > 0 && m.video.fps.den > 0) {
    // frame_count is not serialized; recover it from the duration.
    m.video.frame_count = div_round(m.video.duration_ms * m.video.fps.num, 1000 * m.video.fps.den);
  }
  const auto& shots = array_field(j, "shots", "");
  for (std::size_t i = 0; i < shots.size(); ++i) {
    const std::string p = "shots[" + std::to_string(i) + "]";
    m.shots.push_back({int_field(shots[i], "start_ms", p), int_field(shots[i], "end_ms", p)});
  }
  const auto& params = field(j, "params", "");
  if (!params.is_object()) throw SchemaViolation("params", "expected an object");
  m.params = params;
  const auto& acts = array_field(j, "activities", "");
  for (std::size_t i = 0; i < acts.size(); ++i) {
    const std::string p = "activities[" + std::to_string(i) + "]";
    ActivityRecord a;
    a.id = static_cast<int>(int_field(acts[i], "id", p));
    a.shot = static_cast<int>(int_field(acts[i], "shot", p));
    a.start_ms = int_field(acts[i], "start_ms", p);
    a.end_ms = int_field(acts[i], "end_ms", p);
    a.bbox = rect_from_json(field(acts[i], "bbox", p), p + ".bbox");
    m.activities.push_back(a);
  }
  validate_manifest(m);
  return m;
}

/// Canonical form: sorted keys, no insignificant whitespace.
inline std::string write_manifest(const ActivityManifest& m) { return manifest_to_json(m).dump(); }

inline ActivityManifest parse_manifest(const std::string& bytes) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaViolation("$", std::string("malformed JSON: ") + e.what());
  }
  return manifest_from_json(j);
}

}  // namespace veasyguide
