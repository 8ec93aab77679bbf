#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "veasyguide/error.hpp"
#include "veasyguide/frame_source.hpp"
#include "veasyguide/geometry.hpp"
#include "veasyguide/ingest.hpp"

namespace veasyguide {

enum class EventKind { kPoint, kMark, kSketch };

inline std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::kPoint:
      return "point";
    case EventKind::kMark:
      return "mark";
    case EventKind::kSketch:
      return "sketch";
  }
  return "?";
}

inline std::optional<EventKind> event_kind_from_string(const std::string& s) {
  if (s == "point") return EventKind::kPoint;
  if (s == "mark") return EventKind::kMark;
  if (s == "sketch") return EventKind::kSketch;
  return std::nullopt;
}

struct PointF {
  double x = 0.0;
  double y = 0.0;
};

struct ScriptEvent {
  EventKind kind = EventKind::kPoint;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  int gray = 0;
  std::vector<PointF> path;  // point: waypoints; sketch: polyline
  double radius = 6.0;       // point
  Rect rect;                 // mark
  double stroke_width = 3.0; // sketch
};

/// A slide change: from `at_ms` on the canvas is repainted with a new
/// background and persisted strokes are cleared.
struct SlideCut {
  std::int64_t at_ms = 0;
  int background_gray = 0;
};

struct ScenarioScript {
  int width = 640;
  int height = 360;
  int background_gray = 240;
  Rational fps{30, 1};
  std::int64_t duration_ms = 0;
  std::vector<SlideCut> cuts;
  std::vector<ScriptEvent> events;

  std::int64_t frame_count() const { return div_round(duration_ms * fps.num, 1000 * fps.den); }
};

struct GtActivity {
  EventKind kind = EventKind::kPoint;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  Rect bbox;
  friend bool operator==(const GtActivity&, const GtActivity&) = default;
};

struct GroundTruth {
  std::vector<GtActivity> activities;
  std::optional<std::int64_t> duration_ms;
  std::optional<Rational> fps;
};

namespace synth_detail {

inline int shot_of(const ScenarioScript& s, std::int64_t t_ms) {
  int k = 0;
  while (k < static_cast<int>(s.cuts.size()) && s.cuts[static_cast<std::size_t>(k)].at_ms <= t_ms) ++k;
  return k;
}

inline int background_of_shot(const ScenarioScript& s, int shot) {
  return shot == 0 ? s.background_gray : s.cuts[static_cast<std::size_t>(shot - 1)].background_gray;
}

inline std::int64_t first_frame_at_or_after(std::int64_t t_ms, Rational fps) {
  std::int64_t i = t_ms * fps.num / (1000 * fps.den);
  while (frame_time_ms(i, fps) < t_ms) ++i;
  while (i > 0 && frame_time_ms(i - 1, fps) >= t_ms) --i;
  return i;
}

inline bool inside(const ScenarioScript& s, const PointF& p) {
  return p.x >= 0 && p.y >= 0 && p.x <= s.width - 1 && p.y <= s.height - 1;
}

inline std::vector<double> cumulative_lengths(const std::vector<PointF>& pts) {
  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t k = 1; k < pts.size(); ++k) {
    cum[k] = cum[k - 1] + std::hypot(pts[k].x - pts[k - 1].x, pts[k].y - pts[k - 1].y);
  }
  return cum;
}

/// Position at arc-length fraction `frac` along the path.
inline PointF along(const std::vector<PointF>& pts, const std::vector<double>& cum, double frac) {
  const double target = std::clamp(frac, 0.0, 1.0) * cum.back();
  for (std::size_t k = 1; k < pts.size(); ++k) {
    if (cum[k] >= target && cum[k] > cum[k - 1]) {
      const double u = (target - cum[k - 1]) / (cum[k] - cum[k - 1]);
      return {pts[k - 1].x + u * (pts[k].x - pts[k - 1].x), pts[k - 1].y + u * (pts[k].y - pts[k - 1].y)};
    }
  }
  return pts.back();
}

/// Paints every pixel whose centre lies within `r` of segment a-b.
template <typename Paint>
void paint_capsule(const ScenarioScript& s, PointF a, PointF b, double r, Paint&& paint) {
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - r)));
  const int x1 = std::min(s.width - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + r)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - r)));
  const int y1 = std::min(s.height - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + r)));
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      double u = len2 > 0 ? ((x - a.x) * dx + (y - a.y) * dy) / len2 : 0.0;
      u = std::clamp(u, 0.0, 1.0);
      const double ex = x - (a.x + u * dx), ey = y - (a.y + u * dy);
      if (ex * ex + ey * ey <= r * r) paint(x, y);
    }
  }
}

/// Draws event `e` as it appears at time `t_ms`; returns false when the event
/// is not visible then.
template <typename Paint>
bool paint_event(const ScenarioScript& s, const ScriptEvent& e, std::int64_t t_ms, Paint&& paint) {
  const double span = static_cast<double>(e.end_ms - e.start_ms);
  const double progress = span > 0 ? static_cast<double>(t_ms - e.start_ms) / span : 1.0;
  switch (e.kind) {
    case EventKind::kPoint: {
      if (t_ms < e.start_ms || t_ms > e.end_ms) return false;
      const auto cum = cumulative_lengths(e.path);
      const PointF c = along(e.path, cum, progress);
      paint_capsule(s, c, c, e.radius, paint);
      return true;
    }
    case EventKind::kMark: {
      if (t_ms < e.start_ms || t_ms > e.end_ms) return false;
      for (int y = e.rect.y; y < e.rect.bottom(); ++y) {
        for (int x = e.rect.x; x < e.rect.right(); ++x) paint(x, y);
      }
      return true;
    }
    case EventKind::kSketch: {
      // Revealed by arc length during the window, then kept until the slide changes.
      if (t_ms < e.start_ms || shot_of(s, t_ms) != shot_of(s, e.start_ms)) return false;
      const auto cum = cumulative_lengths(e.path);
      const double reveal = std::clamp(progress, 0.0, 1.0) * cum.back();
      const double r = e.stroke_width / 2.0;
      paint_capsule(s, e.path.front(), e.path.front(), r, paint);
      for (std::size_t k = 1; k < e.path.size() && cum[k - 1] < reveal; ++k) {
        const PointF end = cum[k] <= reveal ? e.path[k] : along(e.path, cum, reveal / cum.back());
        paint_capsule(s, e.path[k - 1], end, r, paint);
      }
      return true;
    }
  }
  return false;
}

}  // namespace synth_detail

/// Checks every script constraint; the message names the offending event.
inline void validate_script(const ScenarioScript& s) {
  using namespace synth_detail;
  if (s.width <= 0 || s.height <= 0) throw ScriptInvalid("canvas: width and height must be > 0");
  if (s.background_gray < 0 || s.background_gray > 255) throw ScriptInvalid("canvas: background_gray out of 0..255");
  if (s.fps.num <= 0 || s.fps.den <= 0) throw ScriptInvalid("fps must be > 0");
  if (s.duration_ms <= 0) throw ScriptInvalid("duration_ms must be > 0");
  for (std::size_t k = 0; k < s.cuts.size(); ++k) {
    const auto& c = s.cuts[k];
    const std::string p = "cuts[" + std::to_string(k) + "]";
    if (c.at_ms <= 0 || c.at_ms >= s.duration_ms) throw ScriptInvalid(p + ": at_ms outside the video");
    if (k > 0 && c.at_ms <= s.cuts[k - 1].at_ms) throw ScriptInvalid(p + ": cuts must be strictly increasing");
    if (c.background_gray < 0 || c.background_gray > 255) throw ScriptInvalid(p + ": background_gray out of 0..255");
  }
  for (std::size_t k = 0; k < s.events.size(); ++k) {
    const auto& e = s.events[k];
    const std::string p = "events[" + std::to_string(k) + "]";
    if (e.start_ms < 0 || e.end_ms <= e.start_ms || e.end_ms > s.duration_ms) {
      throw ScriptInvalid(p + ": time window outside the video or empty");
    }
    const int shot = shot_of(s, e.start_ms);
    if (shot_of(s, e.end_ms) != shot) throw ScriptInvalid(p + ": time window crosses a slide cut");
    if (e.gray < 0 || e.gray > 255) throw ScriptInvalid(p + ": gray out of 0..255");
    if (e.gray == background_of_shot(s, shot)) throw ScriptInvalid(p + ": gray equals the background");
    switch (e.kind) {
      case EventKind::kPoint:
      case EventKind::kSketch: {
        if (e.path.empty()) throw ScriptInvalid(p + ": path is empty");
        for (const auto& pt : e.path) {
          if (!inside(s, pt)) throw ScriptInvalid(p + ": geometry outside the canvas");
        }
        const double r = e.kind == EventKind::kPoint ? e.radius : e.stroke_width / 2.0;
        if (!(r > 0)) throw ScriptInvalid(p + ": radius / stroke_width must be > 0");
        break;
      }
      case EventKind::kMark:
        if (e.rect.empty() || !Rect{0, 0, s.width, s.height}.contains(e.rect)) {
          throw ScriptInvalid(p + ": geometry outside the canvas");
        }
        break;
    }
    if (frame_time_ms(first_frame_at_or_after(e.start_ms, s.fps), s.fps) > e.end_ms) {
      throw ScriptInvalid(p + ": window contains no frame");
    }
  }
}

inline ScenarioScript parse_script(const nlohmann::json& j) {
  ScenarioScript s;
  try {
    const auto& canvas = j.at("canvas");
    s.width = canvas.at("width").get<int>();
    s.height = canvas.at("height").get<int>();
    s.background_gray = canvas.value("background_gray", 240);
    if (j.contains("fps_num")) {
      s.fps = {j.at("fps_num").get<std::int64_t>(), j.value("fps_den", std::int64_t{1})};
    } else {
      s.fps = {j.at("fps").get<std::int64_t>(), 1};
    }
    s.duration_ms = j.at("duration_ms").get<std::int64_t>();
    for (const auto& c : j.value("cuts", nlohmann::json::array())) {
      s.cuts.push_back({c.at("at_ms").get<std::int64_t>(), c.at("background_gray").get<int>()});
    }
    const auto& events = j.at("events");
    for (std::size_t k = 0; k < events.size(); ++k) {
      const auto& ej = events[k];
      ScriptEvent e;
      const auto kind = event_kind_from_string(ej.at("kind").get<std::string>());
      if (!kind) throw ScriptInvalid("events[" + std::to_string(k) + "]: unknown kind");
      e.kind = *kind;
      e.start_ms = ej.at("start_ms").get<std::int64_t>();
      e.end_ms = ej.at("end_ms").get<std::int64_t>();
      e.gray = ej.value("gray", ej.value("fill_gray", 0));
      if (e.kind == EventKind::kMark) {
        const auto& r = ej.at("rect");
        e.rect = {r.at("x").get<int>(), r.at("y").get<int>(), r.at("w").get<int>(), r.at("h").get<int>()};
      } else {
        for (const auto& pt : ej.at(e.kind == EventKind::kPoint ? "path" : "points")) {
          e.path.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
        }
        if (e.kind == EventKind::kPoint) e.radius = ej.value("radius", 6.0);
        if (e.kind == EventKind::kSketch) e.stroke_width = ej.value("stroke_width", 3.0);
      }
      s.events.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ScriptInvalid(std::string("malformed script: ") + ex.what());
  }
  validate_script(s);
  return s;
}

/// Renders one frame of the script.
inline LumaPlane render_frame(const ScenarioScript& s, std::int64_t index) {
  const std::int64_t t = frame_time_ms(index, s.fps);
  const int shot = synth_detail::shot_of(s, t);
  LumaPlane plane(s.width, s.height, static_cast<std::uint8_t>(synth_detail::background_of_shot(s, shot)));
  for (const auto& e : s.events) {
    const auto gray = static_cast<std::uint8_t>(e.gray);
    synth_detail::paint_event(s, e, t, [&](int x, int y) { plane.at(x, y) = gray; });
  }
  return plane;
}

/// Frame source that renders each frame on demand.
class ScenarioFrameSource final : public FrameSource {
 public:
  explicit ScenarioFrameSource(ScenarioScript script)
      : script_(std::move(script)),
        meta_(VideoMeta::make(script_.fps, script_.width, script_.height, script_.frame_count())) {}

  const VideoMeta& meta() const override { return meta_; }
  std::optional<Frame> next() override {
    if (index_ >= meta_.frame_count) return std::nullopt;
    const std::int64_t i = index_++;
    return frame_from_luma(render_frame(script_, i), i, meta_.fps);
  }
  void rewind() override { index_ = 0; }

 private:
  ScenarioScript script_;
  VideoMeta meta_;
  std::int64_t index_ = 0;
};

/// Ground truth measured on the rendered raster: each event's box is the
/// bound of every pixel it painted in any frame of its window.
inline GroundTruth ground_truth_of(const ScenarioScript& s) {
  GroundTruth gt;
  gt.duration_ms = frame_time_ms(s.frame_count(), s.fps);
  gt.fps = s.fps;
  for (const auto& e : s.events) {
    Rect box;
    for (std::int64_t i = 0; i < s.frame_count(); ++i) {
      const std::int64_t t = frame_time_ms(i, s.fps);
      if (t < e.start_ms || t > e.end_ms) continue;
      synth_detail::paint_event(s, e, t, [&](int x, int y) { box = union_bounds(box, Rect{x, y, 1, 1}); });
    }
    gt.activities.push_back({e.kind, e.start_ms, e.end_ms, box});
  }
  return gt;
}

struct RenderedScenario {
  ScenarioFrameSource frames;
  GroundTruth truth;
};

inline RenderedScenario render_scenario(const ScenarioScript& script) {
  validate_script(script);
  return {ScenarioFrameSource(script), ground_truth_of(script)};
}

inline nlohmann::json ground_truth_to_json(const GroundTruth& gt) {
  nlohmann::json j;
  j["activities"] = nlohmann::json::array();
  for (const auto& a : gt.activities) {
    j["activities"].push_back({{"kind", to_string(a.kind)},
                               {"start_ms", a.start_ms},
                               {"end_ms", a.end_ms},
                               {"bbox", {{"x", a.bbox.x}, {"y", a.bbox.y}, {"w", a.bbox.w}, {"h", a.bbox.h}}}});
  }
  if (gt.duration_ms) j["duration_ms"] = *gt.duration_ms;
  if (gt.fps) {
    j["fps_num"] = gt.fps->num;
    j["fps_den"] = gt.fps->den;
  }
  return j;
}

inline GroundTruth parse_ground_truth(const nlohmann::json& j) {
  auto int_at = [](const nlohmann::json& o, const char* key, const std::string& path) {
    if (!o.is_object() || !o.contains(key)) throw SchemaViolation(path + "." + key, "missing field");
    if (!o[key].is_number_integer()) throw SchemaViolation(path + "." + key, "expected an integer");
    return o[key].get<std::int64_t>();
  };
  GroundTruth gt;
  if (!j.is_object() || !j.contains("activities") || !j["activities"].is_array()) {
    throw SchemaViolation("activities", "missing array");
  }
  const auto& acts = j["activities"];
  for (std::size_t k = 0; k < acts.size(); ++k) {
    const std::string p = "activities[" + std::to_string(k) + "]";
    const auto& a = acts[k];
    GtActivity g;
    const auto kind = a.is_object() && a.contains("kind") && a["kind"].is_string()
                          ? event_kind_from_string(a["kind"].get<std::string>())
                          : std::nullopt;
    if (!kind) throw SchemaViolation(p + ".kind", "expected point, mark or sketch");
    g.kind = *kind;
    g.start_ms = int_at(a, "start_ms", p);
    g.end_ms = int_at(a, "end_ms", p);
    if (g.start_ms < 0) throw SchemaViolation(p + ".start_ms", "must be >= 0");
    if (g.end_ms < g.start_ms) throw SchemaViolation(p + ".end_ms", "must be >= start_ms");
    if (!a.contains("bbox")) throw SchemaViolation(p + ".bbox", "missing field");
    const auto& b = a["bbox"];
    g.bbox = {static_cast<int>(int_at(b, "x", p + ".bbox")), static_cast<int>(int_at(b, "y", p + ".bbox")),
              static_cast<int>(int_at(b, "w", p + ".bbox")), static_cast<int>(int_at(b, "h", p + ".bbox"))};
    if (g.bbox.x < 0 || g.bbox.y < 0 || g.bbox.w < 0 || g.bbox.h < 0) {
      throw SchemaViolation(p + ".bbox", "must be non-negative");
    }
    gt.activities.push_back(g);
  }
  if (j.contains("duration_ms")) gt.duration_ms = int_at(j, "duration_ms", "$");
  if (j.contains("fps_num")) gt.fps = Rational{int_at(j, "fps_num", "$"), j.value("fps_den", std::int64_t{1})};
  return gt;
}

}  // namespace veasyguide
