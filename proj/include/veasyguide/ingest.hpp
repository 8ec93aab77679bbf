#pragma once

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <span>
#include <vector>

#include "veasyguide/error.hpp"

namespace veasyguide {

/// Frame rate as an exact fraction num/den.
struct Rational {
  std::int64_t num = 30;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// round(a / b) for a >= 0, b > 0, with halves rounded up.
inline std::int64_t div_round(std::int64_t a, std::int64_t b) { return (2 * a + b) / (2 * b); }

/// Timestamp of frame `index` in integer milliseconds: round(index * 1000 / fps).
inline std::int64_t frame_time_ms(std::int64_t index, Rational fps) {
  return div_round(index * 1000 * fps.den, fps.num);
}

struct VideoMeta {
  Rational fps;
  int width = 0;
  int height = 0;
  std::int64_t frame_count = 0;
  std::int64_t duration_ms = 0;

  static VideoMeta make(Rational fps, int width, int height, std::int64_t frame_count) {
    return {fps, width, height, frame_count, frame_time_ms(frame_count, fps)};
  }
  friend bool operator==(const VideoMeta&, const VideoMeta&) = default;
};

/// One decoded frame. `channels` is 1 (gray) or 3 (packed RGB).
struct Frame {
  std::int64_t index = 0;
  std::int64_t t_ms = 0;
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;
};

/// 8-bit grayscale raster, row-major.
struct LumaPlane {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  LumaPlane() = default;
  LumaPlane(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return data.size(); }

  friend bool operator==(const LumaPlane&, const LumaPlane&) = default;
};

/// Half-open frame range [start_frame, end_frame) with derived times.
struct Shot {
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;

  std::int64_t length() const { return end_frame - start_frame; }
  friend bool operator==(const Shot&, const Shot&) = default;
};

/// Rec.601 luma, rounded half up, computed in exact integer arithmetic.
inline std::uint8_t luma_of_rgb(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
}

inline LumaPlane luma_of(const Frame& frame) {
  LumaPlane out;
  out.width = frame.width;
  out.height = frame.height;
  if (frame.channels == 1) {
    out.data = frame.pixels;
    return out;
  }
  const std::size_t n = static_cast<std::size_t>(frame.width) * frame.height;
  out.data.resize(n);
  const std::uint8_t* p = frame.pixels.data();
  for (std::size_t i = 0; i < n; ++i, p += frame.channels) out.data[i] = luma_of_rgb(p[0], p[1], p[2]);
  return out;
}

inline Frame frame_from_luma(const LumaPlane& luma, std::int64_t index, Rational fps) {
  return {index, frame_time_ms(index, fps), luma.width, luma.height, 1, luma.data};
}

struct ShotParams {
  double cut_threshold = 0.30;
  int min_shot_frames = 10;
};

/// Mean absolute difference of two planes, normalized to [0, 1].
inline double mean_abs_diff(const LumaPlane& a, const LumaPlane& b) {
  if (a.width != b.width || a.height != b.height) throw DimensionMismatch("mean_abs_diff: plane sizes differ");
  if (a.size() == 0) return 0.0;
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += static_cast<std::uint64_t>(std::abs(int{a.data[i]} - int{b.data[i]}));
  return static_cast<double>(sum) / (255.0 * static_cast<double>(a.size()));
}

/// Turns consecutive-frame differences into shots. `diffs[i]` is the
/// difference between frames i and i+1. A candidate cut at frame c (diff above
/// the threshold) is accepted only when no other candidate lies within
/// `min_shot_frames` frames on either side and the previous accepted cut is at
/// least that far back, so flashes and flicker never split a shot.
inline std::vector<Shot> shots_from_diffs(std::span<const double> diffs, std::int64_t frame_count, Rational fps,
                                          const ShotParams& params) {
  if (frame_count <= 0) throw EmptySource("detect_shots: source has no frames");
  std::vector<std::int64_t> candidates;
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    if (diffs[i] > params.cut_threshold) candidates.push_back(static_cast<std::int64_t>(i) + 1);
  }
  const std::int64_t min_len = std::max(1, params.min_shot_frames);
  std::vector<std::int64_t> cuts;
  std::int64_t last = 0;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const std::int64_t c = candidates[k];
    const bool far_from_last = c - last >= min_len && (k == 0 || c - candidates[k - 1] >= min_len);
    const bool far_from_next = k + 1 == candidates.size() || candidates[k + 1] - c >= min_len;
    if (far_from_last && far_from_next) {
      cuts.push_back(c);
      last = c;
    }
  }
  std::vector<Shot> shots;
  std::int64_t start = 0;
  cuts.push_back(frame_count);
  for (std::int64_t end : cuts) {
    shots.push_back({start, end, frame_time_ms(start, fps), frame_time_ms(end, fps)});
    start = end;
  }
  return shots;
}

}  // namespace veasyguide
