#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "veasyguide/error.hpp"
#include "veasyguide/geometry.hpp"
#include "veasyguide/ingest.hpp"

namespace veasyguide {

/// A run of consecutive frames inside one shot, differenced first against last.
struct SegmentSpan {
  int shot_id = 0;
  int seg_index = 0;
  std::int64_t first_frame = 0;
  std::int64_t last_frame = 0;  // inclusive
  std::int64_t t_ms = 0;
  int n_frames = 0;

  friend bool operator==(const SegmentSpan&, const SegmentSpan&) = default;
};

/// One byte per pixel holding 0 or 1.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

  bool get(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v = true) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  std::int64_t count() const { return std::count(bits.begin(), bits.end(), std::uint8_t{1}); }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

struct RegionOfChange {
  std::int64_t t_ms = 0;
  Rect bbox;
  std::int64_t area_px = 0;
  BinaryMask mask_crop;  // bbox-sized, only this region's pixels set
  int shot_id = 0;
  int seg_index = 0;
};

/// Frames per segment: one third of a second, never fewer than two.
inline int segment_length(Rational fps) {
  return static_cast<int>(std::max<std::int64_t>(2, fps.num / (3 * fps.den)));
}

/// Nominal segment duration in integer milliseconds.
inline std::int64_t segment_duration_ms(Rational fps) { return frame_time_ms(segment_length(fps), fps); }

inline std::vector<SegmentSpan> partition_segments(const Shot& shot, Rational fps, int shot_id = 0) {
  const int len = segment_length(fps);
  std::vector<SegmentSpan> out;
  int seg = 0;
  for (std::int64_t first = shot.start_frame; first < shot.end_frame; first += len) {
    const std::int64_t last = std::min(first + len, shot.end_frame) - 1;
    const int n = static_cast<int>(last - first + 1);
    if (n < 2) break;  // trailing single frame
    out.push_back({shot_id, seg++, first, last, frame_time_ms(first, fps), n});
  }
  return out;
}

/// Sets a bit wherever the absolute luma change exceeds `tau`.
inline BinaryMask diff_mask(const LumaPlane& first, const LumaPlane& last, int tau) {
  if (first.width != last.width || first.height != last.height) {
    throw DimensionMismatch("diff_mask: plane sizes differ");
  }
  BinaryMask m(first.width, first.height);
  for (std::size_t i = 0; i < first.data.size(); ++i) {
    m.bits[i] = std::abs(int{last.data[i]} - int{first.data[i]}) > tau ? 1 : 0;
  }
  return m;
}

/// One 8-connected component of set pixels.
struct Component {
  Rect bbox;
  std::int64_t area_px = 0;
  BinaryMask mask_crop;
};

namespace detail {

// Clockwise neighbour offsets in image coordinates (row down): E, SE, S, SW, W, NW, N, NE.
inline constexpr std::array<int, 8> kDi = {0, 1, 1, 1, 0, -1, -1, -1};
inline constexpr std::array<int, 8> kDj = {1, 1, 0, -1, -1, -1, 0, 1};

inline int direction_of(int di, int dj) {
  for (int d = 0; d < 8; ++d) {
    if (kDi[d] == di && kDj[d] == dj) return d;
  }
  throw std::logic_error("direction_of: not a neighbour");
}

struct Border {
  bool hole = false;
  int parent = 0;
};

struct Run {
  int y, x0, x1;  // [x0, x1)
};

}  // namespace detail

/// Topological border following (Suzuki & Abe) over an 8-connected
/// foreground. Every outer border identifies one component; component pixels
/// are then attributed run by run through the border label at the start of
/// each run, which always lies on a border of its own component.
inline std::vector<Component> trace_components(const BinaryMask& mask) {
  using detail::kDi;
  using detail::kDj;
  const int W = mask.width + 2;
  const int H = mask.height + 2;
  std::vector<int> f(static_cast<std::size_t>(W) * H, 0);
  auto at = [&](int i, int j) -> int& { return f[static_cast<std::size_t>(i) * W + j]; };
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) at(y + 1, x + 1) = mask.get(x, y) ? 1 : 0;
  }

  // borders[0] unused; borders[1] is the frame, which acts as a hole border.
  std::vector<detail::Border> borders = {{true, 0}, {true, 0}};
  int nbd = 1;

  for (int i = 1; i < H - 1; ++i) {
    int lnbd = 1;
    for (int j = 1; j < W - 1; ++j) {
      const int fij = at(i, j);
      int i2 = 0, j2 = 0;
      bool start = false;
      bool hole = false;
      if (fij == 1 && at(i, j - 1) == 0) {
        start = true;
        i2 = i;
        j2 = j - 1;
      } else if (fij >= 1 && at(i, j + 1) == 0) {
        start = true;
        hole = true;
        i2 = i;
        j2 = j + 1;
        if (fij > 1) lnbd = fij;
      }

      if (start) {
        ++nbd;
        const detail::Border& prev = borders[static_cast<std::size_t>(lnbd)];
        int parent;
        if (hole) {
          parent = prev.hole ? prev.parent : lnbd;
        } else {
          parent = prev.hole ? lnbd : prev.parent;
        }
        borders.push_back({hole, parent});

        // Find the first non-zero neighbour clockwise from (i2, j2).
        const int s0 = detail::direction_of(i2 - i, j2 - j);
        int found = -1;
        for (int k = 0; k < 8; ++k) {
          const int d = (s0 + k) % 8;
          if (at(i + kDi[d], j + kDj[d]) != 0) {
            found = d;
            break;
          }
        }
        if (found < 0) {
          at(i, j) = -nbd;  // isolated pixel
        } else {
          const int i1 = i + kDi[found], j1 = j + kDj[found];
          i2 = i1;
          j2 = j1;
          int i3 = i, j3 = j;
          while (true) {
            // Counter-clockwise from the element after (i2, j2) around (i3, j3).
            const int s = detail::direction_of(i2 - i3, j2 - j3);
            bool east_zero = false;
            int i4 = 0, j4 = 0;
            for (int k = 1; k <= 8; ++k) {
              const int d = ((s - k) % 8 + 8) % 8;
              const int ni = i3 + kDi[d], nj = j3 + kDj[d];
              if (at(ni, nj) != 0) {
                i4 = ni;
                j4 = nj;
                break;
              }
              if (d == 0) east_zero = true;
            }
            if (east_zero) {
              at(i3, j3) = -nbd;
            } else if (at(i3, j3) == 1) {
              at(i3, j3) = nbd;
            }
            if (i4 == i && j4 == j && i3 == i1 && j3 == j1) break;
            i2 = i3;
            j2 = j3;
            i3 = i4;
            j3 = j4;
          }
        }
      }
      if (at(i, j) != 0 && at(i, j) != 1) lnbd = std::abs(at(i, j));
    }
  }

  // Map every border to its component's outer border.
  auto owner = [&](int b) { return borders[static_cast<std::size_t>(b)].hole ? borders[static_cast<std::size_t>(b)].parent : b; };

  std::vector<int> comp_index(borders.size(), -1);
  std::vector<std::vector<detail::Run>> runs;
  std::vector<Rect> boxes;
  for (int i = 1; i < H - 1; ++i) {
    for (int j = 1; j < W - 1;) {
      if (at(i, j) == 0) {
        ++j;
        continue;
      }
      const int label = std::abs(at(i, j));
      if (label < 2) throw std::logic_error("trace_components: run start not on a traced border");
      const int outer = owner(label);
      int j_end = j;
      while (j_end < W - 1 && at(i, j_end) != 0) ++j_end;
      int& ci = comp_index[static_cast<std::size_t>(outer)];
      if (ci < 0) {
        ci = static_cast<int>(runs.size());
        runs.emplace_back();
        boxes.push_back({});
      }
      runs[static_cast<std::size_t>(ci)].push_back({i - 1, j - 1, j_end - 1});
      boxes[static_cast<std::size_t>(ci)] = union_bounds(boxes[static_cast<std::size_t>(ci)], Rect{j - 1, i - 1, j_end - j, 1});
      j = j_end;
    }
  }

  std::vector<Component> out;
  out.reserve(runs.size());
  for (std::size_t c = 0; c < runs.size(); ++c) {
    Component comp;
    comp.bbox = boxes[c];
    comp.mask_crop = BinaryMask(comp.bbox.w, comp.bbox.h);
    for (const auto& r : runs[c]) {
      comp.area_px += r.x1 - r.x0;
      for (int x = r.x0; x < r.x1; ++x) comp.mask_crop.set(x - comp.bbox.x, r.y - comp.bbox.y);
    }
    out.push_back(std::move(comp));
  }
  return out;
}

/// Regions whose pixel count exceeds `min_area_frac * frame_area`, sorted by
/// the top-left corner of their bounding box (row first).
inline std::vector<RegionOfChange> extract_regions(const BinaryMask& mask, std::int64_t t_ms, std::int64_t frame_area,
                                                   double min_area_frac, int shot_id = 0, int seg_index = 0) {
  const double cutoff = min_area_frac * static_cast<double>(frame_area);
  std::vector<RegionOfChange> out;
  for (auto& c : trace_components(mask)) {
    if (static_cast<double>(c.area_px) <= cutoff) continue;
    out.push_back({t_ms, c.bbox, c.area_px, std::move(c.mask_crop), shot_id, seg_index});
  }
  std::sort(out.begin(), out.end(), [](const RegionOfChange& a, const RegionOfChange& b) {
    return std::tie(a.bbox.y, a.bbox.x, a.bbox.w, a.bbox.h, a.area_px) <
           std::tie(b.bbox.y, b.bbox.x, b.bbox.w, b.bbox.h, b.area_px);
  });
  return out;
}

}  // namespace veasyguide
