#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>

namespace veasyguide {

/// Axis-aligned pixel rectangle covering columns [x, x+w) and rows [y, y+h).
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  int right() const { return x + w; }
  int bottom() const { return y + h; }
  std::int64_t area() const { return std::int64_t{w} * h; }
  bool empty() const { return w <= 0 || h <= 0; }

  bool contains(const Rect& o) const {
    return o.x >= x && o.y >= y && o.right() <= right() && o.bottom() <= bottom();
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const Rect& r) {
  return os << "Rect{" << r.x << ',' << r.y << ',' << r.w << ',' << r.h << '}';
}

inline Rect union_bounds(const Rect& a, const Rect& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  const int x0 = std::min(a.x, b.x);
  const int y0 = std::min(a.y, b.y);
  return {x0, y0, std::max(a.right(), b.right()) - x0, std::max(a.bottom(), b.bottom()) - y0};
}

inline std::int64_t intersection_area(const Rect& a, const Rect& b) {
  const std::int64_t iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const std::int64_t ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  return (iw > 0 && ih > 0) ? iw * ih : 0;
}

inline double iou(const Rect& a, const Rect& b) {
  const std::int64_t inter = intersection_area(a, b);
  const std::int64_t uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

/// Minimal Euclidean distance between two rectangles; 0 when they touch or
/// intersect.
inline double rect_distance(const Rect& a, const Rect& b) {
  const double dx = std::max({0, b.x - a.right(), a.x - b.right()});
  const double dy = std::max({0, b.y - a.bottom(), a.y - b.bottom()});
  return std::hypot(dx, dy);
}

inline double diagonal(int width, int height) {
  return std::hypot(static_cast<double>(width), static_cast<double>(height));
}

}  // namespace veasyguide
