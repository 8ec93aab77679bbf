#pragma once

// Independent reference implementations used only by tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "veasyguide/detect.hpp"
#include "veasyguide/geometry.hpp"

namespace oracle {

using veasyguide::BinaryMask;
using veasyguide::Rect;

struct Blob {
  Rect bbox;
  std::int64_t area = 0;
  auto key() const { return std::make_tuple(bbox.x, bbox.y, bbox.w, bbox.h, area); }
};

/// 8-connected labelling by explicit-stack flood fill.
inline std::vector<Blob> flood_fill_blobs(const BinaryMask& m) {
  std::vector<int> label(m.bits.size(), -1);
  std::vector<Blob> out;
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      if (!m.get(x, y) || label[static_cast<std::size_t>(y) * m.width + x] >= 0) continue;
      const int id = static_cast<int>(out.size());
      int x0 = x, x1 = x, y0 = y, y1 = y;
      std::int64_t area = 0;
      std::vector<std::pair<int, int>> stack{{x, y}};
      label[static_cast<std::size_t>(y) * m.width + x] = id;
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        ++area;
        x0 = std::min(x0, cx);
        x1 = std::max(x1, cx);
        y0 = std::min(y0, cy);
        y1 = std::max(y1, cy);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= m.width || ny >= m.height) continue;
            auto& l = label[static_cast<std::size_t>(ny) * m.width + nx];
            if (!m.get(nx, ny) || l >= 0) continue;
            l = id;
            stack.push_back({nx, ny});
          }
        }
      }
      out.push_back({{x0, y0, x1 - x0 + 1, y1 - y0 + 1}, area});
    }
  }
  return out;
}

/// Hu invariants via raw moments and the binomial central-moment expansion,
/// in long double.
inline std::array<long double, 7> hu_from_raw_moments(const BinaryMask& m) {
  long double raw[4][4] = {};
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      if (!m.get(x, y)) continue;
      for (int p = 0; p < 4; ++p) {
        for (int q = 0; p + q < 4; ++q) raw[p][q] += std::pow((long double)x, p) * std::pow((long double)y, q);
      }
    }
  }
  const long double m00 = raw[0][0];
  const long double xb = raw[1][0] / m00, yb = raw[0][1] / m00;
  const long double mu20 = raw[2][0] - xb * raw[1][0];
  const long double mu02 = raw[0][2] - yb * raw[0][1];
  const long double mu11 = raw[1][1] - xb * raw[0][1];
  const long double mu30 = raw[3][0] - 3 * xb * raw[2][0] + 2 * xb * xb * raw[1][0];
  const long double mu03 = raw[0][3] - 3 * yb * raw[0][2] + 2 * yb * yb * raw[0][1];
  const long double mu21 = raw[2][1] - 2 * xb * raw[1][1] - yb * raw[2][0] + 2 * xb * xb * raw[0][1];
  const long double mu12 = raw[1][2] - 2 * yb * raw[1][1] - xb * raw[0][2] + 2 * yb * yb * raw[1][0];
  auto eta = [&](long double mu, int order) { return mu / std::pow(m00, 1.0L + order / 2.0L); };
  const long double n20 = eta(mu20, 2), n02 = eta(mu02, 2), n11 = eta(mu11, 2);
  const long double n30 = eta(mu30, 3), n03 = eta(mu03, 3), n21 = eta(mu21, 3), n12 = eta(mu12, 3);
  std::array<long double, 7> h;
  h[0] = n20 + n02;
  h[1] = (n20 - n02) * (n20 - n02) + 4 * n11 * n11;
  h[2] = std::pow(n30 - 3 * n12, 2) + std::pow(3 * n21 - n03, 2);
  h[3] = std::pow(n30 + n12, 2) + std::pow(n21 + n03, 2);
  h[4] = (n30 - 3 * n12) * (n30 + n12) * (std::pow(n30 + n12, 2) - 3 * std::pow(n21 + n03, 2)) +
         (3 * n21 - n03) * (n21 + n03) * (3 * std::pow(n30 + n12, 2) - std::pow(n21 + n03, 2));
  h[5] = (n20 - n02) * (std::pow(n30 + n12, 2) - std::pow(n21 + n03, 2)) + 4 * n11 * (n30 + n12) * (n21 + n03);
  h[6] = (3 * n21 - n03) * (n30 + n12) * (std::pow(n30 + n12, 2) - 3 * std::pow(n21 + n03, 2)) -
         (n30 - 3 * n12) * (n21 + n03) * (3 * std::pow(n30 + n12, 2) - std::pow(n21 + n03, 2));
  return h;
}

/// Component partition by breadth-first search over an adjacency matrix;
/// each component is a sorted node list, components sorted by first node.
inline std::vector<std::vector<int>> bfs_components(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<bool>> adj(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n)));
  for (auto [a, b] : edges) adj[a][b] = adj[b][a] = true;
  std::vector<bool> seen(static_cast<std::size_t>(n));
  std::vector<std::vector<int>> out;
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<int> comp{s}, frontier{s};
    seen[s] = true;
    while (!frontier.empty()) {
      std::vector<int> next;
      for (int u : frontier) {
        for (int v = 0; v < n; ++v) {
          if (adj[u][v] && !seen[v]) {
            seen[v] = true;
            comp.push_back(v);
            next.push_back(v);
          }
        }
      }
      frontier = std::move(next);
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

/// Random mask with `density` fill probability, optionally smoothed into blobs.
inline BinaryMask random_mask(std::mt19937& rng, int w, int h, double density) {
  BinaryMask m(w, h);
  std::bernoulli_distribution coin(density);
  for (auto& b : m.bits) b = coin(rng) ? 1 : 0;
  return m;
}

/// Filled raster disc of radius r centred in a (2r+1)^2 mask.
inline BinaryMask disc(int r) {
  BinaryMask m(2 * r + 1, 2 * r + 1);
  for (int y = 0; y <= 2 * r; ++y) {
    for (int x = 0; x <= 2 * r; ++x) m.set(x, y, (x - r) * (x - r) + (y - r) * (y - r) <= r * r);
  }
  return m;
}

inline BinaryMask filled(int w, int h) {
  BinaryMask m(w, h);
  std::fill(m.bits.begin(), m.bits.end(), std::uint8_t{1});
  return m;
}

/// Raster-exact 90-degree clockwise rotation.
inline BinaryMask rotate90(const BinaryMask& m) {
  BinaryMask r(m.height, m.width);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) r.set(m.height - 1 - y, x, m.get(x, y));
  }
  return r;
}

/// Pixel replication by an integer factor.
inline BinaryMask upscale(const BinaryMask& m, int k) {
  BinaryMask r(m.width * k, m.height * k);
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) r.set(x, y, m.get(x / k, y / k));
  }
  return r;
}

/// Places `m` at (ox, oy) inside a larger canvas.
inline BinaryMask embed(const BinaryMask& m, int w, int h, int ox, int oy) {
  BinaryMask r(w, h);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) r.set(x + ox, y + oy, m.get(x, y));
  }
  return r;
}

}  // namespace oracle
