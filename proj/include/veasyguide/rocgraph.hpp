#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "veasyguide/detect.hpp"
#include "veasyguide/error.hpp"
#include "veasyguide/geometry.hpp"
#include "veasyguide/hu_moments.hpp"
#include "veasyguide/union_find.hpp"

namespace veasyguide {

struct GraphParams {
  std::int64_t temporal_ms = 3000;
  double spatial_frac = 0.05;   // of the frame diagonal
  double merge_hu = 0.5;        // max shape dissimilarity for a transient merge
  double same_pos_iou = 0.6;    // min bbox IoU for "same position"

  void validate() const {
    if (temporal_ms <= 0) throw InvalidParameter("--temporal-s", "must be > 0");
    if (!(spatial_frac > 0.0 && spatial_frac <= 1.0)) throw InvalidParameter("--spatial-pct", "must be in (0, 100]");
    if (!(merge_hu > 0.0)) throw InvalidParameter("--hu-merge", "must be > 0");
    if (!(same_pos_iou > 0.0 && same_pos_iou <= 1.0)) throw InvalidParameter("--same-pos-iou", "must be in (0, 1]");
  }
};

/// A graph node: the region, its shape signature, and the last segment it
/// absorbed through transient merging (equal to roc.seg_index when unmerged).
struct RocNode {
  RegionOfChange roc;
  HuSignature signature;
  int last_seg_index = 0;
};

inline RocNode make_node(RegionOfChange roc) {
  RocNode n{std::move(roc), {}, 0};
  n.signature = hu_signature(n.roc);
  n.last_seg_index = n.roc.seg_index;
  return n;
}

struct Edge {
  int i = 0;
  int j = 0;
  double weight = 0.0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct RocGraph {
  std::vector<RocNode> nodes;
  std::vector<Edge> edges;
  double frame_diag = 0.0;
  GraphParams params;
};

inline bool node_order(const RocNode& a, const RocNode& b) {
  return std::tie(a.roc.seg_index, a.roc.bbox.y, a.roc.bbox.x, a.roc.bbox.w, a.roc.bbox.h, a.roc.area_px) <
         std::tie(b.roc.seg_index, b.roc.bbox.y, b.roc.bbox.x, b.roc.bbox.w, b.roc.bbox.h, b.roc.area_px);
}

inline bool temporally_close(const RegionOfChange& a, const RegionOfChange& b, const GraphParams& p) {
  return std::abs(a.t_ms - b.t_ms) < p.temporal_ms;
}

inline bool spatially_close(const RegionOfChange& a, const RegionOfChange& b, double frame_diag, const GraphParams& p) {
  return rect_distance(a.bbox, b.bbox) < p.spatial_frac * frame_diag;
}

/// Edges between every temporally and spatially close pair, weighted by shape
/// dissimilarity. Nodes must be in ascending time order; pairs further apart
/// than the temporal bound are never examined.
inline std::vector<Edge> connect_nodes(const std::vector<RocNode>& nodes, double frame_diag, const GraphParams& p) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (!temporally_close(nodes[i].roc, nodes[j].roc, p)) {
        if (nodes[j].roc.t_ms >= nodes[i].roc.t_ms) break;
        continue;
      }
      if (!spatially_close(nodes[i].roc, nodes[j].roc, frame_diag, p)) continue;
      edges.push_back({static_cast<int>(i), static_cast<int>(j),
                       shape_dissimilarity(nodes[i].signature, nodes[j].signature)});
    }
  }
  return edges;
}

inline RocGraph build_graph(std::vector<RocNode> nodes, double frame_diag, const GraphParams& params) {
  std::stable_sort(nodes.begin(), nodes.end(), node_order);
  RocGraph g;
  g.frame_diag = frame_diag;
  g.params = params;
  g.edges = connect_nodes(nodes, frame_diag, params);
  g.nodes = std::move(nodes);
  return g;
}

inline RocGraph build_graph(std::vector<RegionOfChange> rocs, double frame_diag, const GraphParams& params) {
  std::vector<RocNode> nodes;
  nodes.reserve(rocs.size());
  for (auto& r : rocs) nodes.push_back(make_node(std::move(r)));
  return build_graph(std::move(nodes), frame_diag, params);
}

/// Region covering both inputs; the mask is the union of the two masks in
/// frame coordinates, cropped to the union box.
inline RegionOfChange union_region(const RegionOfChange& a, const RegionOfChange& b) {
  RegionOfChange out;
  out.t_ms = std::min(a.t_ms, b.t_ms);
  out.shot_id = a.shot_id;
  out.seg_index = std::min(a.seg_index, b.seg_index);
  out.bbox = union_bounds(a.bbox, b.bbox);
  out.mask_crop = BinaryMask(out.bbox.w, out.bbox.h);
  for (const RegionOfChange* r : {&a, &b}) {
    for (int y = 0; y < r->bbox.h; ++y) {
      for (int x = 0; x < r->bbox.w; ++x) {
        if (r->mask_crop.get(x, y)) out.mask_crop.set(x + r->bbox.x - out.bbox.x, y + r->bbox.y - out.bbox.y);
      }
    }
  }
  out.area_px = out.mask_crop.count();
  return out;
}

/// One performed merge with the criterion values observed at merge time.
struct MergeRecord {
  int kept = 0;      // index into the input node list
  int absorbed = 0;  // index into the input node list
  int kept_last_seg = 0;
  int absorbed_seg = 0;
  double iou = 0.0;
  double dissimilarity = 0.0;
};

/// Collapses transient duplicates: a node absorbs a node from the segment
/// right after the last one it absorbed when their boxes overlap with IoU at
/// least `same_pos_iou` and their shapes differ by less than `merge_hu`.
/// Nodes are visited in ascending (segment, y, x) order and chains extend in
/// the same pass. Edges are rebuilt from the surviving nodes.
inline RocGraph merge_transients(const RocGraph& g, std::vector<MergeRecord>* log = nullptr) {
  std::vector<RocNode> nodes = g.nodes;
  std::stable_sort(nodes.begin(), nodes.end(), node_order);
  std::vector<bool> alive(nodes.size(), true);

  // Nodes grouped by segment for candidate lookup.
  std::map<int, std::vector<std::size_t>> by_seg;
  for (std::size_t i = 0; i < nodes.size(); ++i) by_seg[nodes[i].roc.seg_index].push_back(i);

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!alive[i]) continue;
    bool extended = true;
    while (extended) {
      extended = false;
      const auto it = by_seg.find(nodes[i].last_seg_index + 1);
      if (it == by_seg.end()) break;
      for (std::size_t j : it->second) {
        if (!alive[j] || j == i) continue;
        const double overlap = iou(nodes[i].roc.bbox, nodes[j].roc.bbox);
        if (overlap < g.params.same_pos_iou) continue;
        const double diss = shape_dissimilarity(nodes[i].signature, nodes[j].signature);
        if (!(diss < g.params.merge_hu)) continue;
        if (log) {
          log->push_back({static_cast<int>(i), static_cast<int>(j), nodes[i].last_seg_index, nodes[j].roc.seg_index,
                          overlap, diss});
        }
        nodes[i].roc = union_region(nodes[i].roc, nodes[j].roc);
        nodes[i].signature = hu_signature(nodes[i].roc);
        nodes[i].last_seg_index = nodes[j].roc.seg_index;
        alive[j] = false;
        extended = true;
        break;
      }
    }
  }

  std::vector<RocNode> survivors;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (alive[i]) survivors.push_back(std::move(nodes[i]));
  }
  return build_graph(std::move(survivors), g.frame_diag, g.params);
}

struct Activity {
  int id = 0;
  std::vector<int> node_ids;
  Rect bbox;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  int shot_id = 0;
};

/// One activity per connected component; edge weights are ignored.
inline std::vector<Activity> extract_activities(const RocGraph& g, std::int64_t segment_ms) {
  UnionFind uf(g.nodes.size());
  for (const Edge& e : g.edges) uf.unite(static_cast<std::size_t>(e.i), static_cast<std::size_t>(e.j));

  std::map<std::size_t, Activity> by_root;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& roc = g.nodes[i].roc;
    auto [it, fresh] = by_root.try_emplace(uf.find(i));
    Activity& a = it->second;
    if (fresh) {
      a.bbox = roc.bbox;
      a.start_ms = roc.t_ms;
      a.end_ms = roc.t_ms;
      a.shot_id = roc.shot_id;
    } else {
      a.bbox = union_bounds(a.bbox, roc.bbox);
      a.start_ms = std::min(a.start_ms, roc.t_ms);
      a.end_ms = std::max(a.end_ms, roc.t_ms);
    }
    a.node_ids.push_back(static_cast<int>(i));
  }

  std::vector<Activity> out;
  out.reserve(by_root.size());
  for (auto& [root, a] : by_root) {
    a.end_ms += segment_ms;
    out.push_back(std::move(a));
  }
  std::sort(out.begin(), out.end(), [](const Activity& a, const Activity& b) {
    return std::tie(a.start_ms, a.bbox.y, a.bbox.x, a.node_ids.front()) <
           std::tie(b.start_ms, b.bbox.y, b.bbox.x, b.node_ids.front());
  });
  for (std::size_t k = 0; k < out.size(); ++k) out[k].id = static_cast<int>(k);
  return out;
}

}  // namespace veasyguide
