#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "veasyguide/rocgraph.hpp"

namespace vg = veasyguide;

namespace {

constexpr double kFullHdDiag = 2202.9071700822983;  // hypot(1920, 1080)

vg::RegionOfChange roc_from_mask(std::int64_t t_ms, int seg, int x, int y, const vg::BinaryMask& mask) {
  vg::RegionOfChange r;
  r.t_ms = t_ms;
  r.seg_index = seg;
  r.bbox = {x, y, mask.width, mask.height};
  r.mask_crop = mask;
  r.area_px = mask.count();
  return r;
}

vg::RegionOfChange box_roc(std::int64_t t_ms, int seg, vg::Rect box) {
  return roc_from_mask(t_ms, seg, box.x, box.y, oracle::filled(box.w, box.h));
}

bool has_edge(const vg::RocGraph& g, int i, int j) {
  return std::any_of(g.edges.begin(), g.edges.end(), [&](const vg::Edge& e) {
    return (e.i == i && e.j == j) || (e.i == j && e.j == i);
  });
}

std::set<std::pair<int, int>> covered_pixels(const vg::RocGraph& g) {
  std::set<std::pair<int, int>> px;
  for (const auto& n : g.nodes) {
    for (int y = 0; y < n.roc.bbox.h; ++y) {
      for (int x = 0; x < n.roc.bbox.w; ++x) {
        if (n.roc.mask_crop.get(x, y)) px.insert({x + n.roc.bbox.x, y + n.roc.bbox.y});
      }
    }
  }
  return px;
}

}  // namespace

TEST(BuildGraph, OverlappingBoxesOneSecondApartConnect) {
  const auto g = vg::build_graph({box_roc(0, 0, {10, 10, 20, 20}), box_roc(1000, 3, {15, 15, 20, 20})}, 1000, {});
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.edges[0].i, 0);
  EXPECT_EQ(g.edges[0].j, 1);
  EXPECT_EQ(g.edges[0].weight, 0.0);
}

TEST(BuildGraph, TemporalBoundIsStrict) {
  const vg::Rect box{100, 100, 10, 10};
  EXPECT_EQ(vg::build_graph({box_roc(0, 0, box), box_roc(2999, 9, box)}, kFullHdDiag, {}).edges.size(), 1u);
  EXPECT_TRUE(vg::build_graph({box_roc(0, 0, box), box_roc(3000, 9, box)}, kFullHdDiag, {}).edges.empty());
}

TEST(BuildGraph, SpatialBoundIsFivePercentOfDiagonal) {
  // Bound: 0.05 * 2202.907 = 110.145 px.
  const vg::Rect a{100, 100, 10, 10};
  auto gap = [&](int dx, int dy) {
    return vg::build_graph({box_roc(0, 0, a), box_roc(0, 0, {a.right() + dx, a.bottom() + dy, 10, 10})}, kFullHdDiag,
                           {})
        .edges.size();
  };
  EXPECT_EQ(gap(109, -10), 1u);
  EXPECT_EQ(gap(110, -10), 1u);
  EXPECT_EQ(gap(111, -10), 0u);
  EXPECT_EQ(gap(77, 77), 1u);  // corner distance 108.9
  EXPECT_EQ(gap(78, 78), 0u);  // corner distance 110.3
  EXPECT_NEAR(vg::rect_distance(a, {a.right() + 77, a.bottom() + 77, 5, 5}), 108.894, 1e-3);
}

TEST(BuildGraph, EdgeSoundnessExhaustive) {
  std::mt19937 rng(8);
  const vg::GraphParams p;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<vg::RegionOfChange> rocs;
    const int n = 2 + static_cast<int>(rng() % 14);
    for (int k = 0; k < n; ++k) {
      const int seg = static_cast<int>(rng() % 20);
      rocs.push_back(box_roc(seg * 333, seg,
                             {static_cast<int>(rng() % 600), static_cast<int>(rng() % 300), 1 + static_cast<int>(rng() % 40),
                              1 + static_cast<int>(rng() % 40)}));
    }
    const auto g = vg::build_graph(rocs, vg::diagonal(640, 360), p);
    for (const auto& e : g.edges) EXPECT_LT(e.i, e.j);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const auto& a = g.nodes[i].roc;
        const auto& b = g.nodes[j].roc;
        const bool close = std::abs(a.t_ms - b.t_ms) < p.temporal_ms &&
                           vg::rect_distance(a.bbox, b.bbox) < p.spatial_frac * g.frame_diag;
        EXPECT_EQ(has_edge(g, i, j), close);
      }
    }
  }
}

TEST(MergeTransients, IdenticalBlobsInAdjacentSegmentsMerge) {
  const auto disc = oracle::disc(6);
  const auto g = vg::build_graph({roc_from_mask(3333, 10, 50, 50, disc), roc_from_mask(3667, 11, 50, 50, disc)}, 1000, {});
  std::vector<vg::MergeRecord> log;
  const auto merged = vg::merge_transients(g, &log);
  ASSERT_EQ(merged.nodes.size(), 1u);
  EXPECT_EQ(merged.nodes[0].roc.t_ms, 3333);
  EXPECT_EQ(merged.nodes[0].roc.seg_index, 10);
  EXPECT_EQ(merged.nodes[0].last_seg_index, 11);
  EXPECT_EQ(log.size(), 1u);
}

TEST(MergeTransients, NonAdjacentSegmentsStaySeparate) {
  const auto disc = oracle::disc(6);
  const auto g = vg::build_graph({roc_from_mask(3333, 10, 50, 50, disc), roc_from_mask(4000, 12, 50, 50, disc)}, 1000, {});
  EXPECT_EQ(vg::merge_transients(g).nodes.size(), 2u);
}

TEST(MergeTransients, DifferentShapesStaySeparate) {
  // Same 17x17 box: a disc versus a thin U outline.
  const auto circle = oracle::disc(8);
  vg::BinaryMask outline(17, 17);
  for (int k = 0; k < 17; ++k) {
    outline.set(k, 16);
    outline.set(0, k);
    outline.set(16, k);
  }
  const auto g =
      vg::build_graph({roc_from_mask(0, 0, 20, 20, circle), roc_from_mask(333, 1, 20, 20, outline)}, 1000, {});
  ASSERT_GT(vg::shape_dissimilarity(g.nodes[0].signature, g.nodes[1].signature), 0.5);
  EXPECT_EQ(vg::merge_transients(g).nodes.size(), 2u);
}

TEST(MergeTransients, LowOverlapStaysSeparate) {
  const auto disc = oracle::disc(6);  // 13x13
  const auto g = vg::build_graph({roc_from_mask(0, 0, 50, 50, disc), roc_from_mask(333, 1, 56, 50, disc)}, 1000, {});
  ASSERT_LT(vg::iou(g.nodes[0].roc.bbox, g.nodes[1].roc.bbox), 0.6);
  EXPECT_EQ(vg::merge_transients(g).nodes.size(), 2u);
}

TEST(MergeTransients, ChainsThroughConsecutiveSegments) {
  const auto disc = oracle::disc(6);
  std::vector<vg::RegionOfChange> rocs;
  for (int k = 0; k < 5; ++k) rocs.push_back(roc_from_mask(k * 333, k, 50, 50, disc));
  const auto merged = vg::merge_transients(vg::build_graph(rocs, 1000, {}));
  ASSERT_EQ(merged.nodes.size(), 1u);
  EXPECT_EQ(merged.nodes[0].last_seg_index, 4);
}

TEST(MergeTransients, SoundnessAndCoverageProperty) {
  std::mt19937 rng(12);
  const vg::GraphParams p;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<vg::RegionOfChange> rocs;
    const int n = 2 + static_cast<int>(rng() % 15);
    for (int k = 0; k < n; ++k) {
      const int seg = static_cast<int>(rng() % 6);
      const int r = 3 + static_cast<int>(rng() % 4);
      rocs.push_back(roc_from_mask(seg * 333, seg, 40 + static_cast<int>(rng() % 4), 40 + static_cast<int>(rng() % 4),
                                   rng() % 2 ? oracle::disc(r) : oracle::filled(2 * r + 1, 2 * r + 1)));
    }
    const auto g = vg::build_graph(rocs, 1000, p);
    std::vector<vg::MergeRecord> log;
    const auto merged = vg::merge_transients(g, &log);
    for (const auto& m : log) {
      EXPECT_EQ(m.absorbed_seg, m.kept_last_seg + 1);
      EXPECT_GE(m.iou, p.same_pos_iou);
      EXPECT_LT(m.dissimilarity, p.merge_hu);
    }
    EXPECT_EQ(merged.nodes.size() + log.size(), g.nodes.size());
    EXPECT_EQ(covered_pixels(merged), covered_pixels(g));
    for (const auto& node : merged.nodes) {
      EXPECT_EQ(node.roc.area_px, node.roc.mask_crop.count());
      EXPECT_EQ(vg::hu_signature(node.roc).h, node.signature.h);
    }
    for (const auto& e : merged.edges) {
      EXPECT_TRUE(vg::temporally_close(merged.nodes[e.i].roc, merged.nodes[e.j].roc, p));
      EXPECT_TRUE(vg::spatially_close(merged.nodes[e.i].roc, merged.nodes[e.j].roc, merged.frame_diag, p));
    }
  }
}

TEST(Activities, TwoComponents) {
  const auto g = vg::build_graph(
      {box_roc(0, 0, {10, 10, 10, 10}), box_roc(1000, 3, {15, 12, 10, 10}), box_roc(10000, 30, {12, 12, 5, 5})}, 1000,
      {});
  const auto acts = vg::extract_activities(g, 333);
  ASSERT_EQ(acts.size(), 2u);
  EXPECT_EQ(acts[0].start_ms, 0);
  EXPECT_EQ(acts[0].end_ms, 1333);
  EXPECT_EQ(acts[0].bbox, (vg::Rect{10, 10, 15, 12}));
  EXPECT_EQ(acts[0].node_ids.size(), 2u);
  EXPECT_EQ(acts[1].start_ms, 10000);
  EXPECT_EQ(acts[1].id, 1);
}

TEST(Activities, SingleNodeSpansOneSegment) {
  const auto acts = vg::extract_activities(vg::build_graph({box_roc(500, 1, {0, 0, 4, 4})}, 100, {}), 333);
  ASSERT_EQ(acts.size(), 1u);
  EXPECT_EQ(acts[0].start_ms, 500);
  EXPECT_EQ(acts[0].end_ms, 833);
}

TEST(Activities, PartitionMatchesBfsOracleOnRandomGraphs) {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 20);
    vg::RocGraph g;
    g.frame_diag = 100;
    for (int k = 0; k < n; ++k) {
      g.nodes.push_back(vg::make_node(box_roc(static_cast<int>(rng() % 5000), k, {static_cast<int>(rng() % 90),
                                                                                   static_cast<int>(rng() % 90), 3, 3})));
    }
    std::vector<std::pair<int, int>> edges;
    const int m = static_cast<int>(rng() % (2 * n));
    for (int e = 0; e < m; ++e) {
      int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      edges.push_back({a, b});
      g.edges.push_back({a, b, 1.0});
    }
    auto expected = oracle::bfs_components(n, edges);
    std::vector<std::vector<int>> got;
    for (auto a : vg::extract_activities(g, 333)) {
      std::sort(a.node_ids.begin(), a.node_ids.end());
      // Activity geometry follows its members.
      std::int64_t t_min = INT64_MAX, t_max = INT64_MIN;
      for (int id : a.node_ids) {
        EXPECT_TRUE(a.bbox.contains(g.nodes[id].roc.bbox));
        t_min = std::min(t_min, g.nodes[id].roc.t_ms);
        t_max = std::max(t_max, g.nodes[id].roc.t_ms);
      }
      EXPECT_EQ(a.start_ms, t_min);
      EXPECT_EQ(a.end_ms - 333, t_max);
      got.push_back(a.node_ids);
    }
    std::sort(got.begin(), got.end());
    std::sort(expected.begin(), expected.end());
    ASSERT_EQ(got, expected) << "trial " << trial;
  }
}

TEST(Activities, DeterministicUnderInputPermutation) {
  std::mt19937 rng(31);
  std::vector<vg::RegionOfChange> rocs;
  for (int k = 0; k < 30; ++k) {
    const int seg = k / 3;
    rocs.push_back(box_roc(seg * 333, seg, {static_cast<int>(rng() % 500), static_cast<int>(rng() % 300), 8, 8}));
  }
  auto run = [](std::vector<vg::RegionOfChange> in) {
    const auto g = vg::merge_transients(vg::build_graph(std::move(in), vg::diagonal(640, 360), {}));
    std::vector<std::tuple<std::int64_t, std::int64_t, int, int, int, int>> out;
    for (const auto& a : vg::extract_activities(g, 333)) {
      out.emplace_back(a.start_ms, a.end_ms, a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h);
    }
    return out;
  };
  const auto base = run(rocs);
  std::shuffle(rocs.begin(), rocs.end(), rng);
  EXPECT_EQ(run(rocs), base);
}
