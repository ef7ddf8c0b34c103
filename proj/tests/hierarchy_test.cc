// Copyright 2026 The HMLFC Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hmlfc/hierarchy.h"

#include <random>

#include <gtest/gtest.h>

#include "hmlfc/error.h"
#include "hmlfc/lfcore.h"

namespace hmlfc {
namespace {

PlaneGrid RandomGrid(int gs, int gt, int w, int h, uint32_t seed) {
  PlaneGrid grid(gs, gt);
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> dist(0, 255);
  for (Plane& p : grid.planes) {
    p = Plane(w, h, kByteRange);
    for (int32_t& v : p.samples()) v = dist(rng);
  }
  return grid;
}

TEST(ClusterTest, EvenGridHasFourRealMembersPerCluster) {
  const ClusterGrid g = cluster_planes(4, 2);
  ASSERT_EQ(g.grid_s, 2);
  ASSERT_EQ(g.grid_t, 1);
  ASSERT_EQ(g.clusters.size(), 2u);
  const Cluster& c = g.clusters[1];
  ASSERT_EQ(c.members.size(), 4u);
  EXPECT_EQ(c.members[0].s, 2);
  EXPECT_EQ(c.members[1].s, 3);
  EXPECT_EQ(c.members[2].t, 1);
  for (const auto& m : c.members) EXPECT_FALSE(m.padded);
}

TEST(ClusterTest, OddGridClampsPaddedMembers) {
  const ClusterGrid g = cluster_planes(3, 3);
  ASSERT_EQ(g.grid_s, 2);
  const Cluster& corner = g.clusters[3];
  int padded = 0;
  for (const auto& m : corner.members) {
    EXPECT_EQ(m.s, 2);
    EXPECT_EQ(m.t, 2);
    padded += m.padded;
  }
  EXPECT_EQ(padded, 3);
}

TEST(RkvTest, UniformMeanRoundsHalfAwayFromZero) {
  Plane a(1, 2, kChromaRange), b = a, c = a, d = a;
  a.at(0, 0) = 1, b.at(0, 0) = 2, c.at(0, 0) = 2, d.at(0, 0) = 5;    // 2.5
  a.at(0, 1) = -1, b.at(0, 1) = -2, c.at(0, 1) = -2, d.at(0, 1) = -5;
  const Plane* members[] = {&a, &b, &c, &d};
  const Plane rkv = compute_rkv(members);
  EXPECT_EQ(rkv.at(0, 0), 3);
  EXPECT_EQ(rkv.at(0, 1), -3);
}

TEST(RkvTest, ShapeMismatchThrows) {
  Plane a(2, 2, kByteRange), b(3, 2, kByteRange);
  const Plane* members[] = {&a, &b};
  EXPECT_THROW(compute_rkv(members), Error);
}

TEST(TreeTest, MaxHeightFollowsSmallerGridSide) {
  EXPECT_EQ(max_tree_height(8, 8), 3);
  EXPECT_EQ(max_tree_height(17, 17), 4);
  EXPECT_EQ(max_tree_height(16, 3), 1);
  EXPECT_EQ(max_tree_height(1, 9), 0);
}

TEST(TreeTest, RejectsHeightsOutsideGrid) {
  const PlaneGrid grid = RandomGrid(4, 4, 2, 2, 1);
  EXPECT_THROW(build_tree(grid, 0), Error);
  EXPECT_THROW(build_tree(grid, 3), Error);
}

class TreeReconstructTest
    : public ::testing::TestWithParam<std::tuple<int, int, int>> {};

TEST_P(TreeReconstructTest, EveryLeafIsRecoveredExactly) {
  const auto [gs, gt, height] = GetParam();
  const PlaneGrid grid = RandomGrid(gs, gt, 5, 3, uint32_t(gs * 100 + gt));
  const HierarchyTree tree = build_tree(grid, height, 1);
  ASSERT_EQ(int(tree.levels.size()), height);
  for (int t = 0; t < gt; ++t) {
    for (int s = 0; s < gs; ++s) {
      EXPECT_EQ(reconstruct_leaf(tree, s, t), grid.at(s, t)) << s << "," << t;
    }
  }
}

TEST_P(TreeReconstructTest, RkvIsMeanOfClampedMembers) {
  const auto [gs, gt, height] = GetParam();
  const PlaneGrid grid = RandomGrid(gs, gt, 4, 4, 7);
  const HierarchyTree tree = build_tree(grid, height, 1);
  const Level& bottom = tree.levels[0];
  for (int ct = 0; ct < bottom.rkvs.grid_t; ++ct) {
    for (int cs = 0; cs < bottom.rkvs.grid_s; ++cs) {
      for (int i = 0; i < 16; ++i) {
        int64_t sum = 0;
        for (int dt = 0; dt < 2; ++dt) {
          for (int ds = 0; ds < 2; ++ds) {
            const int s = std::min(2 * cs + ds, gs - 1);
            const int t = std::min(2 * ct + dt, gt - 1);
            sum += grid.at(s, t).samples()[i];
          }
        }
        EXPECT_EQ(bottom.rkvs.at(cs, ct).samples()[i], div_round_half_away(sum, 4));
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Grids, TreeReconstructTest,
                         ::testing::Values(std::tuple{2, 2, 1}, std::tuple{4, 4, 2},
                                           std::tuple{8, 8, 3}, std::tuple{5, 3, 1},
                                           std::tuple{7, 9, 2}, std::tuple{17, 4, 2}));

TEST(TreeTest, SrvsOmitPaddedMembers) {
  const PlaneGrid grid = RandomGrid(3, 3, 2, 2, 3);
  const HierarchyTree tree = build_tree(grid, 1, 1);
  std::size_t srvs = 0;
  for (const SrvCluster& c : tree.levels[0].clusters) srvs += c.members.size();
  EXPECT_EQ(srvs, 9u);
  EXPECT_THROW(find_srv(tree.levels[0], 3, 0), Error);
}

}  // namespace
}  // namespace hmlfc
