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

// Representative-key-view hierarchy. Each level tiles its input grid into
// 2x2 clusters, replaces every cluster by the mean of its members (the RKV)
// and keeps the exact member - RKV differences (the SRVs). The RKV grid of
// one level is the input grid of the next.

#ifndef HMLFC_HIERARCHY_H_
#define HMLFC_HIERARCHY_H_

#include <filesystem>
#include <span>
#include <vector>

#include "hmlfc/lfcore.h"

namespace hmlfc {

inline constexpr int kClusterFactor = 2;

struct ClusterMember {
  int s = 0;  // index into the input grid (clamped for padded members)
  int t = 0;
  bool padded = false;
};

struct Cluster {
  int cs = 0;  // cluster position in the output (RKV) grid
  int ct = 0;
  std::vector<ClusterMember> members;  // t outer, s inner
};

struct ClusterGrid {
  int grid_s = 0;
  int grid_t = 0;
  std::vector<Cluster> clusters;  // row-major, t outer
};

// Tiles an input grid into non-overlapping 2x2 clusters. Odd dimensions
// replicate the last row/column into padded members.
ClusterGrid cluster_planes(int grid_s, int grid_t);

// Per-pixel weighted mean of the members rounded half away from zero.
// Empty weights select the uniform mean.
Plane compute_rkv(std::span<const Plane* const> members,
                  std::span<const int> weights = {});

struct Srv {
  int s = 0;  // provenance in the input grid
  int t = 0;
  Plane plane;
};

struct SrvCluster {
  int cs = 0;
  int ct = 0;
  std::vector<Srv> members;  // padded members are not emitted
};

SrvCluster compute_srvs(const Cluster& cluster, const PlaneGrid& inputs,
                        const Plane& rkv);

struct Level {
  int input_grid_s = 0;
  int input_grid_t = 0;
  PlaneGrid rkvs;
  std::vector<SrvCluster> clusters;  // aligned with rkvs.planes
};

struct HierarchyTree {
  int height = 0;
  std::vector<Level> levels;  // levels[0] is the bottom

  const PlaneGrid& top_rkvs() const { return levels.back().rkvs; }
};

int max_tree_height(int grid_s, int grid_t);

// Throws kOutOfRange unless 1 <= height <= max_tree_height.
HierarchyTree build_tree(const PlaneGrid& field, int height, int threads = 0);

// Leaf (s,t) rebuilt from its top RKV plus the SRVs along the path.
Plane reconstruct_leaf(const HierarchyTree& tree, int s, int t);

// Finds the SRV for input-grid position (s,t) of a level.
const Srv& find_srv(const Level& level, int s, int t);

// Debug export: level_<L>/rkv_<t>_<s>.png and level_<L>/srv_<t>_<s>.png.
// SRVs are shifted by +R (R = half the SRV range) and clamped to 16 bits.
void dump_tree_images(const HierarchyTree& tree,
                      const std::filesystem::path& dir);

}  // namespace hmlfc

#endif  // HMLFC_HIERARCHY_H_
