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

#include <algorithm>
#include <numeric>
#include <string>

#include "hmlfc/error.h"
#include "hmlfc/image_io.h"
#include "hmlfc/parallel.h"

namespace hmlfc {

ClusterGrid cluster_planes(int grid_s, int grid_t) {
  if (grid_s < 1 || grid_t < 1) {
    throw Error(ErrorCode::kInvalidArgument, "cluster_planes: empty grid");
  }
  ClusterGrid out;
  out.grid_s = (grid_s + kClusterFactor - 1) / kClusterFactor;
  out.grid_t = (grid_t + kClusterFactor - 1) / kClusterFactor;
  out.clusters.reserve(std::size_t(out.grid_s) * out.grid_t);
  for (int ct = 0; ct < out.grid_t; ++ct) {
    for (int cs = 0; cs < out.grid_s; ++cs) {
      Cluster c;
      c.cs = cs;
      c.ct = ct;
      for (int dt = 0; dt < kClusterFactor; ++dt) {
        for (int ds = 0; ds < kClusterFactor; ++ds) {
          const int s = cs * kClusterFactor + ds;
          const int t = ct * kClusterFactor + dt;
          c.members.push_back({std::min(s, grid_s - 1), std::min(t, grid_t - 1),
                               s >= grid_s || t >= grid_t});
        }
      }
      out.clusters.push_back(std::move(c));
    }
  }
  return out;
}

Plane compute_rkv(std::span<const Plane* const> members,
                  std::span<const int> weights) {
  if (members.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "compute_rkv: empty cluster");
  }
  if (!weights.empty() && weights.size() != members.size()) {
    throw Error(ErrorCode::kInvalidArgument, "compute_rkv: weight count mismatch");
  }
  const Plane& first = *members[0];
  ValueRange range = first.range();
  for (const Plane* m : members) {
    if (!m->same_shape(first)) {
      throw Error(ErrorCode::kShapeMismatch, "compute_rkv: member shapes differ");
    }
    range.min = std::min(range.min, m->range().min);
    range.max = std::max(range.max, m->range().max);
  }
  int64_t total_weight = 0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    total_weight += weights.empty() ? 1 : weights[i];
  }
  if (total_weight <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "compute_rkv: weights must sum > 0");
  }
  Plane rkv(first.width(), first.height(), range);
  auto out = rkv.samples();
  std::vector<int64_t> acc(out.size(), 0);
  for (std::size_t m = 0; m < members.size(); ++m) {
    const int64_t w = weights.empty() ? 1 : weights[m];
    const auto src = members[m]->samples();
    for (std::size_t i = 0; i < src.size(); ++i) acc[i] += w * src[i];
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<int32_t>(div_round_half_away(acc[i], total_weight));
  }
  return rkv;
}

SrvCluster compute_srvs(const Cluster& cluster, const PlaneGrid& inputs,
                        const Plane& rkv) {
  SrvCluster out;
  out.cs = cluster.cs;
  out.ct = cluster.ct;
  for (const ClusterMember& m : cluster.members) {
    if (m.padded) continue;
    const Plane& src = inputs.at(m.s, m.t);
    if (!src.same_shape(rkv)) {
      throw Error(ErrorCode::kShapeMismatch, "compute_srvs: shape mismatch");
    }
    const int32_t r = static_cast<int32_t>(src.range().width());
    Plane srv(src.width(), src.height(), ValueRange{-r, r});
    const auto a = src.samples();
    const auto b = rkv.samples();
    auto d = srv.samples();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
    out.members.push_back({m.s, m.t, std::move(srv)});
  }
  return out;
}

int max_tree_height(int grid_s, int grid_t) {
  int h = 0;
  int n = std::min(grid_s, grid_t);
  while (n >= 2) {
    n /= 2;
    ++h;
  }
  return h;
}

HierarchyTree build_tree(const PlaneGrid& field, int height, int threads) {
  const int max_h = max_tree_height(field.grid_s, field.grid_t);
  if (height < 1 || height > max_h) {
    throw Error(ErrorCode::kOutOfRange,
                "tree height " + std::to_string(height) + " outside [1, " +
                    std::to_string(max_h) + "] for a " +
                    std::to_string(field.grid_s) + "x" +
                    std::to_string(field.grid_t) + " grid");
  }
  HierarchyTree tree;
  tree.height = height;
  const PlaneGrid* input = &field;
  for (int l = 0; l < height; ++l) {
    const ClusterGrid clusters = cluster_planes(input->grid_s, input->grid_t);
    Level level;
    level.input_grid_s = input->grid_s;
    level.input_grid_t = input->grid_t;
    level.rkvs = PlaneGrid(clusters.grid_s, clusters.grid_t);
    level.clusters.resize(clusters.clusters.size());
    parallel_for(clusters.clusters.size(), threads, [&](std::size_t i) {
      const Cluster& c = clusters.clusters[i];
      std::vector<const Plane*> members;
      for (const auto& m : c.members) members.push_back(&input->at(m.s, m.t));
      level.rkvs.planes[i] = compute_rkv(members);
      level.clusters[i] = compute_srvs(c, *input, level.rkvs.planes[i]);
    });
    tree.levels.push_back(std::move(level));
    input = &tree.levels.back().rkvs;
  }
  return tree;
}

const Srv& find_srv(const Level& level, int s, int t) {
  const int cs = s / kClusterFactor, ct = t / kClusterFactor;
  const SrvCluster& c = level.clusters[std::size_t(ct) * level.rkvs.grid_s + cs];
  for (const Srv& m : c.members) {
    if (m.s == s && m.t == t) return m;
  }
  throw Error(ErrorCode::kOutOfRange, "no SRV at requested position");
}

Plane reconstruct_leaf(const HierarchyTree& tree, int s, int t) {
  const int shift = tree.height;
  Plane out = tree.top_rkvs().at(s >> shift, t >> shift);
  auto dst = out.samples();
  for (int l = 0; l < tree.height; ++l) {
    const Srv& srv = find_srv(tree.levels[l], s >> l, t >> l);
    const auto src = srv.plane.samples();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  return out;
}

namespace {

void write_biased(const std::filesystem::path& path, const Plane& p,
                  int32_t bias) {
  Raster r;
  r.width = p.width();
  r.height = p.height();
  r.channels = 1;
  r.bit_depth = 16;
  r.samples.resize(p.size());
  const auto src = p.samples();
  for (std::size_t i = 0; i < src.size(); ++i) {
    r.samples[i] = static_cast<uint16_t>(std::clamp(src[i] + bias, 0, 65535));
  }
  write_file(path, encode_png(r));
}

}  // namespace

void dump_tree_images(const HierarchyTree& tree,
                      const std::filesystem::path& dir) {
  for (std::size_t l = 0; l < tree.levels.size(); ++l) {
    const Level& level = tree.levels[l];
    const auto ldir = dir / ("level_" + std::to_string(l));
    std::filesystem::create_directories(ldir);
    for (int t = 0; t < level.rkvs.grid_t; ++t) {
      for (int s = 0; s < level.rkvs.grid_s; ++s) {
        const Plane& p = level.rkvs.at(s, t);
        write_biased(ldir / ("rkv_" + std::to_string(t) + "_" +
                             std::to_string(s) + ".png"),
                     p, -p.range().min);
      }
    }
    for (const SrvCluster& c : level.clusters) {
      for (const Srv& m : c.members) {
        write_biased(ldir / ("srv_" + std::to_string(m.t) + "_" +
                             std::to_string(m.s) + ".png"),
                     m.plane, m.plane.range().max);
      }
    }
  }
}

}  // namespace hmlfc
