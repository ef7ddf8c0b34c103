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

#include "hmlfc/motion.h"

#include <algorithm>
#include <cstdlib>
#include <limits>

#include "hmlfc/error.h"
#include "hmlfc/parallel.h"

namespace hmlfc {

void McConfig::validate() const {
  if (block_size != 2 && block_size != 4 && block_size != 8 && block_size != 16) {
    throw Error(ErrorCode::kInvalidArgument,
                "block size must be one of 2, 4, 8, 16");
  }
  if (window < 0 || window > 255) {
    throw Error(ErrorCode::kInvalidArgument, "search window must be in [0, 255]");
  }
}

BlockRect block_rect(int plane_width, int plane_height, int block_size, int bx,
                     int by) {
  BlockRect r;
  r.x = bx * block_size;
  r.y = by * block_size;
  r.w = std::min(block_size, plane_width - r.x);
  r.h = std::min(block_size, plane_height - r.y);
  return r;
}

namespace {

int32_t ref_sample(const Plane& ref, int x, int y) {
  if (x < 0 || y < 0 || x >= ref.width() || y >= ref.height()) return 0;
  return ref.at(x, y);
}

}  // namespace

ResidualPair block_residuals(const Plane& pred, BlockRect rect, const Plane& ref,
                             int dx, int dy) {
  ResidualPair r;
  for (int y = rect.y; y < rect.y + rect.h; ++y) {
    for (int x = rect.x; x < rect.x + rect.w; ++x) {
      const int64_t p = pred.at(x, y);
      const int64_t q = ref_sample(ref, x + dx, y + dy);
      r.minus += std::llabs(p - q);
      r.plus += std::llabs(p + q);
    }
  }
  return r;
}

SearchReference::SearchReference(const Plane& ref, int window)
    : ref_(&ref),
      window_(window),
      stride_(std::size_t(ref.width()) + 2 * std::size_t(window)),
      padded_(stride_ * (std::size_t(ref.height()) + 2 * std::size_t(window)), 0) {
  for (int y = 0; y < ref.height(); ++y) {
    const auto src = ref.row(y);
    std::copy(src.begin(), src.end(),
              padded_.begin() + std::size_t(y + window) * stride_ + window);
  }
}

BlockMatch search_block(const Plane& pred, BlockRect rect,
                        const SearchReference& ref, const McConfig& cfg) {
  const int w = cfg.window;
  if (w > ref.window()) {
    throw Error(ErrorCode::kInvalidArgument, "search window exceeds padding");
  }
  // Block samples gathered once; at most 16x16.
  int32_t block[256];
  for (int y = 0; y < rect.h; ++y) {
    for (int x = 0; x < rect.w; ++x) block[y * rect.w + x] = pred.at(rect.x + x, rect.y + y);
  }
  constexpr int64_t kNone = std::numeric_limits<int64_t>::max();
  int64_t best = kNone;
  McMode best_mode = McMode::kSubtractive;
  int best_dx = 0, best_dy = 0;
  for (int dy = -w; dy <= w; ++dy) {
    for (int dx = -w; dx <= w; ++dx) {
      // A subtractive candidate also wins a tie against an additive best.
      const int64_t sub_limit = best_mode == McMode::kAdditive ? best : best - 1;
      const int64_t add_limit = cfg.phase_shift ? best - 1 : -1;
      int64_t minus = 0, plus = 0;
      bool pruned = false;
      for (int y = 0; y < rect.h; ++y) {
        const int32_t* r = ref.row_ptr(rect.x + dx, rect.y + y + dy);
        const int32_t* p = block + y * rect.w;
        int32_t row_minus = 0, row_plus = 0;
        for (int x = 0; x < rect.w; ++x) {
          row_minus += std::abs(p[x] - r[x]);
          row_plus += std::abs(p[x] + r[x]);
        }
        minus += row_minus;
        plus += row_plus;
        if (minus > sub_limit && plus > add_limit) {
          pruned = true;
          break;
        }
      }
      if (pruned) continue;
      if (minus <= sub_limit) {
        best = minus;
        best_mode = McMode::kSubtractive;
        best_dx = dx;
        best_dy = dy;
      }
      if (cfg.phase_shift && plus < best) {
        best = plus;
        best_mode = McMode::kAdditive;
        best_dx = dx;
        best_dy = dy;
      }
    }
    if (best == 0 && best_mode == McMode::kSubtractive) break;
  }
  BlockMatch m;
  m.record.mode = best_mode;
  m.record.dx = best_dx;
  m.record.dy = best_dy;
  m.record.bx = rect.x / std::max(1, cfg.block_size);
  m.record.by = rect.y / std::max(1, cfg.block_size);
  m.delta = best;
  return m;
}

BlockMatch search_block(const Plane& pred, BlockRect rect, const Plane& ref,
                        const McConfig& cfg) {
  const SearchReference padded(ref, cfg.window);
  return search_block(pred, rect, padded, cfg);
}

std::vector<int32_t> residual_block(const Plane& pred, BlockRect rect,
                                    const Plane& ref, const MotionRecord& rec) {
  std::vector<int32_t> out;
  out.reserve(rect.count());
  const int sign = rec.mode == McMode::kSubtractive ? -1 : 1;
  for (int y = rect.y; y < rect.y + rect.h; ++y) {
    for (int x = rect.x; x < rect.x + rect.w; ++x) {
      out.push_back(pred.at(x, y) + sign * ref_sample(ref, x + rec.dx, y + rec.dy));
    }
  }
  return out;
}

std::vector<int32_t> recompensate_block(std::span<const int32_t> residual,
                                        BlockRect rect, const Plane& ref,
                                        const MotionRecord& rec) {
  if (residual.size() != static_cast<std::size_t>(rect.count())) {
    throw Error(ErrorCode::kShapeMismatch, "recompensate_block: size mismatch");
  }
  std::vector<int32_t> out(residual.begin(), residual.end());
  const int sign = rec.mode == McMode::kSubtractive ? 1 : -1;
  std::size_t i = 0;
  for (int y = rect.y; y < rect.y + rect.h; ++y) {
    for (int x = rect.x; x < rect.x + rect.w; ++x, ++i) {
      out[i] += sign * ref_sample(ref, x + rec.dx, y + rec.dy);
    }
  }
  return out;
}

ClusterRoles select_references(const SrvCluster& cluster,
                               ReferenceChoice choice) {
  if (cluster.members.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "select_references: empty cluster");
  }
  ClusterRoles roles;
  if (choice == ReferenceChoice::kCenter) {
    // Member nearest the centroid of the member positions; first wins ties.
    double cs = 0, ct = 0;
    for (const Srv& m : cluster.members) {
      cs += m.s;
      ct += m.t;
    }
    cs /= cluster.members.size();
    ct /= cluster.members.size();
    double best = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < cluster.members.size(); ++i) {
      const double ds = cluster.members[i].s - cs, dt = cluster.members[i].t - ct;
      const double d = ds * ds + dt * dt;
      if (d < best - 1e-12) {
        best = d;
        roles.reference = static_cast<int>(i);
      }
    }
  }
  for (std::size_t i = 0; i < cluster.members.size(); ++i) {
    if (static_cast<int>(i) != roles.reference) {
      roles.predictive.push_back(static_cast<int>(i));
    }
  }
  return roles;
}

std::vector<ClusterRoles> select_references(const Level& level,
                                            const McConfig& cfg) {
  std::vector<ClusterRoles> out;
  out.reserve(level.clusters.size());
  for (const SrvCluster& c : level.clusters) {
    out.push_back(select_references(c, cfg.reference));
  }
  return out;
}

CompensatedPlane compensate_plane(const Plane& pred, const Plane& ref,
                                  const McConfig& cfg, int ref_id, int threads) {
  cfg.validate();
  if (!pred.same_shape(ref)) {
    throw Error(ErrorCode::kShapeMismatch, "compensate_plane: shape mismatch");
  }
  const SearchReference padded(ref, cfg.window);
  const int nbx = blocks_across(pred.width(), cfg.block_size);
  const int nby = blocks_across(pred.height(), cfg.block_size);
  CompensatedPlane out;
  const int32_t r = static_cast<int32_t>(
      std::max(pred.range().width(), ref.range().width()));
  out.residual = Plane(pred.width(), pred.height(), ValueRange{-r, r});
  out.records.resize(std::size_t(nbx) * nby);
  out.deltas.resize(out.records.size());
  parallel_for(static_cast<std::size_t>(nby), threads, [&](std::size_t row) {
    const int by = static_cast<int>(row);
    for (int bx = 0; bx < nbx; ++bx) {
      const BlockRect rect =
          block_rect(pred.width(), pred.height(), cfg.block_size, bx, by);
      BlockMatch m = search_block(pred, rect, padded, cfg);
      m.record.bx = bx;
      m.record.by = by;
      m.record.ref_id = ref_id;
      const std::vector<int32_t> res = residual_block(pred, rect, ref, m.record);
      std::size_t i = 0;
      for (int y = rect.y; y < rect.y + rect.h; ++y) {
        for (int x = rect.x; x < rect.x + rect.w; ++x) out.residual.at(x, y) = res[i++];
      }
      out.records[std::size_t(by) * nbx + bx] = m.record;
      out.deltas[std::size_t(by) * nbx + bx] = m.delta;
    }
  });
  return out;
}

Plane recompensate_plane(const Plane& residual,
                         std::span<const MotionRecord> records, const Plane& ref,
                         const McConfig& cfg) {
  const int nbx = blocks_across(residual.width(), cfg.block_size);
  const int nby = blocks_across(residual.height(), cfg.block_size);
  if (records.size() != std::size_t(nbx) * nby) {
    throw Error(ErrorCode::kShapeMismatch, "recompensate_plane: record count");
  }
  Plane out = residual;
  for (int by = 0; by < nby; ++by) {
    for (int bx = 0; bx < nbx; ++bx) {
      const BlockRect rect =
          block_rect(residual.width(), residual.height(), cfg.block_size, bx, by);
      std::vector<int32_t> block;
      block.reserve(rect.count());
      for (int y = rect.y; y < rect.y + rect.h; ++y) {
        for (int x = rect.x; x < rect.x + rect.w; ++x) block.push_back(residual.at(x, y));
      }
      const auto orig = recompensate_block(block, rect, ref,
                                           records[std::size_t(by) * nbx + bx]);
      std::size_t i = 0;
      for (int y = rect.y; y < rect.y + rect.h; ++y) {
        for (int x = rect.x; x < rect.x + rect.w; ++x) out.at(x, y) = orig[i++];
      }
    }
  }
  return out;
}

McLevel compensate_level(const Level& level, const McConfig& cfg, int threads) {
  cfg.validate();
  const std::vector<ClusterRoles> roles = select_references(level, cfg);
  McLevel out;
  out.clusters.resize(level.clusters.size());
  struct Job {
    std::size_t cluster;
    int member;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < level.clusters.size(); ++c) {
    const SrvCluster& src = level.clusters[c];
    McCluster& dst = out.clusters[c];
    dst.cs = src.cs;
    dst.ct = src.ct;
    dst.reference = roles[c].reference;
    dst.members.resize(src.members.size());
    for (std::size_t i = 0; i < src.members.size(); ++i) {
      dst.members[i].s = src.members[i].s;
      dst.members[i].t = src.members[i].t;
    }
    McSrv& ref = dst.members[roles[c].reference];
    ref.is_reference = true;
    ref.plane = src.members[roles[c].reference].plane;
    for (int p : roles[c].predictive) jobs.push_back({c, p});
  }
  parallel_for(jobs.size(), threads, [&](std::size_t j) {
    const Job& job = jobs[j];
    const SrvCluster& src = level.clusters[job.cluster];
    McCluster& dst = out.clusters[job.cluster];
    CompensatedPlane cp =
        compensate_plane(src.members[job.member].plane,
                         src.members[dst.reference].plane, cfg,
                         static_cast<int>(job.cluster), 1);
    McSrv& m = dst.members[job.member];
    m.plane = std::move(cp.residual);
    m.records = std::move(cp.records);
    m.deltas = std::move(cp.deltas);
  });
  return out;
}

std::vector<SrvCluster> recompensate_level(const McLevel& level,
                                           const McConfig& cfg) {
  std::vector<SrvCluster> out;
  out.reserve(level.clusters.size());
  for (const McCluster& c : level.clusters) {
    SrvCluster sc;
    sc.cs = c.cs;
    sc.ct = c.ct;
    const Plane& ref = c.members[c.reference].plane;
    for (const McSrv& m : c.members) {
      Srv srv;
      srv.s = m.s;
      srv.t = m.t;
      srv.plane = m.is_reference ? m.plane
                                 : recompensate_plane(m.plane, m.records, ref, cfg);
      if (!m.is_reference) srv.plane.set_range(ref.range());
      sc.members.push_back(std::move(srv));
    }
    out.push_back(std::move(sc));
  }
  return out;
}

void write_motion_csv(std::ostream& out, int level_index, const McLevel& level) {
  for (const McCluster& c : level.clusters) {
    for (const McSrv& m : c.members) {
      for (std::size_t i = 0; i < m.records.size(); ++i) {
        const MotionRecord& r = m.records[i];
        out << level_index << ',' << m.s << ',' << m.t << ',' << r.bx << ','
            << r.by << ','
            << (r.mode == McMode::kSubtractive ? "subtractive" : "additive")
            << ',' << r.dx << ',' << r.dy << ',' << m.deltas[i] << '\n';
      }
    }
  }
}

}  // namespace hmlfc
