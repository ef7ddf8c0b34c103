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

// Phase-shifted block motion compensation between SRVs of one cluster.
//
// For a predictive block B_P and a candidate reference block B_R at integer
// offset (dx, dy) two residual energies are evaluated:
//   subtractive  sum |B_P - B_R|
//   additive     sum |B_P + B_R|
// The additive form matches regions whose sign is inverted relative to the
// reference. The search is exhaustive over [-W, W]^2. Ties are resolved by
// preferring the subtractive mode, then the smallest (dy, dx).
//
// Reference samples outside the plane read as zero.

#ifndef HMLFC_MOTION_H_
#define HMLFC_MOTION_H_

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "hmlfc/hierarchy.h"
#include "hmlfc/lfcore.h"

namespace hmlfc {

enum class McMode : uint8_t { kSubtractive = 0, kAdditive = 1 };
enum class ReferenceChoice : uint8_t { kTopLeft = 0, kCenter = 1 };

struct McConfig {
  int block_size = 4;
  int window = 16;
  // false restricts the search to the subtractive mode.
  bool phase_shift = true;
  ReferenceChoice reference = ReferenceChoice::kTopLeft;

  // block_size in {2,4,8,16}, window in [0, 255].
  void validate() const;
};

struct MotionRecord {
  McMode mode = McMode::kSubtractive;
  int dx = 0;
  int dy = 0;
  int bx = 0;
  int by = 0;
  int ref_id = 0;

  bool operator==(const MotionRecord&) const = default;
};

struct BlockRect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  int count() const { return w * h; }
};

inline int blocks_across(int extent, int block_size) {
  return (extent + block_size - 1) / block_size;
}

// Block (bx, by) of a plane; edge blocks are shortened.
BlockRect block_rect(int plane_width, int plane_height, int block_size, int bx,
                     int by);

struct ResidualPair {
  int64_t minus = 0;
  int64_t plus = 0;
};

// Both residual energies of the block at `rect` against ref shifted by (dx,dy).
ResidualPair block_residuals(const Plane& pred, BlockRect rect, const Plane& ref,
                             int dx, int dy);

// Reference plane copied into a zero border of `window` samples so the search
// loop needs no bounds checks.
class SearchReference {
 public:
  SearchReference(const Plane& ref, int window);

  int window() const { return window_; }
  const Plane& plane() const { return *ref_; }
  // Pointer to sample (x, y) of the reference; valid for x, y in
  // [-window, extent + window).
  const int32_t* row_ptr(int x, int y) const {
    return padded_.data() + std::size_t(y + window_) * stride_ + (x + window_);
  }

 private:
  const Plane* ref_;
  int window_;
  std::size_t stride_;
  std::vector<int32_t> padded_;
};

struct BlockMatch {
  MotionRecord record;
  int64_t delta = 0;
};

BlockMatch search_block(const Plane& pred, BlockRect rect,
                        const SearchReference& ref, const McConfig& cfg);
BlockMatch search_block(const Plane& pred, BlockRect rect, const Plane& ref,
                        const McConfig& cfg);

// B_P - B_R (subtractive) or B_P + B_R (additive), row-major over rect.
std::vector<int32_t> residual_block(const Plane& pred, BlockRect rect,
                                    const Plane& ref, const MotionRecord& rec);
// Inverse of residual_block.
std::vector<int32_t> recompensate_block(std::span<const int32_t> residual,
                                        BlockRect rect, const Plane& ref,
                                        const MotionRecord& rec);

struct ClusterRoles {
  int reference = 0;  // index into the cluster's members
  std::vector<int> predictive;
};

ClusterRoles select_references(const SrvCluster& cluster, ReferenceChoice choice);
std::vector<ClusterRoles> select_references(const Level& level,
                                            const McConfig& cfg);

struct CompensatedPlane {
  Plane residual;
  std::vector<MotionRecord> records;  // one per block, row-major
  std::vector<int64_t> deltas;
};

CompensatedPlane compensate_plane(const Plane& pred, const Plane& ref,
                                  const McConfig& cfg, int ref_id = 0,
                                  int threads = 1);
Plane recompensate_plane(const Plane& residual,
                         std::span<const MotionRecord> records, const Plane& ref,
                         const McConfig& cfg);

struct McSrv {
  int s = 0;
  int t = 0;
  bool is_reference = false;
  Plane plane;  // verbatim SRV for references, residual otherwise
  std::vector<MotionRecord> records;
  std::vector<int64_t> deltas;
};

struct McCluster {
  int cs = 0;
  int ct = 0;
  int reference = 0;  // index into members
  std::vector<McSrv> members;
};

struct McLevel {
  std::vector<McCluster> clusters;  // aligned with Level::clusters
};

McLevel compensate_level(const Level& level, const McConfig& cfg,
                         int threads = 0);
// Undoes compensate_level, returning the original SRV clusters.
std::vector<SrvCluster> recompensate_level(const McLevel& level,
                                           const McConfig& cfg);

inline constexpr const char* kMotionCsvHeader = "level,s,t,bx,by,mode,dx,dy,delta\n";
// Appends one row per motion record, columns as in kMotionCsvHeader.
void write_motion_csv(std::ostream& out, int level_index, const McLevel& level);

}  // namespace hmlfc

#endif  // HMLFC_MOTION_H_
