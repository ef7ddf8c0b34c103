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

// The .hmlfc random-access stream: encoder front end (color transform,
// hierarchy, motion compensation), block thresholding, serialization and the
// parsed, immutable directory view the decoder works from. The byte layout
// is documented in docs/format.md.

#ifndef HMLFC_CONTAINER_H_
#define HMLFC_CONTAINER_H_

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hmlfc/bise.h"
#include "hmlfc/hierarchy.h"
#include "hmlfc/lfcore.h"
#include "hmlfc/motion.h"

namespace hmlfc {

inline constexpr std::array<char, 4> kStreamMagic = {'H', 'M', 'L', 'F'};
inline constexpr uint16_t kStreamVersion = 1;
inline constexpr std::size_t kHeaderSize = 72;

// Which predictive blocks carry a motion record.
enum class MvPolicy : uint8_t {
  // Every predictive block; an insignificant residual decodes as pure
  // prediction.
  kAll = 0,
  // Only blocks with a significant residual; the rest decode as zero.
  kDropInsignificant = 1,
  // Only blocks whose uncompensated SRV energy reaches tau_res. Blocks below
  // that would be discarded without prediction anyway and decode as zero.
  kSignificantSrv = 2,
};

enum class RkvCodec : uint8_t { kBise = 0, kPng = 1 };

// Names used on the command line and in sweep specs: "all",
// "drop-insignificant", "significant-srv"; "bise", "png".
MvPolicy parse_mv_policy(const std::string& name);
std::string mv_policy_name(MvPolicy policy);
RkvCodec parse_rkv_codec(const std::string& name);
std::string rkv_codec_name(RkvCodec codec);

struct EncodeParams {
  int tree_height = 3;
  int block_size = 4;
  int window = 16;
  uint32_t tau_ref = 75;
  uint32_t tau_res = 75;
  ColorConfig color{};
  MvPolicy mv_policy = MvPolicy::kSignificantSrv;
  // false disables the motion stage: every SRV is stored verbatim.
  bool motion = true;
  bool phase_shift = true;
  ReferenceChoice reference = ReferenceChoice::kTopLeft;
  RkvCodec rkv_codec = RkvCodec::kPng;
  int threads = 0;

  void validate() const;
  McConfig mc_config() const;
};

// One bit per block of a plane, row-major.
class SignificanceMap {
 public:
  SignificanceMap() = default;
  SignificanceMap(int blocks_x, int blocks_y)
      : blocks_x_(blocks_x), blocks_y_(blocks_y),
        bytes_((std::size_t(blocks_x) * blocks_y + 7) / 8, 0) {}

  int blocks_x() const { return blocks_x_; }
  int blocks_y() const { return blocks_y_; }
  std::size_t block_count() const { return std::size_t(blocks_x_) * blocks_y_; }
  bool test(std::size_t block) const { return bytes_[block >> 3] >> (block & 7) & 1; }
  void set(std::size_t block) { bytes_[block >> 3] |= uint8_t(1u << (block & 7)); }
  std::size_t popcount() const;
  const std::vector<uint8_t>& bytes() const { return bytes_; }

  bool operator==(const SignificanceMap&) const = default;

 private:
  int blocks_x_ = 0;
  int blocks_y_ = 0;
  std::vector<uint8_t> bytes_;
};

// Stored bitmaps, block payloads and sparse motion records all follow one
// scan order: tiles of kBitmapTile x kBitmapTile blocks in raster order,
// raster order inside each tile.
inline constexpr int kBitmapTile = 8;
std::vector<uint32_t> block_scan_order(int blocks_x, int blocks_y);

// Two-level bitmap encoding: one flag bit per tile (LSB-first, padded to a
// byte), then a little-endian u64 for each flagged tile holding its
// kBitmapTile^2 block bits in scan order.
std::vector<uint8_t> pack_bitmap(const SignificanceMap& map);

int64_t block_energy(const Plane& plane, BlockRect rect);

struct ThresholdResult {
  SignificanceMap map;
  std::vector<uint32_t> surviving;  // significant block indices, ascending
};

// A block is significant iff its energy (sum of |samples|) is >= tau.
ThresholdResult threshold_blocks(const Plane& plane, uint32_t tau, int block_size);
// Copy of plane with every insignificant block zeroed.
Plane apply_significance(const Plane& plane, const SignificanceMap& map,
                         int block_size);

// Lossless single-plane codec used for the top-level RKVs.
struct LosslessPlane {
  RkvCodec codec = RkvCodec::kPng;
  int32_t value_offset = 0;  // stored = sample - value_offset
  uint32_t range_n = 1;
  std::vector<uint8_t> bytes;
};
LosslessPlane encode_lossless_plane(const Plane& plane, RkvCodec codec);
Plane decode_lossless_plane(const LosslessPlane& encoded, int width, int height,
                            ValueRange range);

// Encoder front end output: per-channel hierarchy plus its motion-compensated
// levels. Independent of the thresholds, so one preparation serves a whole
// threshold sweep.
struct PreparedChannel {
  int width = 0;
  int height = 0;
  ValueRange input_range{};
  HierarchyTree tree;
  std::vector<McLevel> levels;  // aligned with tree.levels
};

struct PreparedField {
  int grid_s = 0;
  int grid_t = 0;
  int width = 0;
  int height = 0;
  EncodeParams params;
  std::array<PreparedChannel, 3> channels;
};

PreparedField prepare(const LightField& field, const EncodeParams& params);

// Thresholds, linearizes and serializes. Structural params (height, block
// size, window, color, motion) must match those used for preparation;
// thresholds, mv policy and RKV codec may differ.
std::vector<uint8_t> serialize(const PreparedField& prepared,
                               const EncodeParams& params);
std::vector<uint8_t> encode(const LightField& field, const EncodeParams& params);

double bits_per_pixel(std::size_t stream_bytes, int grid_s, int grid_t,
                      int width, int height);

struct StreamHeader {
  uint16_t version = 0;
  int grid_s = 0;
  int grid_t = 0;
  int width = 0;
  int height = 0;
  EncodeParams params;
  int channel_count = 3;
  std::array<uint64_t, 3> channel_offsets{};
  uint64_t file_size = 0;
};

// Errors: kTruncated, kBadMagic, kVersionMismatch, kCorruptStream.
StreamHeader parse_header(std::span<const uint8_t> bytes);

enum class PlaneRole : uint8_t { kReference = 0, kPredictive = 1 };

struct PlaneEntry {
  int level = 0;
  PlaneRole role = PlaneRole::kReference;
  bool has_record_map = false;
  int s = 0;  // position in the level's input grid
  int t = 0;
  uint32_t reference_plane = 0;
  int32_t value_offset = 0;
  uint32_t range_n = 1;
  uint32_t significant_count = 0;
  uint32_t record_base = 0;
  uint32_t record_count = 0;
  uint64_t sig_bitmap_offset = 0;
  uint64_t rec_bitmap_offset = 0;
  uint64_t payload_offset = 0;
};

// Parsed pack_bitmap() data with a rank index over the scan order. Block
// arguments are raster indices (by * blocks_x + bx).
class RankedBitmap {
 public:
  RankedBitmap() = default;
  // Throws kTruncated when `bytes` is shorter than the encoding and
  // kCorruptStream when bits are set outside the block grid.
  RankedBitmap(std::span<const uint8_t> bytes, int blocks_x, int blocks_y);

  bool test(std::size_t block) const {
    const std::size_t p = position(block);
    return words_[p >> 6] >> (p & 63) & 1;
  }
  // Number of set blocks before `block` in scan order.
  uint32_t rank(std::size_t block) const;
  uint32_t popcount() const { return total_; }
  std::size_t size() const { return std::size_t(blocks_x_) * blocks_y_; }
  std::size_t encoded_size() const { return encoded_size_; }

 private:
  std::size_t position(std::size_t block) const {
    const std::size_t bx = block % blocks_x_, by = block / blocks_x_;
    return ((by / kBitmapTile) * tiles_x_ + bx / kBitmapTile) * 64 +
           (by % kBitmapTile) * kBitmapTile + bx % kBitmapTile;
  }

  int blocks_x_ = 0;
  int blocks_y_ = 0;
  std::size_t tiles_x_ = 0;
  std::vector<uint64_t> words_;  // one per tile
  std::vector<uint32_t> prefix_;
  uint32_t total_ = 0;
  std::size_t encoded_size_ = 0;
};

struct ParsedPlane {
  PlaneEntry entry;
  RankedBitmap significance;
  RankedBitmap records;  // empty unless entry.has_record_map
  BiseView payload;
};

struct ParsedChannel {
  int width = 0;
  int height = 0;
  ValueRange input_range{};
  int blocks_x = 0;
  int blocks_y = 0;
  int top_grid_s = 0;
  int top_grid_t = 0;
  std::vector<LosslessPlane> rkvs;
  std::vector<ParsedPlane> planes;  // BFS order
  // level_index[l][t * input_grid_s + s] -> plane index.
  std::vector<std::vector<uint32_t>> level_index;
  std::vector<int> level_grid_s;
  std::vector<int> level_grid_t;
  BiseView mv_dx, mv_dy, mv_mode;
  uint64_t directory_bytes = 0;
  uint64_t rkv_bytes = 0;
  uint64_t bitmap_bytes = 0;
  uint64_t payload_bytes = 0;
  uint64_t mv_bytes = 0;

  const ParsedPlane& plane_at(int level, int s, int t) const {
    return planes[level_index[level][std::size_t(t) * level_grid_s[level] + s]];
  }
  static constexpr uint32_t kNoPlane = 0xffffffffu;
};

// Shares ownership of the underlying bytes; immutable after parsing.
struct ParsedStream {
  std::shared_ptr<const std::vector<uint8_t>> bytes;
  StreamHeader header;
  std::array<ParsedChannel, 3> channels;

  double bpp() const {
    return bits_per_pixel(bytes->size(), header.grid_s, header.grid_t,
                          header.width, header.height);
  }
};

ParsedStream parse_stream(std::shared_ptr<const std::vector<uint8_t>> bytes);

// Human-readable summary (the `info` subcommand).
std::string describe_stream(const ParsedStream& stream);

}  // namespace hmlfc

#endif  // HMLFC_CONTAINER_H_
