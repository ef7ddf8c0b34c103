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

// Random-access decoder. Opening a stream parses the directory, decodes the
// top-level RKVs and the reference SRVs that predictive planes depend on;
// after that any block of any view is reconstructed independently by
// summing its ancestors along the tree.

#ifndef HMLFC_DECODER_H_
#define HMLFC_DECODER_H_

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "hmlfc/container.h"
#include "hmlfc/image_io.h"
#include "hmlfc/lfcore.h"

namespace hmlfc {

// Sparse row storage: for each row, the (column, value) pairs of its nonzero
// samples in ascending column order. Unlisted positions read as zero.
class SparseImage {
 public:
  SparseImage() = default;
  // Keeps the nonzero samples of `plane`.
  explicit SparseImage(const Plane& plane);
  // Decodes the significant blocks of a reference plane.
  SparseImage(const ParsedPlane& plane, int width, int height, int block_size);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t nonzero_count() const { return values_.size(); }
  // Zero outside the image and at unlisted positions.
  int32_t at(int x, int y) const;
  // Adds sign * samples of row y, columns [x, x + n), to out[0..n).
  void accumulate_row(int x, int y, int n, int sign, int32_t* out) const;
  std::size_t memory_bytes() const {
    return row_start_.size() * sizeof(uint32_t) + columns_.size() * sizeof(int32_t) +
           values_.size() * sizeof(int32_t);
  }
  bool operator==(const SparseImage&) const = default;

 private:
  void append_row(std::span<const int32_t> row);

  int width_ = 0;
  int height_ = 0;
  std::vector<uint32_t> row_start_;  // height + 1 entries
  std::vector<int32_t> columns_;
  std::vector<int32_t> values_;
};

struct DecoderStats {
  uint64_t blocks_decoded = 0;      // channel blocks reconstructed
  uint64_t payload_bytes_read = 0;  // residual and motion bytes touched
  uint64_t payload_reads = 0;       // SRV block payloads read
  uint64_t cache_bytes = 0;         // resident reference SRV cache
  uint64_t rkv_bytes = 0;           // resident top-level RKV planes
};

class Decoder {
 public:
  // Errors from parse_stream plus kIo for unreadable files.
  static Decoder open(const std::filesystem::path& path);
  static Decoder open(std::vector<uint8_t> bytes);
  explicit Decoder(std::shared_ptr<const std::vector<uint8_t>> bytes);

  // Reference SRV cache of channel c, indexed by plane; planes that no
  // predictive plane refers to hold an empty image.
  const std::vector<SparseImage>& reference_cache(int c) const {
    return state_->references[c];
  }
  const ParsedStream& stream() const { return state_->stream; }
  const StreamHeader& header() const { return state_->stream.header; }
  int grid_s() const { return header().grid_s; }
  int grid_t() const { return header().grid_t; }
  int width() const { return header().width; }
  int height() const { return header().height; }
  int block_size() const { return header().params.block_size; }
  // Block grid of the full-resolution (luma) plane.
  int blocks_x() const { return state_->stream.channels[0].blocks_x; }
  int blocks_y() const { return state_->stream.channels[0].blocks_y; }

  // Reconstructs block (bx, by) of channel c of view (s, t) in the
  // transformed domain. `out` receives rect.w * rect.h samples, row-major.
  // Throws kOutOfRange on invalid coordinates.
  void decode_block(int c, int s, int t, int bx, int by, std::span<int32_t> out) const;

  // RGB samples of luma block (bx, by) of view (s, t), rect.w * rect.h * 3.
  void decode_rgb_block(int s, int t, int bx, int by, std::span<uint8_t> out) const;

  // Full transformed-domain planes of one view (chroma at stored size).
  std::array<Plane, 3> decode_view_channels(int s, int t) const;
  RgbImage decode_view(int s, int t) const;
  LightField decode_all(int threads = 0) const;

  DecoderStats stats() const;
  void reset_stats() const;

 private:
  struct State {
    ParsedStream stream;
    std::array<std::vector<Plane>, 3> top_rkvs;
    // Indexed by plane; empty for planes no predictive plane refers to.
    std::array<std::vector<SparseImage>, 3> references;
    uint64_t cache_bytes = 0;
    uint64_t rkv_bytes = 0;
    mutable std::atomic<uint64_t> blocks_decoded{0};
    mutable std::atomic<uint64_t> payload_bytes_read{0};
    mutable std::atomic<uint64_t> payload_reads{0};
  };

  void add_srv_block(int c, const ParsedPlane& plane, int bx, int by,
                     std::span<int32_t> out, uint64_t& bytes, uint64_t& reads) const;

  std::shared_ptr<State> state_;
};

}  // namespace hmlfc

#endif  // HMLFC_DECODER_H_
