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

#include "hmlfc/decoder.h"

#include <algorithm>
#include <string>

#include "hmlfc/error.h"
#include "hmlfc/motion.h"
#include "hmlfc/parallel.h"

namespace hmlfc {

void SparseImage::append_row(std::span<const int32_t> row) {
  for (int x = 0; x < int(row.size()); ++x) {
    if (row[x] != 0) {
      columns_.push_back(x);
      values_.push_back(row[x]);
    }
  }
  row_start_.push_back(static_cast<uint32_t>(values_.size()));
}

SparseImage::SparseImage(const Plane& plane)
    : width_(plane.width()), height_(plane.height()) {
  row_start_.push_back(0);
  for (int y = 0; y < height_; ++y) append_row(plane.row(y));
}

SparseImage::SparseImage(const ParsedPlane& plane, int width, int height, int block_size)
    : width_(width), height_(height) {
  const int nbx = blocks_across(width, block_size);
  const std::size_t stride = std::size_t(block_size) * block_size;
  std::vector<int32_t> band(std::size_t(width) * block_size);
  std::vector<uint32_t> raw(stride);
  row_start_.push_back(0);
  for (int by = 0; by * block_size < height; ++by) {
    std::fill(band.begin(), band.end(), 0);
    const int rows = std::min(block_size, height - by * block_size);
    for (int bx = 0; bx < nbx; ++bx) {
      const std::size_t b = std::size_t(by) * nbx + bx;
      if (!plane.significance.test(b)) continue;
      plane.payload.decode_range(uint64_t{plane.significance.rank(b)} * stride, raw);
      const int cols = std::min(block_size, width - bx * block_size);
      for (int y = 0; y < rows; ++y) {
        for (int x = 0; x < cols; ++x) {
          band[std::size_t(y) * width + bx * block_size + x] =
              static_cast<int32_t>(raw[y * block_size + x]) + plane.entry.value_offset;
        }
      }
    }
    for (int y = 0; y < rows; ++y) {
      append_row(std::span<const int32_t>(band).subspan(std::size_t(y) * width, width));
    }
  }
}

int32_t SparseImage::at(int x, int y) const {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) return 0;
  const auto first = columns_.begin() + row_start_[y];
  const auto last = columns_.begin() + row_start_[y + 1];
  const auto it = std::lower_bound(first, last, x);
  return it != last && *it == x ? values_[it - columns_.begin()] : 0;
}

void SparseImage::accumulate_row(int x, int y, int n, int sign, int32_t* out) const {
  if (y < 0 || y >= height_) return;
  const auto first = columns_.begin() + row_start_[y];
  const auto last = columns_.begin() + row_start_[y + 1];
  for (auto it = std::lower_bound(first, last, x); it != last && *it < x + n; ++it) {
    out[*it - x] += sign * values_[it - columns_.begin()];
  }
}

Decoder Decoder::open(const std::filesystem::path& path) {
  return open(read_file(path));
}

Decoder Decoder::open(std::vector<uint8_t> bytes) {
  return Decoder(std::make_shared<const std::vector<uint8_t>>(std::move(bytes)));
}

Decoder::Decoder(std::shared_ptr<const std::vector<uint8_t>> bytes)
    : state_(std::make_shared<State>()) {
  state_->stream = parse_stream(std::move(bytes));
  const int bs = block_size();
  for (int c = 0; c < 3; ++c) {
    const ParsedChannel& ch = state_->stream.channels[c];
    auto& tops = state_->top_rkvs[c];
    for (const LosslessPlane& lp : ch.rkvs) {
      tops.push_back(decode_lossless_plane(lp, ch.width, ch.height, ch.input_range));
      state_->rkv_bytes += tops.back().size() * sizeof(int32_t);
    }
    std::vector<bool> needed(ch.planes.size(), false);
    for (const ParsedPlane& p : ch.planes) {
      if (p.entry.role == PlaneRole::kPredictive) needed[p.entry.reference_plane] = true;
    }
    auto& refs = state_->references[c];
    refs.resize(ch.planes.size());
    for (std::size_t i = 0; i < ch.planes.size(); ++i) {
      if (!needed[i]) continue;
      refs[i] = SparseImage(ch.planes[i], ch.width, ch.height, bs);
      state_->cache_bytes += refs[i].memory_bytes();
    }
  }
}

void Decoder::add_srv_block(int c, const ParsedPlane& plane, int bx, int by,
                            std::span<int32_t> out, uint64_t& bytes,
                            uint64_t& reads) const {
  const ParsedChannel& ch = state_->stream.channels[c];
  const PlaneEntry& e = plane.entry;
  const int bs = block_size();
  const BlockRect r = block_rect(ch.width, ch.height, bs, bx, by);
  const std::size_t b = std::size_t(by) * ch.blocks_x + bx;
  const std::size_t stride = std::size_t(bs) * bs;

  if (plane.significance.test(b)) {
    const uint64_t first = uint64_t{plane.significance.rank(b)} * stride;
    std::array<uint32_t, 256> raw;
    plane.payload.decode_range(first, std::span<uint32_t>(raw.data(), stride));
    bytes += plane.payload.bytes_touched(first, stride);
    ++reads;
    for (int y = 0; y < r.h; ++y) {
      for (int x = 0; x < r.w; ++x) {
        out[std::size_t(y) * r.w + x] += static_cast<int32_t>(raw[y * bs + x]) + e.value_offset;
      }
    }
  }
  if (e.role == PlaneRole::kReference) return;

  bool has_record = true;
  uint64_t index = e.record_base;
  switch (state_->stream.header.params.mv_policy) {
    case MvPolicy::kAll:
      index += b;
      break;
    case MvPolicy::kDropInsignificant:
      has_record = plane.significance.test(b);
      index += plane.significance.rank(b);
      break;
    case MvPolicy::kSignificantSrv:
      has_record = plane.records.test(b);
      index += plane.records.rank(b);
      break;
  }
  if (!has_record) return;
  const int window = state_->stream.header.params.window;
  const int dx = static_cast<int>(ch.mv_dx.at(index)) - window;
  const int dy = static_cast<int>(ch.mv_dy.at(index)) - window;
  const int sign = ch.mv_mode.at(index) == uint32_t(McMode::kSubtractive) ? 1 : -1;
  bytes += ch.mv_dx.bytes_touched(index, 1) + ch.mv_dy.bytes_touched(index, 1) +
           ch.mv_mode.bytes_touched(index, 1);
  const SparseImage& ref = state_->references[c][e.reference_plane];
  for (int y = 0; y < r.h; ++y) {
    ref.accumulate_row(r.x + dx, r.y + y + dy, r.w, sign, &out[std::size_t(y) * r.w]);
  }
}

void Decoder::decode_block(int c, int s, int t, int bx, int by,
                           std::span<int32_t> out) const {
  if (c < 0 || c > 2 || s < 0 || t < 0 || s >= grid_s() || t >= grid_t()) {
    throw Error(ErrorCode::kOutOfRange,
                "view (s=" + std::to_string(s) + ", t=" + std::to_string(t) +
                    ") or channel " + std::to_string(c) + " out of range");
  }
  const ParsedChannel& ch = state_->stream.channels[c];
  if (bx < 0 || by < 0 || bx >= ch.blocks_x || by >= ch.blocks_y) {
    throw Error(ErrorCode::kOutOfRange, "block (" + std::to_string(bx) + ", " +
                                            std::to_string(by) + ") out of range");
  }
  const BlockRect r = block_rect(ch.width, ch.height, block_size(), bx, by);
  if (out.size() != std::size_t(r.w) * r.h) {
    throw Error(ErrorCode::kShapeMismatch, "decode_block: output size mismatch");
  }
  std::fill(out.begin(), out.end(), 0);
  uint64_t bytes = 0, reads = 0;
  int ls = s, lt = t;
  const int height = state_->stream.header.params.tree_height;
  for (int l = 0; l < height; ++l) {
    add_srv_block(c, ch.plane_at(l, ls, lt), bx, by, out, bytes, reads);
    ls /= 2;
    lt /= 2;
  }
  const Plane& top = state_->top_rkvs[c][std::size_t(lt) * ch.top_grid_s + ls];
  for (int y = 0; y < r.h; ++y) {
    for (int x = 0; x < r.w; ++x) out[std::size_t(y) * r.w + x] += top.at(r.x + x, r.y + y);
  }
  state_->blocks_decoded.fetch_add(1, std::memory_order_relaxed);
  state_->payload_bytes_read.fetch_add(bytes, std::memory_order_relaxed);
  state_->payload_reads.fetch_add(reads, std::memory_order_relaxed);
}

namespace {

inline uint8_t clamp_byte(int32_t v) {
  return static_cast<uint8_t>(std::clamp(v, 0, 255));
}

}  // namespace

void Decoder::decode_rgb_block(int s, int t, int bx, int by,
                               std::span<uint8_t> out) const {
  const int bs = block_size();
  const ColorConfig& color = header().params.color;
  const BlockRect r = block_rect(width(), height(), bs, bx, by);
  if (out.size() != std::size_t(r.w) * r.h * 3) {
    throw Error(ErrorCode::kShapeMismatch, "decode_rgb_block: output size mismatch");
  }
  std::array<int32_t, 256> y_block;
  decode_block(0, s, t, bx, by, std::span<int32_t>(y_block.data(), std::size_t(r.w) * r.h));
  std::array<std::array<int32_t, 256>, 2> chroma;
  BlockRect cr = r;
  const bool half = color.chroma_subsample == ChromaSubsample::kHalf;
  for (int c = 1; c < 3; ++c) {
    const ParsedChannel& ch = stream().channels[c];
    cr = half ? block_rect(ch.width, ch.height, bs, bx / 2, by / 2) : r;
    decode_block(c, s, t, half ? bx / 2 : bx, half ? by / 2 : by,
                 std::span<int32_t>(chroma[c - 1].data(), std::size_t(cr.w) * cr.h));
  }
  for (int y = 0; y < r.h; ++y) {
    for (int x = 0; x < r.w; ++x) {
      const std::size_t i = std::size_t(y) * r.w + x;
      std::size_t ci = i;
      if (half) {
        ci = std::size_t((r.y + y) / 2 - cr.y) * cr.w + ((r.x + x) / 2 - cr.x);
      }
      uint8_t* px = &out[i * 3];
      if (color.transform == ColorTransform::kYCoCgR) {
        const Rgb rgb = ycocg_to_rgb_saturating(y_block[i], chroma[0][ci], chroma[1][ci]);
        px[0] = clamp_byte(rgb.r);
        px[1] = clamp_byte(rgb.g);
        px[2] = clamp_byte(rgb.b);
      } else {
        px[0] = clamp_byte(y_block[i]);
        px[1] = clamp_byte(chroma[0][ci]);
        px[2] = clamp_byte(chroma[1][ci]);
      }
    }
  }
}

std::array<Plane, 3> Decoder::decode_view_channels(int s, int t) const {
  std::array<Plane, 3> out;
  const int bs = block_size();
  std::vector<int32_t> block(std::size_t(bs) * bs);
  for (int c = 0; c < 3; ++c) {
    const ParsedChannel& ch = stream().channels[c];
    out[c] = Plane(ch.width, ch.height, ch.input_range);
    for (int by = 0; by < ch.blocks_y; ++by) {
      for (int bx = 0; bx < ch.blocks_x; ++bx) {
        const BlockRect r = block_rect(ch.width, ch.height, bs, bx, by);
        const std::span<int32_t> view(block.data(), std::size_t(r.w) * r.h);
        decode_block(c, s, t, bx, by, view);
        for (int y = 0; y < r.h; ++y) {
          for (int x = 0; x < r.w; ++x) out[c].at(r.x + x, r.y + y) = view[y * r.w + x];
        }
      }
    }
  }
  return out;
}

RgbImage Decoder::decode_view(int s, int t) const {
  std::array<Plane, 3> channels = decode_view_channels(s, t);
  std::array<PlaneGrid, 3> grids;
  for (int c = 0; c < 3; ++c) {
    grids[c] = PlaneGrid(1, 1);
    grids[c].planes[0] = std::move(channels[c]);
  }
  const LightField lf = inverse_color(grids, header().params.color, width(), height());
  return view_image(lf, 0, 0);
}

LightField Decoder::decode_all(int threads) const {
  std::array<PlaneGrid, 3> grids;
  for (auto& g : grids) g = PlaneGrid(grid_s(), grid_t());
  parallel_for(std::size_t(grid_s()) * grid_t(), threads, [&](std::size_t v) {
    const int s = static_cast<int>(v % grid_s());
    const int t = static_cast<int>(v / grid_s());
    std::array<Plane, 3> channels = decode_view_channels(s, t);
    for (int c = 0; c < 3; ++c) grids[c].at(s, t) = std::move(channels[c]);
  });
  return inverse_color(grids, header().params.color, width(), height());
}

DecoderStats Decoder::stats() const {
  DecoderStats s;
  s.blocks_decoded = state_->blocks_decoded.load(std::memory_order_relaxed);
  s.payload_bytes_read = state_->payload_bytes_read.load(std::memory_order_relaxed);
  s.payload_reads = state_->payload_reads.load(std::memory_order_relaxed);
  s.cache_bytes = state_->cache_bytes;
  s.rkv_bytes = state_->rkv_bytes;
  return s;
}

void Decoder::reset_stats() const {
  state_->blocks_decoded.store(0, std::memory_order_relaxed);
  state_->payload_bytes_read.store(0, std::memory_order_relaxed);
  state_->payload_reads.store(0, std::memory_order_relaxed);
}

}  // namespace hmlfc
