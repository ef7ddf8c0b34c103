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

#include "hmlfc/container.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <limits>
#include <sstream>

#include "byte_io.h"
#include "hmlfc/error.h"
#include "hmlfc/image_io.h"
#include "hmlfc/parallel.h"

namespace hmlfc {

using internal::ByteReader;
using internal::ByteWriter;

MvPolicy parse_mv_policy(const std::string& name) {
  if (name == "all") return MvPolicy::kAll;
  if (name == "drop-insignificant") return MvPolicy::kDropInsignificant;
  if (name == "significant-srv") return MvPolicy::kSignificantSrv;
  throw Error(ErrorCode::kInvalidArgument, "unknown mv policy '" + name + "'");
}

std::string mv_policy_name(MvPolicy policy) {
  switch (policy) {
    case MvPolicy::kAll: return "all";
    case MvPolicy::kDropInsignificant: return "drop-insignificant";
    case MvPolicy::kSignificantSrv: return "significant-srv";
  }
  return "all";
}

RkvCodec parse_rkv_codec(const std::string& name) {
  if (name == "bise") return RkvCodec::kBise;
  if (name == "png") return RkvCodec::kPng;
  throw Error(ErrorCode::kInvalidArgument, "unknown RKV codec '" + name + "'");
}

std::string rkv_codec_name(RkvCodec codec) {
  return codec == RkvCodec::kPng ? "png" : "bise";
}

void EncodeParams::validate() const {
  if (tree_height < 1 || tree_height > 15) {
    throw Error(ErrorCode::kInvalidArgument, "tree height must be in [1, 15]");
  }
  mc_config().validate();
  color.validate();
}

McConfig EncodeParams::mc_config() const {
  McConfig cfg;
  cfg.block_size = block_size;
  cfg.window = window;
  cfg.phase_shift = phase_shift;
  cfg.reference = reference;
  return cfg;
}

std::size_t SignificanceMap::popcount() const {
  std::size_t n = 0;
  for (uint8_t b : bytes_) n += std::popcount(b);
  return n;
}

std::vector<uint32_t> block_scan_order(int blocks_x, int blocks_y) {
  std::vector<uint32_t> order;
  order.reserve(std::size_t(blocks_x) * blocks_y);
  for (int ty = 0; ty < blocks_y; ty += kBitmapTile) {
    for (int tx = 0; tx < blocks_x; tx += kBitmapTile) {
      for (int by = ty; by < std::min(ty + kBitmapTile, blocks_y); ++by) {
        for (int bx = tx; bx < std::min(tx + kBitmapTile, blocks_x); ++bx) {
          order.push_back(static_cast<uint32_t>(by * blocks_x + bx));
        }
      }
    }
  }
  return order;
}

std::vector<uint8_t> pack_bitmap(const SignificanceMap& map) {
  const int tiles_x = (map.blocks_x() + kBitmapTile - 1) / kBitmapTile;
  const int tiles_y = (map.blocks_y() + kBitmapTile - 1) / kBitmapTile;
  std::vector<uint64_t> words(std::size_t(tiles_x) * tiles_y, 0);
  for (int by = 0; by < map.blocks_y(); ++by) {
    for (int bx = 0; bx < map.blocks_x(); ++bx) {
      if (!map.test(std::size_t(by) * map.blocks_x() + bx)) continue;
      words[std::size_t(by / kBitmapTile) * tiles_x + bx / kBitmapTile] |=
          uint64_t{1} << ((by % kBitmapTile) * kBitmapTile + bx % kBitmapTile);
    }
  }
  ByteWriter w;
  std::vector<uint8_t> flags((words.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i] != 0) flags[i >> 3] |= uint8_t(1u << (i & 7));
  }
  w.raw(flags);
  for (uint64_t word : words) {
    if (word != 0) w.u64(word);
  }
  return std::move(w.bytes());
}

int64_t block_energy(const Plane& plane, BlockRect rect) {
  int64_t e = 0;
  for (int y = rect.y; y < rect.y + rect.h; ++y) {
    const int32_t* row = plane.row(y).data();
    for (int x = rect.x; x < rect.x + rect.w; ++x) e += row[x] < 0 ? -int64_t{row[x]} : row[x];
  }
  return e;
}

ThresholdResult threshold_blocks(const Plane& plane, uint32_t tau,
                                 int block_size) {
  const int nbx = blocks_across(plane.width(), block_size);
  const int nby = blocks_across(plane.height(), block_size);
  ThresholdResult out{SignificanceMap(nbx, nby), {}};
  for (int by = 0; by < nby; ++by) {
    for (int bx = 0; bx < nbx; ++bx) {
      const BlockRect r = block_rect(plane.width(), plane.height(), block_size, bx, by);
      if (block_energy(plane, r) >= int64_t{tau}) {
        const uint32_t b = static_cast<uint32_t>(by * nbx + bx);
        out.map.set(b);
        out.surviving.push_back(b);
      }
    }
  }
  return out;
}

Plane apply_significance(const Plane& plane, const SignificanceMap& map,
                         int block_size) {
  Plane out = plane;
  for (int by = 0; by < map.blocks_y(); ++by) {
    for (int bx = 0; bx < map.blocks_x(); ++bx) {
      if (map.test(std::size_t(by) * map.blocks_x() + bx)) continue;
      const BlockRect r = block_rect(plane.width(), plane.height(), block_size, bx, by);
      for (int y = r.y; y < r.y + r.h; ++y) {
        for (int x = r.x; x < r.x + r.w; ++x) out.at(x, y) = 0;
      }
    }
  }
  return out;
}

LosslessPlane encode_lossless_plane(const Plane& plane, RkvCodec codec) {
  LosslessPlane out;
  out.codec = codec;
  const auto s = plane.samples();
  const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  out.value_offset = s.empty() ? 0 : *lo;
  out.range_n = s.empty() ? 1 : static_cast<uint32_t>(int64_t{*hi} - *lo + 1);
  if (codec == RkvCodec::kBise) {
    std::vector<uint32_t> values(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) values[i] = uint32_t(s[i] - out.value_offset);
    out.bytes = BiseSequence::encode(values, out.range_n).payload();
    return out;
  }
  if (out.range_n > 65536) {
    throw Error(ErrorCode::kOutOfRange, "plane range too wide for PNG codec");
  }
  Raster r;
  r.width = plane.width();
  r.height = plane.height();
  r.channels = 1;
  r.bit_depth = out.range_n <= 256 ? 8 : 16;
  r.samples.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    r.samples[i] = static_cast<uint16_t>(s[i] - out.value_offset);
  }
  out.bytes = encode_png(r);
  return out;
}

Plane decode_lossless_plane(const LosslessPlane& encoded, int width, int height,
                            ValueRange range) {
  Plane out(width, height, range);
  auto dst = out.samples();
  if (encoded.codec == RkvCodec::kBise) {
    const BiseView view(encoded.range_n, dst.size(), encoded.bytes);
    for (std::size_t i = 0; i < dst.size(); ++i) {
      dst[i] = static_cast<int32_t>(view.at(i)) + encoded.value_offset;
    }
  } else {
    const Raster r = decode_png(encoded.bytes);
    if (r.width != width || r.height != height || r.channels != 1) {
      throw Error(ErrorCode::kCorruptStream, "RKV image has unexpected shape");
    }
    for (std::size_t i = 0; i < dst.size(); ++i) {
      dst[i] = static_cast<int32_t>(r.samples[i]) + encoded.value_offset;
    }
  }
  for (int32_t v : dst) {
    if (!range.contains(v)) {
      throw Error(ErrorCode::kCorruptStream, "RKV sample outside channel range");
    }
  }
  return out;
}

namespace {

McLevel verbatim_level(const Level& level) {
  McLevel out;
  for (const SrvCluster& c : level.clusters) {
    McCluster mc;
    mc.cs = c.cs;
    mc.ct = c.ct;
    mc.reference = 0;
    for (const Srv& m : c.members) {
      McSrv srv;
      srv.s = m.s;
      srv.t = m.t;
      srv.is_reference = true;
      srv.plane = m.plane;
      mc.members.push_back(std::move(srv));
    }
    out.clusters.push_back(std::move(mc));
  }
  return out;
}

}  // namespace

PreparedField prepare(const LightField& field, const EncodeParams& params) {
  params.validate();
  PreparedField pf;
  pf.grid_s = field.grid_s();
  pf.grid_t = field.grid_t();
  pf.width = field.width();
  pf.height = field.height();
  pf.params = params;
  std::array<PlaneGrid, 3> grids = forward_color(field, params.color);
  for (int c = 0; c < 3; ++c) {
    PreparedChannel& ch = pf.channels[c];
    ch.width = grids[c].planes.front().width();
    ch.height = grids[c].planes.front().height();
    ch.input_range = transformed_range(params.color.transform, c);
    ch.tree = build_tree(grids[c], params.tree_height, params.threads);
    for (const Level& level : ch.tree.levels) {
      ch.levels.push_back(params.motion
                              ? compensate_level(level, params.mc_config(), params.threads)
                              : verbatim_level(level));
    }
  }
  return pf;
}

double bits_per_pixel(std::size_t stream_bytes, int grid_s, int grid_t,
                      int width, int height) {
  const double pixels = double(grid_s) * grid_t * width * height;
  return pixels > 0 ? double(stream_bytes) * 8.0 / pixels : 0.0;
}

namespace {

constexpr std::size_t kChannelHeaderSize = 96;
constexpr std::size_t kPlaneEntrySize = 56;
constexpr uint64_t kNoBitmap = std::numeric_limits<uint64_t>::max();

struct ChannelParts {
  ByteWriter directory;
  ByteWriter rkv;
  ByteWriter bitmaps;
  ByteWriter payload;
  ByteWriter mv;
};

void write_entry(ByteWriter& w, const PlaneEntry& e) {
  w.u8(static_cast<uint8_t>(e.level));
  w.u8(static_cast<uint8_t>(e.role));
  w.u8(e.has_record_map ? 1 : 0);
  w.u8(0);
  w.u16(static_cast<uint16_t>(e.s));
  w.u16(static_cast<uint16_t>(e.t));
  w.u32(e.reference_plane);
  w.i32(e.value_offset);
  w.u32(e.range_n);
  w.u32(e.significant_count);
  w.u32(e.record_base);
  w.u32(e.record_count);
  w.u64(e.sig_bitmap_offset);
  w.u64(e.rec_bitmap_offset);
  w.u64(e.payload_offset);
}

PlaneEntry read_entry(ByteReader& r) {
  PlaneEntry e;
  e.level = r.u8();
  const uint8_t role = r.u8();
  if (role > 1) throw Error(ErrorCode::kCorruptStream, "bad plane role");
  e.role = static_cast<PlaneRole>(role);
  e.has_record_map = r.u8() != 0;
  r.u8();
  e.s = r.u16();
  e.t = r.u16();
  e.reference_plane = r.u32();
  e.value_offset = r.i32();
  e.range_n = r.u32();
  e.significant_count = r.u32();
  e.record_base = r.u32();
  e.record_count = r.u32();
  e.sig_bitmap_offset = r.u64();
  e.rec_bitmap_offset = r.u64();
  e.payload_offset = r.u64();
  return e;
}

// Appends the BISE payload of the listed blocks (block_size^2 values each,
// short edge blocks zero padded) and fills value_offset/range_n.
void write_block_payload(const Plane& plane, std::span<const uint32_t> blocks,
                         int block_size, PlaneEntry& entry, ByteWriter& out) {
  const int nbx = blocks_across(plane.width(), block_size);
  int32_t lo = std::numeric_limits<int32_t>::max();
  int32_t hi = std::numeric_limits<int32_t>::min();
  for (uint32_t b : blocks) {
    const BlockRect r =
        block_rect(plane.width(), plane.height(), block_size, b % nbx, b / nbx);
    for (int y = r.y; y < r.y + r.h; ++y) {
      for (int x = r.x; x < r.x + r.w; ++x) {
        lo = std::min(lo, plane.at(x, y));
        hi = std::max(hi, plane.at(x, y));
      }
    }
  }
  if (blocks.empty()) lo = hi = 0;
  entry.value_offset = lo;
  entry.range_n = static_cast<uint32_t>(int64_t{hi} - lo + 1);
  entry.significant_count = static_cast<uint32_t>(blocks.size());
  const std::size_t stride = std::size_t(block_size) * block_size;
  std::vector<uint32_t> values(blocks.size() * stride, 0);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const uint32_t b = blocks[k];
    const BlockRect r =
        block_rect(plane.width(), plane.height(), block_size, b % nbx, b / nbx);
    for (int y = 0; y < r.h; ++y) {
      for (int x = 0; x < r.w; ++x) {
        values[k * stride + y * block_size + x] =
            static_cast<uint32_t>(plane.at(r.x + x, r.y + y) - lo);
      }
    }
  }
  entry.payload_offset = out.size();
  out.raw(BiseSequence::encode(values, entry.range_n).payload());
}

void write_bise(ByteWriter& out, const std::vector<uint32_t>& values,
                uint32_t range_n) {
  const BiseSequence seq = BiseSequence::encode(values, range_n);
  out.u32(range_n);
  out.u32(0);
  out.u64(seq.count());
  out.u64(seq.payload().size());
  out.raw(seq.payload());
}

BiseView read_bise(ByteReader& r) {
  const uint32_t range_n = r.u32();
  r.u32();
  const uint64_t count = r.u64();
  const uint64_t size = r.u64();
  if (range_n == 0) throw Error(ErrorCode::kCorruptStream, "BISE range of zero");
  return BiseView(range_n, count, r.raw(size));
}

std::vector<uint8_t> serialize_channel(const PreparedChannel& ch,
                                       const EncodeParams& params) {
  const int bs = params.block_size;
  const int nbx = blocks_across(ch.width, bs);
  const int nby = blocks_across(ch.height, bs);
  const int window = params.window;
  const std::vector<uint32_t> scan = block_scan_order(nbx, nby);
  ChannelParts parts;
  std::vector<uint32_t> mv_dx, mv_dy, mv_mode;
  uint32_t plane_count = 0;

  for (int l = ch.tree.height - 1; l >= 0; --l) {
    const McLevel& mc = ch.levels[l];
    const Level& level = ch.tree.levels[l];
    for (std::size_t k = 0; k < mc.clusters.size(); ++k) {
      const McCluster& cluster = mc.clusters[k];
      const uint32_t cluster_base = plane_count;
      for (std::size_t i = 0; i < cluster.members.size(); ++i) {
        const McSrv& m = cluster.members[i];
        PlaneEntry e;
        e.level = l;
        e.s = m.s;
        e.t = m.t;
        e.role = m.is_reference ? PlaneRole::kReference : PlaneRole::kPredictive;
        e.reference_plane = cluster_base + static_cast<uint32_t>(cluster.reference);
        e.record_base = static_cast<uint32_t>(mv_dx.size());
        e.rec_bitmap_offset = kNoBitmap;

        SignificanceMap sig(nbx, nby);
        if (m.is_reference) {
          sig = threshold_blocks(m.plane, params.tau_ref, bs).map;
        } else {
          const Plane& original = level.clusters[k].members[i].plane;
          ThresholdResult res = threshold_blocks(m.plane, params.tau_res, bs);
          SignificanceMap rec(nbx, nby);
          auto push_record = [&](uint32_t b) {
            const MotionRecord& r = m.records[b];
            mv_dx.push_back(static_cast<uint32_t>(r.dx + window));
            mv_dy.push_back(static_cast<uint32_t>(r.dy + window));
            mv_mode.push_back(static_cast<uint32_t>(r.mode));
          };
          switch (params.mv_policy) {
            case MvPolicy::kAll:
              sig = std::move(res.map);
              for (uint32_t b = 0; b < m.records.size(); ++b) push_record(b);
              break;
            case MvPolicy::kDropInsignificant:
              sig = std::move(res.map);
              for (uint32_t b : scan) {
                if (sig.test(b)) push_record(b);
              }
              break;
            case MvPolicy::kSignificantSrv:
              for (uint32_t b : scan) {
                const BlockRect r = block_rect(ch.width, ch.height, bs,
                                               int(b % nbx), int(b / nbx));
                if (block_energy(original, r) < int64_t{params.tau_res}) continue;
                rec.set(b);
                push_record(b);
                if (res.map.test(b)) sig.set(b);
              }
              e.has_record_map = true;
              e.rec_bitmap_offset = parts.bitmaps.size();
              parts.bitmaps.raw(pack_bitmap(rec));
              break;
          }
        }
        std::vector<uint32_t> stored;
        for (uint32_t b : scan) {
          if (sig.test(b)) stored.push_back(b);
        }
        e.record_count = static_cast<uint32_t>(mv_dx.size()) - e.record_base;
        e.sig_bitmap_offset = parts.bitmaps.size();
        parts.bitmaps.raw(pack_bitmap(sig));
        write_block_payload(m.plane, stored, bs, e, parts.payload);
        write_entry(parts.directory, e);
        ++plane_count;
      }
    }
  }

  const uint32_t mv_range = static_cast<uint32_t>(2 * window + 1);
  write_bise(parts.mv, mv_dx, mv_range);
  write_bise(parts.mv, mv_dy, mv_range);
  write_bise(parts.mv, mv_mode, 2);

  const PlaneGrid& top = ch.tree.top_rkvs();
  std::vector<LosslessPlane> rkvs(top.planes.size());
  parallel_for(rkvs.size(), params.threads, [&](std::size_t i) {
    rkvs[i] = encode_lossless_plane(top.planes[i], params.rkv_codec);
  });
  for (const LosslessPlane& lp : rkvs) {
    parts.rkv.u8(static_cast<uint8_t>(lp.codec));
    parts.rkv.u8(0);
    parts.rkv.u16(0);
    parts.rkv.i32(lp.value_offset);
    parts.rkv.u32(lp.range_n);
    parts.rkv.u32(static_cast<uint32_t>(lp.bytes.size()));
    parts.rkv.raw(lp.bytes);
  }

  ByteWriter out;
  const uint64_t dir_off = kChannelHeaderSize;
  const uint64_t rkv_off = dir_off + parts.directory.size();
  const uint64_t bm_off = rkv_off + parts.rkv.size();
  const uint64_t pl_off = bm_off + parts.bitmaps.size();
  const uint64_t mv_off = pl_off + parts.payload.size();
  out.u32(static_cast<uint32_t>(ch.width));
  out.u32(static_cast<uint32_t>(ch.height));
  out.i32(ch.input_range.min);
  out.i32(ch.input_range.max);
  out.u32(plane_count);
  out.u16(static_cast<uint16_t>(top.grid_s));
  out.u16(static_cast<uint16_t>(top.grid_t));
  out.u64(rkv_off);
  out.u64(parts.rkv.size());
  out.u64(bm_off);
  out.u64(parts.bitmaps.size());
  out.u64(pl_off);
  out.u64(parts.payload.size());
  out.u64(mv_off);
  out.u64(parts.mv.size());
  out.u64(dir_off);
  out.raw(parts.directory.bytes());
  out.raw(parts.rkv.bytes());
  out.raw(parts.bitmaps.bytes());
  out.raw(parts.payload.bytes());
  out.raw(parts.mv.bytes());
  return std::move(out.bytes());
}

void check_structure(const EncodeParams& a, const EncodeParams& b) {
  if (a.tree_height != b.tree_height || a.block_size != b.block_size ||
      a.window != b.window || !(a.color == b.color) || a.motion != b.motion ||
      a.phase_shift != b.phase_shift || a.reference != b.reference) {
    throw Error(ErrorCode::kInvalidArgument,
                "serialize: structural parameters differ from preparation");
  }
}

}  // namespace

std::vector<uint8_t> serialize(const PreparedField& prepared,
                               const EncodeParams& params) {
  params.validate();
  check_structure(prepared.params, params);
  std::array<std::vector<uint8_t>, 3> sections;
  for (int c = 0; c < 3; ++c) sections[c] = serialize_channel(prepared.channels[c], params);

  ByteWriter w;
  for (char ch : kStreamMagic) w.u8(static_cast<uint8_t>(ch));
  w.u16(kStreamVersion);
  w.u16(static_cast<uint16_t>(kHeaderSize));
  w.u16(static_cast<uint16_t>(prepared.grid_s));
  w.u16(static_cast<uint16_t>(prepared.grid_t));
  w.u32(static_cast<uint32_t>(prepared.width));
  w.u32(static_cast<uint32_t>(prepared.height));
  w.u8(static_cast<uint8_t>(params.tree_height));
  w.u8(static_cast<uint8_t>(params.block_size));
  w.u16(static_cast<uint16_t>(params.window));
  w.u32(params.tau_ref);
  w.u32(params.tau_res);
  w.u8(static_cast<uint8_t>(params.color.transform));
  w.u8(static_cast<uint8_t>(params.color.chroma_subsample));
  w.u8(static_cast<uint8_t>(params.mv_policy));
  w.u8(params.motion ? 1 : 0);
  w.u8(static_cast<uint8_t>(params.reference));
  w.u8(static_cast<uint8_t>(params.rkv_codec));
  w.u8(3);
  w.u8(params.phase_shift ? 1 : 0);
  uint64_t offset = kHeaderSize;
  for (int c = 0; c < 3; ++c) {
    w.u64(offset);
    offset += sections[c].size();
  }
  w.u64(offset);  // file size
  for (const auto& s : sections) w.raw(s);
  return std::move(w.bytes());
}

std::vector<uint8_t> encode(const LightField& field, const EncodeParams& params) {
  return serialize(prepare(field, params), params);
}

StreamHeader parse_header(std::span<const uint8_t> bytes) {
  const std::size_t magic_avail = std::min<std::size_t>(bytes.size(), 4);
  if (std::memcmp(bytes.data(), kStreamMagic.data(), magic_avail) != 0) {
    throw Error(ErrorCode::kBadMagic, "not an HMLFC stream (bad magic)");
  }
  if (bytes.size() < kHeaderSize) {
    throw Error(ErrorCode::kTruncated,
                "stream truncated inside the header (" + std::to_string(bytes.size()) +
                    " of " + std::to_string(kHeaderSize) + " bytes)");
  }
  ByteReader r(bytes, 4);
  StreamHeader h;
  h.version = r.u16();
  if (h.version != kStreamVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "unsupported stream version " + std::to_string(h.version));
  }
  if (r.u16() != kHeaderSize) {
    throw Error(ErrorCode::kCorruptStream, "unexpected header size");
  }
  h.grid_s = r.u16();
  h.grid_t = r.u16();
  h.width = static_cast<int>(r.u32());
  h.height = static_cast<int>(r.u32());
  EncodeParams& p = h.params;
  p.tree_height = r.u8();
  p.block_size = r.u8();
  p.window = r.u16();
  p.tau_ref = r.u32();
  p.tau_res = r.u32();
  const uint8_t transform = r.u8();
  const uint8_t subsample = r.u8();
  const uint8_t policy = r.u8();
  const uint8_t motion = r.u8();
  const uint8_t reference = r.u8();
  const uint8_t codec = r.u8();
  h.channel_count = r.u8();
  const uint8_t phase = r.u8();
  if (transform > 1 || subsample > 1 || policy > 2 || motion > 1 ||
      reference > 1 || codec > 1 || phase > 1 || h.channel_count != 3) {
    throw Error(ErrorCode::kCorruptStream, "invalid header field");
  }
  p.color.transform = static_cast<ColorTransform>(transform);
  p.color.chroma_subsample = static_cast<ChromaSubsample>(subsample);
  p.mv_policy = static_cast<MvPolicy>(policy);
  p.motion = motion != 0;
  p.reference = static_cast<ReferenceChoice>(reference);
  p.rkv_codec = static_cast<RkvCodec>(codec);
  p.phase_shift = phase != 0;
  for (auto& off : h.channel_offsets) off = r.u64();
  h.file_size = r.u64();
  if (h.grid_s < 1 || h.grid_t < 1 || h.width < 1 || h.height < 1) {
    throw Error(ErrorCode::kCorruptStream, "invalid dimensions in header");
  }
  try {
    p.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kCorruptStream, std::string("header: ") + e.what());
  }
  if (p.tree_height > max_tree_height(h.grid_s, h.grid_t)) {
    throw Error(ErrorCode::kCorruptStream, "tree height exceeds grid");
  }
  if (bytes.size() < h.file_size) {
    throw Error(ErrorCode::kTruncated,
                "stream truncated: " + std::to_string(bytes.size()) + " of " +
                    std::to_string(h.file_size) + " bytes");
  }
  return h;
}

RankedBitmap::RankedBitmap(std::span<const uint8_t> bytes, int blocks_x, int blocks_y)
    : blocks_x_(blocks_x),
      blocks_y_(blocks_y),
      tiles_x_((blocks_x + kBitmapTile - 1) / kBitmapTile) {
  const std::size_t tiles_y = (blocks_y + kBitmapTile - 1) / kBitmapTile;
  const std::size_t tiles = tiles_x_ * tiles_y;
  ByteReader r(bytes);
  const std::span<const uint8_t> flags = r.raw((tiles + 7) / 8);
  words_.assign(tiles, 0);
  for (std::size_t i = 0; i < tiles; ++i) {
    if (flags[i >> 3] >> (i & 7) & 1) words_[i] = r.u64();
  }
  encoded_size_ = r.pos();
  prefix_.assign(tiles + 1, 0);
  for (std::size_t i = 0; i < tiles; ++i) {
    const std::size_t tx = i % tiles_x_, ty = i / tiles_x_;
    const std::size_t cols = std::min<std::size_t>(kBitmapTile, blocks_x - tx * kBitmapTile);
    const std::size_t rows = std::min<std::size_t>(kBitmapTile, blocks_y - ty * kBitmapTile);
    uint64_t valid = 0;
    for (std::size_t y = 0; y < rows; ++y) {
      valid |= ((cols == 64 ? ~uint64_t{0} : (uint64_t{1} << cols) - 1)) << (y * kBitmapTile);
    }
    if (words_[i] & ~valid) {
      throw Error(ErrorCode::kCorruptStream, "bitmap marks a block outside the plane");
    }
    prefix_[i + 1] = prefix_[i] + static_cast<uint32_t>(std::popcount(words_[i]));
  }
  total_ = prefix_.back();
}

uint32_t RankedBitmap::rank(std::size_t block) const {
  const std::size_t p = position(block);
  const uint64_t mask = (uint64_t{1} << (p & 63)) - 1;
  return prefix_[p >> 6] + static_cast<uint32_t>(std::popcount(words_[p >> 6] & mask));
}

namespace {

void parse_channel(std::span<const uint8_t> file, uint64_t offset,
                   const StreamHeader& header, int c, ParsedChannel& ch) {
  if (offset >= file.size()) throw Error(ErrorCode::kTruncated, "channel offset past end");
  const auto section = file.subspan(offset);
  ByteReader r(section);
  ch.width = static_cast<int>(r.u32());
  ch.height = static_cast<int>(r.u32());
  ch.input_range.min = r.i32();
  ch.input_range.max = r.i32();
  const uint32_t plane_count = r.u32();
  ch.top_grid_s = r.u16();
  ch.top_grid_t = r.u16();
  const uint64_t rkv_off = r.u64(), rkv_size = r.u64();
  const uint64_t bm_off = r.u64(), bm_size = r.u64();
  const uint64_t pl_off = r.u64(), pl_size = r.u64();
  const uint64_t mv_off = r.u64(), mv_size = r.u64();
  const uint64_t dir_off = r.u64();
  auto area = [&](uint64_t off, uint64_t size) {
    if (off > section.size() || size > section.size() - off) {
      throw Error(ErrorCode::kTruncated, "channel area exceeds stream");
    }
    return section.subspan(off, size);
  };
  const auto rkv_area = area(rkv_off, rkv_size);
  const auto bm_area = area(bm_off, bm_size);
  const auto pl_area = area(pl_off, pl_size);
  const auto mv_area = area(mv_off, mv_size);
  const auto dir_area = area(dir_off, uint64_t{plane_count} * kPlaneEntrySize);
  ch.rkv_bytes = rkv_size;
  ch.bitmap_bytes = bm_size;
  ch.payload_bytes = pl_size;
  ch.mv_bytes = mv_size;
  ch.directory_bytes = kChannelHeaderSize + dir_area.size();

  const EncodeParams& p = header.params;
  const bool half = c > 0 && p.color.chroma_subsample == ChromaSubsample::kHalf;
  const int expect_w = half ? (header.width + 1) / 2 : header.width;
  const int expect_h = half ? (header.height + 1) / 2 : header.height;
  if (ch.width != expect_w || ch.height != expect_h) {
    throw Error(ErrorCode::kCorruptStream, "channel dimensions disagree with header");
  }
  ch.blocks_x = blocks_across(ch.width, p.block_size);
  ch.blocks_y = blocks_across(ch.height, p.block_size);
  const std::size_t nblocks = std::size_t(ch.blocks_x) * ch.blocks_y;

  int gs = header.grid_s, gt = header.grid_t;
  for (int l = 0; l < p.tree_height; ++l) {
    ch.level_grid_s.push_back(gs);
    ch.level_grid_t.push_back(gt);
    ch.level_index.emplace_back(std::size_t(gs) * gt, ParsedChannel::kNoPlane);
    gs = (gs + 1) / 2;
    gt = (gt + 1) / 2;
  }
  if (ch.top_grid_s != gs || ch.top_grid_t != gt) {
    throw Error(ErrorCode::kCorruptStream, "top RKV grid disagrees with header");
  }

  ByteReader mv(mv_area);
  ch.mv_dx = read_bise(mv);
  ch.mv_dy = read_bise(mv);
  ch.mv_mode = read_bise(mv);
  const uint64_t records = ch.mv_dx.count();
  if (ch.mv_dy.count() != records || ch.mv_mode.count() != records ||
      ch.mv_dx.range_n() != uint32_t(2 * p.window + 1) ||
      ch.mv_dy.range_n() != uint32_t(2 * p.window + 1) || ch.mv_mode.range_n() != 2) {
    throw Error(ErrorCode::kCorruptStream, "motion-vector stream malformed");
  }

  const std::size_t stride = std::size_t(p.block_size) * p.block_size;
  ByteReader dir(dir_area);
  ch.planes.resize(plane_count);
  for (uint32_t i = 0; i < plane_count; ++i) {
    ParsedPlane& pp = ch.planes[i];
    pp.entry = read_entry(dir);
    const PlaneEntry& e = pp.entry;
    if (e.level >= p.tree_height || e.s >= ch.level_grid_s[e.level] ||
        e.t >= ch.level_grid_t[e.level] || e.reference_plane >= plane_count ||
        e.range_n == 0) {
      throw Error(ErrorCode::kCorruptStream, "plane entry out of range");
    }
    uint32_t& slot = ch.level_index[e.level][std::size_t(e.t) * ch.level_grid_s[e.level] + e.s];
    if (slot != ParsedChannel::kNoPlane) {
      throw Error(ErrorCode::kCorruptStream, "duplicate plane entry");
    }
    slot = i;
    if (e.sig_bitmap_offset > bm_area.size()) throw Error(ErrorCode::kTruncated, "bitmap offset");
    pp.significance =
        RankedBitmap(bm_area.subspan(e.sig_bitmap_offset), ch.blocks_x, ch.blocks_y);
    if (e.has_record_map) {
      if (e.rec_bitmap_offset > bm_area.size()) throw Error(ErrorCode::kTruncated, "bitmap offset");
      pp.records =
          RankedBitmap(bm_area.subspan(e.rec_bitmap_offset), ch.blocks_x, ch.blocks_y);
    }
    if (pp.significance.popcount() != e.significant_count) {
      throw Error(ErrorCode::kCorruptStream, "significance count mismatch");
    }
    if (e.payload_offset > pl_area.size()) throw Error(ErrorCode::kTruncated, "payload offset");
    pp.payload = BiseView(e.range_n, uint64_t{e.significant_count} * stride,
                          pl_area.subspan(e.payload_offset));
    if (uint64_t{e.record_base} + e.record_count > records) {
      throw Error(ErrorCode::kCorruptStream, "record range exceeds motion stream");
    }
    uint64_t expected_records = 0;
    if (e.role == PlaneRole::kPredictive) {
      switch (p.mv_policy) {
        case MvPolicy::kAll: expected_records = nblocks; break;
        case MvPolicy::kDropInsignificant: expected_records = e.significant_count; break;
        case MvPolicy::kSignificantSrv:
          expected_records = e.has_record_map ? pp.records.popcount() : 0;
          break;
      }
      if (p.mv_policy == MvPolicy::kSignificantSrv && !e.has_record_map) {
        throw Error(ErrorCode::kCorruptStream, "predictive plane lacks record map");
      }
    }
    if (e.record_count != expected_records) {
      throw Error(ErrorCode::kCorruptStream, "record count mismatch");
    }
  }
  for (uint32_t i = 0; i < plane_count; ++i) {
    const PlaneEntry& e = ch.planes[i].entry;
    const PlaneEntry& ref = ch.planes[e.reference_plane].entry;
    if (ref.role != PlaneRole::kReference || ref.level != e.level) {
      throw Error(ErrorCode::kCorruptStream, "predictive plane references a non-reference");
    }
  }
  for (const auto& level : ch.level_index) {
    for (uint32_t idx : level) {
      if (idx == ParsedChannel::kNoPlane) {
        throw Error(ErrorCode::kCorruptStream, "directory incomplete");
      }
    }
  }

  ByteReader rk(rkv_area);
  ch.rkvs.resize(std::size_t(ch.top_grid_s) * ch.top_grid_t);
  for (LosslessPlane& lp : ch.rkvs) {
    const uint8_t codec = rk.u8();
    if (codec > 1) throw Error(ErrorCode::kCorruptStream, "unknown RKV codec");
    lp.codec = static_cast<RkvCodec>(codec);
    rk.u8();
    rk.u16();
    lp.value_offset = rk.i32();
    lp.range_n = rk.u32();
    if (lp.range_n == 0) throw Error(ErrorCode::kCorruptStream, "RKV range of zero");
    const uint32_t size = rk.u32();
    const auto data = rk.raw(size);
    lp.bytes.assign(data.begin(), data.end());
  }
}

}  // namespace

ParsedStream parse_stream(std::shared_ptr<const std::vector<uint8_t>> bytes) {
  if (!bytes) throw Error(ErrorCode::kInvalidArgument, "null stream");
  ParsedStream ps;
  ps.bytes = std::move(bytes);
  const std::span<const uint8_t> file(*ps.bytes);
  ps.header = parse_header(file);
  for (int c = 0; c < 3; ++c) {
    parse_channel(file.first(ps.header.file_size), ps.header.channel_offsets[c],
                  ps.header, c, ps.channels[c]);
  }
  return ps;
}

std::string describe_stream(const ParsedStream& stream) {
  const StreamHeader& h = stream.header;
  const EncodeParams& p = h.params;
  std::ostringstream o;
  o << "format        HMLF v" << h.version << "\n"
    << "grid          " << h.grid_s << " x " << h.grid_t << "\n"
    << "image         " << h.width << " x " << h.height << "\n"
    << "tree height   " << p.tree_height << "\n"
    << "block size    " << p.block_size << "\n"
    << "window        " << p.window << "\n"
    << "tau ref/res   " << p.tau_ref << " / " << p.tau_res << "\n"
    << "color         "
    << (p.color.transform == ColorTransform::kYCoCgR ? "ycocg-r" : "identity")
    << (p.color.chroma_subsample == ChromaSubsample::kHalf ? " (chroma 1/2)" : "")
    << "\n"
    << "motion        " << (p.motion ? "on" : "off")
    << (p.motion && !p.phase_shift ? " (subtractive only)" : "") << "\n"
    << "mv policy     " << mv_policy_name(p.mv_policy) << "\n"
    << "rkv codec     " << rkv_codec_name(p.rkv_codec) << "\n"
    << "size          " << stream.bytes->size() << " bytes\n"
    << "bpp           " << stream.bpp() << "\n";
  for (int c = 0; c < 3; ++c) {
    const ParsedChannel& ch = stream.channels[c];
    std::size_t sig = 0, blocks = 0, preds = 0;
    for (const ParsedPlane& pp : ch.planes) {
      sig += pp.entry.significant_count;
      blocks += pp.significance.size();
      if (pp.entry.role == PlaneRole::kPredictive) ++preds;
    }
    o << "channel " << c << "     " << ch.width << "x" << ch.height << ", "
      << ch.planes.size() << " SRVs (" << preds << " predictive), " << sig << "/"
      << blocks << " blocks significant, " << ch.mv_dx.count() << " motion records\n"
      << "  bytes       directory " << ch.directory_bytes << ", rkv " << ch.rkv_bytes
      << ", bitmaps " << ch.bitmap_bytes << ", payload " << ch.payload_bytes
      << ", motion " << ch.mv_bytes << "\n";
  }
  return o.str();
}

}  // namespace hmlfc
