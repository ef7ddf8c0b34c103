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

#include "hmlfc/bise.h"

#include <array>
#include <cassert>
#include <cstring>
#include <string>

#include "hmlfc/error.h"

namespace hmlfc {
namespace {

int ceil_log2(uint64_t n) {
  int b = 0;
  while ((uint64_t{1} << b) < n) ++b;
  return b;
}

// Smallest m with factor * 2^m >= n.
int low_bits_for(uint32_t n, uint32_t factor) {
  int m = 0;
  while (uint64_t{factor} << m < n) ++m;
  return m;
}

struct DigitTables {
  std::array<std::array<uint8_t, 5>, 256> trits{};
  std::array<std::array<uint8_t, 3>, 128> quints{};

  DigitTables() {
    for (int v = 0; v < 256; ++v) {
      int x = v;
      for (int k = 0; k < 5; ++k, x /= 3) trits[v][k] = static_cast<uint8_t>(x % 3);
    }
    for (int v = 0; v < 128; ++v) {
      int x = v;
      for (int k = 0; k < 3; ++k, x /= 5) quints[v][k] = static_cast<uint8_t>(x % 5);
    }
  }
};

const DigitTables& digit_tables() {
  static const DigitTables tables;
  return tables;
}

}  // namespace

BiseFormat BiseFormat::choose(uint32_t range_n) {
  if (range_n == 0) {
    throw Error(ErrorCode::kInvalidArgument, "BISE range must be >= 1");
  }
  const int plain = ceil_log2(range_n);
  BiseFormat best{BiseLayout::kPlainBits, plain};
  if ((range_n & (range_n - 1)) == 0) return best;
  // Costs in fifteenths of a bit per value: plain 15b, trit 15m+24,
  // quint 15m+35.
  int64_t best_cost = 15 * int64_t{plain};
  const int tm = low_bits_for(range_n, 3);
  if (15 * int64_t{tm} + 24 < best_cost) {
    best_cost = 15 * int64_t{tm} + 24;
    best = {BiseLayout::kTritPacked, tm};
  }
  const int qm = low_bits_for(range_n, 5);
  if (15 * int64_t{qm} + 35 < best_cost) {
    best = {BiseLayout::kQuintPacked, qm};
  }
  return best;
}

uint32_t BiseFormat::values_per_group() const {
  switch (layout) {
    case BiseLayout::kPlainBits: return 1;
    case BiseLayout::kTritPacked: return 5;
    case BiseLayout::kQuintPacked: return 3;
  }
  return 1;
}

uint32_t BiseFormat::bits_per_group() const {
  switch (layout) {
    case BiseLayout::kPlainBits: return bits;
    case BiseLayout::kTritPacked: return 8 + 5 * bits;
    case BiseLayout::kQuintPacked: return 7 + 3 * bits;
  }
  return bits;
}

uint64_t BiseFormat::payload_bits(uint64_t count) const {
  const uint64_t groups = (count + values_per_group() - 1) / values_per_group();
  return groups * bits_per_group();
}

uint64_t BiseFormat::capacity() const {
  const uint64_t low = uint64_t{1} << bits;
  switch (layout) {
    case BiseLayout::kPlainBits: return low;
    case BiseLayout::kTritPacked: return 3 * low;
    case BiseLayout::kQuintPacked: return 5 * low;
  }
  return low;
}

void BitWriter::write(uint64_t value, int bits) {
  for (int done = 0; done < bits;) {
    const uint64_t byte = bits_ >> 3;
    const int shift = static_cast<int>(bits_ & 7);
    if (byte >= bytes_.size()) bytes_.push_back(0);
    const int take = std::min(8 - shift, bits - done);
    const uint64_t chunk = (value >> done) & ((uint64_t{1} << take) - 1);
    bytes_[byte] |= static_cast<uint8_t>(chunk << shift);
    done += take;
    bits_ += take;
  }
}

uint32_t read_bits(std::span<const uint8_t> bytes, uint64_t bit_offset, int bits) {
  if (bits == 0) return 0;
  const uint64_t first = bit_offset >> 3;
  const int shift = static_cast<int>(bit_offset & 7);
  uint64_t window = 0;
  if (first + 8 <= bytes.size()) {
    std::memcpy(&window, bytes.data() + first, 8);
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_BIG_ENDIAN__
    window = __builtin_bswap64(window);
#endif
  } else {
    for (uint64_t i = 0; i < 8 && first + i < bytes.size(); ++i) {
      window |= uint64_t{bytes[first + i]} << (8 * i);
    }
  }
  // shift + bits <= 7 + 32 < 64, so one window always suffices.
  return static_cast<uint32_t>((window >> shift) & ((uint64_t{1} << bits) - 1));
}

BiseView::BiseView(uint32_t range_n, uint64_t count,
                   std::span<const uint8_t> payload)
    : range_n_(range_n),
      count_(count),
      format_(BiseFormat::choose(range_n)),
      payload_(payload) {
  if (payload.size() < format_.payload_bytes(count)) {
    throw Error(ErrorCode::kTruncated,
                "BISE payload holds " + std::to_string(payload.size()) +
                    " bytes, needs " + std::to_string(format_.payload_bytes(count)));
  }
}

uint32_t BiseView::at(uint64_t index) const {
  assert(index < count_);
  const int m = format_.bits;
  switch (format_.layout) {
    case BiseLayout::kPlainBits:
      return read_bits(payload_, index * m, m);
    case BiseLayout::kTritPacked: {
      const uint64_t group = index / 5;
      const uint32_t k = static_cast<uint32_t>(index % 5);
      const uint64_t base = group * (8 + 5 * uint64_t(m));
      const uint32_t packed = read_bits(payload_, base, 8);
      const uint32_t low = read_bits(payload_, base + 8 + k * m, m);
      return (uint32_t{digit_tables().trits[packed][k]} << m) | low;
    }
    case BiseLayout::kQuintPacked: {
      const uint64_t group = index / 3;
      const uint32_t k = static_cast<uint32_t>(index % 3);
      const uint64_t base = group * (7 + 3 * uint64_t(m));
      const uint32_t packed = read_bits(payload_, base, 7);
      const uint32_t low = read_bits(payload_, base + 7 + k * m, m);
      return (uint32_t{digit_tables().quints[packed][k]} << m) | low;
    }
  }
  return 0;
}

uint32_t BiseView::checked_at(uint64_t index) const {
  if (index >= count_) {
    throw Error(ErrorCode::kOutOfRange,
                "BISE index " + std::to_string(index) + " >= count " +
                    std::to_string(count_));
  }
  return at(index);
}

void BiseView::decode_range(uint64_t first, std::span<uint32_t> out) const {
  if (first + out.size() > count_) {
    throw Error(ErrorCode::kOutOfRange, "BISE range read past end");
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(first + i);
}

std::vector<uint32_t> BiseView::decode_all() const {
  std::vector<uint32_t> out(count_);
  decode_range(0, out);
  for (uint64_t i = 0; i < count_; ++i) {
    if (out[i] >= range_n_) {
      throw Error(ErrorCode::kCorruptStream,
                  "BISE value " + std::to_string(out[i]) + " at index " +
                      std::to_string(i) + " exceeds range");
    }
  }
  return out;
}

uint64_t BiseView::bytes_touched(uint64_t first, uint64_t n) const {
  if (n == 0 || format_.bits_per_group() == 0) return 0;
  const uint64_t vpg = format_.values_per_group();
  const uint64_t bpg = format_.bits_per_group();
  const uint64_t begin_bit = (first / vpg) * bpg;
  const uint64_t end_bit = ((first + n - 1) / vpg + 1) * bpg;
  return (end_bit + 7) / 8 - begin_bit / 8;
}

BiseSequence BiseSequence::encode(std::span<const uint32_t> values,
                                  uint32_t range_n) {
  BiseSequence seq;
  seq.range_n_ = range_n;
  seq.count_ = values.size();
  seq.format_ = BiseFormat::choose(range_n);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= range_n) {
      throw Error(ErrorCode::kOutOfRange,
                  "value " + std::to_string(values[i]) + " at index " +
                      std::to_string(i) + " outside [0, " +
                      std::to_string(range_n) + ")");
    }
  }
  const int m = seq.format_.bits;
  const uint32_t low_mask = (uint32_t{1} << m) - 1;
  const uint32_t vpg = seq.format_.values_per_group();
  BitWriter w;
  for (std::size_t g = 0; g < values.size(); g += vpg) {
    auto value = [&](std::size_t k) -> uint32_t {
      return g + k < values.size() ? values[g + k] : 0;
    };
    switch (seq.format_.layout) {
      case BiseLayout::kPlainBits:
        w.write(value(0), m);
        break;
      case BiseLayout::kTritPacked: {
        uint32_t packed = 0;
        for (int k = 4; k >= 0; --k) packed = packed * 3 + (value(k) >> m);
        w.write(packed, 8);
        for (int k = 0; k < 5; ++k) w.write(value(k) & low_mask, m);
        break;
      }
      case BiseLayout::kQuintPacked: {
        uint32_t packed = 0;
        for (int k = 2; k >= 0; --k) packed = packed * 5 + (value(k) >> m);
        w.write(packed, 7);
        for (int k = 0; k < 3; ++k) w.write(value(k) & low_mask, m);
        break;
      }
    }
  }
  seq.payload_ = w.finish();
  seq.payload_.resize(seq.format_.payload_bytes(seq.count_), 0);
  return seq;
}

}  // namespace hmlfc
