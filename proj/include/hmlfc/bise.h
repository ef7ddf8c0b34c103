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

// Bounded integer sequence encoding.
//
// A sequence of values in [0, N) is packed with one of three layouts:
//
//   plain_bits    m bits per value, m = ceil(log2 N).
//   trit_packed   groups of 5 values, each value = trit * 2^m + low bits.
//                 A group is an 8-bit trit byte T = sum t_k 3^k followed by
//                 five m-bit low parts: 8 + 5m bits per group.
//   quint_packed  groups of 3 values, each value = quint * 2^m + low bits.
//                 A group is a 7-bit quint word Q = sum q_k 5^k followed by
//                 three m-bit low parts: 7 + 3m bits per group.
//
// Every group has the same bit length, so value i lives at a bit offset
// computed from i alone and decode_at is constant time. Bits are written
// least significant first, filling each byte from bit 0 upward. A trailing
// partial group is padded with zero values.

#ifndef HMLFC_BISE_H_
#define HMLFC_BISE_H_

#include <cstdint>
#include <span>
#include <vector>

namespace hmlfc {

enum class BiseLayout : uint8_t { kPlainBits = 0, kTritPacked = 1, kQuintPacked = 2 };

struct BiseFormat {
  BiseLayout layout = BiseLayout::kPlainBits;
  int bits = 0;  // m

  // Cheapest layout for values in [0, range_n). Throws for range_n == 0.
  static BiseFormat choose(uint32_t range_n);

  uint32_t values_per_group() const;
  uint32_t bits_per_group() const;
  // Exact payload size for `count` values, trailing group included.
  uint64_t payload_bits(uint64_t count) const;
  uint64_t payload_bytes(uint64_t count) const { return (payload_bits(count) + 7) / 8; }
  // Largest representable range (exclusive bound).
  uint64_t capacity() const;

  bool operator==(const BiseFormat&) const = default;
};

// Non-owning view over an encoded payload.
class BiseView {
 public:
  BiseView() = default;
  BiseView(uint32_t range_n, uint64_t count, std::span<const uint8_t> payload);

  uint32_t range_n() const { return range_n_; }
  uint64_t count() const { return count_; }
  BiseFormat format() const { return format_; }
  std::span<const uint8_t> payload() const { return payload_; }

  // Unchecked beyond a debug assertion; see checked_at.
  uint32_t at(uint64_t index) const;
  // Throws kOutOfRange for index >= count.
  uint32_t checked_at(uint64_t index) const;
  // Decodes values [first, first + out.size()).
  void decode_range(uint64_t first, std::span<uint32_t> out) const;
  std::vector<uint32_t> decode_all() const;
  // Bytes a read of `n` consecutive values starting at `first` touches.
  uint64_t bytes_touched(uint64_t first, uint64_t n) const;

 private:
  uint32_t range_n_ = 1;
  uint64_t count_ = 0;
  BiseFormat format_{};
  std::span<const uint8_t> payload_;
};

class BiseSequence {
 public:
  BiseSequence() = default;

  // Throws kOutOfRange naming the index of the first value >= range_n.
  static BiseSequence encode(std::span<const uint32_t> values, uint32_t range_n);

  uint32_t range_n() const { return range_n_; }
  uint64_t count() const { return count_; }
  BiseFormat format() const { return format_; }
  const std::vector<uint8_t>& payload() const { return payload_; }
  uint64_t payload_bits() const { return format_.payload_bits(count_); }

  BiseView view() const { return BiseView(range_n_, count_, payload_); }
  uint32_t decode_at(uint64_t index) const { return view().checked_at(index); }

 private:
  uint32_t range_n_ = 1;
  uint64_t count_ = 0;
  BiseFormat format_{};
  std::vector<uint8_t> payload_;
};

// LSB-first bit writer over a growable byte buffer.
class BitWriter {
 public:
  void write(uint64_t value, int bits);
  uint64_t bit_size() const { return bits_; }
  // Pads to a byte boundary and releases the buffer.
  std::vector<uint8_t> finish() { return std::move(bytes_); }

 private:
  std::vector<uint8_t> bytes_;
  uint64_t bits_ = 0;
};

// Reads `bits` (<= 32) starting at absolute bit offset; bits past the end of
// the buffer read as zero.
uint32_t read_bits(std::span<const uint8_t> bytes, uint64_t bit_offset, int bits);

}  // namespace hmlfc

#endif  // HMLFC_BISE_H_
