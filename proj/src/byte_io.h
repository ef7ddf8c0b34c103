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

// Little-endian byte serialization helpers for the stream format.

#ifndef HMLFC_SRC_BYTE_IO_H_
#define HMLFC_SRC_BYTE_IO_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hmlfc/error.h"

namespace hmlfc::internal {

class ByteWriter {
 public:
  void u8(uint8_t v) { bytes_.push_back(v); }
  void u16(uint16_t v) { put(v, 2); }
  void u32(uint32_t v) { put(v, 4); }
  void i32(int32_t v) { put(static_cast<uint32_t>(v), 4); }
  void u64(uint64_t v) { put(v, 8); }
  void raw(std::span<const uint8_t> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }
  void zeros(std::size_t n) { bytes_.resize(bytes_.size() + n, 0); }

  std::size_t size() const { return bytes_.size(); }
  // Overwrites a previously reserved little-endian u64.
  void patch_u64(std::size_t at, uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_[at + i] = static_cast<uint8_t>(v >> (8 * i));
  }
  std::vector<uint8_t>& bytes() { return bytes_; }

 private:
  void put(uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  std::vector<uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> bytes, std::size_t pos = 0)
      : bytes_(bytes), pos_(pos) {}

  uint8_t u8() { return static_cast<uint8_t>(get(1)); }
  uint16_t u16() { return static_cast<uint16_t>(get(2)); }
  uint32_t u32() { return static_cast<uint32_t>(get(4)); }
  int32_t i32() { return static_cast<int32_t>(static_cast<uint32_t>(get(4))); }
  uint64_t u64() { return get(8); }
  std::span<const uint8_t> raw(uint64_t n) {
    require(n);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  void skip(uint64_t n) { raw(n); }
  std::size_t pos() const { return pos_; }

 private:
  void require(uint64_t n) const {
    if (pos_ > bytes_.size() || n > bytes_.size() - pos_) {
      throw Error(ErrorCode::kTruncated,
                  "stream truncated at byte " + std::to_string(bytes_.size()) +
                      " (needed " + std::to_string(pos_ + n) + ")");
    }
  }
  uint64_t get(int n) {
    require(n);
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += n;
    return v;
  }

  std::span<const uint8_t> bytes_;
  std::size_t pos_;
};

}  // namespace hmlfc::internal

#endif  // HMLFC_SRC_BYTE_IO_H_
