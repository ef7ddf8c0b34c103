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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "hmlfc/error.h"

namespace hmlfc {
namespace {

std::vector<uint32_t> RandomValues(uint32_t n, std::size_t count, uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<uint32_t> dist(0, n - 1);
  std::vector<uint32_t> v(count);
  for (auto& x : v) x = dist(rng);
  return v;
}

TEST(BiseFormatTest, ChoosesCheapestLayout) {
  EXPECT_EQ(BiseFormat::choose(1), (BiseFormat{BiseLayout::kPlainBits, 0}));
  EXPECT_EQ(BiseFormat::choose(2), (BiseFormat{BiseLayout::kPlainBits, 1}));
  EXPECT_EQ(BiseFormat::choose(3), (BiseFormat{BiseLayout::kTritPacked, 0}));
  EXPECT_EQ(BiseFormat::choose(5), (BiseFormat{BiseLayout::kQuintPacked, 0}));
  EXPECT_EQ(BiseFormat::choose(6), (BiseFormat{BiseLayout::kTritPacked, 1}));
  EXPECT_EQ(BiseFormat::choose(8), (BiseFormat{BiseLayout::kPlainBits, 3}));
  EXPECT_EQ(BiseFormat::choose(17), (BiseFormat{BiseLayout::kQuintPacked, 2}));
  EXPECT_EQ(BiseFormat::choose(33), (BiseFormat{BiseLayout::kQuintPacked, 3}));
  EXPECT_THROW(BiseFormat::choose(0), Error);
}

TEST(BiseGoldenTest, TritGroupPacksBaseThreeDigits) {
  // 2 + 1*3 + 0*9 + 2*27 + 1*81 = 140.
  const std::vector<uint32_t> v = {2, 1, 0, 2, 1};
  const BiseSequence seq = BiseSequence::encode(v, 3);
  EXPECT_EQ(seq.payload(), (std::vector<uint8_t>{0x8C}));
}

TEST(BiseGoldenTest, TritGroupWithLowBits) {
  // High digits 2,0,1,0,2 -> 173; low bits 1,0,1,1,0 at bits 8..12.
  const std::vector<uint32_t> v = {5, 0, 3, 1, 4};
  const BiseSequence seq = BiseSequence::encode(v, 6);
  EXPECT_EQ(seq.payload(), (std::vector<uint8_t>{0xAD, 0x0D}));
}

TEST(BiseGoldenTest, QuintGroupPacksBaseFiveDigits) {
  // 4 + 0*5 + 3*25 = 79 in 7 bits, then a partial group {1}.
  const std::vector<uint32_t> v = {4, 0, 3, 1};
  const BiseSequence seq = BiseSequence::encode(v, 5);
  EXPECT_EQ(seq.payload(), (std::vector<uint8_t>{0xCF, 0x00}));
}

TEST(BiseGoldenTest, PlainBitsAreLsbFirst) {
  const std::vector<uint32_t> v = {7, 0, 5};
  const BiseSequence seq = BiseSequence::encode(v, 8);
  EXPECT_EQ(seq.payload(), (std::vector<uint8_t>{0x47, 0x01}));
}

TEST(BiseTest, SingleSymbolAlphabetTakesNoSpace) {
  const std::vector<uint32_t> v(100, 0);
  const BiseSequence seq = BiseSequence::encode(v, 1);
  EXPECT_TRUE(seq.payload().empty());
  EXPECT_EQ(seq.decode_at(57), 0u);
}

TEST(BiseTest, RejectsValuesOutsideRange) {
  const std::vector<uint32_t> v = {0, 3};
  EXPECT_THROW(BiseSequence::encode(v, 3), Error);
}

TEST(BiseTest, TruncatedPayloadIsReported) {
  const std::vector<uint32_t> v = RandomValues(17, 40, 3);
  const BiseSequence seq = BiseSequence::encode(v, 17);
  const auto& bytes = seq.payload();
  EXPECT_THROW(BiseView(17, 40, std::span(bytes).first(bytes.size() - 1)), Error);
}

TEST(BiseTest, OutOfRangeIndexThrows) {
  const BiseSequence seq = BiseSequence::encode(std::vector<uint32_t>{1, 2}, 3);
  EXPECT_THROW(seq.decode_at(2), Error);
}

class BiseRoundTripTest : public ::testing::TestWithParam<uint32_t> {};

TEST_P(BiseRoundTripTest, RandomAccessMatchesSequentialAndSizeIsBounded) {
  const uint32_t n = GetParam();
  for (std::size_t count : {std::size_t{1}, std::size_t{2}, std::size_t{7}, std::size_t{4099}}) {
    const std::vector<uint32_t> v = RandomValues(n, count, n * 31 + uint32_t(count));
    const BiseSequence seq = BiseSequence::encode(v, n);
    const std::vector<uint32_t> all = seq.view().decode_all();
    ASSERT_EQ(all, v);
    for (std::size_t i = 0; i < count; ++i) ASSERT_EQ(seq.decode_at(i), v[i]);
    const uint64_t plain = count * uint64_t(std::ceil(std::log2(double(n))));
    EXPECT_LE(seq.payload_bits(), plain + seq.format().bits_per_group());
    EXPECT_EQ(seq.payload().size(), (seq.payload_bits() + 7) / 8);
  }
}

TEST_P(BiseRoundTripTest, DecodeRangeMatchesPointReads) {
  const uint32_t n = GetParam();
  const std::vector<uint32_t> v = RandomValues(n, 300, n);
  const BiseSequence seq = BiseSequence::encode(v, n);
  std::vector<uint32_t> out(37);
  for (uint64_t first : {0u, 1u, 4u, 5u, 100u, 263u}) {
    seq.view().decode_range(first, out);
    for (std::size_t i = 0; i < out.size(); ++i) ASSERT_EQ(out[i], v[first + i]);
  }
}

INSTANTIATE_TEST_SUITE_P(Ranges, BiseRoundTripTest,
                         ::testing::Values(2u, 3u, 5u, 6u, 8u, 10u, 12u, 17u, 33u,
                                           255u, 256u, 511u, 65535u, 1u << 20));

TEST(BiseTest, TritDensityForThreeSymbols) {
  const std::vector<uint32_t> v = RandomValues(3, 100000, 9);
  const BiseSequence seq = BiseSequence::encode(v, 3);
  EXPECT_LE(double(seq.payload_bits()) / v.size(), 1.6 + 1e-3);
}

TEST(BitWriterTest, ReadBitsInvertsWrites) {
  BitWriter w;
  w.write(0x5, 3);
  w.write(0x1234, 13);
  w.write(0xABCDE, 20);
  w.write(0, 0);
  w.write(0xFFFFFFFF, 32);
  const std::vector<uint8_t> bytes = w.finish();
  EXPECT_EQ(read_bits(bytes, 0, 3), 0x5u);
  EXPECT_EQ(read_bits(bytes, 3, 13), 0x1234u);
  EXPECT_EQ(read_bits(bytes, 16, 20), 0xABCDEu);
  EXPECT_EQ(read_bits(bytes, 36, 32), 0xFFFFFFFFu);
}

}  // namespace
}  // namespace hmlfc
