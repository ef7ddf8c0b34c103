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

#include "hmlfc/lfcore.h"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "hmlfc/error.h"
#include "test_support.h"

namespace hmlfc {
namespace {

// Lifting steps written out independently of the library.
YCoCg OracleForward(int r, int g, int b) {
  const int co = r - b;
  const int t = b + (co >> 1);
  const int cg = g - t;
  return {t + (cg >> 1), co, cg};
}

TEST(ColorTransformTest, ExhaustiveRoundTripOverAllRgbTriples) {
  int mismatches = 0;
  for (int r = 0; r < 256; ++r) {
    for (int g = 0; g < 256; ++g) {
      for (int b = 0; b < 256; ++b) {
        const YCoCg f = rgb_to_ycocg(r, g, b);
        const Rgb back = ycocg_to_rgb(f.y, f.co, f.cg);
        if (!(f == OracleForward(r, g, b)) || back.r != r || back.g != g ||
            back.b != b) {
          ++mismatches;
        }
      }
    }
  }
  EXPECT_EQ(mismatches, 0);
}

TEST(ColorTransformTest, ForwardStaysInsideAdvertisedRanges) {
  const ValueRange y = transformed_range(ColorTransform::kYCoCgR, 0);
  const ValueRange co = transformed_range(ColorTransform::kYCoCgR, 1);
  const ValueRange cg = transformed_range(ColorTransform::kYCoCgR, 2);
  for (int r : {0, 1, 127, 254, 255}) {
    for (int g : {0, 1, 128, 255}) {
      for (int b : {0, 2, 200, 255}) {
        const YCoCg f = rgb_to_ycocg(r, g, b);
        EXPECT_TRUE(y.contains(f.y));
        EXPECT_TRUE(co.contains(f.co));
        EXPECT_TRUE(cg.contains(f.cg));
      }
    }
  }
}

TEST(ColorTransformTest, KnownVectors) {
  EXPECT_EQ(rgb_to_ycocg(0, 0, 0), (YCoCg{0, 0, 0}));
  EXPECT_EQ(rgb_to_ycocg(255, 255, 255), (YCoCg{255, 0, 0}));
  EXPECT_EQ(rgb_to_ycocg(255, 0, 0), (YCoCg{63, 255, -127}));
  EXPECT_EQ(rgb_to_ycocg(0, 255, 0), (YCoCg{127, 0, 255}));
  EXPECT_EQ(rgb_to_ycocg(0, 0, 255), (YCoCg{63, -255, -127}));
}

TEST(ColorTransformTest, SaturatingInverseClampsPerturbedValues) {
  const Rgb exact = ycocg_to_rgb_saturating(100, 20, -30);
  EXPECT_EQ(exact, ycocg_to_rgb(100, 20, -30));
  const Rgb clamped = ycocg_to_rgb_saturating(300, 255, 255);
  EXPECT_GE(clamped.r, 0);
  EXPECT_LE(clamped.r, 255);
  EXPECT_LE(clamped.g, 255);
  EXPECT_GE(clamped.b, 0);
  const Rgb low = ycocg_to_rgb_saturating(-40, 0, 0);
  EXPECT_EQ(low, (Rgb{0, 0, 0}));
}

TEST(ColorTransformTest, ForwardInverseFieldIsIdentity) {
  const LightField field = testing::small_field();
  for (ColorTransform tf : {ColorTransform::kIdentity, ColorTransform::kYCoCgR}) {
    const ColorConfig cfg{tf, ChromaSubsample::kNone};
    const auto planes = forward_color(field, cfg);
    EXPECT_EQ(inverse_color(planes, cfg, field.width(), field.height()), field);
  }
}

TEST(ChromaTest, SubsampleAveragesWithHalfAwayRounding) {
  Plane p(3, 3, kChromaRange);
  const int32_t v[9] = {1, 2, 9, 3, 4, -9, -1, -2, 5};
  for (int i = 0; i < 9; ++i) p.samples()[i] = v[i];
  const Plane s = subsample_chroma(p);
  ASSERT_EQ(s.width(), 2);
  ASSERT_EQ(s.height(), 2);
  EXPECT_EQ(s.at(0, 0), 3);   // 10 / 4 = 2.5
  EXPECT_EQ(s.at(1, 0), 0);   // 0 / 2
  EXPECT_EQ(s.at(0, 1), -2);  // -3 / 2 = -1.5
  EXPECT_EQ(s.at(1, 1), 5);
  const Plane up = upsample_chroma(s, 3, 3);
  EXPECT_EQ(up.at(2, 2), 5);
  EXPECT_EQ(up.at(1, 1), 3);
}

TEST(RoundingTest, DivRoundHalfAway) {
  EXPECT_EQ(div_round_half_away(5, 2), 3);
  EXPECT_EQ(div_round_half_away(-5, 2), -3);
  EXPECT_EQ(div_round_half_away(4, 3), 1);
  EXPECT_EQ(div_round_half_away(-4, 3), -1);
  EXPECT_EQ(div_round_half_away(0, 7), 0);
}

TEST(PsnrTest, IdenticalIsInfiniteAndKnownErrorMatchesFormula) {
  Plane a(4, 4, kByteRange, 10);
  Plane b = a;
  EXPECT_TRUE(std::isinf(psnr(a, b)));
  b.at(0, 0) = 14;  // squared error 16 over 16 samples
  EXPECT_DOUBLE_EQ(mse(a, b), 1.0);
  EXPECT_NEAR(psnr(a, b), 10.0 * std::log10(255.0 * 255.0), 1e-9);
}

TEST(PlaneTest, ValidateRejectsOutOfRangeSamples) {
  Plane p(2, 2, kByteRange);
  EXPECT_NO_THROW(p.validate());
  p.at(1, 1) = 256;
  EXPECT_THROW(p.validate(), Error);
}

}  // namespace
}  // namespace hmlfc
