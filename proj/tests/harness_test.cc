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

#include "hmlfc/harness.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "hmlfc/container.h"
#include "hmlfc/decoder.h"
#include "hmlfc/error.h"
#include "json.hpp"
#include "test_support.h"

namespace hmlfc {
namespace {

TEST(NamesTest, CodecAndSceneNamesRoundTrip) {
  for (CodecVariant v : {CodecVariant::kHmlfc, CodecVariant::kRlfcOnly, CodecVariant::kMcOnly}) {
    EXPECT_EQ(parse_codec_variant(codec_variant_name(v)), v);
  }
  for (SceneKind k : {SceneKind::kQuads, SceneKind::kCheckerboard, SceneKind::kNoise}) {
    EXPECT_EQ(parse_scene_kind(scene_kind_name(k)), k);
  }
  EXPECT_THROW(parse_codec_variant("jpeg"), Error);
  EXPECT_THROW(parse_scene_kind("teapot"), Error);
}

TEST(SyntheticTest, DeterministicPerSeed) {
  const LightField a = testing::small_field(3);
  EXPECT_EQ(a, testing::small_field(3));
  EXPECT_NE(a, testing::small_field(4));
  EXPECT_EQ(a.grid_s(), 4);
  EXPECT_EQ(a.width(), 32);
}

TEST(SyntheticTest, FocalPlaneBackgroundHasNoParallax) {
  SyntheticScene scene = testing::small_scene(5);
  scene.quad_count = 0;
  const LightField f = generate_synthetic(scene);
  for (int t = 0; t < 4; ++t) {
    for (int s = 0; s < 4; ++s) {
      for (int c = 0; c < 3; ++c) EXPECT_EQ(f.plane(s, t, c), f.plane(0, 0, c));
    }
  }
}

TEST(SyntheticTest, QuadsCreateParallaxUnlessBaselineIsZero) {
  SyntheticScene scene = testing::small_scene(6);
  const LightField f = generate_synthetic(scene);
  EXPECT_NE(f.plane(0, 0, 0), f.plane(3, 3, 0));
  scene.baseline = 0;
  const LightField flat = generate_synthetic(scene);
  EXPECT_EQ(flat.plane(0, 0, 0), flat.plane(3, 3, 0));
}

TEST(SyntheticTest, QuadsAreOrderedNearestFirstWithinDepthBand) {
  SyntheticScene scene;
  scene.quad_count = 12;
  const std::vector<SceneQuad> quads = scene_quads(scene);
  ASSERT_EQ(quads.size(), 12u);
  const double sep = scene.geometry().separation;
  for (std::size_t i = 0; i < quads.size(); ++i) {
    EXPECT_GE(quads[i].depth, scene.near_fraction * sep);
    EXPECT_LE(quads[i].depth, scene.far_fraction * sep);
    EXPECT_LT(quads[i].x0, quads[i].x1);
    if (i > 0) {
      EXPECT_LE(quads[i - 1].depth, quads[i].depth);
    }
  }
}

TEST(SyntheticTest, GeometryUsesBaselineAsSpacing) {
  SyntheticScene scene = testing::small_scene();
  scene.baseline = 2.5;
  const LfGeometry g = scene.geometry();
  EXPECT_DOUBLE_EQ(g.spacing_x, 2.5);
  EXPECT_DOUBLE_EQ(g.st_origin_x + 16 * g.pitch_x, 1.5 * 2.5);
}

TEST(SyntheticTest, OtherKindsGenerate) {
  for (SceneKind k : {SceneKind::kCheckerboard, SceneKind::kNoise}) {
    SyntheticScene scene = testing::small_scene();
    scene.kind = k;
    const LightField f = generate_synthetic(scene);
    EXPECT_EQ(f.view_count(), 16u);
    for (int c = 0; c < 3; ++c) EXPECT_NO_THROW(f.plane(1, 2, c).validate());
  }
}

class RdModelTest : public ::testing::Test {
 protected:
  void SetUp() override {
    field_ = testing::small_field(12);
    params_.tree_height = 2;
    params_.window = 4;
    params_.threads = 1;
  }
  LightField field_;
  EncodeParams params_;
};

TEST_F(RdModelTest, HmlfcPointMatchesDirectEncode) {
  const RdModel model(field_, CodecVariant::kHmlfc, params_);
  for (uint32_t tau : {0u, 40u, 300u}) {
    const RdPoint pt = model.measure(tau);
    EncodeParams p = params_;
    p.tau_ref = p.tau_res = tau;
    const std::vector<uint8_t> stream = encode(field_, p);
    EXPECT_EQ(pt.bytes, stream.size());
    const double want = psnr(field_, Decoder::open(stream).decode_all(1));
    if (std::isinf(want)) {
      EXPECT_TRUE(std::isinf(pt.psnr));
    } else {
      EXPECT_DOUBLE_EQ(pt.psnr, want);
    }
    EXPECT_DOUBLE_EQ(pt.bpp, bits_per_pixel(stream.size(), 4, 4, 32, 32));
    EXPECT_EQ(pt.blocks_decoded, 3u * 16 * 64);
  }
}

TEST_F(RdModelTest, RlfcOnlyDisablesMotion) {
  EncodeParams p = params_;
  p.motion = false;
  p.tau_ref = p.tau_res = 60;
  const RdPoint pt = RdModel(field_, CodecVariant::kRlfcOnly, params_).measure(60);
  EXPECT_EQ(pt.bytes, encode(field_, p).size());
}

TEST_F(RdModelTest, RefScaleSetsReferenceThreshold) {
  EncodeParams p = params_;
  p.tau_res = 80;
  p.tau_ref = 40;
  const RdPoint pt = RdModel(field_, CodecVariant::kHmlfc, params_).measure(80, 0.5);
  EXPECT_EQ(pt.bytes, encode(field_, p).size());
}

TEST_F(RdModelTest, McOnlyIsLosslessAtZeroTauAndShrinksWithTau) {
  const RdModel model(field_, CodecVariant::kMcOnly, params_);
  const RdPoint exact = model.measure(0);
  EXPECT_TRUE(std::isinf(exact.psnr));
  EXPECT_EQ(exact.tree_height, 1);
  const RdPoint lossy = model.measure(200);
  EXPECT_LT(lossy.bytes, exact.bytes);
  EXPECT_LT(lossy.psnr, 80.0);
}

TEST_F(RdModelTest, BytesFallAsTauRises) {
  const RdModel model(field_, CodecVariant::kHmlfc, params_);
  uint64_t last = UINT64_MAX;
  double last_psnr = INFINITY;
  for (uint32_t tau : {0u, 10u, 40u, 160u, 640u}) {
    const RdPoint pt = model.measure(tau);
    EXPECT_LE(pt.bytes, last);
    EXPECT_LE(pt.psnr, last_psnr);
    last = pt.bytes;
    last_psnr = pt.psnr;
  }
}

TEST(SweepSpecTest, ParsesAxesSceneAndParams) {
  const SweepSpec s = SweepSpec::from_json(R"({
    "block_sizes": [2, 4], "taus": [10, 20, 30], "windows": [0, 8],
    "heights": [1], "codecs": ["hmlfc", "mc_only"], "threads": 2,
    "tau_ref_scale": 0.5,
    "scene": {"kind": "noise", "grid": [6, 5], "image": [40, 24], "baseline": 2,
              "quads": 1, "seed": 9, "depth": [0.5, 0.6]},
    "params": {"mv_policy": "all", "rkv_codec": "bise", "chroma_subsample": true,
               "reference": "center"}})");
  EXPECT_EQ(s.block_sizes, (std::vector<int>{2, 4}));
  EXPECT_EQ(s.taus.size(), 3u);
  EXPECT_EQ(s.codecs.back(), CodecVariant::kMcOnly);
  EXPECT_EQ(s.threads, 2);
  EXPECT_DOUBLE_EQ(s.tau_ref_scale, 0.5);
  EXPECT_EQ(s.scene.kind, SceneKind::kNoise);
  EXPECT_EQ(s.scene.grid_t, 5);
  EXPECT_EQ(s.scene.width, 40);
  EXPECT_DOUBLE_EQ(s.scene.near_fraction, 0.5);
  EXPECT_EQ(s.base.mv_policy, MvPolicy::kAll);
  EXPECT_EQ(s.base.rkv_codec, RkvCodec::kBise);
  EXPECT_EQ(s.base.color.chroma_subsample, ChromaSubsample::kHalf);
  EXPECT_EQ(s.base.reference, ReferenceChoice::kCenter);
}

TEST(SweepSpecTest, RejectsMalformedSpecs) {
  EXPECT_THROW(SweepSpec::from_json("{"), Error);
  EXPECT_THROW(SweepSpec::from_json(R"({"taus": []})"), Error);
  EXPECT_THROW(SweepSpec::from_json(R"({"codecs": ["zip"]})"), Error);
  EXPECT_THROW(SweepSpec::from_json(R"({"params": {"reference": "middle"}})"), Error);
}

TEST(SweepTest, ProducesOnePointPerCombinationAndRecordsErrors) {
  SweepSpec spec;
  spec.taus = {20, 80};
  spec.windows = {0, 2};
  spec.heights = {2, 5};  // 5 is too tall for a 4x4 grid
  spec.threads = 1;
  const std::vector<RdPoint> pts = run_sweep(spec, testing::small_field(13));
  ASSERT_EQ(pts.size(), 8u);
  int failed = 0;
  for (const RdPoint& p : pts) {
    if (p.tree_height == 5) {
      EXPECT_FALSE(p.error.empty());
      ++failed;
    } else {
      EXPECT_TRUE(p.error.empty()) << p.error;
      EXPECT_GT(p.bytes, 0u);
    }
  }
  EXPECT_EQ(failed, 4);

  std::ostringstream csv;
  write_csv(csv, pts);
  const std::string text = csv.str();
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "codec,tree_height,block_size,window,tau,bytes,bpp,psnr,encode_s,decode_s,"
            "blocks_decoded,cache_bytes,error");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 9);

  const auto j = nlohmann::json::parse(points_to_json(pts));
  ASSERT_EQ(j.at("points").size(), 8u);
  EXPECT_EQ(j.at("points")[0].at("codec"), "hmlfc");
}

TEST(CompareTest, MatchedPointsFallInsideTolerance) {
  const LightField field = testing::small_field(14);
  EncodeParams p;
  p.tree_height = 2;
  p.window = 4;
  p.threads = 1;
  const Comparison cmp = compare_codecs(field, 42.0, p);
  ASSERT_EQ(cmp.results.size(), 3u);
  for (const MatchedPoint& m : cmp.results) {
    if (m.converged) {
      EXPECT_LE(std::abs(m.point.psnr - 42.0), kMatchToleranceDb);
    }
  }
  const MatchedPoint* h = cmp.find(CodecVariant::kHmlfc);
  ASSERT_NE(h, nullptr);
  EXPECT_TRUE(h->converged);
  const auto r = cmp.ratio(CodecVariant::kRlfcOnly);
  if (r) {
    EXPECT_DOUBLE_EQ(*r, cmp.find(CodecVariant::kRlfcOnly)->point.bpp / h->point.bpp);
  }
}

}  // namespace
}  // namespace hmlfc
