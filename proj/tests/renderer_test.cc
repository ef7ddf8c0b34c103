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

#include "hmlfc/renderer.h"

#include <cmath>

#include <gtest/gtest.h>

#include "hmlfc/container.h"
#include "hmlfc/decoder.h"
#include "hmlfc/error.h"
#include "hmlfc/image_io.h"
#include "test_support.h"

namespace hmlfc {
namespace {

double Dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

void ExpectVecNear(const Vec3& a, const Vec3& b, double eps = 1e-12) {
  EXPECT_NEAR(a.x, b.x, eps);
  EXPECT_NEAR(a.y, b.y, eps);
  EXPECT_NEAR(a.z, b.z, eps);
}

TEST(CameraTest, PoseAxesFollowRightDownForwardConvention) {
  const Camera c = Camera::from_pose({0, 0, 0}, 0, 0, 60, 64, 64);
  ExpectVecNear(c.forward, {0, 0, 1});
  ExpectVecNear(c.right, {1, 0, 0});
  ExpectVecNear(c.down, {0, 1, 0});
  const Camera yawed = Camera::from_pose({0, 0, 0}, 90, 0, 60, 64, 64);
  ExpectVecNear(yawed.forward, {1, 0, 0});
  ExpectVecNear(yawed.right, {0, 0, -1});
  const Camera up = Camera::from_pose({0, 0, 0}, 0, 90, 60, 64, 64);
  ExpectVecNear(up.forward, {0, -1, 0});
}

TEST(CameraTest, ArbitraryPosesAreOrthonormal) {
  for (double yaw : {-170.0, -33.0, 0.0, 12.5, 91.0}) {
    for (double pitch : {-80.0, -5.0, 0.0, 44.0}) {
      const Camera c = Camera::from_pose({1, 2, 3}, yaw, pitch, 45, 8, 8);
      EXPECT_NO_THROW(c.validate());
      EXPECT_NEAR(Dot(c.forward, c.right), 0, 1e-12);
    }
  }
  Camera bad = Camera::from_pose({0, 0, 0}, 0, 0, 0, 8, 8);
  EXPECT_THROW(bad.validate(), Error);
  bad = Camera::from_pose({0, 0, 0}, 0, 0, 45, 0, 8);
  EXPECT_THROW(bad.validate(), Error);
}

TEST(CameraTest, CentrePixelOfOddImageLooksForward) {
  const Camera c = Camera::from_pose({0, 0, 0}, 30, -10, 50, 9, 7);
  const Ray r = pixel_ray(c, 4, 3);
  ExpectVecNear(r.direction, c.forward);
  // Corner pixel centre sits half a pixel inside the horizontal fov.
  const Ray edge = pixel_ray(Camera::from_pose({0, 0, 0}, 0, 0, 90, 8, 8), 7, 4);
  EXPECT_NEAR(edge.direction.x / edge.direction.z, 7.5 / 8 * 2 - 1, 1e-12);
}

TEST(RayTest, RecoversConstructedPlaneCrossings) {
  const LfGeometry g = LfGeometry::defaults(5, 4, 40, 30);
  for (double s : {0.0, 1.25, 3.9}) {
    for (double px : {0.0, 10.3, 38.75}) {
      const double t = 2.5, py = 5.7;
      const Vec3 a = g.camera_position(s, t);
      const Vec3 b = {g.st_origin_x + (px + 0.5) * g.pitch_x,
                      g.st_origin_y + (py + 0.5) * g.pitch_y, g.separation};
      // Start the ray behind the camera plane to exercise the origin term.
      const Vec3 d = {b.x - a.x, b.y - a.y, b.z - a.z};
      const Ray ray{{a.x - 0.5 * d.x, a.y - 0.5 * d.y, a.z - 0.5 * d.z}, d};
      const auto c = ray_to_lf(ray, g);
      ASSERT_TRUE(c.has_value());
      EXPECT_NEAR(c->cam_s, s, 1e-9);
      EXPECT_NEAR(c->cam_t, t, 1e-9);
      EXPECT_NEAR(c->px, px, 1e-9);
      EXPECT_NEAR(c->py, py, 1e-9);
    }
  }
}

TEST(RayTest, MissesOutsideRectanglesAndBackwardRays) {
  const LfGeometry g = LfGeometry::defaults(4, 4, 32, 32);
  EXPECT_FALSE(ray_to_lf({{0, 0, 0}, {0, 0, -1}}, g).has_value());
  EXPECT_FALSE(ray_to_lf({{0, 0, 0}, {1, 0, 0}}, g).has_value());
  EXPECT_FALSE(ray_to_lf({{-2, 0, 0}, {0, 0, 1}}, g).has_value());   // beside the grid
  EXPECT_FALSE(ray_to_lf({{1.5, 1.5, 0}, {5, 0, 1}}, g).has_value());  // off the image
  EXPECT_TRUE(ray_to_lf({{1.5, 1.5, 0}, {0, 0, 1}}, g).has_value());
  EXPECT_TRUE(ray_to_lf({{-0.5, -0.5, 0}, {0, 0, 1}}, g).has_value());
}

TEST(GeometryTest, DefaultsCentreImageOnGrid) {
  const LfGeometry g = LfGeometry::defaults(8, 8, 128, 64);
  EXPECT_DOUBLE_EQ(g.pitch_x, 0.125);
  EXPECT_DOUBLE_EQ(g.st_origin_x + 64 * g.pitch_x, 3.5);
  EXPECT_DOUBLE_EQ(g.st_origin_y + 32 * g.pitch_y, 3.5);
  EXPECT_NEAR(matched_fov_deg(g), 2 * std::atan(0.5) * 180 / M_PI, 1e-12);
}

TEST(GeometryTest, JsonRoundTripAndValidation) {
  LfGeometry g = LfGeometry::defaults(3, 2, 20, 10);
  g.separation = 7.5;
  g.uv_origin_x = -1.25;
  EXPECT_EQ(geometry_from_json(geometry_to_json(g), LfGeometry::defaults(3, 2, 20, 10)), g);
  EXPECT_THROW(geometry_from_json("{\"separation\": 0}", g), Error);
  EXPECT_THROW(geometry_from_json("not json", g), Error);
  EXPECT_EQ(geometry_sidecar_path("a/b.hmlfc"), std::filesystem::path("a/b.hmlfc.geom.json"));
  EXPECT_EQ(load_geometry("/nonexistent.geom.json", g), g);
}

TEST(SampleTest, QuadrilinearIsExactOnLinearField) {
  LightField f(3, 3, 5, 4);
  for (int t = 0; t < 3; ++t) {
    for (int s = 0; s < 3; ++s) {
      for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 5; ++x) {
          for (int c = 0; c < 3; ++c) f.plane(s, t, c).at(x, y) = 10 * s + 3 * t + 2 * x + y + c;
        }
      }
    }
  }
  DenseSource src(f);
  const LfCoord at{1.25, 0.5, 2.75, 1.5};
  const auto v = sample_lf(src, at);
  const float want = 10 * 1.25f + 3 * 0.5f + 2 * 2.75f + 1.5f;
  EXPECT_NEAR(v[0], want, 1e-4);
  EXPECT_NEAR(v[2], want + 2, 1e-4);
  // Coordinates past the last sample clamp to it.
  const auto edge = sample_lf(src, LfCoord{2.4, -0.3, 4.4, 3.4});
  EXPECT_NEAR(edge[0], 10 * 2 + 0 + 2 * 4 + 3, 1e-4);
}

class RenderTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SyntheticScene scene = testing::small_scene(11);
    scene.grid_s = scene.grid_t = 5;
    field_ = new LightField(generate_synthetic(scene));
    EncodeParams p;
    p.tree_height = 2;
    p.window = 4;
    p.threads = 1;
    lossy_ = new std::vector<uint8_t>(encode(*field_, p));
    p.tau_ref = p.tau_res = 0;
    lossless_ = new std::vector<uint8_t>(encode(*field_, p));
    geometry_ = LfGeometry::defaults(5, 5, 32, 32);
  }
  static void TearDownTestSuite() {
    delete field_;
    delete lossy_;
    delete lossless_;
  }
  static LightField* field_;
  static std::vector<uint8_t>* lossy_;
  static std::vector<uint8_t>* lossless_;
  static LfGeometry geometry_;
};

LightField* RenderTest::field_ = nullptr;
std::vector<uint8_t>* RenderTest::lossy_ = nullptr;
std::vector<uint8_t>* RenderTest::lossless_ = nullptr;
LfGeometry RenderTest::geometry_;

TEST_F(RenderTest, CentreCameraReprojectsItsOwnView) {
  const Camera cam = Camera::from_pose(geometry_.camera_position(2, 2), 0, 0,
                                       matched_fov_deg(geometry_), 32, 32);
  const RgbImage want = view_image(*field_, 2, 2);
  EXPECT_EQ(render_dense(*field_, cam, geometry_), want);
  const Decoder d = Decoder::open(*lossless_);
  EXPECT_EQ(render(d, cam, geometry_), want);
}

TEST_F(RenderTest, DecoderRenderMatchesDenseRenderOfFullDecode) {
  const Decoder d = Decoder::open(*lossy_);
  const LightField decoded = d.decode_all(1);
  for (const auto& [pos, yaw, pitch] :
       {std::tuple{Vec3{2, 2, -3}, 0.0, 0.0}, std::tuple{Vec3{0.7, 3.1, -1}, 8.0, -6.0},
        std::tuple{Vec3{4.2, 0.3, 0.5}, -12.0, 4.0}}) {
    const Camera cam = Camera::from_pose(pos, yaw, pitch, 40, 48, 40);
    RenderStats stats;
    const RgbImage got = render(d, cam, geometry_, 1, &stats);
    EXPECT_EQ(got, render_dense(decoded, cam, geometry_));
    EXPECT_GT(stats.block_decodes, 0u);
  }
}

TEST_F(RenderTest, ThreadCountDoesNotChangePixels) {
  const Decoder d = Decoder::open(*lossy_);
  const Camera cam = Camera::from_pose({1.3, 2.2, -2}, 5, 3, 45, 64, 50);
  const RgbImage one = render(d, cam, geometry_, 1);
  for (int threads : {2, 3, 8}) EXPECT_EQ(render(d, cam, geometry_, threads), one);
}

TEST_F(RenderTest, RaysThatMissAreBackground) {
  const Decoder d = Decoder::open(*lossy_);
  const Camera away = Camera::from_pose({2, 2, -3}, 180, 0, 45, 16, 16);
  const RgbImage img = render(d, away, geometry_);
  for (uint8_t v : img.pixels) EXPECT_EQ(v, 0);
}

TEST_F(RenderTest, GeometryMustMatchStream) {
  const Decoder d = Decoder::open(*lossy_);
  const Camera cam = Camera::from_pose({2, 2, -3}, 0, 0, 45, 8, 8);
  try {
    render(d, cam, LfGeometry::defaults(4, 5, 32, 32));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST_F(RenderTest, DecoderSourceCachesBlocks) {
  const Decoder d = Decoder::open(*lossy_);
  DecoderSource src(d);
  float rgb[3];
  src.fetch(1, 1, 5, 5, rgb);
  src.fetch(1, 1, 6, 7, rgb);  // same 4x4 block
  EXPECT_EQ(src.misses(), 1u);
  src.fetch(1, 1, 9, 5, rgb);
  EXPECT_EQ(src.misses(), 2u);
  const RgbImage view = d.decode_view(1, 1);
  EXPECT_EQ(rgb[0], view.pixels[(5 * 32 + 9) * 3]);
}

}  // namespace
}  // namespace hmlfc
