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

// Novel-view synthesis over a two-plane light field.
//
// Geometry: the camera plane is z = 0 and camera (s, t) sits at
// uv_origin + (s * spacing_x, t * spacing_y). The image plane is
// z = separation and pixel (x, y) of every view is centred at
// st_origin + ((x + 0.5) * pitch_x, (y + 0.5) * pitch_y). A view ray runs
// from its camera through that pixel centre, so a scene point at depth z
// moves by spacing * (1 - separation / z) / pitch pixels per camera step.
//
// Camera frames follow the usual computer-vision convention: x right,
// y down, z forward. Yaw turns toward +x, pitch turns toward -y (up).

#ifndef HMLFC_RENDERER_H_
#define HMLFC_RENDERER_H_

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hmlfc/decoder.h"
#include "hmlfc/image_io.h"
#include "hmlfc/lfcore.h"

namespace hmlfc {

struct Vec3 {
  double x = 0, y = 0, z = 0;
};

struct LfGeometry {
  int grid_s = 1;
  int grid_t = 1;
  int width = 1;
  int height = 1;
  double uv_origin_x = 0.0;
  double uv_origin_y = 0.0;
  double spacing_x = 1.0;
  double spacing_y = 1.0;
  double separation = 16.0;
  double st_origin_x = 0.0;
  double st_origin_y = 0.0;
  double pitch_x = 0.125;
  double pitch_y = 0.125;

  // Default layout: unit camera spacing with the image rectangle centred on
  // the camera grid and spanning 16 x (16 * height / width) scene units.
  static LfGeometry defaults(int grid_s, int grid_t, int width, int height);

  Vec3 camera_position(double s, double t) const {
    return {uv_origin_x + s * spacing_x, uv_origin_y + t * spacing_y, 0.0};
  }
  // Throws kInvalidArgument when spacing, pitch or separation is not > 0.
  void validate() const;
  bool operator==(const LfGeometry&) const = default;
};

std::string geometry_to_json(const LfGeometry& g);
// Keys absent from the JSON keep the values of `base`.
LfGeometry geometry_from_json(const std::string& json, const LfGeometry& base);
// Reads the sidecar when it exists, else returns `base`.
LfGeometry load_geometry(const std::filesystem::path& sidecar, const LfGeometry& base);
// "<stream>.geom.json"
std::filesystem::path geometry_sidecar_path(const std::filesystem::path& stream);

struct Camera {
  Vec3 position;
  Vec3 forward{0, 0, 1};
  Vec3 right{1, 0, 0};
  Vec3 down{0, 1, 0};
  double fov_deg = 45.0;  // horizontal
  int width = 512;
  int height = 512;

  static Camera from_pose(Vec3 position, double yaw_deg, double pitch_deg,
                          double fov_deg, int width, int height);
  // Throws kInvalidArgument naming the offending field.
  void validate() const;
};

// Horizontal field of view that maps the full image rectangle onto the
// frame of a camera sitting on the camera plane.
double matched_fov_deg(const LfGeometry& g);

struct Ray {
  Vec3 origin;
  Vec3 direction;
};

Ray pixel_ray(const Camera& camera, int px, int py);

// Continuous light-field coordinates: camera index (cam_s, cam_t) and pixel
// position (px, py) with pixel centres at integers.
struct LfCoord {
  double cam_s = 0;
  double cam_t = 0;
  double px = 0;
  double py = 0;
};

// Intersects the ray with both planes. Misses when the ray is parallel to
// them or travels toward -z, or when an intersection leaves its rectangle.
// The camera rectangle extends half a spacing beyond the outer cameras and
// the image rectangle covers whole pixels.
std::optional<LfCoord> ray_to_lf(const Ray& ray, const LfGeometry& g);

// Pixel sources for sample_lf. Both return RGB samples of view (s, t).
class DenseSource {
 public:
  explicit DenseSource(const LightField& field) : field_(&field) {}
  int grid_s() const { return field_->grid_s(); }
  int grid_t() const { return field_->grid_t(); }
  int width() const { return field_->width(); }
  int height() const { return field_->height(); }
  void fetch(int s, int t, int x, int y, float rgb[3]) {
    for (int c = 0; c < 3; ++c) rgb[c] = float(field_->plane(s, t, c).at(x, y));
  }

 private:
  const LightField* field_;
};

// Pulls blocks through Decoder::decode_rgb_block with a direct-mapped block
// cache. Not thread-safe; give each worker its own instance.
class DecoderSource {
 public:
  explicit DecoderSource(const Decoder& decoder, std::size_t cache_slots = 4096);
  int grid_s() const { return decoder_->grid_s(); }
  int grid_t() const { return decoder_->grid_t(); }
  int width() const { return decoder_->width(); }
  int height() const { return decoder_->height(); }
  void fetch(int s, int t, int x, int y, float rgb[3]);

  uint64_t misses() const { return misses_; }

 private:
  const Decoder* decoder_;
  int bs_;
  std::size_t stride_;
  std::size_t mask_;
  std::vector<uint64_t> keys_;
  std::vector<uint8_t> blocks_;
  uint64_t misses_ = 0;
};

// Quadrilinear interpolation: bilinear over the four nearest cameras times
// bilinear over the four nearest pixels in each, with coordinates clamped
// to the grid and image.
template <typename Source>
std::array<float, 3> sample_lf(Source& src, const LfCoord& c) {
  const float cs = std::clamp(float(c.cam_s), 0.0f, float(src.grid_s() - 1));
  const float ct = std::clamp(float(c.cam_t), 0.0f, float(src.grid_t() - 1));
  const float px = std::clamp(float(c.px), 0.0f, float(src.width() - 1));
  const float py = std::clamp(float(c.py), 0.0f, float(src.height() - 1));
  const int s0 = int(cs), t0 = int(ct), x0 = int(px), y0 = int(py);
  const int s1 = std::min(s0 + 1, src.grid_s() - 1);
  const int t1 = std::min(t0 + 1, src.grid_t() - 1);
  const int x1 = std::min(x0 + 1, src.width() - 1);
  const int y1 = std::min(y0 + 1, src.height() - 1);
  const float fs = cs - s0, ft = ct - t0, fx = px - x0, fy = py - y0;
  const float ws[2] = {1 - fs, fs}, wt[2] = {1 - ft, ft};
  const float wx[2] = {1 - fx, fx}, wy[2] = {1 - fy, fy};
  const int ss[2] = {s0, s1}, ts[2] = {t0, t1}, xs[2] = {x0, x1}, ys[2] = {y0, y1};
  std::array<float, 3> out{0, 0, 0};
  float rgb[3];
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const float wcam = wt[a] * ws[b];
      if (wcam == 0.0f) continue;
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          const float w = wcam * wy[i] * wx[j];
          if (w == 0.0f) continue;
          src.fetch(ss[b], ts[a], xs[j], ys[i], rgb);
          out[0] += w * rgb[0];
          out[1] += w * rgb[1];
          out[2] += w * rgb[2];
        }
      }
    }
  }
  return out;
}

inline constexpr std::array<uint8_t, 3> kBackground = {0, 0, 0};

struct RenderStats {
  uint64_t block_decodes = 0;  // RGB blocks pulled from the decoder
};

// Renders from the compressed stream, rows spread over `threads` workers.
RgbImage render(const Decoder& decoder, const Camera& camera, const LfGeometry& g,
                int threads = 1, RenderStats* stats = nullptr);
// Same sampling path over a fully decoded light field.
RgbImage render_dense(const LightField& field, const Camera& camera,
                      const LfGeometry& g, int threads = 1);

}  // namespace hmlfc

#endif  // HMLFC_RENDERER_H_
