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

#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "hmlfc/error.h"
#include "hmlfc/motion.h"
#include "hmlfc/parallel.h"
#include "json.hpp"

namespace hmlfc {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

}  // namespace

LfGeometry LfGeometry::defaults(int grid_s, int grid_t, int width, int height) {
  LfGeometry g;
  g.grid_s = grid_s;
  g.grid_t = grid_t;
  g.width = width;
  g.height = height;
  g.pitch_x = g.pitch_y = 16.0 / width;
  const double cx = (grid_s - 1) * g.spacing_x / 2.0;
  const double cy = (grid_t - 1) * g.spacing_y / 2.0;
  g.st_origin_x = cx - width * g.pitch_x / 2.0;
  g.st_origin_y = cy - height * g.pitch_y / 2.0;
  return g;
}

void LfGeometry::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, std::string("geometry: ") + name + " must be > 0");
    }
  };
  positive(spacing_x, "spacing_x");
  positive(spacing_y, "spacing_y");
  positive(separation, "separation");
  positive(pitch_x, "pitch_x");
  positive(pitch_y, "pitch_y");
  if (grid_s < 1 || grid_t < 1 || width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument, "geometry: grid and image sizes must be >= 1");
  }
}

std::string geometry_to_json(const LfGeometry& g) {
  nlohmann::json j = {
      {"grid", {g.grid_s, g.grid_t}},
      {"image", {g.width, g.height}},
      {"uv_origin", {g.uv_origin_x, g.uv_origin_y}},
      {"spacing", {g.spacing_x, g.spacing_y}},
      {"separation", g.separation},
      {"st_origin", {g.st_origin_x, g.st_origin_y}},
      {"pitch", {g.pitch_x, g.pitch_y}},
  };
  return j.dump(2);
}

LfGeometry geometry_from_json(const std::string& text, const LfGeometry& base) {
  LfGeometry g = base;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    auto pair = [&](const char* key, double& a, double& b) {
      if (j.contains(key)) {
        a = j.at(key).at(0).get<double>();
        b = j.at(key).at(1).get<double>();
      }
    };
    pair("uv_origin", g.uv_origin_x, g.uv_origin_y);
    pair("spacing", g.spacing_x, g.spacing_y);
    pair("st_origin", g.st_origin_x, g.st_origin_y);
    pair("pitch", g.pitch_x, g.pitch_y);
    if (j.contains("separation")) g.separation = j.at("separation").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("geometry JSON: ") + e.what());
  }
  g.validate();
  return g;
}

LfGeometry load_geometry(const std::filesystem::path& sidecar, const LfGeometry& base) {
  if (!std::filesystem::exists(sidecar)) return base;
  const std::vector<uint8_t> bytes = read_file(sidecar);
  return geometry_from_json(std::string(bytes.begin(), bytes.end()), base);
}

std::filesystem::path geometry_sidecar_path(const std::filesystem::path& stream) {
  return std::filesystem::path(stream.string() + ".geom.json");
}

Camera Camera::from_pose(Vec3 position, double yaw_deg, double pitch_deg,
                         double fov_deg, int width, int height) {
  Camera c;
  c.position = position;
  const double yaw = yaw_deg * kDegToRad, pitch = pitch_deg * kDegToRad;
  c.forward = {std::sin(yaw) * std::cos(pitch), -std::sin(pitch),
               std::cos(yaw) * std::cos(pitch)};
  c.right = {std::cos(yaw), 0.0, -std::sin(yaw)};
  c.down = cross(c.forward, c.right);
  c.fov_deg = fov_deg;
  c.width = width;
  c.height = height;
  return c;
}

void Camera::validate() const {
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) {
    throw Error(ErrorCode::kInvalidArgument, "camera: fov must be in (0, 180) degrees");
  }
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument, "camera: resolution must be positive");
  }
  const double eps = 1e-9;
  if (std::abs(dot(forward, forward) - 1) > eps || std::abs(dot(right, right) - 1) > eps ||
      std::abs(dot(down, down) - 1) > eps || std::abs(dot(forward, right)) > eps ||
      std::abs(dot(forward, down)) > eps || std::abs(dot(right, down)) > eps) {
    throw Error(ErrorCode::kInvalidArgument, "camera: orientation is not orthonormal");
  }
}

double matched_fov_deg(const LfGeometry& g) {
  return 2.0 * std::atan(g.width * g.pitch_x / 2.0 / g.separation) / kDegToRad;
}

Ray pixel_ray(const Camera& camera, int px, int py) {
  const double focal = camera.width / 2.0 / std::tan(camera.fov_deg * kDegToRad / 2.0);
  const double a = (px + 0.5 - camera.width / 2.0) / focal;
  const double b = (py + 0.5 - camera.height / 2.0) / focal;
  const Vec3& f = camera.forward;
  const Vec3& r = camera.right;
  const Vec3& d = camera.down;
  return {camera.position,
          {f.x + a * r.x + b * d.x, f.y + a * r.y + b * d.y, f.z + a * r.z + b * d.z}};
}

std::optional<LfCoord> ray_to_lf(const Ray& ray, const LfGeometry& g) {
  const Vec3& o = ray.origin;
  const Vec3& d = ray.direction;
  if (!(d.z > 1e-12)) return std::nullopt;
  const double k0 = -o.z / d.z;
  const double k1 = (g.separation - o.z) / d.z;
  LfCoord c;
  c.cam_s = (o.x + k0 * d.x - g.uv_origin_x) / g.spacing_x;
  c.cam_t = (o.y + k0 * d.y - g.uv_origin_y) / g.spacing_y;
  c.px = (o.x + k1 * d.x - g.st_origin_x) / g.pitch_x - 0.5;
  c.py = (o.y + k1 * d.y - g.st_origin_y) / g.pitch_y - 0.5;
  if (c.cam_s < -0.5 || c.cam_s > g.grid_s - 0.5 || c.cam_t < -0.5 ||
      c.cam_t > g.grid_t - 0.5 || c.px < -0.5 || c.px > g.width - 0.5 ||
      c.py < -0.5 || c.py > g.height - 0.5) {
    return std::nullopt;
  }
  return c;
}

DecoderSource::DecoderSource(const Decoder& decoder, std::size_t cache_slots)
    : decoder_(&decoder),
      bs_(decoder.block_size()),
      stride_(std::size_t(decoder.block_size()) * decoder.block_size() * 3),
      mask_(std::bit_ceil(std::max<std::size_t>(cache_slots, 1)) - 1),
      keys_(mask_ + 1, ~uint64_t{0}),
      blocks_((mask_ + 1) * stride_) {}

void DecoderSource::fetch(int s, int t, int x, int y, float rgb[3]) {
  const int bx = x / bs_, by = y / bs_;
  const uint64_t key = (uint64_t(uint32_t(s)) << 48) | (uint64_t(uint32_t(t)) << 32) |
                       (uint64_t(uint32_t(by)) << 16) | uint64_t(uint32_t(bx));
  uint64_t h = key * 0x9E3779B97F4A7C15ull;
  const std::size_t slot = (h >> 40) & mask_;
  uint8_t* block = &blocks_[slot * stride_];
  const BlockRect r = block_rect(decoder_->width(), decoder_->height(), bs_, bx, by);
  if (keys_[slot] != key) {
    decoder_->decode_rgb_block(s, t, bx, by,
                               std::span<uint8_t>(block, std::size_t(r.w) * r.h * 3));
    keys_[slot] = key;
    ++misses_;
  }
  const uint8_t* px = block + (std::size_t(y - r.y) * r.w + (x - r.x)) * 3;
  rgb[0] = px[0];
  rgb[1] = px[1];
  rgb[2] = px[2];
}

namespace {

template <typename Source>
uint64_t source_misses(const Source&) {
  return 0;
}
template <>
uint64_t source_misses<DecoderSource>(const DecoderSource& src) {
  return src.misses();
}

template <typename MakeSource>
RgbImage render_with(MakeSource make_source, const Camera& camera,
                     const LfGeometry& g, int threads, RenderStats* stats) {
  camera.validate();
  RgbImage out(camera.width, camera.height);
  if (threads <= 0) threads = default_thread_count();
  const int workers = std::max(1, std::min(threads, camera.height));
  std::vector<uint64_t> misses(workers, 0);
  parallel_for(std::size_t(workers), workers, [&](std::size_t w) {
    auto src = make_source();
    for (int py = int(w); py < camera.height; py += workers) {
      uint8_t* row = &out.pixels[std::size_t(py) * camera.width * 3];
      for (int px = 0; px < camera.width; ++px) {
        uint8_t* dst = row + std::size_t(px) * 3;
        const std::optional<LfCoord> c = ray_to_lf(pixel_ray(camera, px, py), g);
        if (!c) {
          dst[0] = kBackground[0];
          dst[1] = kBackground[1];
          dst[2] = kBackground[2];
          continue;
        }
        const std::array<float, 3> v = sample_lf(src, *c);
        for (int k = 0; k < 3; ++k) {
          dst[k] = static_cast<uint8_t>(std::clamp(v[k] + 0.5f, 0.0f, 255.0f));
        }
      }
    }
    misses[w] = source_misses(src);
  });
  if (stats) {
    stats->block_decodes = 0;
    for (uint64_t m : misses) stats->block_decodes += m;
  }
  return out;
}

void check_geometry(const LfGeometry& g, int grid_s, int grid_t, int width, int height) {
  g.validate();
  if (g.grid_s != grid_s || g.grid_t != grid_t || g.width != width || g.height != height) {
    throw Error(ErrorCode::kDimensionMismatch, "geometry does not match the light field");
  }
}

}  // namespace

RgbImage render(const Decoder& decoder, const Camera& camera, const LfGeometry& g,
                int threads, RenderStats* stats) {
  check_geometry(g, decoder.grid_s(), decoder.grid_t(), decoder.width(), decoder.height());
  return render_with([&] { return DecoderSource(decoder); }, camera, g, threads, stats);
}

RgbImage render_dense(const LightField& field, const Camera& camera,
                      const LfGeometry& g, int threads) {
  check_geometry(g, field.grid_s(), field.grid_t(), field.width(), field.height());
  return render_with([&] { return DenseSource(field); }, camera, g, threads, nullptr);
}

}  // namespace hmlfc
