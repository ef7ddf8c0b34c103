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

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "hmlfc/error.h"
#include "hmlfc/harness.h"

namespace hmlfc {

namespace {

constexpr int kLattice = 256;

// Smoothly interpolated lattice noise in [0, 1].
class ValueNoise {
 public:
  explicit ValueNoise(uint64_t seed) : table_(kLattice * kLattice) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    for (float& v : table_) v = dist(rng);
  }

  float lattice(int x, int y) const {
    return table_[std::size_t(y & (kLattice - 1)) * kLattice + (x & (kLattice - 1))];
  }

  float smooth(double u, double v) const {
    const double fu = std::floor(u), fv = std::floor(v);
    const int x = int(fu), y = int(fv);
    double a = u - fu, b = v - fv;
    a = a * a * (3 - 2 * a);
    b = b * b * (3 - 2 * b);
    const double top = lattice(x, y) * (1 - a) + lattice(x + 1, y) * a;
    const double bot = lattice(x, y + 1) * (1 - a) + lattice(x + 1, y + 1) * a;
    return float(top * (1 - b) + bot * b);
  }

 private:
  std::vector<float> table_;
};

struct Surface {
  SceneKind kind;
  ValueNoise noise;
  double cell;  // texture feature size in scene units
  std::array<double, 3> c0;
  std::array<double, 3> c1;

  std::array<double, 3> color(double x, double y) const {
    double l = 0;
    switch (kind) {
      case SceneKind::kQuads:
        l = 0.65 * noise.smooth(x / cell, y / cell) +
            0.35 * noise.smooth(x / (cell * 0.4) + 97.0, y / (cell * 0.4) + 31.0);
        break;
      case SceneKind::kCheckerboard: {
        const int cx = int(std::floor(x / cell)), cy = int(std::floor(y / cell));
        l = ((cx + cy) & 1) ? 0.85 : 0.15;
        break;
      }
      case SceneKind::kNoise:
        l = noise.lattice(int(std::floor(x / cell)), int(std::floor(y / cell)));
        break;
    }
    return {c0[0] + (c1[0] - c0[0]) * l, c0[1] + (c1[1] - c0[1]) * l,
            c0[2] + (c1[2] - c0[2]) * l};
  }
};

std::array<double, 3> random_color(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(20.0, 235.0);
  return {dist(rng), dist(rng), dist(rng)};
}

Surface make_surface(SceneKind kind, uint64_t seed, double pixel, double scale) {
  std::mt19937_64 rng(seed);
  const double cell = scale * (kind == SceneKind::kQuads          ? 4.0 * pixel
                               : kind == SceneKind::kCheckerboard ? 8.0 * pixel
                                                                  : pixel);
  return Surface{kind, ValueNoise(seed ^ 0x5eedULL), cell, random_color(rng),
                 random_color(rng)};
}

}  // namespace

LfGeometry SyntheticScene::geometry() const {
  LfGeometry g = LfGeometry::defaults(grid_s, grid_t, width, height);
  const double span_x = width * g.pitch_x, span_y = height * g.pitch_y;
  g.spacing_x = g.spacing_y = baseline > 0 ? baseline : 1.0;
  g.st_origin_x = (grid_s - 1) * g.spacing_x / 2.0 - span_x / 2.0;
  g.st_origin_y = (grid_t - 1) * g.spacing_y / 2.0 - span_y / 2.0;
  return g;
}

std::vector<SceneQuad> scene_quads(const SyntheticScene& scene) {
  const LfGeometry g = scene.geometry();
  std::mt19937_64 rng(scene.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double d = g.separation;
  const Vec3 centre = g.camera_position((scene.grid_s - 1) / 2.0, (scene.grid_t - 1) / 2.0);
  const double span_x = scene.width * g.pitch_x, span_y = scene.height * g.pitch_y;
  std::vector<SceneQuad> quads;
  for (int i = 0; i < scene.quad_count; ++i) {
    SceneQuad q;
    q.depth = d * (scene.near_fraction +
                   (scene.far_fraction - scene.near_fraction) * unit(rng));
    // Placed on the image plane as seen from the grid centre, then carried
    // back to the quad's depth along the central rays.
    const double w = span_x * (0.2 + 0.25 * unit(rng));
    const double h = span_y * (0.2 + 0.25 * unit(rng));
    const double x = g.st_origin_x + (span_x - w) * unit(rng);
    const double y = g.st_origin_y + (span_y - h) * unit(rng);
    const double k = q.depth / d;
    q.x0 = centre.x + (x - centre.x) * k;
    q.x1 = centre.x + (x + w - centre.x) * k;
    q.y0 = centre.y + (y - centre.y) * k;
    q.y1 = centre.y + (y + h - centre.y) * k;
    q.texture_seed = rng();
    quads.push_back(q);
  }
  std::sort(quads.begin(), quads.end(),
            [](const SceneQuad& a, const SceneQuad& b) { return a.depth < b.depth; });
  return quads;
}

LightField generate_synthetic(const SyntheticScene& scene) {
  if (scene.grid_s < 1 || scene.grid_t < 1 || scene.width < 1 || scene.height < 1) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic scene dimensions must be >= 1");
  }
  const LfGeometry g = scene.geometry();
  const std::vector<SceneQuad> quads = scene_quads(scene);
  const Surface background = make_surface(scene.kind, scene.seed * 7919 + 1, g.pitch_x, 1.0);
  std::vector<Surface> surfaces;
  for (const SceneQuad& q : quads) {
    surfaces.push_back(
        make_surface(scene.kind, q.texture_seed, g.pitch_x, scene.quad_texture_scale));
  }
  const double d = g.separation;
  // Zero baseline collapses every camera onto the grid centre.
  const bool collapsed = !(scene.baseline > 0);
  LightField field(scene.grid_s, scene.grid_t, scene.width, scene.height);
  constexpr double kSub[2] = {0.25, 0.75};
  for (int t = 0; t < scene.grid_t; ++t) {
    for (int s = 0; s < scene.grid_s; ++s) {
      const Vec3 cam = collapsed
                           ? g.camera_position((scene.grid_s - 1) / 2.0, (scene.grid_t - 1) / 2.0)
                           : g.camera_position(s, t);
      for (int y = 0; y < scene.height; ++y) {
        for (int x = 0; x < scene.width; ++x) {
          std::array<double, 3> acc{0, 0, 0};
          for (double sy : kSub) {
            for (double sx : kSub) {
              const double px = g.st_origin_x + (x + sx) * g.pitch_x;
              const double py = g.st_origin_y + (y + sy) * g.pitch_y;
              const Surface* hit = &background;
              double hx = px, hy = py;
              for (std::size_t i = 0; i < quads.size(); ++i) {
                const double k = quads[i].depth / d;
                const double qx = cam.x + (px - cam.x) * k;
                const double qy = cam.y + (py - cam.y) * k;
                if (qx >= quads[i].x0 && qx < quads[i].x1 && qy >= quads[i].y0 &&
                    qy < quads[i].y1) {
                  hit = &surfaces[i];
                  hx = qx;
                  hy = qy;
                  break;
                }
              }
              const std::array<double, 3> c = hit->color(hx, hy);
              for (int k = 0; k < 3; ++k) acc[k] += c[k];
            }
          }
          for (int c = 0; c < 3; ++c) {
            field.plane(s, t, c).at(x, y) =
                std::clamp(int(std::lround(acc[c] / 4.0)), 0, 255);
          }
        }
      }
    }
  }
  return field;
}

SceneKind parse_scene_kind(const std::string& name) {
  if (name == "quads") return SceneKind::kQuads;
  if (name == "checkerboard") return SceneKind::kCheckerboard;
  if (name == "noise") return SceneKind::kNoise;
  throw Error(ErrorCode::kInvalidArgument, "unknown scene kind '" + name + "'");
}

std::string scene_kind_name(SceneKind kind) {
  switch (kind) {
    case SceneKind::kQuads: return "quads";
    case SceneKind::kCheckerboard: return "checkerboard";
    case SceneKind::kNoise: return "noise";
  }
  return "quads";
}

}  // namespace hmlfc
