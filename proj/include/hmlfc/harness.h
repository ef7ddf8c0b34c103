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

// Rate-distortion harness: synthetic light fields, single-point
// measurements, parameter sweeps and matched-quality codec comparisons.

#ifndef HMLFC_HARNESS_H_
#define HMLFC_HARNESS_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hmlfc/container.h"
#include "hmlfc/lfcore.h"
#include "hmlfc/renderer.h"

namespace hmlfc {

enum class SceneKind { kQuads, kCheckerboard, kNoise };

// Planar-depth scene seen from a regular camera grid. A textured
// background lies on the image plane (zero disparity, shared by every
// view); quads float in front of it and shift by
// baseline * (1 - separation / depth) / pitch pixels per camera step.
struct SyntheticScene {
  SceneKind kind = SceneKind::kQuads;
  int grid_s = 8;
  int grid_t = 8;
  int width = 128;
  int height = 128;
  double baseline = 1.0;  // camera spacing in scene units
  int quad_count = 5;
  // Quad depths are drawn from [near, far] * separation.
  double near_fraction = 0.82;
  double far_fraction = 0.95;
  // Feature size of the quad textures relative to the background's.
  double quad_texture_scale = 3.0;
  uint64_t seed = 1;

  // Geometry the views are rendered with (LfGeometry::defaults with
  // spacing = baseline).
  LfGeometry geometry() const;
};

struct SceneQuad {
  double depth = 0;  // z of the quad plane
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // extent on that plane
  uint64_t texture_seed = 0;
};

// Quads of the scene, nearest first. Deterministic in the seed.
std::vector<SceneQuad> scene_quads(const SyntheticScene& scene);
LightField generate_synthetic(const SyntheticScene& scene);

SceneKind parse_scene_kind(const std::string& name);
std::string scene_kind_name(SceneKind kind);

enum class CodecVariant { kHmlfc, kRlfcOnly, kMcOnly };
CodecVariant parse_codec_variant(const std::string& name);
std::string codec_variant_name(CodecVariant v);

struct RdPoint {
  CodecVariant codec = CodecVariant::kHmlfc;
  int block_size = 0;
  int window = 0;
  int tree_height = 0;
  uint32_t tau = 0;
  uint64_t bytes = 0;
  double bpp = 0;
  double psnr = 0;
  double encode_seconds = 0;
  double decode_seconds = 0;
  uint64_t blocks_decoded = 0;
  uint64_t cache_bytes = 0;
  std::string error;  // non-empty when the point failed
};

struct SweepSpec {
  std::vector<int> block_sizes{4};
  std::vector<uint32_t> taus{75};
  std::vector<int> windows{16};
  std::vector<int> heights{3};
  std::vector<CodecVariant> codecs{CodecVariant::kHmlfc};
  // Reference threshold as a multiple of each swept tau.
  double tau_ref_scale = 1.0;
  // "synthetic" or a directory of views.
  std::string dataset = "synthetic";
  SyntheticScene scene;
  EncodeParams base;  // everything the axes do not override
  int threads = 0;

  // Throws kInvalidArgument on empty axes.
  void validate() const;
  static SweepSpec from_json(const std::string& json);
};

// Encoder state for one codec variant and structural configuration,
// re-thresholded cheaply for each tau.
class RdModel {
 public:
  // `field` must outlive the model.
  RdModel(const LightField& field, CodecVariant codec, const EncodeParams& params);
  ~RdModel();
  RdModel(RdModel&&) noexcept;
  RdModel& operator=(RdModel&&) noexcept;

  // tau_res = tau, tau_ref = round(tau * ref_scale).
  RdPoint measure(uint32_t tau, double ref_scale = 1.0) const;
  CodecVariant codec() const;
  double prepare_seconds() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One point: encode, decode, measure.
RdPoint measure_point(const LightField& field, CodecVariant codec,
                      const EncodeParams& params);

// Points ordered by (codec, height, block size, window, tau). Failures are
// recorded in RdPoint::error and the sweep continues.
std::vector<RdPoint> run_sweep(const SweepSpec& spec, const LightField& field);

void write_csv(std::ostream& out, const std::vector<RdPoint>& points);
std::string points_to_json(const std::vector<RdPoint>& points);

struct MatchedPoint {
  CodecVariant codec;
  RdPoint point;
  bool converged = false;
};

struct Comparison {
  double target_psnr = 0;
  double tolerance_db = 0;
  std::vector<MatchedPoint> results;  // order of the requested codecs
  // bpp(codec) / bpp(hmlfc); nullopt when either side did not converge.
  std::optional<double> ratio(CodecVariant codec) const;
  const MatchedPoint* find(CodecVariant codec) const;
};

inline constexpr double kMatchToleranceDb = 0.75;

// Bisects tau per codec until PSNR lands within tolerance of the target.
Comparison compare_codecs(const LightField& field, double target_psnr,
                          const EncodeParams& params,
                          const std::vector<CodecVariant>& codecs =
                              {CodecVariant::kHmlfc, CodecVariant::kRlfcOnly,
                               CodecVariant::kMcOnly},
                          double tolerance_db = kMatchToleranceDb,
                          double tau_ref_scale = 1.0);

// mc_only layout: views are tiled 4 x 4 and each tile's reference sits at
// offset extent / 2 along each axis of the tile.
inline constexpr int kMcOnlyTile = 4;

}  // namespace hmlfc

#endif  // HMLFC_HARNESS_H_
