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
#include <sstream>

#include "hmlfc/error.h"

namespace hmlfc {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kOutOfRange: return "out_of_range";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kMissingImage: return "missing_image";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kUnsupportedFormat: return "unsupported_format";
    case ErrorCode::kBadMagic: return "bad_magic";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kVersionMismatch: return "version_mismatch";
    case ErrorCode::kCorruptStream: return "corrupt_stream";
    case ErrorCode::kReferenceUnavailable: return "reference_unavailable";
  }
  return "unknown";
}

Plane::Plane(int width, int height, ValueRange range, int32_t fill)
    : width_(width),
      height_(height),
      range_(range),
      samples_(static_cast<std::size_t>(width) * height, fill) {
  if (width < 0 || height < 0) {
    throw Error(ErrorCode::kInvalidArgument, "negative plane dimensions");
  }
}

void Plane::validate() const {
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const int32_t v = at(x, y);
      if (!range_.contains(v)) {
        std::ostringstream msg;
        msg << "sample " << v << " at (" << x << "," << y << ") outside ["
            << range_.min << "," << range_.max << "]";
        throw Error(ErrorCode::kOutOfRange, msg.str());
      }
    }
  }
}

LightField::LightField(int grid_s, int grid_t, int width, int height)
    : grid_s_(grid_s), grid_t_(grid_t), width_(width), height_(height) {
  if (grid_s < 1 || grid_t < 1 || width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument, "light field dimensions must be >= 1");
  }
  for (auto& ch : channels_) {
    ch = PlaneGrid(grid_s, grid_t);
    for (auto& p : ch.planes) p = Plane(width, height, kByteRange);
  }
}

void ColorConfig::validate() const {
  if (transform == ColorTransform::kIdentity &&
      chroma_subsample != ChromaSubsample::kNone) {
    throw Error(ErrorCode::kInvalidArgument,
                "chroma subsampling requires the YCoCg-R transform");
  }
}

YCoCg rgb_to_ycocg(int32_t r, int32_t g, int32_t b) {
  const int32_t co = r - b;
  const int32_t t = b + floor_half(co);
  const int32_t cg = g - t;
  const int32_t y = t + floor_half(cg);
  return {y, co, cg};
}

Rgb ycocg_to_rgb(int32_t y, int32_t co, int32_t cg) {
  if (!kByteRange.contains(y) || !kChromaRange.contains(co) ||
      !kChromaRange.contains(cg)) {
    std::ostringstream msg;
    msg << "YCoCg triple (" << y << "," << co << "," << cg << ") out of range";
    throw Error(ErrorCode::kOutOfRange, msg.str());
  }
  const int32_t t = y - floor_half(cg);
  const int32_t g = cg + t;
  const int32_t b = t - floor_half(co);
  const int32_t r = b + co;
  if (!kByteRange.contains(r) || !kByteRange.contains(g) ||
      !kByteRange.contains(b)) {
    std::ostringstream msg;
    msg << "YCoCg triple (" << y << "," << co << "," << cg
        << ") does not map to a valid RGB color";
    throw Error(ErrorCode::kOutOfRange, msg.str());
  }
  return {r, g, b};
}

Rgb ycocg_to_rgb_saturating(int32_t y, int32_t co, int32_t cg) {
  const int32_t t = y - floor_half(cg);
  const int32_t g = cg + t;
  const int32_t b = t - floor_half(co);
  const int32_t r = b + co;
  auto clamp = [](int32_t v) { return v < 0 ? 0 : (v > 255 ? 255 : v); };
  return {clamp(r), clamp(g), clamp(b)};
}

ValueRange transformed_range(ColorTransform transform, int c) {
  if (transform == ColorTransform::kIdentity || c == 0) return kByteRange;
  return kChromaRange;
}

std::array<PlaneGrid, 3> forward_color(const LightField& field,
                                       const ColorConfig& config) {
  config.validate();
  std::array<PlaneGrid, 3> out;
  for (int c = 0; c < 3; ++c) {
    out[c] = PlaneGrid(field.grid_s(), field.grid_t());
  }
  for (int t = 0; t < field.grid_t(); ++t) {
    for (int s = 0; s < field.grid_s(); ++s) {
      if (config.transform == ColorTransform::kIdentity) {
        for (int c = 0; c < 3; ++c) out[c].at(s, t) = field.plane(s, t, c);
        continue;
      }
      const auto r = field.plane(s, t, 0).samples();
      const auto g = field.plane(s, t, 1).samples();
      const auto b = field.plane(s, t, 2).samples();
      std::array<Plane, 3> planes;
      for (int c = 0; c < 3; ++c) {
        planes[c] = Plane(field.width(), field.height(),
                          transformed_range(config.transform, c));
      }
      for (std::size_t i = 0; i < r.size(); ++i) {
        const YCoCg v = rgb_to_ycocg(r[i], g[i], b[i]);
        planes[0].samples()[i] = v.y;
        planes[1].samples()[i] = v.co;
        planes[2].samples()[i] = v.cg;
      }
      if (config.chroma_subsample == ChromaSubsample::kHalf) {
        planes[1] = subsample_chroma(planes[1]);
        planes[2] = subsample_chroma(planes[2]);
      }
      for (int c = 0; c < 3; ++c) out[c].at(s, t) = std::move(planes[c]);
    }
  }
  return out;
}

LightField inverse_color(const std::array<PlaneGrid, 3>& channels,
                         const ColorConfig& config, int width, int height) {
  config.validate();
  LightField field(channels[0].grid_s, channels[0].grid_t, width, height);
  for (int t = 0; t < field.grid_t(); ++t) {
    for (int s = 0; s < field.grid_s(); ++s) {
      if (config.transform == ColorTransform::kIdentity) {
        for (int c = 0; c < 3; ++c) {
          const auto src = channels[c].at(s, t).samples();
          auto dst = field.plane(s, t, c).samples();
          for (std::size_t i = 0; i < src.size(); ++i) {
            dst[i] = src[i] < 0 ? 0 : (src[i] > 255 ? 255 : src[i]);
          }
        }
        continue;
      }
      const Plane* co = &channels[1].at(s, t);
      const Plane* cg = &channels[2].at(s, t);
      Plane co_full, cg_full;
      if (config.chroma_subsample == ChromaSubsample::kHalf) {
        co_full = upsample_chroma(*co, width, height);
        cg_full = upsample_chroma(*cg, width, height);
        co = &co_full;
        cg = &cg_full;
      }
      const auto y = channels[0].at(s, t).samples();
      auto r = field.plane(s, t, 0).samples();
      auto g = field.plane(s, t, 1).samples();
      auto b = field.plane(s, t, 2).samples();
      for (std::size_t i = 0; i < y.size(); ++i) {
        const Rgb v =
            ycocg_to_rgb_saturating(y[i], co->samples()[i], cg->samples()[i]);
        r[i] = v.r;
        g[i] = v.g;
        b[i] = v.b;
      }
    }
  }
  return field;
}

Plane subsample_chroma(const Plane& plane) {
  const int w = (plane.width() + 1) / 2;
  const int h = (plane.height() + 1) / 2;
  Plane out(w, h, plane.range());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int64_t sum = 0;
      int n = 0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const int sx = 2 * x + dx, sy = 2 * y + dy;
          if (sx < plane.width() && sy < plane.height()) {
            sum += plane.at(sx, sy);
            ++n;
          }
        }
      }
      out.at(x, y) = static_cast<int32_t>(div_round_half_away(sum, n));
    }
  }
  return out;
}

Plane upsample_chroma(const Plane& plane, int width, int height) {
  Plane out(width, height, plane.range());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) out.at(x, y) = plane.at(x / 2, y / 2);
  }
  return out;
}

namespace {

struct ErrorSum {
  long double squared = 0;
  std::size_t count = 0;

  void add(const Plane& a, const Plane& b) {
    if (!a.same_shape(b)) {
      throw Error(ErrorCode::kShapeMismatch, "psnr: plane shapes differ");
    }
    const auto sa = a.samples();
    const auto sb = b.samples();
    int64_t acc = 0;
    for (std::size_t i = 0; i < sa.size(); ++i) {
      const int64_t d = int64_t{sa[i]} - sb[i];
      acc += d * d;
    }
    squared += acc;
    count += sa.size();
  }

  double psnr() const {
    if (count == 0 || squared == 0) return std::numeric_limits<double>::infinity();
    const double m = static_cast<double>(squared / count);
    return 10.0 * std::log10(255.0 * 255.0 / m);
  }
};

}  // namespace

double mse(const Plane& a, const Plane& b) {
  ErrorSum e;
  e.add(a, b);
  return e.count == 0 ? 0.0 : static_cast<double>(e.squared / e.count);
}

double psnr(const Plane& a, const Plane& b) {
  ErrorSum e;
  e.add(a, b);
  return e.psnr();
}

double psnr(const LightField& a, const LightField& b) {
  if (a.grid_s() != b.grid_s() || a.grid_t() != b.grid_t() ||
      a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::kShapeMismatch, "psnr: light field shapes differ");
  }
  ErrorSum e;
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < a.channel(c).planes.size(); ++i) {
      e.add(a.channel(c).planes[i], b.channel(c).planes[i]);
    }
  }
  return e.psnr();
}

}  // namespace hmlfc
