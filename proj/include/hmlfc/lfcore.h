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

// Light-field data model shared by every stage of the codec: integer sample
// planes, the (s,t) camera grid of planes, the reversible color transform and
// quality metrics.
//
// Grid indexing convention: views are stored row-major with t outer and s
// inner, i.e. view (s,t) lives at index t * grid_s + s.
//
// Integer division of negative values always rounds toward negative infinity
// (floor). The only exception is averaging, which rounds half away from zero.

#ifndef HMLFC_LFCORE_H_
#define HMLFC_LFCORE_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hmlfc {

// floor(v / 2) for any sign.
constexpr int32_t floor_half(int32_t v) { return v >> 1; }

// num / den rounded half away from zero; den must be positive.
constexpr int64_t div_round_half_away(int64_t num, int64_t den) {
  return num >= 0 ? (2 * num + den) / (2 * den)
                  : -((-2 * num + den) / (2 * den));
}

struct ValueRange {
  int32_t min = 0;
  int32_t max = 255;

  int64_t width() const { return int64_t{max} - min; }
  bool contains(int64_t v) const { return v >= min && v <= max; }
  bool operator==(const ValueRange&) const = default;
};

inline constexpr ValueRange kByteRange{0, 255};
inline constexpr ValueRange kChromaRange{-255, 255};

// Row-major plane of signed integer samples with declared bounds.
class Plane {
 public:
  Plane() = default;
  Plane(int width, int height, ValueRange range, int32_t fill = 0);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return samples_.size(); }
  ValueRange range() const { return range_; }
  void set_range(ValueRange range) { range_ = range; }

  int32_t at(int x, int y) const { return samples_[index(x, y)]; }
  int32_t& at(int x, int y) { return samples_[index(x, y)]; }

  std::span<const int32_t> samples() const { return samples_; }
  std::span<int32_t> samples() { return samples_; }
  std::span<const int32_t> row(int y) const {
    return std::span<const int32_t>(samples_).subspan(
        static_cast<std::size_t>(y) * width_, width_);
  }

  bool same_shape(const Plane& o) const {
    return width_ == o.width_ && height_ == o.height_;
  }
  // Throws kOutOfRange naming the first offending sample.
  void validate() const;

  bool operator==(const Plane& o) const {
    return width_ == o.width_ && height_ == o.height_ &&
           samples_ == o.samples_;
  }

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  ValueRange range_{};
  std::vector<int32_t> samples_;
};

// Single-channel (s,t) grid of equally sized planes.
struct PlaneGrid {
  int grid_s = 0;
  int grid_t = 0;
  std::vector<Plane> planes;

  PlaneGrid() = default;
  PlaneGrid(int s, int t) : grid_s(s), grid_t(t), planes(std::size_t(s) * t) {}

  std::size_t index(int s, int t) const {
    return static_cast<std::size_t>(t) * grid_s + s;
  }
  const Plane& at(int s, int t) const { return planes[index(s, t)]; }
  Plane& at(int s, int t) { return planes[index(s, t)]; }
  bool operator==(const PlaneGrid&) const = default;
};

// 8-bit RGB light field: grid_s x grid_t views of width x height pixels.
class LightField {
 public:
  static constexpr int kChannels = 3;

  LightField() = default;
  LightField(int grid_s, int grid_t, int width, int height);

  int grid_s() const { return grid_s_; }
  int grid_t() const { return grid_t_; }
  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return kChannels; }
  int bit_depth() const { return 8; }
  std::size_t view_count() const { return std::size_t(grid_s_) * grid_t_; }

  const Plane& plane(int s, int t, int c) const { return channels_[c].at(s, t); }
  Plane& plane(int s, int t, int c) { return channels_[c].at(s, t); }
  const PlaneGrid& channel(int c) const { return channels_[c]; }
  PlaneGrid& channel(int c) { return channels_[c]; }

  bool operator==(const LightField& o) const = default;

 private:
  int grid_s_ = 0;
  int grid_t_ = 0;
  int width_ = 0;
  int height_ = 0;
  std::array<PlaneGrid, kChannels> channels_;
};

enum class ColorTransform : uint8_t { kIdentity = 0, kYCoCgR = 1 };
enum class ChromaSubsample : uint8_t { kNone = 0, kHalf = 1 };

struct ColorConfig {
  ColorTransform transform = ColorTransform::kYCoCgR;
  ChromaSubsample chroma_subsample = ChromaSubsample::kNone;

  // Throws kInvalidArgument when subsampling is requested without YCoCg.
  void validate() const;
  bool operator==(const ColorConfig&) const = default;
};

struct YCoCg {
  int32_t y, co, cg;
  bool operator==(const YCoCg&) const = default;
};
struct Rgb {
  int32_t r, g, b;
  bool operator==(const Rgb&) const = default;
};

// Reversible lifting YCoCg (YCoCg-R). Inputs must lie in [0,255].
YCoCg rgb_to_ycocg(int32_t r, int32_t g, int32_t b);
// Exact inverse. Rejects triples that no RGB input can produce.
Rgb ycocg_to_rgb(int32_t y, int32_t co, int32_t cg);
// Same arithmetic on unbounded input with each output clamped to [0,255].
// Lossy decodes land here, since thresholding can leave the YCoCg gamut.
Rgb ycocg_to_rgb_saturating(int32_t y, int32_t co, int32_t cg);

// Value range of channel c after the transform.
ValueRange transformed_range(ColorTransform transform, int c);

// Converts a light field into three per-channel grids (Y, Co, Cg when the
// transform is YCoCg-R) and applies chroma subsampling when configured.
std::array<PlaneGrid, 3> forward_color(const LightField& field,
                                       const ColorConfig& config);
// Inverse of forward_color; subsampled chroma is upsampled to width x height.
// Output samples are saturated to [0,255].
LightField inverse_color(const std::array<PlaneGrid, 3>& channels,
                         const ColorConfig& config, int width, int height);

// 2x2 box average, rounded half away from zero. Edge cells of odd-sized
// planes average only the samples that exist.
Plane subsample_chroma(const Plane& plane);
// Nearest-neighbour replication back to width x height.
Plane upsample_chroma(const Plane& plane, int width, int height);

double mse(const Plane& a, const Plane& b);
// Peak 255; +infinity for identical inputs. Throws kShapeMismatch.
double psnr(const Plane& a, const Plane& b);
double psnr(const LightField& a, const LightField& b);

}  // namespace hmlfc

#endif  // HMLFC_LFCORE_H_
