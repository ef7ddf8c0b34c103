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

#ifndef HMLFC_IMAGE_IO_H_
#define HMLFC_IMAGE_IO_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmlfc/lfcore.h"

namespace hmlfc {

// Interleaved 8-bit RGB image.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // width * height * 3

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), pixels(std::size_t(w) * h * 3) {}
  bool operator==(const RgbImage&) const = default;
};

// Raw single-channel or RGB raster handed to / returned by the PNG codec.
// Samples are stored one per element regardless of bit depth.
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 1;    // 1 or 3
  int bit_depth = 8;   // 8 or 16
  std::vector<uint16_t> samples;
};

std::vector<uint8_t> encode_png(const Raster& raster);
Raster decode_png(std::span<const uint8_t> bytes);

// Reads an 8-bit PNG (gray, RGB or RGBA; gray is replicated, alpha dropped)
// or a binary PPM (P6, maxval 255). Anything else is kUnsupportedFormat.
RgbImage read_image(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const RgbImage& image);
void write_ppm(const std::filesystem::path& path, const RgbImage& image);
std::vector<uint8_t> png_bytes(const RgbImage& image);

RgbImage view_image(const LightField& field, int s, int t);
void set_view_image(LightField& field, int s, int t, const RgbImage& image);

// How a directory maps onto the camera grid. By default files are named
// out_<t>_<s>[_anything].{png,ppm}; a manifest.json in the directory (or an
// explicit manifest path) overrides that:
//   {"grid_s": S, "grid_t": T, "views": [{"s": 0, "t": 0, "file": "a.png"}]}
struct LoadLayout {
  std::optional<int> grid_s;
  std::optional<int> grid_t;
  std::optional<std::filesystem::path> manifest;
  int threads = 0;
};

LightField load_light_field(const std::filesystem::path& dir,
                            const LoadLayout& layout = {});

enum class ImageFormat { kPng, kPpm };
// Writes out_<t>_<s>.{png,ppm}, creating dir if needed.
void save_light_field(const LightField& field, const std::filesystem::path& dir,
                      ImageFormat format = ImageFormat::kPng);

std::vector<uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const uint8_t> bytes);

}  // namespace hmlfc

#endif  // HMLFC_IMAGE_IO_H_
