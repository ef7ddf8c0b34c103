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

#include "hmlfc/image_io.h"

#include <png.h>

#include <csetjmp>
#include <cstring>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "hmlfc/error.h"
#include "hmlfc/parallel.h"
#include "json.hpp"

namespace hmlfc {
namespace {

namespace fs = std::filesystem;

struct PngReadCursor {
  const uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void png_error_longjmp(png_structp png, png_const_charp /*msg*/) {
  png_longjmp(png, 1);
}
void png_warning_ignore(png_structp, png_const_charp) {}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}
void png_flush_noop(png_structp) {}

void png_read_from_cursor(png_structp png, png_bytep data, png_size_t length) {
  auto* cur = static_cast<PngReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + length > cur->size) png_error(png, "truncated png");
  std::memcpy(data, cur->data + cur->pos, length);
  cur->pos += length;
}

// The two functions below keep only trivially destructible locals so that a
// libpng longjmp never skips a destructor.
bool png_encode_raw(const Raster* raster, uint8_t* row_buf,
                    std::vector<uint8_t>* out) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            png_error_longjmp, png_warning_ignore);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, raster->width, raster->height, raster->bit_depth,
               raster->channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 9);
  png_write_info(png, info);
  const int bytes_per_sample = raster->bit_depth / 8;
  const std::size_t row_samples = std::size_t(raster->width) * raster->channels;
  for (int y = 0; y < raster->height; ++y) {
    const uint16_t* src = raster->samples.data() + y * row_samples;
    for (std::size_t i = 0; i < row_samples; ++i) {
      if (bytes_per_sample == 1) {
        row_buf[i] = static_cast<uint8_t>(src[i]);
      } else {
        row_buf[2 * i] = static_cast<uint8_t>(src[i] >> 8);
        row_buf[2 * i + 1] = static_cast<uint8_t>(src[i] & 0xff);
      }
    }
    png_write_row(png, row_buf);
  }
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
  return true;
}

struct PngHeader {
  png_uint_32 width = 0, height = 0;
  int bit_depth = 0, color_type = 0, interlace = 0;
};

// Reads the header, applies expansions, then the image into `rows` once the
// caller-provided allocator has sized it. Returns 0 on success, 1 on libpng
// failure, 2 on unsupported layout.
int png_decode_raw(PngReadCursor* cursor, PngHeader* header,
                   std::vector<uint8_t>* pixels, std::vector<png_bytep>* rows,
                   int* out_channels) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           png_error_longjmp, png_warning_ignore);
  if (png == nullptr) return 1;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return 1;
  }
  png_set_read_fn(png, cursor, png_read_from_cursor);
  png_read_info(png, info);
  png_get_IHDR(png, info, &header->width, &header->height, &header->bit_depth,
               &header->color_type, &header->interlace, nullptr, nullptr);
  if (header->color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (header->color_type == PNG_COLOR_TYPE_GRAY && header->bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (header->color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (header->interlace != PNG_INTERLACE_NONE) png_set_interlace_handling(png);
  png_read_update_info(png, info);
  const int channels = png_get_channels(png, info);
  const int depth = png_get_bit_depth(png, info);
  if ((channels != 1 && channels != 3) || (depth != 8 && depth != 16)) {
    png_destroy_read_struct(&png, &info, nullptr);
    return 2;
  }
  header->bit_depth = depth;
  *out_channels = channels;
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  pixels->resize(rowbytes * header->height);
  rows->resize(header->height);
  for (png_uint_32 y = 0; y < header->height; ++y) {
    (*rows)[y] = pixels->data() + y * rowbytes;
  }
  png_read_image(png, rows->data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return 0;
}

RgbImage read_ppm(std::span<const uint8_t> bytes, const fs::path& path) {
  std::size_t pos = 0;
  auto fail = [&](const std::string& why) -> Error {
    return Error(ErrorCode::kUnsupportedFormat, path.string() + ": " + why);
  };
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long {
    skip_space();
    long v = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      any = true;
      if (v > (1L << 24)) throw fail("header value too large");
    }
    if (!any) throw fail("malformed PPM header");
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw fail("not a binary PPM");
  }
  pos = 2;
  const long w = read_int();
  const long h = read_int();
  const long maxval = read_int();
  if (maxval != 255) throw fail("unsupported bit depth (maxval != 255)");
  ++pos;  // single whitespace before raster
  RgbImage img(static_cast<int>(w), static_cast<int>(h));
  if (pos + img.pixels.size() > bytes.size()) throw fail("truncated PPM raster");
  std::memcpy(img.pixels.data(), bytes.data() + pos, img.pixels.size());
  return img;
}

}  // namespace

std::vector<uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& path, std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::vector<uint8_t> encode_png(const Raster& raster) {
  if ((raster.channels != 1 && raster.channels != 3) ||
      (raster.bit_depth != 8 && raster.bit_depth != 16) || raster.width < 1 ||
      raster.height < 1 ||
      raster.samples.size() !=
          std::size_t(raster.width) * raster.height * raster.channels) {
    throw Error(ErrorCode::kInvalidArgument, "encode_png: bad raster");
  }
  std::vector<uint8_t> out;
  std::vector<uint8_t> row(std::size_t(raster.width) * raster.channels *
                           (raster.bit_depth / 8));
  if (!png_encode_raw(&raster, row.data(), &out)) {
    throw Error(ErrorCode::kIo, "png encoding failed");
  }
  return out;
}

Raster decode_png(std::span<const uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorCode::kUnsupportedFormat, "not a PNG stream");
  }
  PngReadCursor cursor{bytes.data(), bytes.size(), 0};
  PngHeader header;
  std::vector<uint8_t> pixels;
  std::vector<png_bytep> rows;
  int channels = 0;
  const int rc = png_decode_raw(&cursor, &header, &pixels, &rows, &channels);
  if (rc == 1) throw Error(ErrorCode::kCorruptStream, "corrupt PNG stream");
  if (rc == 2) throw Error(ErrorCode::kUnsupportedFormat, "unsupported PNG layout");
  Raster r;
  r.width = static_cast<int>(header.width);
  r.height = static_cast<int>(header.height);
  r.channels = channels;
  r.bit_depth = header.bit_depth;
  const std::size_t n = std::size_t(r.width) * r.height * channels;
  r.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.samples[i] = r.bit_depth == 8
                       ? pixels[i]
                       : static_cast<uint16_t>((pixels[2 * i] << 8) | pixels[2 * i + 1]);
  }
  return r;
}

std::vector<uint8_t> png_bytes(const RgbImage& image) {
  Raster r;
  r.width = image.width;
  r.height = image.height;
  r.channels = 3;
  r.bit_depth = 8;
  r.samples.assign(image.pixels.begin(), image.pixels.end());
  return encode_png(r);
}

RgbImage read_image(const fs::path& path) {
  const std::vector<uint8_t> bytes = read_file(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') {
    return read_ppm(bytes, path);
  }
  Raster r;
  try {
    r = decode_png(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
  if (r.bit_depth != 8) {
    throw Error(ErrorCode::kUnsupportedFormat,
                path.string() + ": unsupported bit depth " +
                    std::to_string(r.bit_depth));
  }
  RgbImage img(r.width, r.height);
  const std::size_t n = std::size_t(r.width) * r.height;
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      img.pixels[3 * i + c] =
          static_cast<uint8_t>(r.channels == 3 ? r.samples[3 * i + c] : r.samples[i]);
    }
  }
  return img;
}

void write_png(const fs::path& path, const RgbImage& image) {
  write_file(path, png_bytes(image));
}

void write_ppm(const fs::path& path, const RgbImage& image) {
  std::ostringstream header;
  header << "P6\n" << image.width << " " << image.height << "\n255\n";
  const std::string h = header.str();
  std::vector<uint8_t> bytes(h.begin(), h.end());
  bytes.insert(bytes.end(), image.pixels.begin(), image.pixels.end());
  write_file(path, bytes);
}

RgbImage view_image(const LightField& field, int s, int t) {
  RgbImage img(field.width(), field.height());
  for (int c = 0; c < 3; ++c) {
    const auto src = field.plane(s, t, c).samples();
    for (std::size_t i = 0; i < src.size(); ++i) {
      img.pixels[3 * i + c] = static_cast<uint8_t>(src[i]);
    }
  }
  return img;
}

void set_view_image(LightField& field, int s, int t, const RgbImage& image) {
  if (image.width != field.width() || image.height != field.height()) {
    throw Error(ErrorCode::kDimensionMismatch, "view image size mismatch");
  }
  for (int c = 0; c < 3; ++c) {
    auto dst = field.plane(s, t, c).samples();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = image.pixels[3 * i + c];
  }
}

namespace {

std::string view_label(int s, int t) {
  return "view (s=" + std::to_string(s) + ", t=" + std::to_string(t) + ")";
}

struct ViewFiles {
  int grid_s = 0;
  int grid_t = 0;
  std::map<std::pair<int, int>, fs::path> files;  // (s,t) -> path
};

ViewFiles read_manifest(const fs::path& manifest, const fs::path& dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(manifest));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                manifest.string() + ": " + e.what());
  }
  ViewFiles vf;
  try {
    vf.grid_s = j.at("grid_s").get<int>();
    vf.grid_t = j.at("grid_t").get<int>();
    for (const auto& v : j.at("views")) {
      vf.files[{v.at("s").get<int>(), v.at("t").get<int>()}] =
          dir / v.at("file").get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                manifest.string() + ": " + e.what());
  }
  return vf;
}

ViewFiles scan_directory(const fs::path& dir) {
  static const std::regex kName(R"(^out_(\d+)_(\d+)(_.*)?\.(png|ppm)$)",
                                std::regex::icase);
  ViewFiles vf;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    std::smatch m;
    if (!std::regex_match(name, m, kName)) continue;
    const int t = std::stoi(m[1].str());
    const int s = std::stoi(m[2].str());
    vf.files[{s, t}] = entry.path();
    vf.grid_s = std::max(vf.grid_s, s + 1);
    vf.grid_t = std::max(vf.grid_t, t + 1);
  }
  if (ec) throw Error(ErrorCode::kIo, "cannot list " + dir.string());
  return vf;
}

}  // namespace

LightField load_light_field(const fs::path& dir, const LoadLayout& layout) {
  ViewFiles vf;
  const fs::path manifest =
      layout.manifest ? *layout.manifest : dir / "manifest.json";
  if (fs::exists(manifest)) {
    vf = read_manifest(manifest, dir);
  } else {
    vf = scan_directory(dir);
  }
  if (layout.grid_s) vf.grid_s = *layout.grid_s;
  if (layout.grid_t) vf.grid_t = *layout.grid_t;
  if (vf.grid_s < 1 || vf.grid_t < 1) {
    throw Error(ErrorCode::kMissingImage, "no light-field images in " + dir.string());
  }
  const int n = vf.grid_s * vf.grid_t;
  std::vector<fs::path> paths(n);
  for (int t = 0; t < vf.grid_t; ++t) {
    for (int s = 0; s < vf.grid_s; ++s) {
      auto it = vf.files.find({s, t});
      if (it == vf.files.end() || !fs::exists(it->second)) {
        throw Error(ErrorCode::kMissingImage, view_label(s, t) + ": missing image");
      }
      paths[t * vf.grid_s + s] = it->second;
    }
  }
  std::vector<RgbImage> images(n);
  parallel_for(n, layout.threads, [&](std::size_t i) {
    const int s = static_cast<int>(i) % vf.grid_s;
    const int t = static_cast<int>(i) / vf.grid_s;
    try {
      images[i] = read_image(paths[i]);
    } catch (const Error& e) {
      throw Error(e.code(), view_label(s, t) + ": " + e.what());
    }
  });
  const int w = images[0].width, h = images[0].height;
  LightField field(vf.grid_s, vf.grid_t, w, h);
  for (int i = 0; i < n; ++i) {
    const int s = i % vf.grid_s, t = i / vf.grid_s;
    if (images[i].width != w || images[i].height != h) {
      throw Error(ErrorCode::kDimensionMismatch,
                  view_label(s, t) + ": image is " +
                      std::to_string(images[i].width) + "x" +
                      std::to_string(images[i].height) + ", expected " +
                      std::to_string(w) + "x" + std::to_string(h));
    }
    set_view_image(field, s, t, images[i]);
  }
  return field;
}

void save_light_field(const LightField& field, const fs::path& dir,
                      ImageFormat format) {
  fs::create_directories(dir);
  for (int t = 0; t < field.grid_t(); ++t) {
    for (int s = 0; s < field.grid_s(); ++s) {
      const std::string stem = "out_" + std::to_string(t) + "_" + std::to_string(s);
      const RgbImage img = view_image(field, s, t);
      if (format == ImageFormat::kPng) {
        write_png(dir / (stem + ".png"), img);
      } else {
        write_ppm(dir / (stem + ".ppm"), img);
      }
    }
  }
}

}  // namespace hmlfc
