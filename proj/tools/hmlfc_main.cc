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

// hmlfc command-line tool: encode, inspect, decode, render, serve and
// benchmark light-field streams.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hmlfc/container.h"
#include "hmlfc/decoder.h"
#include "hmlfc/error.h"
#include "hmlfc/harness.h"
#include "hmlfc/hierarchy.h"
#include "hmlfc/image_io.h"
#include "hmlfc/motion.h"
#include "hmlfc/renderer.h"
#include "hmlfc/viewservice.h"

namespace fs = std::filesystem;
using namespace hmlfc;

namespace {

std::pair<int, int> parse_pair(const std::string& text, const std::string& what) {
  static const std::regex re(R"(^\s*(\d+)\s*[x,]\s*(\d+)\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) {
    throw Error(ErrorCode::kInvalidArgument, what + ": expected AxB, got '" + text + "'");
  }
  return {std::stoi(m[1]), std::stoi(m[2])};
}

std::vector<double> parse_list(const std::string& text, std::size_t n, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, what + ": bad number '" + item + "'");
    }
  }
  if (out.size() != n) {
    throw Error(ErrorCode::kInvalidArgument,
                what + ": expected " + std::to_string(n) + " comma-separated numbers");
  }
  return out;
}

LfGeometry stream_geometry(const Decoder& dec, const fs::path& stream,
                           const std::string& override_path) {
  const LfGeometry base =
      LfGeometry::defaults(dec.grid_s(), dec.grid_t(), dec.width(), dec.height());
  return load_geometry(override_path.empty() ? geometry_sidecar_path(stream)
                                             : fs::path(override_path),
                       base);
}

struct EncodeArgs {
  std::string input;
  std::string output;
  std::string grid;
  std::string manifest;
  std::string geometry;
  std::string dump_tree;
  std::string motion_csv;
  int height = 3;
  int block = 4;
  int window = 16;
  int64_t tau = -1;
  uint32_t tau_ref = 75;
  uint32_t tau_res = 75;
  bool chroma_subsample = false;
  std::string color = "ycocg";
  bool no_motion = false;
  bool subtractive_only = false;
  std::string mv_policy;
  bool mv_drop_insignificant = false;
  std::string reference = "top-left";
  std::string rkv_codec = "png";
  int threads = 0;
};

int run_encode(const EncodeArgs& a) {
  LoadLayout layout;
  layout.threads = a.threads;
  if (!a.grid.empty()) {
    const auto [s, t] = parse_pair(a.grid, "--grid");
    layout.grid_s = s;
    layout.grid_t = t;
  }
  if (!a.manifest.empty()) layout.manifest = fs::path(a.manifest);
  const LightField field = load_light_field(a.input, layout);

  EncodeParams p;
  p.tree_height = a.height;
  p.block_size = a.block;
  p.window = a.window;
  p.tau_ref = a.tau >= 0 ? uint32_t(a.tau) : a.tau_ref;
  p.tau_res = a.tau >= 0 ? uint32_t(a.tau) : a.tau_res;
  if (a.color != "ycocg" && a.color != "identity") {
    throw Error(ErrorCode::kInvalidArgument, "--color must be ycocg or identity");
  }
  p.color.transform = a.color == "ycocg" ? ColorTransform::kYCoCgR : ColorTransform::kIdentity;
  p.color.chroma_subsample = a.chroma_subsample ? ChromaSubsample::kHalf : ChromaSubsample::kNone;
  p.motion = !a.no_motion;
  p.phase_shift = !a.subtractive_only;
  if (!a.mv_policy.empty()) p.mv_policy = parse_mv_policy(a.mv_policy);
  if (a.mv_drop_insignificant) p.mv_policy = MvPolicy::kDropInsignificant;
  if (a.reference != "top-left" && a.reference != "center") {
    throw Error(ErrorCode::kInvalidArgument, "--reference must be top-left or center");
  }
  p.reference = a.reference == "center" ? ReferenceChoice::kCenter : ReferenceChoice::kTopLeft;
  p.rkv_codec = parse_rkv_codec(a.rkv_codec);
  p.threads = a.threads;

  const PreparedField prepared = prepare(field, p);
  const std::vector<uint8_t> bytes = serialize(prepared, p);
  write_file(a.output, bytes);

  LfGeometry geom = LfGeometry::defaults(field.grid_s(), field.grid_t(), field.width(),
                                         field.height());
  const fs::path geom_src =
      a.geometry.empty() ? fs::path(a.input) / "geometry.json" : fs::path(a.geometry);
  geom = load_geometry(geom_src, geom);
  const std::string gj = geometry_to_json(geom);
  write_file(geometry_sidecar_path(a.output), std::vector<uint8_t>(gj.begin(), gj.end()));

  if (!a.dump_tree.empty()) {
    for (int c = 0; c < 3; ++c) {
      dump_tree_images(prepared.channels[c].tree, fs::path(a.dump_tree) / ("c" + std::to_string(c)));
    }
  }
  if (!a.motion_csv.empty()) {
    std::ofstream out(a.motion_csv);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + a.motion_csv);
    out << "channel," << kMotionCsvHeader;
    for (int c = 0; c < 3; ++c) {
      const auto& levels = prepared.channels[c].levels;
      for (std::size_t l = 0; l < levels.size(); ++l) {
        std::ostringstream rows;
        write_motion_csv(rows, int(l), levels[l]);
        std::istringstream in(rows.str());
        std::string line;
        while (std::getline(in, line)) out << c << ',' << line << '\n';
      }
    }
  }
  std::printf("%s: %zu bytes, %.4f bpp\n", a.output.c_str(), bytes.size(),
              bits_per_pixel(bytes.size(), field.grid_s(), field.grid_t(), field.width(),
                             field.height()));
  return 0;
}

int run_decode(const std::string& input, const std::string& output, const std::string& view,
               const std::string& format, int threads) {
  const Decoder dec = Decoder::open(fs::path(input));
  const ImageFormat fmt = format == "ppm" ? ImageFormat::kPpm : ImageFormat::kPng;
  if (format != "png" && format != "ppm") {
    throw Error(ErrorCode::kInvalidArgument, "--format must be png or ppm");
  }
  fs::create_directories(output);
  if (!view.empty()) {
    const auto [s, t] = parse_pair(view, "--view");
    const RgbImage img = dec.decode_view(s, t);
    const fs::path path = fs::path(output) / ("out_" + std::to_string(t) + "_" +
                                              std::to_string(s) + (fmt == ImageFormat::kPng ? ".png" : ".ppm"));
    if (fmt == ImageFormat::kPng) write_png(path, img);
    else write_ppm(path, img);
  } else {
    save_light_field(dec.decode_all(threads), output, fmt);
  }
  return 0;
}

int run_stats(const std::string& input, const std::string& reference, int threads) {
  const Decoder dec = Decoder::open(fs::path(input));
  const LightField decoded = dec.decode_all(threads);
  const DecoderStats st = dec.stats();
  std::printf("%s", describe_stream(dec.stream()).c_str());
  std::printf("decode        %llu blocks, %llu payload reads, %llu payload bytes read\n",
              (unsigned long long)st.blocks_decoded, (unsigned long long)st.payload_reads,
              (unsigned long long)st.payload_bytes_read);
  std::printf("memory        reference cache %llu bytes, top RKVs %llu bytes\n",
              (unsigned long long)st.cache_bytes, (unsigned long long)st.rkv_bytes);
  if (!reference.empty()) {
    const LightField ref = load_light_field(reference);
    std::printf("psnr          %.3f dB\n", psnr(ref, decoded));
  }
  return 0;
}

int run_render(const std::string& input, const std::string& pose, double fov,
               const std::string& res, const std::string& output,
               const std::string& geometry, int threads) {
  const Decoder dec = Decoder::open(fs::path(input));
  const LfGeometry g = stream_geometry(dec, input, geometry);
  const auto [w, h] = parse_pair(res, "--res");
  Camera cam;
  if (pose.empty()) {
    const Vec3 centre = g.camera_position((g.grid_s - 1) / 2.0, (g.grid_t - 1) / 2.0);
    cam = Camera::from_pose(centre, 0, 0, fov > 0 ? fov : matched_fov_deg(g), w, h);
  } else {
    const std::vector<double> v = parse_list(pose, 5, "--pose");
    cam = Camera::from_pose({v[0], v[1], v[2]}, v[3], v[4],
                            fov > 0 ? fov : matched_fov_deg(g), w, h);
  }
  const auto start = std::chrono::steady_clock::now();
  RenderStats rs;
  const RgbImage img = render(dec, cam, g, threads, &rs);
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  write_png(output, img);
  std::printf("%s: %dx%d in %.2f ms, %llu block decodes\n", output.c_str(), w, h, ms,
              (unsigned long long)rs.block_decodes);
  return 0;
}

int run_serve(const std::string& input, const std::string& addr,
              const std::string& static_dir, const std::string& geometry, int threads) {
  Decoder dec = Decoder::open(fs::path(input));
  const LfGeometry g = stream_geometry(dec, input, geometry);
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "--addr must be host:port");
  }
  const std::string host = addr.substr(0, colon);
  const int port = std::stoi(addr.substr(colon + 1));
  ServiceOptions opts;
  opts.static_dir = static_dir;
  opts.render_threads = threads;
  ViewService service(std::move(dec), g, opts);
  const int bound = service.bind(host, port);
  std::printf("serving %s on http://%s:%d/\n", input.c_str(), host.c_str(), bound);
  std::fflush(stdout);
  service.listen();
  return 0;
}

int run_bench(const std::string& spec_path, const std::string& output, double compare_db,
              int threads) {
  const std::vector<uint8_t> text = read_file(spec_path);
  SweepSpec spec = SweepSpec::from_json(std::string(text.begin(), text.end()));
  if (threads != 0) spec.threads = threads;
  LightField field = spec.dataset == "synthetic"
                         ? generate_synthetic(spec.scene)
                         : load_light_field(spec.dataset, LoadLayout{{}, {}, {}, spec.threads});
  fs::create_directories(output);
  if (compare_db > 0) {
    EncodeParams p = spec.base;
    p.tree_height = spec.heights.front();
    p.block_size = spec.block_sizes.front();
    p.window = spec.windows.front();
    p.threads = spec.threads;
    const Comparison cmp = compare_codecs(field, compare_db, p, spec.codecs);
    std::vector<RdPoint> points;
    for (const MatchedPoint& m : cmp.results) {
      points.push_back(m.point);
      const auto r = cmp.ratio(m.codec);
      std::printf("%-10s tau=%-6u bpp=%.4f psnr=%.2f %s ratio=%s\n",
                  codec_variant_name(m.codec).c_str(), m.point.tau, m.point.bpp, m.point.psnr,
                  m.converged ? "matched" : "unmatched",
                  r ? std::to_string(*r).c_str() : "n/a");
    }
    std::ofstream(fs::path(output) / "comparison.csv") << [&] {
      std::ostringstream o;
      write_csv(o, points);
      return o.str();
    }();
    return 0;
  }
  const std::vector<RdPoint> points = run_sweep(spec, field);
  {
    std::ofstream csv(fs::path(output) / "results.csv");
    write_csv(csv, points);
  }
  {
    std::ofstream js(fs::path(output) / "results.json");
    js << points_to_json(points) << '\n';
  }
  {
    std::ofstream dat(fs::path(output) / "results.dat");
    dat << "# codec height block window tau bpp psnr\n";
    for (const RdPoint& p : points) {
      dat << codec_variant_name(p.codec) << ' ' << p.tree_height << ' ' << p.block_size << ' '
          << p.window << ' ' << p.tau << ' ' << p.bpp << ' ' << p.psnr << '\n';
    }
  }
  int failures = 0;
  for (const RdPoint& p : points) {
    if (!p.error.empty()) {
      ++failures;
      std::fprintf(stderr, "point failed (%s bs=%d W=%d tau=%u): %s\n",
                   codec_variant_name(p.codec).c_str(), p.block_size, p.window, p.tau,
                   p.error.c_str());
    } else {
      std::printf("%-10s h=%d bs=%d W=%-3d tau=%-6u bpp=%.4f psnr=%.2f\n",
                  codec_variant_name(p.codec).c_str(), p.tree_height, p.block_size, p.window,
                  p.tau, p.bpp, p.psnr);
    }
  }
  return failures == 0 ? 0 : 1;
}

int run_synth(const std::string& output, const std::string& kind, const std::string& grid,
              const std::string& res, double baseline, int quads, uint64_t seed,
              const std::string& format) {
  SyntheticScene scene;
  scene.kind = parse_scene_kind(kind);
  std::tie(scene.grid_s, scene.grid_t) = parse_pair(grid, "--grid");
  std::tie(scene.width, scene.height) = parse_pair(res, "--res");
  scene.baseline = baseline;
  scene.quad_count = quads;
  scene.seed = seed;
  const LightField field = generate_synthetic(scene);
  save_light_field(field, output, format == "ppm" ? ImageFormat::kPpm : ImageFormat::kPng);
  const std::string gj = geometry_to_json(scene.geometry());
  write_file(fs::path(output) / "geometry.json", std::vector<uint8_t>(gj.begin(), gj.end()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HMLFC light-field codec"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");

  EncodeArgs ea;
  auto* encode = app.add_subcommand("encode", "Encode a directory of views");
  encode->add_option("input", ea.input, "Directory of views")->required();
  encode->add_option("-o,--output", ea.output, "Output stream")->required();
  encode->add_option("--grid", ea.grid, "Camera grid SxT when not inferable");
  encode->add_option("--manifest", ea.manifest, "manifest.json listing the views");
  encode->add_option("--height", ea.height, "Tree height")->capture_default_str();
  encode->add_option("--block", ea.block, "Block size (2, 4, 8, 16)")->capture_default_str();
  encode->add_option("--window", ea.window, "Search window W")->capture_default_str();
  encode->add_option("--tau", ea.tau, "Sets both thresholds");
  encode->add_option("--tau-ref", ea.tau_ref, "Reference SRV threshold")->capture_default_str();
  encode->add_option("--tau-res", ea.tau_res, "Residual threshold")->capture_default_str();
  encode->add_flag("--chroma-subsample", ea.chroma_subsample, "Halve Co/Cg resolution");
  encode->add_option("--color", ea.color, "ycocg | identity")->capture_default_str();
  encode->add_flag("--no-motion", ea.no_motion, "Disable motion compensation");
  encode->add_flag("--subtractive-only", ea.subtractive_only, "Disable the phase-shifted mode");
  encode->add_option("--mv-policy", ea.mv_policy,
                     "all | drop-insignificant | significant-srv");
  encode->add_flag("--mv-drop-insignificant", ea.mv_drop_insignificant,
                   "Same as --mv-policy drop-insignificant");
  encode->add_option("--reference", ea.reference, "top-left | center")->capture_default_str();
  encode->add_option("--rkv-codec", ea.rkv_codec, "png | bise")->capture_default_str();
  encode->add_option("--geometry", ea.geometry, "Geometry JSON to embed in the sidecar");
  encode->add_option("--dump-tree", ea.dump_tree, "Write per-level RKV/SRV images here");
  encode->add_option("--motion-csv", ea.motion_csv, "Write motion records as CSV");

  std::string stream, output, view, format = "png", reference, pose, res = "512x512";
  std::string geometry, addr = "127.0.0.1:8080", static_dir, spec;
  double fov = 0, compare_db = 0;

  auto* info = app.add_subcommand("info", "Describe a stream");
  info->add_option("stream", stream)->required();

  auto* decode = app.add_subcommand("decode", "Decode views");
  decode->add_option("stream", stream)->required();
  decode->add_option("-o,--output", output, "Output directory")->required();
  decode->add_option("--view", view, "Single view s,t");
  decode->add_option("--format", format, "png | ppm")->capture_default_str();

  auto* stats = app.add_subcommand("stats", "Full decode with byte and cache statistics");
  stats->add_option("stream", stream)->required();
  stats->add_option("--reference", reference, "Original views for PSNR");

  auto* rend = app.add_subcommand("render", "Render a novel view");
  rend->add_option("stream", stream)->required();
  rend->add_option("--pose", pose, "x,y,z,yaw,pitch (default: grid centre)");
  rend->add_option("--fov", fov, "Horizontal fov in degrees (default: matched)");
  rend->add_option("--res", res, "WxH")->capture_default_str();
  rend->add_option("-o,--output", output, "Output PNG")->required();
  rend->add_option("--geometry", geometry, "Geometry JSON (default: stream sidecar)");

  auto* serve = app.add_subcommand("serve", "Serve the viewer API");
  serve->add_option("stream", stream)->required();
  serve->add_option("--addr", addr, "host:port")->capture_default_str();
  serve->add_option("--static", static_dir, "Viewer bundle directory");
  serve->add_option("--geometry", geometry, "Geometry JSON (default: stream sidecar)");

  auto* bench = app.add_subcommand("bench", "Run a rate-distortion sweep");
  bench->add_option("--spec", spec, "Sweep JSON")->required();
  bench->add_option("-o,--output", output, "Results directory")->required();
  bench->add_option("--compare", compare_db, "Match codecs at this PSNR instead of sweeping");

  std::string kind = "quads", grid = "8x8", synth_res = "128x128";
  double baseline = 1.0;
  int quads = 5;
  uint64_t seed = 1;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic light field");
  synth->add_option("-o,--output", output, "Output directory")->required();
  synth->add_option("--kind", kind, "quads | checkerboard | noise")->capture_default_str();
  synth->add_option("--grid", grid, "SxT")->capture_default_str();
  synth->add_option("--res", synth_res, "WxH")->capture_default_str();
  synth->add_option("--baseline", baseline, "Camera spacing")->capture_default_str();
  synth->add_option("--quads", quads, "Number of quads")->capture_default_str();
  synth->add_option("--seed", seed, "Random seed")->capture_default_str();
  synth->add_option("--format", format, "png | ppm")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  ea.threads = threads;
  try {
    if (*encode) return run_encode(ea);
    if (*info) {
      const Decoder dec = Decoder::open(fs::path(stream));
      std::printf("%s", describe_stream(dec.stream()).c_str());
      return 0;
    }
    if (*decode) return run_decode(stream, output, view, format, threads);
    if (*stats) return run_stats(stream, reference, threads);
    if (*rend) return run_render(stream, pose, fov, res, output, geometry, threads <= 0 ? 0 : threads);
    if (*serve) return run_serve(stream, addr, static_dir, geometry, threads <= 0 ? 1 : threads);
    if (*bench) return run_bench(spec, output, compare_db, threads);
    if (*synth) return run_synth(output, kind, grid, synth_res, baseline, quads, seed, format);
  } catch (const Error& e) {
    std::fprintf(stderr, "hmlfc: %s error: %s\n", std::string(error_code_name(e.code())).c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "hmlfc: %s\n", e.what());
    return 2;
  }
  return 1;
}
