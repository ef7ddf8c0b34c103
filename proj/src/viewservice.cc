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

#include "hmlfc/viewservice.h"

#include <chrono>
#include <cmath>
#include <sstream>

#include "hmlfc/image_io.h"
#include "httplib.h"
#include "json.hpp"

namespace hmlfc {

namespace {

double parse_number(const std::string& field, const std::string& text) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw BadRequest(field, "not a number: '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(v)) {
    throw BadRequest(field, "not a finite number: '" + text + "'");
  }
  return v;
}

int parse_int(const std::string& field, const std::string& text) {
  const double v = parse_number(field, text);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw BadRequest(field, "not an integer: '" + text + "'");
  }
  return static_cast<int>(v);
}

constexpr const char* kBuiltinIndex = R"html(<!doctype html>
<html>
<head><meta charset="utf-8"><title>HMLFC viewer</title></head>
<body style="background:#111;color:#ddd;font-family:sans-serif">
<p>The viewer bundle is not installed. Start the service with
<code>--static DIR</code> to serve it. The HTTP API is live:
<a href="/api/meta">/api/meta</a>, <a href="/api/stats">/api/stats</a>.</p>
<img id="view" alt="default view" src="/api/view">
</body>
</html>
)html";

}  // namespace

void ViewRequest::validate() const {
  if (!(fov > 1.0 && fov < 120.0)) throw BadRequest("fov", "must be in (1, 120) degrees");
  if (width < 1 || width > kMaxViewResolution) {
    throw BadRequest("w", "must be in [1, " + std::to_string(kMaxViewResolution) + "]");
  }
  if (height < 1 || height > kMaxViewResolution) {
    throw BadRequest("h", "must be in [1, " + std::to_string(kMaxViewResolution) + "]");
  }
  if (!std::isfinite(position.x) || !std::isfinite(position.y) ||
      !std::isfinite(position.z) || !std::isfinite(yaw) || !std::isfinite(pitch)) {
    throw BadRequest("pose", "must be finite");
  }
}

ViewRequest parse_view_request(const std::multimap<std::string, std::string>& query,
                               const ViewRequest& defaults) {
  ViewRequest r = defaults;
  for (const auto& [key, value] : query) {
    if (key == "x") r.position.x = parse_number(key, value);
    else if (key == "y") r.position.y = parse_number(key, value);
    else if (key == "z") r.position.z = parse_number(key, value);
    else if (key == "yaw") r.yaw = parse_number(key, value);
    else if (key == "pitch") r.pitch = parse_number(key, value);
    else if (key == "fov") r.fov = parse_number(key, value);
    else if (key == "w") r.width = parse_int(key, value);
    else if (key == "h") r.height = parse_int(key, value);
    else if (key == "quality") {
      if (value == "full") r.quality = Quality::kFull;
      else if (value == "preview") r.quality = Quality::kPreview;
      else throw BadRequest(key, "must be 'full' or 'preview'");
    } else {
      throw BadRequest(key, "unknown parameter");
    }
  }
  r.validate();
  return r;
}

struct ViewService::Server {
  httplib::Server http;
};

ViewService::ViewService(Decoder decoder, LfGeometry geometry, ServiceOptions options)
    : decoder_(std::move(decoder)),
      geometry_(geometry),
      options_(std::move(options)),
      server_(std::make_unique<Server>()) {
  geometry_.validate();
  if (geometry_.grid_s != decoder_.grid_s() || geometry_.grid_t != decoder_.grid_t() ||
      geometry_.width != decoder_.width() || geometry_.height != decoder_.height()) {
    throw Error(ErrorCode::kDimensionMismatch, "geometry does not match the stream");
  }
}

ViewService::~ViewService() { stop(); }

ViewRequest ViewService::default_request() const {
  ViewRequest r;
  r.position = geometry_.camera_position((geometry_.grid_s - 1) / 2.0,
                                         (geometry_.grid_t - 1) / 2.0);
  r.fov = std::clamp(matched_fov_deg(geometry_), 1.5, 119.0);
  r.width = std::min(kMaxViewResolution, 512);
  r.height = std::max(1, std::min(kMaxViewResolution,
                                  int(std::lround(512.0 * geometry_.height / geometry_.width))));
  return r;
}

std::string ViewService::meta_json() const {
  const StreamHeader& h = decoder_.header();
  const EncodeParams& p = h.params;
  const LfGeometry& g = geometry_;
  const ViewRequest d = default_request();
  nlohmann::json j = {
      {"grid", {h.grid_s, h.grid_t}},
      {"image", {h.width, h.height}},
      {"bytes", decoder_.stream().bytes->size()},
      {"bpp", decoder_.stream().bpp()},
      {"params",
       {{"tree_height", p.tree_height},
        {"block_size", p.block_size},
        {"window", p.window},
        {"tau_ref", p.tau_ref},
        {"tau_res", p.tau_res},
        {"color", p.color.transform == ColorTransform::kYCoCgR ? "ycocg-r" : "identity"},
        {"chroma_subsample", p.color.chroma_subsample == ChromaSubsample::kHalf},
        {"motion", p.motion},
        {"mv_policy", mv_policy_name(p.mv_policy)}}},
      {"geometry", nlohmann::json::parse(geometry_to_json(g))},
      {"zone",
       {{"x", {g.uv_origin_x - g.spacing_x / 2, g.uv_origin_x + (g.grid_s - 0.5) * g.spacing_x}},
        {"y", {g.uv_origin_y - g.spacing_y / 2, g.uv_origin_y + (g.grid_t - 0.5) * g.spacing_y}},
        {"z", {-g.separation, 0.5 * g.separation}}}},
      {"default_pose",
       {{"x", d.position.x},
        {"y", d.position.y},
        {"z", d.position.z},
        {"yaw", d.yaw},
        {"pitch", d.pitch},
        {"fov", d.fov},
        {"w", d.width},
        {"h", d.height}}},
      {"limits", {{"max_resolution", kMaxViewResolution}, {"fov", {1, 120}}}},
  };
  return j.dump(2);
}

ViewService::ViewResponse ViewService::handle_view(const ViewRequest& request) const {
  request.validate();
  const auto start = std::chrono::steady_clock::now();
  const bool preview = request.quality == Quality::kPreview;
  const int rw = preview ? std::max(1, request.width / 2) : request.width;
  const int rh = preview ? std::max(1, request.height / 2) : request.height;
  const Camera cam =
      Camera::from_pose(request.position, request.yaw, request.pitch, request.fov, rw, rh);
  RenderStats rs;
  RgbImage img = render(decoder_, cam, geometry_, options_.render_threads, &rs);
  if (preview) {
    RgbImage full(request.width, request.height);
    for (int y = 0; y < request.height; ++y) {
      for (int x = 0; x < request.width; ++x) {
        const int sx = std::min(rw - 1, x / 2), sy = std::min(rh - 1, y / 2);
        for (int c = 0; c < 3; ++c) {
          full.pixels[(std::size_t(y) * request.width + x) * 3 + c] =
              img.pixels[(std::size_t(sy) * rw + sx) * 3 + c];
        }
      }
    }
    img = std::move(full);
  }
  ViewResponse out;
  out.png = png_bytes(img);
  out.render_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  out.blocks_decoded = rs.block_decodes;
  frames_.fetch_add(1, std::memory_order_relaxed);
  render_us_.fetch_add(uint64_t(out.render_ms * 1000.0), std::memory_order_relaxed);
  blocks_.fetch_add(rs.block_decodes, std::memory_order_relaxed);
  return out;
}

SessionStats ViewService::stats() const {
  SessionStats s;
  s.frames_served = frames_.load(std::memory_order_relaxed);
  const uint64_t us = render_us_.load(std::memory_order_relaxed);
  const uint64_t blocks = blocks_.load(std::memory_order_relaxed);
  if (s.frames_served > 0) {
    s.mean_render_ms = double(us) / 1000.0 / double(s.frames_served);
    s.blocks_per_frame = double(blocks) / double(s.frames_served);
  }
  s.cache_bytes = decoder_.stats().cache_bytes;
  return s;
}

std::string ViewService::stats_json() const {
  const SessionStats s = stats();
  return nlohmann::json({{"frames_served", s.frames_served},
                         {"mean_render_ms", s.mean_render_ms},
                         {"blocks_per_frame", s.blocks_per_frame},
                         {"cache_bytes", s.cache_bytes}})
      .dump(2);
}

int ViewService::bind(const std::string& host, int port) {
  httplib::Server& http = server_->http;
  http.Get("/api/meta", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(meta_json(), "application/json");
  });
  http.Get("/api/stats", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(stats_json(), "application/json");
  });
  http.Get("/api/view", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      std::multimap<std::string, std::string> query(req.params.begin(), req.params.end());
      const ViewResponse v = handle_view(parse_view_request(query, default_request()));
      res.set_header("X-Render-Time-Ms", std::to_string(v.render_ms));
      res.set_header("X-Blocks-Decoded", std::to_string(v.blocks_decoded));
      res.set_content(std::string(v.png.begin(), v.png.end()), "image/png");
    } catch (const BadRequest& e) {
      res.status = 400;
      res.set_content(nlohmann::json({{"error", e.what()}, {"field", e.field()}}).dump(),
                      "application/json");
    } catch (const Error& e) {
      res.status = 400;
      res.set_content(nlohmann::json({{"error", e.what()}}).dump(), "application/json");
    }
  });
  const bool have_static = !options_.static_dir.empty() &&
                           std::filesystem::is_directory(options_.static_dir) &&
                           http.set_mount_point("/", options_.static_dir.string());
  if (!have_static) {
    http.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kBuiltinIndex, "text/html");
    });
  }
  // Port sharing is left off so a second service cannot bind the same port.
  http.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes),
               sizeof(yes));
  });
  int bound = -1;
  if (port == 0) {
    bound = http.bind_to_any_port(host);
  } else if (http.bind_to_port(host, port)) {
    bound = port;
  }
  if (bound <= 0) {
    throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void ViewService::listen() { server_->http.listen_after_bind(); }

void ViewService::wait_until_ready() const { server_->http.wait_until_ready(); }

void ViewService::stop() {
  if (server_ && server_->http.is_running()) server_->http.stop();
}

}  // namespace hmlfc
