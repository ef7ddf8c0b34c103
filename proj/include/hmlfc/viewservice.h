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

// Local HTTP front end for interactive rendering.
//
//   GET /api/meta   grid, image size, geometry, codec parameters, viewing zone
//   GET /api/view   query-encoded ViewRequest -> PNG
//   GET /api/stats  SessionStats as JSON
//   GET /           static viewer assets (or a minimal built-in page)
//
// Schemas are documented in docs/api.md.

#ifndef HMLFC_VIEWSERVICE_H_
#define HMLFC_VIEWSERVICE_H_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hmlfc/decoder.h"
#include "hmlfc/error.h"
#include "hmlfc/renderer.h"

namespace hmlfc {

inline constexpr int kMaxViewResolution = 1024;

// A malformed request parameter; field() names it.
class BadRequest : public Error {
 public:
  BadRequest(std::string field, const std::string& message)
      : Error(ErrorCode::kInvalidArgument, "field '" + field + "': " + message),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class Quality { kFull, kPreview };

struct ViewRequest {
  Vec3 position;
  double yaw = 0;    // degrees, toward +x
  double pitch = 0;  // degrees, toward -y
  double fov = 45;   // horizontal degrees, in (1, 120)
  int width = 512;
  int height = 512;
  Quality quality = Quality::kFull;

  // Throws BadRequest.
  void validate() const;
};

// Keys: x, y, z, yaw, pitch, fov, w, h, quality ("full" | "preview").
// Missing keys take the values in `defaults`.
ViewRequest parse_view_request(const std::multimap<std::string, std::string>& query,
                               const ViewRequest& defaults);

struct SessionStats {
  uint64_t frames_served = 0;
  double mean_render_ms = 0;
  double blocks_per_frame = 0;
  uint64_t cache_bytes = 0;
};

struct ServiceOptions {
  std::filesystem::path static_dir;  // empty or missing: built-in page
  int render_threads = 1;            // per request
};

class ViewService {
 public:
  ViewService(Decoder decoder, LfGeometry geometry, ServiceOptions options = {});
  ~ViewService();

  const Decoder& decoder() const { return decoder_; }
  const LfGeometry& geometry() const { return geometry_; }

  // Pose at the centre of the camera grid, looking down +z with the fov that
  // frames the image rectangle.
  ViewRequest default_request() const;

  std::string meta_json() const;

  struct ViewResponse {
    std::vector<uint8_t> png;
    double render_ms = 0;
    uint64_t blocks_decoded = 0;
  };
  // Renders and encodes; updates the session counters.
  ViewResponse handle_view(const ViewRequest& request) const;

  SessionStats stats() const;
  std::string stats_json() const;

  // Binds host:port (port 0 picks a free one) and returns the bound port.
  // Throws kIo on bind failure.
  int bind(const std::string& host, int port);
  // Serves until stop(); requires bind().
  void listen();
  // Blocks until a concurrent listen() is accepting connections.
  void wait_until_ready() const;
  void stop();

 private:
  Decoder decoder_;
  LfGeometry geometry_;
  ServiceOptions options_;
  mutable std::atomic<uint64_t> frames_{0};
  mutable std::atomic<uint64_t> render_us_{0};
  mutable std::atomic<uint64_t> blocks_{0};
  struct Server;
  std::unique_ptr<Server> server_;
};

}  // namespace hmlfc

#endif  // HMLFC_VIEWSERVICE_H_
