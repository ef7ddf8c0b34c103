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

#include "hmlfc/harness.h"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include "hmlfc/decoder.h"
#include "hmlfc/error.h"
#include "hmlfc/motion.h"
#include "hmlfc/parallel.h"
#include "json.hpp"

namespace hmlfc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Directory overhead charged per stored plane by the mc_only size model,
// matching the size of a plane entry in the stream.
constexpr uint64_t kMcOnlyPlaneOverhead = 56;

}  // namespace

CodecVariant parse_codec_variant(const std::string& name) {
  if (name == "hmlfc") return CodecVariant::kHmlfc;
  if (name == "rlfc_only") return CodecVariant::kRlfcOnly;
  if (name == "mc_only") return CodecVariant::kMcOnly;
  throw Error(ErrorCode::kInvalidArgument, "unknown codec variant '" + name + "'");
}

std::string codec_variant_name(CodecVariant v) {
  switch (v) {
    case CodecVariant::kHmlfc: return "hmlfc";
    case CodecVariant::kRlfcOnly: return "rlfc_only";
    case CodecVariant::kMcOnly: return "mc_only";
  }
  return "hmlfc";
}

// mc_only: each 4x4 tile of views keeps one reference view losslessly and
// codes the others as thresholded motion-compensated residuals against it.
// Only the sizes of the stored pieces are accounted; no stream is written.
struct McOnlyModel {
  struct View {
    bool reference = false;
    std::size_t ref_view = 0;
    std::array<CompensatedPlane, 3> comp;
  };

  std::array<PlaneGrid, 3> channels;
  std::vector<View> views;
  uint64_t reference_bytes = 0;

  McOnlyModel(const LightField& field, const EncodeParams& params) {
    channels = forward_color(field, params.color);
    const int gs = field.grid_s(), gt = field.grid_t();
    McConfig cfg = params.mc_config();
    cfg.phase_shift = false;
    views.resize(std::size_t(gs) * gt);
    auto ref_coord = [](int v, int extent) {
      const int tile = v / kMcOnlyTile * kMcOnlyTile;
      const int size = std::min(kMcOnlyTile, extent - tile);
      return tile + size / 2;
    };
    for (int t = 0; t < gt; ++t) {
      for (int s = 0; s < gs; ++s) {
        View& v = views[std::size_t(t) * gs + s];
        const int rs = ref_coord(s, gs), rt = ref_coord(t, gt);
        v.ref_view = std::size_t(rt) * gs + rs;
        v.reference = rs == s && rt == t;
      }
    }
    std::vector<std::pair<std::size_t, int>> jobs;
    for (std::size_t i = 0; i < views.size(); ++i) {
      for (int c = 0; c < 3; ++c) {
        if (views[i].reference) {
          reference_bytes +=
              encode_lossless_plane(channels[c].planes[i], RkvCodec::kPng).bytes.size() +
              kMcOnlyPlaneOverhead;
        } else {
          jobs.emplace_back(i, c);
        }
      }
    }
    parallel_for(jobs.size(), params.threads, [&](std::size_t j) {
      const auto [i, c] = jobs[j];
      views[i].comp[c] = compensate_plane(channels[c].planes[i],
                                          channels[c].planes[views[i].ref_view], cfg,
                                          static_cast<int>(views[i].ref_view), 1);
    });
  }

  // Returns (bytes, reconstruction).
  std::pair<uint64_t, LightField> measure(const EncodeParams& params, uint32_t tau,
                                          int width, int height) const {
    const int bs = params.block_size;
    const uint32_t mv_range = static_cast<uint32_t>(2 * params.window + 1);
    uint64_t bytes = kHeaderSize + reference_bytes;
    std::array<PlaneGrid, 3> out = channels;
    McConfig cfg = params.mc_config();
    cfg.phase_shift = false;
    for (std::size_t i = 0; i < views.size(); ++i) {
      if (views[i].reference) continue;
      for (int c = 0; c < 3; ++c) {
        const CompensatedPlane& cp = views[i].comp[c];
        const ThresholdResult thr = threshold_blocks(cp.residual, tau, bs);
        const Plane kept = apply_significance(cp.residual, thr.map, bs);
        // Payload: significant blocks padded to bs^2, offset by their minimum.
        std::vector<int32_t> values;
        const int nbx = blocks_across(kept.width(), bs);
        for (uint32_t b : thr.surviving) {
          const BlockRect r = block_rect(kept.width(), kept.height(), bs, b % nbx, b / nbx);
          for (int y = 0; y < bs; ++y) {
            for (int x = 0; x < bs; ++x) {
              values.push_back(x < r.w && y < r.h ? kept.at(r.x + x, r.y + y) : 0);
            }
          }
        }
        int32_t lo = 0, hi = 0;
        if (!values.empty()) {
          const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
          lo = *mn;
          hi = *mx;
        }
        std::vector<uint32_t> shifted(values.size());
        for (std::size_t k = 0; k < values.size(); ++k) shifted[k] = uint32_t(values[k] - lo);
        bytes += BiseSequence::encode(shifted, uint32_t(hi - lo + 1)).payload().size();
        bytes += pack_bitmap(thr.map).size() + kMcOnlyPlaneOverhead;
        std::vector<uint32_t> dx, dy;
        for (const MotionRecord& rec : cp.records) {
          dx.push_back(uint32_t(rec.dx + params.window));
          dy.push_back(uint32_t(rec.dy + params.window));
        }
        bytes += BiseSequence::encode(dx, mv_range).payload().size() +
                 BiseSequence::encode(dy, mv_range).payload().size();
        out[c].planes[i] = recompensate_plane(kept, cp.records,
                                              channels[c].planes[views[i].ref_view], cfg);
      }
    }
    return {bytes, inverse_color(out, params.color, width, height)};
  }
};

struct RdModel::Impl {
  const LightField* field = nullptr;
  CodecVariant codec = CodecVariant::kHmlfc;
  EncodeParams params;
  double prepare_seconds = 0;
  std::optional<PreparedField> prepared;
  std::optional<McOnlyModel> mc_only;
};

RdModel::RdModel(const LightField& field, CodecVariant codec, const EncodeParams& params)
    : impl_(std::make_unique<Impl>()) {
  impl_->field = &field;
  impl_->codec = codec;
  impl_->params = params;
  if (codec == CodecVariant::kRlfcOnly) impl_->params.motion = false;
  impl_->params.validate();
  const Clock::time_point start = Clock::now();
  if (codec == CodecVariant::kMcOnly) {
    impl_->mc_only.emplace(field, impl_->params);
  } else {
    impl_->prepared = prepare(field, impl_->params);
  }
  impl_->prepare_seconds = seconds_since(start);
}

RdModel::~RdModel() = default;
RdModel::RdModel(RdModel&&) noexcept = default;
RdModel& RdModel::operator=(RdModel&&) noexcept = default;

CodecVariant RdModel::codec() const { return impl_->codec; }
double RdModel::prepare_seconds() const { return impl_->prepare_seconds; }

RdPoint RdModel::measure(uint32_t tau, double ref_scale) const {
  const LightField& field = *impl_->field;
  EncodeParams p = impl_->params;
  p.tau_res = tau;
  p.tau_ref = static_cast<uint32_t>(std::lround(tau * ref_scale));
  RdPoint pt;
  pt.codec = impl_->codec;
  pt.block_size = p.block_size;
  pt.window = p.window;
  pt.tree_height = impl_->codec == CodecVariant::kMcOnly ? 1 : p.tree_height;
  pt.tau = tau;
  Clock::time_point start = Clock::now();
  if (impl_->mc_only) {
    auto [bytes, recon] = impl_->mc_only->measure(p, tau, field.width(), field.height());
    pt.encode_seconds = impl_->prepare_seconds + seconds_since(start);
    pt.bytes = bytes;
    pt.psnr = psnr(field, recon);
  } else {
    std::vector<uint8_t> stream = serialize(*impl_->prepared, p);
    pt.encode_seconds = impl_->prepare_seconds + seconds_since(start);
    pt.bytes = stream.size();
    start = Clock::now();
    const Decoder decoder = Decoder::open(std::move(stream));
    const LightField recon = decoder.decode_all(p.threads);
    pt.decode_seconds = seconds_since(start);
    const DecoderStats st = decoder.stats();
    pt.blocks_decoded = st.blocks_decoded;
    pt.cache_bytes = st.cache_bytes;
    pt.psnr = psnr(field, recon);
  }
  pt.bpp = bits_per_pixel(pt.bytes, field.grid_s(), field.grid_t(), field.width(),
                          field.height());
  return pt;
}

RdPoint measure_point(const LightField& field, CodecVariant codec,
                      const EncodeParams& params) {
  const RdModel model(field, codec, params);
  return model.measure(params.tau_res);
}

void SweepSpec::validate() const {
  if (block_sizes.empty() || taus.empty() || windows.empty() || heights.empty() ||
      codecs.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "sweep spec: every axis needs a value");
  }
}

SweepSpec SweepSpec::from_json(const std::string& text) {
  SweepSpec spec;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.contains("block_sizes")) spec.block_sizes = j.at("block_sizes").get<std::vector<int>>();
    if (j.contains("taus")) spec.taus = j.at("taus").get<std::vector<uint32_t>>();
    if (j.contains("windows")) spec.windows = j.at("windows").get<std::vector<int>>();
    if (j.contains("heights")) spec.heights = j.at("heights").get<std::vector<int>>();
    if (j.contains("codecs")) {
      spec.codecs.clear();
      for (const auto& c : j.at("codecs")) spec.codecs.push_back(parse_codec_variant(c));
    }
    if (j.contains("dataset")) spec.dataset = j.at("dataset").get<std::string>();
    if (j.contains("threads")) spec.threads = j.at("threads").get<int>();
    if (j.contains("tau_ref_scale")) spec.tau_ref_scale = j.at("tau_ref_scale").get<double>();
    if (j.contains("scene")) {
      const auto& s = j.at("scene");
      SyntheticScene& sc = spec.scene;
      if (s.contains("kind")) sc.kind = parse_scene_kind(s.at("kind"));
      if (s.contains("grid")) {
        sc.grid_s = s.at("grid").at(0);
        sc.grid_t = s.at("grid").at(1);
      }
      if (s.contains("image")) {
        sc.width = s.at("image").at(0);
        sc.height = s.at("image").at(1);
      }
      if (s.contains("baseline")) sc.baseline = s.at("baseline");
      if (s.contains("quads")) sc.quad_count = s.at("quads");
      if (s.contains("seed")) sc.seed = s.at("seed");
      if (s.contains("depth")) {
        sc.near_fraction = s.at("depth").at(0);
        sc.far_fraction = s.at("depth").at(1);
      }
      if (s.contains("quad_texture_scale")) sc.quad_texture_scale = s.at("quad_texture_scale");
    }
    if (j.contains("params")) {
      const auto& p = j.at("params");
      EncodeParams& b = spec.base;
      if (p.contains("mv_policy")) b.mv_policy = parse_mv_policy(p.at("mv_policy"));
      if (p.contains("rkv_codec")) b.rkv_codec = parse_rkv_codec(p.at("rkv_codec"));
      if (p.contains("chroma_subsample")) {
        b.color.chroma_subsample = p.at("chroma_subsample").get<bool>()
                                       ? ChromaSubsample::kHalf
                                       : ChromaSubsample::kNone;
      }
      if (p.contains("reference")) {
        const std::string r = p.at("reference");
        if (r != "top-left" && r != "center") {
          throw Error(ErrorCode::kInvalidArgument, "unknown reference choice '" + r + "'");
        }
        b.reference = r == "center" ? ReferenceChoice::kCenter : ReferenceChoice::kTopLeft;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("sweep spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::vector<RdPoint> run_sweep(const SweepSpec& spec, const LightField& field) {
  spec.validate();
  std::vector<RdPoint> out;
  for (CodecVariant codec : spec.codecs) {
    for (int height : spec.heights) {
      for (int bs : spec.block_sizes) {
        for (int window : spec.windows) {
          EncodeParams p = spec.base;
          p.tree_height = height;
          p.block_size = bs;
          p.window = window;
          p.threads = spec.threads;
          std::vector<RdPoint> group(spec.taus.size());
          for (std::size_t i = 0; i < group.size(); ++i) {
            group[i].codec = codec;
            group[i].tree_height = codec == CodecVariant::kMcOnly ? 1 : height;
            group[i].block_size = bs;
            group[i].window = window;
            group[i].tau = spec.taus[i];
          }
          try {
            const RdModel model(field, codec, p);
            parallel_for(group.size(), spec.threads, [&](std::size_t i) {
              try {
                group[i] = model.measure(spec.taus[i], spec.tau_ref_scale);
              } catch (const std::exception& e) {
                group[i].error = e.what();
              }
            });
          } catch (const std::exception& e) {
            for (RdPoint& pt : group) pt.error = e.what();
          }
          out.insert(out.end(), group.begin(), group.end());
        }
      }
    }
  }
  return out;
}

void write_csv(std::ostream& out, const std::vector<RdPoint>& points) {
  out << "codec,tree_height,block_size,window,tau,bytes,bpp,psnr,encode_s,decode_s,"
         "blocks_decoded,cache_bytes,error\n";
  for (const RdPoint& p : points) {
    std::string err = p.error;
    for (char& ch : err) {
      if (ch == ',' || ch == '\n') ch = ' ';
    }
    out << codec_variant_name(p.codec) << ',' << p.tree_height << ',' << p.block_size
        << ',' << p.window << ',' << p.tau << ',' << p.bytes << ','
        << std::setprecision(6) << p.bpp << ',' << p.psnr << ',' << p.encode_seconds
        << ',' << p.decode_seconds << ',' << p.blocks_decoded << ',' << p.cache_bytes
        << ',' << err << '\n';
  }
}

std::string points_to_json(const std::vector<RdPoint>& points) {
  nlohmann::json arr = nlohmann::json::array();
  for (const RdPoint& p : points) {
    nlohmann::json j = {
        {"codec", codec_variant_name(p.codec)},
        {"tree_height", p.tree_height},
        {"block_size", p.block_size},
        {"window", p.window},
        {"tau", p.tau},
        {"bytes", p.bytes},
        {"bpp", p.bpp},
        {"psnr", std::isfinite(p.psnr) ? nlohmann::json(p.psnr) : nlohmann::json("inf")},
        {"encode_seconds", p.encode_seconds},
        {"decode_seconds", p.decode_seconds},
        {"blocks_decoded", p.blocks_decoded},
        {"cache_bytes", p.cache_bytes},
    };
    if (!p.error.empty()) j["error"] = p.error;
    arr.push_back(std::move(j));
  }
  return nlohmann::json({{"points", arr}}).dump(2);
}

const MatchedPoint* Comparison::find(CodecVariant codec) const {
  for (const MatchedPoint& m : results) {
    if (m.codec == codec) return &m;
  }
  return nullptr;
}

std::optional<double> Comparison::ratio(CodecVariant codec) const {
  const MatchedPoint* a = find(codec);
  const MatchedPoint* h = find(CodecVariant::kHmlfc);
  if (!a || !h || !a->converged || !h->converged || h->point.bpp <= 0) return std::nullopt;
  return a->point.bpp / h->point.bpp;
}

namespace {

constexpr uint32_t kMaxTau = 1u << 22;
constexpr int kMaxProbes = 40;

MatchedPoint tune(const RdModel& model, double target, double tol, double ref_scale) {
  std::map<uint32_t, RdPoint> seen;
  auto probe = [&](uint32_t tau) -> const RdPoint& {
    auto it = seen.find(tau);
    if (it == seen.end()) it = seen.emplace(tau, model.measure(tau, ref_scale)).first;
    return it->second;
  };
  // PSNR falls as tau grows: lo stays above the target, hi below it.
  uint32_t lo = 0, hi = 1;
  if (probe(0).psnr < target) {
    hi = 0;
  } else {
    while (hi < kMaxTau && probe(hi).psnr >= target) {
      lo = hi;
      hi *= 2;
    }
    while (hi - lo > 1 && seen.size() < kMaxProbes) {
      const uint32_t mid = lo + (hi - lo) / 2;
      const RdPoint& p = probe(mid);
      if (std::abs(p.psnr - target) < 0.05) break;
      if (p.psnr >= target) lo = mid;
      else hi = mid;
    }
  }
  MatchedPoint best{model.codec(), {}, false};
  double best_gap = std::numeric_limits<double>::infinity();
  for (const auto& [tau, p] : seen) {
    const double gap = std::isfinite(p.psnr) ? std::abs(p.psnr - target)
                                             : std::numeric_limits<double>::infinity();
    if (gap < best_gap || (best_gap == std::numeric_limits<double>::infinity() &&
                           best.point.bytes == 0)) {
      best_gap = gap;
      best.point = p;
    }
  }
  best.converged = best_gap <= tol;
  return best;
}

}  // namespace

Comparison compare_codecs(const LightField& field, double target_psnr,
                          const EncodeParams& params,
                          const std::vector<CodecVariant>& codecs, double tolerance_db,
                          double tau_ref_scale) {
  Comparison out;
  out.target_psnr = target_psnr;
  out.tolerance_db = tolerance_db;
  for (CodecVariant codec : codecs) {
    const RdModel model(field, codec, params);
    out.results.push_back(tune(model, target_psnr, tolerance_db, tau_ref_scale));
  }
  return out;
}

}  // namespace hmlfc
