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

#include "hmlfc/decoder.h"

#include <random>

#include <gtest/gtest.h>

#include "hmlfc/container.h"
#include "hmlfc/error.h"
#include "hmlfc/image_io.h"
#include "test_support.h"

namespace hmlfc {
namespace {

// Rebuilds the decoder's output from the encoder-side tree: thresholded SRVs,
// open-loop recompensation against the thresholded reference, then the
// top-down sum.
LightField ModelDecode(const LightField& field, const EncodeParams& p) {
  const PreparedField prep = prepare(field, p);
  std::array<PlaneGrid, 3> out;
  for (int c = 0; c < 3; ++c) {
    const PreparedChannel& ch = prep.channels[c];
    const int bs = p.block_size;
    const int nbx = blocks_across(ch.width, bs), nby = blocks_across(ch.height, bs);
    PlaneGrid current = ch.tree.top_rkvs();
    for (int l = p.tree_height - 1; l >= 0; --l) {
      const Level& level = ch.tree.levels[l];
      PlaneGrid next(level.input_grid_s, level.input_grid_t);
      for (std::size_t k = 0; k < level.clusters.size(); ++k) {
        const McCluster& mc = ch.levels[l].clusters[k];
        const McSrv& ref_srv = mc.members[mc.reference];
        const Plane ref = apply_significance(
            ref_srv.plane, threshold_blocks(ref_srv.plane, p.tau_ref, bs).map, bs);
        for (std::size_t i = 0; i < mc.members.size(); ++i) {
          const McSrv& m = mc.members[i];
          Plane srv = ref;
          if (!m.is_reference) {
            const Plane& original = level.clusters[k].members[i].plane;
            const ThresholdResult thr = threshold_blocks(m.plane, p.tau_res, bs);
            srv = Plane(ch.width, ch.height, m.plane.range());
            for (int by = 0; by < nby; ++by) {
              for (int bx = 0; bx < nbx; ++bx) {
                const std::size_t b = std::size_t(by) * nbx + bx;
                const BlockRect r = block_rect(ch.width, ch.height, bs, bx, by);
                const bool orig_sig = block_energy(original, r) >= int64_t{p.tau_res};
                bool sig = thr.map.test(b);
                bool record = true;
                if (p.mv_policy == MvPolicy::kDropInsignificant) record = sig;
                if (p.mv_policy == MvPolicy::kSignificantSrv) {
                  record = orig_sig;
                  sig = sig && orig_sig;
                }
                std::vector<int32_t> res(std::size_t(r.w) * r.h, 0);
                if (sig) {
                  for (int y = 0; y < r.h; ++y) {
                    for (int x = 0; x < r.w; ++x) {
                      res[std::size_t(y) * r.w + x] = m.plane.at(r.x + x, r.y + y);
                    }
                  }
                }
                if (record) res = recompensate_block(res, r, ref, m.records[b]);
                for (int y = 0; y < r.h; ++y) {
                  for (int x = 0; x < r.w; ++x) {
                    srv.at(r.x + x, r.y + y) = res[std::size_t(y) * r.w + x];
                  }
                }
              }
            }
          }
          Plane leaf = current.at(m.s / 2, m.t / 2);
          for (std::size_t j = 0; j < leaf.size(); ++j) {
            leaf.samples()[j] += srv.samples()[j];
          }
          next.at(m.s, m.t) = std::move(leaf);
        }
      }
      current = std::move(next);
    }
    out[c] = std::move(current);
  }
  return inverse_color(out, p.color, field.width(), field.height());
}

EncodeParams LossyParams(MvPolicy policy, ChromaSubsample chroma) {
  EncodeParams p;
  p.tree_height = 2;
  p.block_size = 4;
  p.window = 4;
  p.tau_ref = 60;
  p.tau_res = 90;
  p.mv_policy = policy;
  p.color.chroma_subsample = chroma;
  p.threads = 1;
  return p;
}

class ModelEquivalenceTest
    : public ::testing::TestWithParam<std::tuple<MvPolicy, ChromaSubsample>> {};

TEST_P(ModelEquivalenceTest, DecodeAllMatchesEncoderSideModel) {
  const auto [policy, chroma] = GetParam();
  const LightField field = testing::small_field(7);
  const EncodeParams p = LossyParams(policy, chroma);
  const Decoder d = Decoder::open(encode(field, p));
  const LightField decoded = d.decode_all(1);
  EXPECT_EQ(decoded, ModelDecode(field, p));
  EXPECT_LT(psnr(decoded, field), 100.0);
}

INSTANTIATE_TEST_SUITE_P(
    Policies, ModelEquivalenceTest,
    ::testing::Combine(::testing::Values(MvPolicy::kAll, MvPolicy::kDropInsignificant,
                                         MvPolicy::kSignificantSrv),
                       ::testing::Values(ChromaSubsample::kNone, ChromaSubsample::kHalf)));

class DecoderTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    field_ = new LightField(testing::small_field(8));
    EncodeParams p = LossyParams(MvPolicy::kSignificantSrv, ChromaSubsample::kNone);
    bytes_ = new std::vector<uint8_t>(encode(*field_, p));
  }
  static void TearDownTestSuite() {
    delete field_;
    delete bytes_;
  }
  static LightField* field_;
  static std::vector<uint8_t>* bytes_;
};

LightField* DecoderTest::field_ = nullptr;
std::vector<uint8_t>* DecoderTest::bytes_ = nullptr;

TEST_F(DecoderTest, EveryChannelBlockMatchesFullViewDecode) {
  const Decoder d = Decoder::open(*bytes_);
  for (int t = 0; t < d.grid_t(); ++t) {
    for (int s = 0; s < d.grid_s(); ++s) {
      const std::array<Plane, 3> view = d.decode_view_channels(s, t);
      for (int c = 0; c < 3; ++c) {
        for (int by = 0; by < d.blocks_y(); ++by) {
          for (int bx = 0; bx < d.blocks_x(); ++bx) {
            const BlockRect r = block_rect(d.width(), d.height(), d.block_size(), bx, by);
            std::vector<int32_t> block(std::size_t(r.w) * r.h);
            d.decode_block(c, s, t, bx, by, block);
            for (int y = 0; y < r.h; ++y) {
              for (int x = 0; x < r.w; ++x) {
                ASSERT_EQ(block[std::size_t(y) * r.w + x], view[c].at(r.x + x, r.y + y));
              }
            }
          }
        }
      }
    }
  }
}

TEST_F(DecoderTest, RgbBlocksMatchDecodeViewWithSubsampledChroma) {
  const LightField field = testing::small_field(9);
  for (ChromaSubsample chroma : {ChromaSubsample::kNone, ChromaSubsample::kHalf}) {
    const Decoder d =
        Decoder::open(encode(field, LossyParams(MvPolicy::kSignificantSrv, chroma)));
    const LightField all = d.decode_all(1);
    std::mt19937 rng(2);
    for (int trial = 0; trial < 200; ++trial) {
      const int s = int(rng() % 4), t = int(rng() % 4);
      const int bx = int(rng() % d.blocks_x()), by = int(rng() % d.blocks_y());
      const BlockRect r = block_rect(d.width(), d.height(), d.block_size(), bx, by);
      std::vector<uint8_t> rgb(std::size_t(r.w) * r.h * 3);
      d.decode_rgb_block(s, t, bx, by, rgb);
      const RgbImage view = view_image(all, s, t);
      for (int y = 0; y < r.h; ++y) {
        for (int x = 0; x < r.w; ++x) {
          for (int c = 0; c < 3; ++c) {
            ASSERT_EQ(rgb[(std::size_t(y) * r.w + x) * 3 + c],
                      view.pixels[(std::size_t(r.y + y) * d.width() + r.x + x) * 3 + c]);
          }
        }
      }
    }
    EXPECT_EQ(view_image(all, 1, 2), d.decode_view(1, 2));
  }
}

TEST_F(DecoderTest, SingleBlockTouchesOnePlanePerLevel) {
  const Decoder d = Decoder::open(*bytes_);
  d.reset_stats();
  std::vector<int32_t> block(16);
  d.decode_block(0, 3, 2, 1, 1, block);
  const DecoderStats st = d.stats();
  EXPECT_EQ(st.blocks_decoded, 1u);
  EXPECT_LE(st.payload_reads, 2u);  // tree height 2
  EXPECT_LE(st.payload_bytes_read, 2u * (16 * 2 + 3 * 8));
  EXPECT_LT(st.payload_bytes_read, bytes_->size() / 50);
  d.reset_stats();
  EXPECT_EQ(d.stats().blocks_decoded, 0u);
  EXPECT_EQ(d.stats().payload_reads, 0u);
}

TEST_F(DecoderTest, ReferenceCacheHoldsSparseReferencesOnly) {
  const Decoder d = Decoder::open(*bytes_);
  uint64_t total = 0;
  int cached = 0;
  for (int c = 0; c < 3; ++c) {
    const ParsedChannel& ch = d.stream().channels[c];
    const auto& cache = d.reference_cache(c);
    ASSERT_EQ(cache.size(), ch.planes.size());
    for (std::size_t i = 0; i < cache.size(); ++i) {
      total += cache[i].memory_bytes();
      if (ch.planes[i].entry.role == PlaneRole::kPredictive) {
        EXPECT_EQ(cache[i].width(), 0);
      } else if (cache[i].width() > 0) {
        ++cached;
      }
    }
  }
  EXPECT_GT(cached, 0);
  EXPECT_EQ(d.stats().cache_bytes, total);
  EXPECT_GT(d.stats().rkv_bytes, 0u);
}

TEST_F(DecoderTest, ThreadedDecodeAllIsIdentical) {
  const Decoder d = Decoder::open(*bytes_);
  EXPECT_EQ(d.decode_all(1), d.decode_all(4));
}

TEST_F(DecoderTest, CopiesShareState) {
  const Decoder a = Decoder::open(*bytes_);
  const Decoder b = a;
  b.reset_stats();
  std::vector<int32_t> block(16);
  b.decode_block(1, 0, 0, 0, 0, block);
  EXPECT_EQ(a.stats().blocks_decoded, 1u);
}

TEST_F(DecoderTest, RejectsBadArguments) {
  const Decoder d = Decoder::open(*bytes_);
  std::vector<int32_t> block(16);
  EXPECT_THROW(d.decode_block(3, 0, 0, 0, 0, block), Error);
  EXPECT_THROW(d.decode_block(0, 4, 0, 0, 0, block), Error);
  EXPECT_THROW(d.decode_block(0, 0, 0, d.blocks_x(), 0, block), Error);
  std::vector<int32_t> wrong(15);
  EXPECT_THROW(d.decode_block(0, 0, 0, 0, 0, wrong), Error);
  try {
    Decoder::open(std::filesystem::path("/nonexistent/stream.hmlfc"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(SparseImageTest, MatchesDensePlane) {
  Plane p(7, 3, kChromaRange);
  p.at(0, 0) = 5;
  p.at(6, 0) = -2;
  p.at(3, 2) = 9;
  const SparseImage sp(p);
  EXPECT_EQ(sp.nonzero_count(), 3u);
  for (int y = -1; y <= 3; ++y) {
    for (int x = -1; x <= 7; ++x) {
      const int32_t want = x >= 0 && y >= 0 && x < 7 && y < 3 ? p.at(x, y) : 0;
      EXPECT_EQ(sp.at(x, y), want);
    }
  }
  int32_t row[4] = {1, 1, 1, 1};
  sp.accumulate_row(4, 0, 4, -1, row);  // covers x = 4..7
  EXPECT_EQ(row[2], 1 + 2);
  EXPECT_EQ(row[3], 1);
  int32_t left[3] = {0, 0, 0};
  sp.accumulate_row(-2, 0, 3, 1, left);  // covers x = -2..0
  EXPECT_EQ(left[2], 5);
  sp.accumulate_row(0, 5, 3, 1, left);  // rows outside are zero
  EXPECT_EQ(left[2], 5);
  EXPECT_EQ(sp.memory_bytes(), 4 * sizeof(uint32_t) + 3 * 2 * sizeof(int32_t));
}

}  // namespace
}  // namespace hmlfc
