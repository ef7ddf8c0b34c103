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

#ifndef HMLFC_TESTS_TEST_SUPPORT_H_
#define HMLFC_TESTS_TEST_SUPPORT_H_

#include <cstdint>
#include <random>

#include "hmlfc/harness.h"
#include "hmlfc/lfcore.h"

namespace hmlfc::testing {

// A quads scene small enough for unit tests (4x4 views of 32x32).
inline SyntheticScene small_scene(uint64_t seed = 1) {
  SyntheticScene scene;
  scene.grid_s = 4;
  scene.grid_t = 4;
  scene.width = 32;
  scene.height = 32;
  scene.quad_count = 3;
  scene.seed = seed;
  return scene;
}

inline LightField small_field(uint64_t seed = 1) {
  return generate_synthetic(small_scene(seed));
}

// Uniform noise in every channel; the worst case for the codec.
inline LightField noise_field(int grid_s, int grid_t, int width, int height,
                              uint32_t seed) {
  LightField field(grid_s, grid_t, width, height);
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> dist(0, 255);
  for (int c = 0; c < 3; ++c) {
    for (Plane& p : field.channel(c).planes) {
      for (int32_t& v : p.samples()) v = dist(rng);
    }
  }
  return field;
}

}  // namespace hmlfc::testing

#endif  // HMLFC_TESTS_TEST_SUPPORT_H_
