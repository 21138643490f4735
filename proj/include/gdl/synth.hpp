/*
 * Copyright 2026 the gan-detect-lab authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GDL_SYNTH_HPP_
#define GDL_SYNTH_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "gdl/image.hpp"
#include "gdl/rng.hpp"

namespace gdl {

/// Desk-scale synthetic corpus: smooth random "photos" as the real class and
/// the same distribution plus a periodic plaid artifact as the generated
/// class. The artifact is the only systematic difference between the classes.
struct SynthSpec {
  std::vector<std::string> categories = {"dunes", "meadows"};
  int per_class_real = 500;
  int per_class_fake = 500;
  int size = 256;

  // plaid artifact: base period in pixels, amplitude range in levels;
  // a half-amplitude harmonic at half the period is added on top
  double artifact_period = 12.0;
  double artifact_amp_min = 10.0;
  double artifact_amp_max = 16.0;
};

Image synth_base_image(int size, const std::string& category, Rng& rng);
Image synth_fake_image(int size, const std::string& category,
                       const SynthSpec& spec, Rng& rng);

/// Writes <root>/<category>/{0_real,1_fake}/*.png.
void generate_training_corpus(const std::filesystem::path& root,
                              const SynthSpec& spec, uint64_t seed);

/// Writes one held-out test set <set_dir>/{0_real,1_fake}/*.png drawn from
/// the same distribution (use a disjoint seed).
void generate_test_set(const std::filesystem::path& set_dir,
                       const SynthSpec& spec, int n_real, int n_fake,
                       uint64_t seed);

}  // namespace gdl

#endif  // GDL_SYNTH_HPP_
