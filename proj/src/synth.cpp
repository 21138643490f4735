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

#include "gdl/synth.hpp"

#include <cmath>
#include <numbers>

#include "gdl/augment.hpp"
#include "gdl/imgio.hpp"

namespace fs = std::filesystem;

namespace gdl {

namespace {

// low-frequency random field: a handful of long-wavelength cosine modes plus
// a linear ramp. Coarse structure only, so the real class carries no energy
// near the artifact frequency.
ImageF smooth_field(int size, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  struct Mode {
    double fx, fy, phi, amp;
  };
  std::vector<Mode> modes;
  const int n_modes = 6;
  for (int m = 0; m < n_modes; ++m) {
    // wavelengths between size/2 and size/8
    const double wavelength = size / (2.0 + 6.0 * u01(rng));
    const double angle = phase(rng);
    modes.push_back({std::cos(angle) / wavelength, std::sin(angle) / wavelength,
                     phase(rng), 12.0 + 26.0 * u01(rng)});
  }
  const double gx = -0.12 + 0.24 * u01(rng);
  const double gy = -0.12 + 0.24 * u01(rng);

  ImageF img(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      double v = 128.0 + gx * (x - size / 2.0) + gy * (y - size / 2.0);
      for (const Mode& m : modes)
        v += m.amp * std::cos(2.0 * std::numbers::pi * (m.fx * x + m.fy * y) +
                              m.phi);
      img.at(y, x, 0) = v;
      img.at(y, x, 1) = v;
      img.at(y, x, 2) = v;
    }
  }
  return img;
}

void apply_palette(ImageF& img, const std::string& category, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  // category tint plus a mild random white balance
  double tint[3];
  if (category.size() % 2 == 0) {
    tint[0] = 1.05;
    tint[1] = 0.98;
    tint[2] = 0.88;
  } else {
    tint[0] = 0.90;
    tint[1] = 1.04;
    tint[2] = 0.96;
  }
  for (int c = 0; c < 3; ++c) tint[c] *= 0.92 + 0.16 * u01(rng);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) *= tint[c];
}

void add_plaid(ImageF& img, const SynthSpec& spec, Rng& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const double amp = spec.artifact_amp_min +
                     (spec.artifact_amp_max - spec.artifact_amp_min) * u01(rng);
  const double f1 = 1.0 / spec.artifact_period;
  const double f2 = 2.0 / spec.artifact_period;
  const double px1 = phase(rng), py1 = phase(rng);
  const double px2 = phase(rng), py2 = phase(rng);
  const double two_pi = 2.0 * std::numbers::pi;
  for (int y = 0; y < img.h; ++y) {
    for (int x = 0; x < img.w; ++x) {
      const double a = amp * (std::sin(two_pi * f1 * x + px1) +
                              std::sin(two_pi * f1 * y + py1)) +
                       0.5 * amp * (std::sin(two_pi * f2 * x + px2) +
                                    std::sin(two_pi * f2 * y + py2));
      for (int c = 0; c < 3; ++c) img.at(y, x, c) += a;
    }
  }
}

}  // namespace

Image synth_base_image(int size, const std::string& category, Rng& rng) {
  ImageF img = smooth_field(size, rng);
  apply_palette(img, category, rng);
  return to_u8(img);
}

Image synth_fake_image(int size, const std::string& category,
                       const SynthSpec& spec, Rng& rng) {
  ImageF img = smooth_field(size, rng);
  apply_palette(img, category, rng);
  add_plaid(img, spec, rng);
  return to_u8(img);
}

namespace {

void write_class(const fs::path& dir, const std::string& category,
                 const SynthSpec& spec, int count, bool fake, uint64_t seed,
                 uint64_t salt) {
  fs::create_directories(dir);
  for (int i = 0; i < count; ++i) {
    Rng rng = make_rng(seed, Stream::synth,
                       hash_mix(std::hash<std::string>{}(category)) ^ salt,
                       uint64_t(i));
    const Image img = fake ? synth_fake_image(spec.size, category, spec, rng)
                           : synth_base_image(spec.size, category, rng);
    char name[32];
    std::snprintf(name, sizeof(name), "%05d.png", i);
    write_png(dir / name, img);
  }
}

}  // namespace

void generate_training_corpus(const fs::path& root, const SynthSpec& spec,
                              uint64_t seed) {
  for (const std::string& category : spec.categories) {
    write_class(root / category / "0_real", category, spec,
                spec.per_class_real, false, seed, 0x5ea1);
    write_class(root / category / "1_fake", category, spec,
                spec.per_class_fake, true, seed, 0xfa4e);
  }
}

void generate_test_set(const fs::path& set_dir, const SynthSpec& spec,
                       int n_real, int n_fake, uint64_t seed) {
  write_class(set_dir / "0_real", "held_out", spec, n_real, false, seed,
              0x7e57);
  write_class(set_dir / "1_fake", "held_out", spec, n_fake, true, seed,
              0x7e58);
}

}  // namespace gdl
