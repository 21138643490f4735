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

// Release acceptance suite. Each criterion runs standalone and prints one
// pass/fail line; the process exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <vector>

#include "gdl/augment.hpp"
#include "gdl/errors.hpp"
#include "gdl/evalmetrics.hpp"
#include "gdl/experiment.hpp"
#include "gdl/model.hpp"
#include "gdl/nn.hpp"
#include "gdl/spectral.hpp"
#include "gdl/train.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace gdl;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  const char* id;
  const char* description;
  std::function<void()> run;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw std::runtime_error(what);
}

fs::path repo_root() {
  fs::path p = fs::current_path();
  while (!fs::exists(p / "configs") && p.has_parent_path() &&
         p != p.parent_path())
    p = p.parent_path();
  require(fs::exists(p / "configs"), "cannot locate the repository root");
  return p;
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(is),
                     std::istreambuf_iterator<char>());
}

// ---------------------------------------------------------------- criteria

void ap_oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  const double grid[5] = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::mt19937_64 rng(2027);
  int64_t cases = 0;
  for (int n = 2; n <= 8; ++n) {
    std::vector<int> idx(size_t(n), 0);
    while (true) {
      for (int labeling = 1; labeling < (1 << n) - 1; ++labeling) {
        std::vector<double> scores(static_cast<size_t>(n));
        std::vector<int> labels(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
          scores[size_t(i)] = grid[idx[size_t(i)]];
          labels[size_t(i)] = (labeling >> i) & 1;
        }
        // randomize presentation order; the metric must not care
        for (int i = n - 1; i > 0; --i) {
          const int j = int(rng() % uint64_t(i + 1));
          std::swap(scores[size_t(i)], scores[size_t(j)]);
          std::swap(labels[size_t(i)], labels[size_t(j)]);
        }
        const double got = average_precision(scores, labels);
        const double want = oracles::average_precision(scores, labels);
        require(std::abs(got - want) <= 1e-12,
                "oracle mismatch at n=" + std::to_string(n));
        ++cases;
      }
      int pos = n - 1;
      while (pos >= 0 && idx[size_t(pos)] == 4) --pos;
      if (pos < 0) break;
      const int v = idx[size_t(pos)] + 1;
      for (int i = pos; i < n; ++i) idx[size_t(i)] = v;
    }
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  require(cases > 150000, "enumeration unexpectedly small");
  require(elapsed < 30.0, "exceeded the 30 s budget");
}

void ap_rank_invariance() {
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> score(-4.0, 4.0);
  std::uniform_real_distribution<double> gain(0.1, 5.0);
  std::uniform_real_distribution<double> offset(-10.0, 10.0);
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = 20 + int(rng() % 60);
    std::vector<double> scores(static_cast<size_t>(n));
    std::vector<int> labels(static_cast<size_t>(n));
    int positives = 0;
    for (int i = 0; i < n; ++i) {
      scores[size_t(i)] = score(rng);
      labels[size_t(i)] = int(rng() % 2);
      positives += labels[size_t(i)];
    }
    if (positives == 0) labels[0] = 1;
    if (positives == n) labels[0] = 0;
    const double base = average_precision(scores, labels);

    std::vector<double> affine(scores), sigmoid(scores);
    const double a = gain(rng), b = offset(rng);
    for (auto& s : affine) s = a * s + b;
    for (auto& s : sigmoid) s = 1.0 / (1.0 + std::exp(-s));
    require(std::abs(average_precision(affine, labels) - base) <= 1e-12,
            "affine map changed AP");
    require(std::abs(average_precision(sigmoid, labels) - base) <= 1e-12,
            "sigmoid map changed AP");
  }
}

void map_reference_row() {
  const std::map<std::string, double> row = {
      {"ProGAN", 100.0}, {"StyleGAN", 96.8}, {"BigGAN", 73.5},
      {"CycleGAN", 81.9}, {"StarGAN", 100.0}, {"GauGAN", 68.2},
      {"CRN", 95.1},      {"IMLE", 88.8},     {"SITD", 97.1},
      {"SAN", 87.2},      {"DeepFake", 98.4}};
  const double map_value = mean_ap(row);
  require(std::abs(map_value - 89.7) <= 0.05,
          "mAP " + std::to_string(map_value) + " not within 0.05 of 89.7");
}

void dct_correctness() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random_block = [&](int h, int w) {
    Eigen::MatrixXd m(h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) m(y, x) = u(rng);
    return m;
  };

  for (int h = 1; h <= 16; ++h) {
    for (int w = 1; w <= 16; ++w) {
      const Eigen::MatrixXd block = random_block(h, w);
      const double err =
          (dct2d(block) - oracles::dct2d_naive(block)).cwiseAbs().maxCoeff();
      require(err <= 1e-9, "naive-definition mismatch at " +
                               std::to_string(h) + "x" + std::to_string(w));
    }
  }

  const Eigen::MatrixXd big = random_block(224, 224);
  const Eigen::MatrixXd spec = dct2d(big);
  require(std::abs(spec.norm() - big.norm()) / big.norm() <= 1e-6,
          "Parseval violated at 224x224");
  require((idct2d(spec) - big).cwiseAbs().maxCoeff() <= 1e-6,
          "round trip above 1e-6");

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  require(elapsed < 60.0, "exceeded the 60 s budget");
}

void augmentation_statistics() {
  const int n = 10000;
  Rng rng(90210);
  auto band = [n](double p) { return 3.0 * std::sqrt(p * (1.0 - p) / n); };

  for (double p : {0.1, 0.5}) {
    for (PolicyKind kind : {PolicyKind::blur, PolicyKind::blur_jpeg_joint,
                            PolicyKind::blur_jpeg_independent}) {
      AugmentationPolicy policy{kind, p, {0.0, 3.0}, {30, 100}};
      int fired = 0;
      for (int i = 0; i < n; ++i) fired += draw_policy(policy, rng).apply_blur;
      const double rate = fired / double(n);
      require(std::abs(rate - p) <= band(p),
              std::string("blur rate off for ") + to_string(kind) + " at p=" +
                  std::to_string(p));
    }
  }

  AugmentationPolicy joint{PolicyKind::blur_jpeg_joint, 0.5, {0.0, 3.0},
                           {30, 100}};
  for (int i = 0; i < n; ++i) {
    const auto draw = draw_policy(joint, rng);
    require(draw.apply_blur == draw.apply_jpeg,
            "joint mode produced a flag disagreement");
  }

  AugmentationPolicy jpeg{PolicyKind::jpeg, 0.5, {0.0, 3.0}, {30, 100}};
  int at95 = 0;
  for (int i = 0; i < n; ++i) {
    const int q = draw_policy(jpeg, rng).effective_quality();
    require(q >= 30 && q <= 95, "effective quality outside [30,95]");
    at95 += q == 95;
  }
  const double p95 = 6.0 / 71.0;
  require(std::abs(at95 / double(n) - p95) <= band(p95),
          "quality mass at 95 outside the binomial band");
}

void blur_correctness() {
  const int n = 33;
  for (double sigma : {0.5, 1.0, 2.5}) {
    ImageF impulse(n, n);
    for (int c = 0; c < 3; ++c) impulse.at(n / 2, n / 2, c) = 1.0;
    const ImageF got = blur(impulse, sigma);
    const auto kernel = gaussian_kernel(sigma);
    const int r = int(kernel.size()) / 2;
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx)
        require(std::abs(got.at(n / 2 + dy, n / 2 + dx, 0) -
                         kernel[size_t(dy + r)] * kernel[size_t(dx + r)]) <=
                    1e-9,
                "impulse response differs from the kernel outer product");
  }

  // 8-bit path within one level of the direct 2-D oracle after rounding
  const Image noisy = testutil::noise_image(48, 40, 17);
  for (double sigma : {0.7, 1.9}) {
    const Image got = blur(noisy, sigma);
    const ImageF want =
        oracles::conv2d_reflect_naive(to_float(noisy), gaussian_kernel(sigma));
    for (size_t i = 0; i < got.px.size(); ++i) {
      const double expected = std::clamp(std::round(want.px[i]), 0.0, 255.0);
      require(std::abs(double(got.px[i]) - expected) <= 1.0,
              "8-bit blur off by more than one level");
    }
  }

  const Image same = blur(noisy, 0.0);
  require(same.px == noisy.px, "sigma=0 is not bit-identical");

  const Image flat = testutil::solid_image(32, 32, 7, 99, 201);
  for (double sigma : {0.5, 3.0})
    require(blur(flat, sigma).px == flat.px, "constant image not fixed");
}

void scheduler_conformance() {
  TrainConfig cfg;
  cfg.lr_init = 1e-4;
  cfg.seed = 0;

  TrainState state;
  state.lr = cfg.lr_init;
  std::vector<double> trace;
  double acc = 0.5;
  for (int block = 0; block < 4; ++block) {
    for (int i = 0; i < 5; ++i) trace.push_back(acc);
    acc += 0.05;
    trace.push_back(acc);
  }

  std::vector<double> lr_sequence{state.lr};
  double best = 0.0;
  int best_epoch = 0, epoch = 0;
  for (double v : trace) {
    if (state.terminate) break;
    state.epoch = ++epoch;
    if (v > best) {
      best = v;
      best_epoch = epoch;
    }
    state = plateau_step(std::move(state), v, cfg);
    if (lr_sequence.back() != state.lr) lr_sequence.push_back(state.lr);
  }

  const std::vector<double> want{1e-4, 1e-5, 1e-6, 1e-7};
  require(lr_sequence.size() == want.size(), "wrong number of rate drops");
  for (size_t i = 0; i < want.size(); ++i)
    require(std::abs(lr_sequence[i] - want[i]) <= 1e-9 * want[i],
            "rate ladder diverges at step " + std::to_string(i));
  require(state.terminate, "no termination on reaching 1e-7");
  require(state.best_epoch == best_epoch,
          "best-checkpoint selection is not the max-accuracy epoch");
  require(std::abs(state.best_val_acc - best) <= 1e-12,
          "best accuracy mismatch");
}

// shared desk-scale workspace so the corpus generates once
fs::path desk_workspace() {
  static const fs::path ws =
      fs::temp_directory_path() / "gdl_acceptance_workspace";
  fs::create_directories(ws);
  return ws;
}

void desk_scale_smoke() {
  const fs::path root = repo_root();
  for (const char* config_name :
       {"desk_smoke_none.json", "desk_smoke_blur_jpeg.json"}) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentConfig cfg =
        load_experiment_config(root / "configs" / config_name);
    cfg.output_dir = desk_workspace() / "smoke_runs";
    apply_desk_scale(cfg, desk_workspace());
    const RunArtifacts art = run_experiment(cfg);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    const double ap = art.report.per_set_ap.at(0).second / 100.0;
    std::printf("        %-28s held-out AP %.4f in %.0f s\n", cfg.name.c_str(),
                ap, elapsed);
    require(ap >= 0.95, cfg.name + ": AP below 0.95");
    require(elapsed < 600.0, cfg.name + ": exceeded the 10-minute budget");
  }
}

void gradient_check_head() {
  // frozen miniature: the 1-logit head over an 8x8 input patch
  nn::Linear head(64, 1);
  Rng rng(777);
  head.init_params(rng);
  Tensor x({1, 64});
  std::uniform_real_distribution<float> u(0.5f, 1.5f);
  for (int64_t i = 0; i < x.numel(); ++i) x[i] = u(rng);
  const std::vector<float> target{1.0f};

  auto loss = [&]() {
    Tensor out = head.forward(x, true, nullptr);
    return nn::bce_with_logits(out, target, nullptr);
  };

  Tensor logits = head.forward(x, true, nullptr);
  Tensor grad;
  nn::bce_with_logits(logits, target, &grad);
  std::vector<nn::ParamRef> params;
  head.visit("head.", &params, nullptr);
  for (auto& p : params) std::fill_n(p.grad->data(), p.grad->numel(), 0.0f);
  head.backward(grad);

  const double h = 1e-2;
  for (auto& p : params) {
    for (int64_t i = 0; i < p.value->numel(); ++i) {
      float& w = (*p.value)[i];
      const float keep = w;
      w = keep + float(h);
      const double up = loss();
      w = keep - float(h);
      const double down = loss();
      w = keep;
      const double fd = (up - down) / (2.0 * h);
      const double analytic = (*p.grad)[i];
      const double rel =
          std::abs(analytic - fd) / std::max(std::abs(analytic), std::abs(fd));
      require(rel <= 1e-4, p.name + "[" + std::to_string(i) +
                               "]: relative error " + std::to_string(rel));
    }
  }
}

void end_to_end_determinism() {
  const fs::path root = repo_root();
  ExperimentConfig cfg =
      load_experiment_config(root / "configs" / "desk_smoke_none.json");
  cfg.name = "determinism_probe";
  cfg.output_dir = desk_workspace() / "determinism_runs";
  DeskScaleOptions opts;
  opts.max_epochs = 2;
  apply_desk_scale(cfg, desk_workspace(), opts);

  const RunArtifacts first = run_experiment(cfg);
  const std::string history_first = read_file(first.history_csv);
  const RunArtifacts second = run_experiment(cfg);
  const std::string history_second = read_file(second.history_csv);

  require(!history_first.empty(), "empty history");
  require(history_first == history_second, "history CSVs differ between runs");
  require(first.manifest_hash == second.manifest_hash,
          "manifest hashes differ between runs");
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"A1", "AP matches the brute-force PR oracle on all small grids",
       ap_oracle_equivalence},
      {"A2", "AP invariant under affine and sigmoid score maps",
       ap_rank_invariance},
      {"A3", "mAP of the published no-augmentation row is 89.7 +/- 0.05",
       map_reference_row},
      {"A4", "DCT-II equals the naive definition; Parseval; inverse round trip",
       dct_correctness},
      {"A5", "augmentation draw statistics inside their binomial bands",
       augmentation_statistics},
      {"A6", "blur impulse/identity/constant behavior is exact",
       blur_correctness},
      {"A7", "plateau scheduler walks 1e-4..1e-7 and keeps the best epoch",
       scheduler_conformance},
      {"A8", "desk-scale smoke training reaches held-out AP >= 0.95",
       desk_scale_smoke},
      {"A9", "analytic head gradients match finite differences to 1e-4",
       gradient_check_head},
      {"A10", "re-running a desk-scale config reproduces history and manifest",
       end_to_end_determinism},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      criterion.run();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (error.empty()) {
      std::printf("[PASS] %-4s %s (%.1f s)\n", criterion.id,
                  criterion.description, elapsed);
    } else {
      ++failures;
      std::printf("[FAIL] %-4s %s (%.1f s)\n       %s\n", criterion.id,
                  criterion.description, elapsed, error.c_str());
    }
    std::fflush(stdout);
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
