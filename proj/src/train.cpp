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

#include "gdl/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <unordered_map>

#include "gdl/errors.hpp"

namespace gdl {

namespace {

// decoded-image cache; the desk-scale corpus fits comfortably, full-scale
// corpora fall back to per-epoch decoding once the budget is exhausted
class ImageCache {
 public:
  explicit ImageCache(size_t budget_bytes = size_t{3} << 30)
      : budget_(budget_bytes) {}

  Image get(const ImageRecord& rec) {
    const std::string key = rec.path.string();
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    Image img = load_image(rec);
    if (used_ + img.px.size() <= budget_) {
      used_ += img.px.size();
      cache_.emplace(key, img);
    }
    return img;
  }

 private:
  size_t budget_;
  size_t used_ = 0;
  std::unordered_map<std::string, Image> cache_;
};

Tensor to_model_input(const Image& full, const AugmentationPolicy& policy,
                      InputDomain domain, const MinMaxScaler* scaler, Rng& rng,
                      AugmentationDraw* draw) {
  if (domain == InputDomain::spatial)
    return apply_training_pipeline(full, policy, rng, draw);
  return scaler->apply(
      dct2d_channels(apply_training_pipeline_unit(full, policy, rng, draw)));
}

Tensor eval_input(const Image& full, InputDomain domain,
                  const MinMaxScaler* scaler) {
  const Image window = center_crop(full, kCropSize);
  if (domain == InputDomain::spatial) return standardize(window);
  return scaler->apply(dct2d_channels(to_unit_tensor(window)));
}

Tensor stack(const std::vector<Tensor>& items) {
  const auto& s = items.front().shape();
  Tensor batch({static_cast<int64_t>(items.size()), s[0], s[1], s[2]});
  const int64_t stride = items.front().numel();
  for (size_t i = 0; i < items.size(); ++i)
    std::copy_n(items[i].data(), stride, batch.data() + int64_t(i) * stride);
  return batch;
}

double validation_accuracy(Detector& detector,
                           const std::vector<ImageRecord>& val,
                           InputDomain domain, const MinMaxScaler* scaler,
                           ImageCache& cache, int batch_size) {
  std::vector<float> logits;
  std::vector<int> labels;
  std::vector<Tensor> inputs;
  std::vector<int> batch_labels;
  auto flush = [&]() {
    if (inputs.empty()) return;
    const std::vector<float> out = detector.score(stack(inputs));
    logits.insert(logits.end(), out.begin(), out.end());
    labels.insert(labels.end(), batch_labels.begin(), batch_labels.end());
    inputs.clear();
    batch_labels.clear();
  };
  for (const ImageRecord& rec : val) {
    inputs.push_back(eval_input(cache.get(rec), domain, scaler));
    batch_labels.push_back(rec.label);
    if (static_cast<int>(inputs.size()) >= batch_size) flush();
  }
  flush();
  return nn::binary_accuracy(logits, labels);
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigInvalid("train.batch_size", "must be >= 1");
  if (lr_init <= 0.0) throw ConfigInvalid("train.lr_init", "must be > 0");
  if (lr_terminate >= lr_init)
    throw ConfigInvalid("train.lr_terminate", "must be < lr_init");
  if (plateau_patience < 1)
    throw ConfigInvalid("train.plateau_patience", "must be >= 1");
  if (lr_drop_factor <= 1.0)
    throw ConfigInvalid("train.lr_drop_factor", "must be > 1");
  if (max_epochs < 0) throw ConfigInvalid("train.max_epochs", "must be >= 0");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
    throw ConfigInvalid("train.beta1", "Adam betas must lie in [0,1)");
}

TrainState plateau_step(TrainState state, double val_acc,
                        const TrainConfig& cfg) {
  if (val_acc > state.best_val_acc + kImprovementEpsilon) {
    state.best_val_acc = val_acc;
    state.best_epoch = state.epoch;
    state.epochs_since_improve = 0;
    return state;
  }
  ++state.epochs_since_improve;
  if (state.epochs_since_improve >= cfg.plateau_patience) {
    ++state.lr_drops;
    state.lr = cfg.lr_init / std::pow(cfg.lr_drop_factor, state.lr_drops);
    state.epochs_since_improve = 0;
    if (state.lr <= cfg.lr_terminate * (1.0 + 1e-9)) state.terminate = true;
  }
  return state;
}

TrainState train_detector(Detector& detector, const Split& split,
                          const AugmentationPolicy& policy,
                          const TrainConfig& cfg, const MinMaxScaler* scaler,
                          const TrainSinks& sinks, TrainState* out_state) {
  cfg.validate();
  policy.validate();
  if (split.train.empty() || split.val.empty())
    throw ConfigInvalid("split", "train and val must both be non-empty");
  const InputDomain domain = detector.config().input_domain;
  if (domain == InputDomain::spectral && (!scaler || !scaler->fitted()))
    throw NotFitted("train_detector: spectral input needs a fitted scaler");

  TrainState state;
  state.lr = cfg.lr_init;
  auto publish = [&]() {
    if (out_state) *out_state = state;
  };
  publish();

  nn::Adam adam(detector.parameters(), cfg.beta1, cfg.beta2);
  ImageCache cache;
  WeightSnapshot best = detector.snapshot_weights();
  bool have_best = false;

  std::ofstream aug_log;
  if (sinks.augmentation_log_csv) {
    aug_log.open(*sinks.augmentation_log_csv, std::ios::trunc);
    aug_log << "epoch,item,apply_blur,sigma,apply_jpeg,quality,"
               "effective_quality,encoder\n";
  }

  std::vector<size_t> order(split.train.size());
  std::iota(order.begin(), order.end(), size_t{0});

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    state.epoch = epoch;
    Rng shuffle_rng = make_rng(cfg.seed, Stream::shuffle, uint64_t(epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    int64_t loss_batches = 0;
    size_t pos = 0;
    int step = 0;
    while (pos < order.size()) {
      const size_t take = std::min(size_t(cfg.batch_size), order.size() - pos);
      std::vector<Tensor> inputs;
      std::vector<float> targets;
      inputs.reserve(take);
      for (size_t i = 0; i < take; ++i) {
        const ImageRecord& rec = split.train[order[pos + i]];
        // per-item stream: deterministic for (seed, epoch, position),
        // independent of any worker layout
        Rng item_rng = make_rng(cfg.seed, Stream::augment, uint64_t(epoch),
                                uint64_t(pos + i));
        AugmentationDraw draw;
        inputs.push_back(to_model_input(cache.get(rec), policy, domain, scaler,
                                        item_rng, &draw));
        targets.push_back(static_cast<float>(rec.label));
        if (aug_log.is_open())
          aug_log << epoch << ',' << pos + i << ',' << draw.apply_blur << ','
                  << draw.sigma << ',' << draw.apply_jpeg << ',' << draw.quality
                  << ',' << draw.effective_quality() << ','
                  << to_string(draw.encoder) << '\n';
      }
      Rng drop_rng =
          make_rng(cfg.seed, Stream::dropout, uint64_t(epoch), uint64_t(step));
      Tensor logits = detector.forward_train(stack(inputs), drop_rng);
      Tensor grad;
      const double loss = nn::bce_with_logits(logits, targets, &grad);
      if (!std::isfinite(loss)) {
        publish();
        throw DivergedLoss("train_detector: non-finite loss at epoch " +
                           std::to_string(epoch) + ", step " +
                           std::to_string(step));
      }
      adam.zero_grad();
      detector.backward(grad);
      adam.step(state.lr);
      loss_sum += loss;
      ++loss_batches;
      pos += take;
      ++step;
    }

    const double train_loss = loss_sum / double(loss_batches);
    const double val_acc = validation_accuracy(
        detector, split.val, domain, scaler, cache, cfg.batch_size);
    const double lr_at_epoch = state.lr;
    state.history.push_back({epoch, train_loss, val_acc, lr_at_epoch});

    state = plateau_step(std::move(state), val_acc, cfg);
    if (state.best_epoch == epoch) {
      best = detector.snapshot_weights();
      have_best = true;
      if (sinks.checkpoint_path) {
        nlohmann::json manifest = {{"epoch", epoch},
                                   {"best_val_acc", state.best_val_acc},
                                   {"seed", cfg.seed}};
        detector.save_checkpoint(*sinks.checkpoint_path, manifest);
      }
    }
    if (sinks.verbose)
      std::cerr << "epoch " << epoch << ": loss " << train_loss << ", val_acc "
                << val_acc << ", lr " << lr_at_epoch << "\n";
    publish();
    if (state.terminate) break;
  }

  if (have_best) detector.restore_weights(best);
  if (sinks.checkpoint_path) {
    nlohmann::json manifest = {{"epoch", state.best_epoch},
                               {"best_val_acc", state.best_val_acc},
                               {"seed", cfg.seed}};
    detector.save_checkpoint(*sinks.checkpoint_path, manifest);
  }
  if (sinks.history_csv) write_history_csv(state.history, *sinks.history_csv);
  publish();
  return state;
}

void write_history_csv(const std::vector<HistoryRow>& history,
                       const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("cannot write history: " + path.string());
  os << "epoch,train_loss,val_acc,lr\n";
  os.precision(17);
  for (const auto& row : history)
    os << row.epoch << ',' << row.train_loss << ',' << row.val_acc << ','
       << row.lr << '\n';
}

MinMaxScaler fit_minmax_on_split(const std::vector<ImageRecord>& train,
                                 int sample_size, uint64_t seed) {
  if (train.empty()) throw EmptySample("fit_minmax_on_split: empty split");
  ImageCache cache;
  MinMaxScaler scaler;
  Rng rng = make_rng(seed, Stream::minmax);
  std::uniform_int_distribution<size_t> pick(0, train.size() - 1);
  for (int i = 0; i < sample_size; ++i) {
    const ImageRecord& rec = train[pick(rng)];
    const Image window = random_crop(cache.get(rec), kCropSize, rng);
    scaler.update(dct2d_channels(to_unit_tensor(window)));
  }
  scaler.finalize();
  return scaler;
}

}  // namespace gdl
