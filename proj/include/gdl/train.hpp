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

#ifndef GDL_TRAIN_HPP_
#define GDL_TRAIN_HPP_

#include <filesystem>
#include <optional>
#include <vector>

#include "gdl/augment.hpp"
#include "gdl/imgdata.hpp"
#include "gdl/model.hpp"
#include "gdl/spectral.hpp"

namespace gdl {

struct TrainConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  int batch_size = 64;
  double lr_init = 1e-4;  // 1e-3 for the from-scratch spectral backbone
  double lr_drop_factor = 10.0;
  int plateau_patience = 5;
  double lr_terminate = 1e-7;
  uint64_t seed = 0;
  int max_epochs = 400;  // safety cap

  void validate() const;  // throws ConfigInvalid
};

struct HistoryRow {
  int epoch;
  double train_loss;
  double val_acc;
  double lr;
};

struct TrainState {
  int epoch = 0;
  int lr_drops = 0;     // lr == lr_init / drop_factor^lr_drops
  double lr = 0.0;
  double best_val_acc = -1.0;
  int best_epoch = -1;
  int epochs_since_improve = 0;
  bool terminate = false;
  std::vector<HistoryRow> history;
};

/// One scheduler transition after an epoch's validation accuracy.
/// Improvement (val_acc > best + 1e-4) resets the stagnation counter;
/// otherwise the counter increments, and on reaching the patience the
/// learning rate divides by the drop factor. Arrival at lr <= lr_terminate
/// sets the terminate flag.
TrainState plateau_step(TrainState state, double val_acc,
                        const TrainConfig& cfg);

/// Minimum improvement in validation accuracy that counts as progress.
inline constexpr double kImprovementEpsilon = 1e-4;

struct TrainSinks {
  std::optional<std::filesystem::path> checkpoint_path;  // best + final
  std::optional<std::filesystem::path> history_csv;
  std::optional<std::filesystem::path> augmentation_log_csv;
  bool verbose = false;
};

/// Fine-tunes the detector with Adam over shuffled augmented batches,
/// evaluating validation accuracy (logit threshold 0) each epoch and
/// stepping the plateau schedule. On return the detector holds the weights
/// of the best validation epoch, not the final one.
///
/// The spectral input domain requires a fitted scaler. Throws DivergedLoss
/// when the training loss turns non-finite (history up to that point is
/// preserved in *out_state when supplied).
TrainState train_detector(Detector& detector, const Split& split,
                          const AugmentationPolicy& policy,
                          const TrainConfig& cfg,
                          const MinMaxScaler* scaler = nullptr,
                          const TrainSinks& sinks = {},
                          TrainState* out_state = nullptr);

void write_history_csv(const std::vector<HistoryRow>& history,
                       const std::filesystem::path& path);

/// Fits the spectral MinMax scaler on up to `sample_size` random training
/// crops (center pipeline, no augmentation).
MinMaxScaler fit_minmax_on_split(const std::vector<ImageRecord>& train,
                                 int sample_size, uint64_t seed);

}  // namespace gdl

#endif  // GDL_TRAIN_HPP_
