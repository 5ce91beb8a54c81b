// Copyright 2026 The Microdoom Authors.
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

#ifndef MICRODOOM_TRAINER_H_
#define MICRODOOM_TRAINER_H_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "microdoom/demo_dataset.h"
#include "microdoom/doom_encoder.h"
#include "microdoom/optim.h"

namespace microdoom {

enum class KlDirection {
  kStudentFirst,  // KL(softmax(logits) || softmax(scores))
  kTeacherFirst,  // KL(softmax(scores) || softmax(logits))
};

struct TrainConfig {
  int batch_size = 32;
  int epochs = 20;
  double base_lr = 3e-4;
  int warmup_steps = 500;
  uint64_t seed = 0;
  std::string checkpoint_path;  // empty: keep the best params in memory only
  KlDirection direction = KlDirection::kStudentFirst;
  nn::AdamWConfig adamw;
};

struct LossAndGrad {
  double loss = 0;
  std::array<double, 4> dlogits{};
};

// Computed in double; the gradient is with respect to the logits.
LossAndGrad KlLoss(const std::array<double, 4>& logits, const std::array<double, 4>& scores,
                   KlDirection direction = KlDirection::kStudentFirst);
double KlLossValue(const std::array<float, 4>& logits, const std::array<float, 4>& scores,
                   KlDirection direction = KlDirection::kStudentFirst);

struct EvalResult {
  double accuracy = 0;
  double mean_loss = 0;
  int64_t count = 0;
};

// Throws kEmptyDataset.
EvalResult Evaluate(const DoomEncoder& model, const std::vector<DemoRecord>& records,
                    KlDirection direction = KlDirection::kStudentFirst);

struct EpochStats {
  int epoch = 0;                     // 0 is the untrained model
  std::optional<double> train_loss;  // mean over the epoch's batches
  double val_loss = 0;
  double val_accuracy = 0;
  double seconds = 0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  int best_epoch = 0;
  double best_accuracy = 0;
  int64_t total_steps = 0;
  nlohmann::json ToJson() const;
};

using TrainProgress = std::function<void(const EpochStats&)>;

// Leaves the best-by-validation-accuracy parameters in *model and, when
// cfg.checkpoint_path is set, on disk. First batch loss is reported through
// *first_batch_loss when non-null.
TrainReport Train(DoomEncoder* model, const DatasetSplit& split, const TrainConfig& cfg,
                  const TrainProgress& progress = nullptr, double* first_batch_loss = nullptr);

// Loss and accumulated gradient of one batch (mean over samples) without an
// optimizer step.
double BatchGradient(const DoomEncoder& model, const std::vector<const DemoRecord*>& batch,
                     KlDirection direction, ModelParams* grads);

}  // namespace microdoom

#endif  // MICRODOOM_TRAINER_H_
