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

#include "microdoom/trainer.h"

#include <chrono>
#include <cmath>
#include <limits>

#include "microdoom/checkpoint.h"
#include "microdoom/char_tokenizer.h"
#include "microdoom/error.h"
#include "microdoom/nn_ops.h"

namespace microdoom {
namespace {

std::array<double, 4> LogSoftmax(const std::array<double, 4>& x) {
  double m = x[0];
  for (double v : x) m = std::max(m, v);
  double s = 0;
  for (double v : x) s += std::exp(v - m);
  const double lse = m + std::log(s);
  std::array<double, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = x[i] - lse;
  return out;
}

template <typename T>
std::array<double, 4> ToDouble(const std::array<T, 4>& x) {
  return {double(x[0]), double(x[1]), double(x[2]), double(x[3])};
}

}  // namespace

LossAndGrad KlLoss(const std::array<double, 4>& logits, const std::array<double, 4>& scores,
                   KlDirection direction) {
  const auto lp = LogSoftmax(logits);
  const auto lq = LogSoftmax(scores);
  LossAndGrad out;
  if (direction == KlDirection::kStudentFirst) {
    // L = sum p (log p - log q); dL/dy_j = p_j (l_j - L).
    std::array<double, 4> l;
    for (int i = 0; i < 4; ++i) {
      l[i] = lp[i] - lq[i];
      out.loss += std::exp(lp[i]) * l[i];
    }
    for (int i = 0; i < 4; ++i) out.dlogits[i] = std::exp(lp[i]) * (l[i] - out.loss);
  } else {
    for (int i = 0; i < 4; ++i) {
      const double q = std::exp(lq[i]);
      out.loss += q * (lq[i] - lp[i]);
      out.dlogits[i] = std::exp(lp[i]) - q;
    }
  }
  if (!std::isfinite(out.loss)) Fail(ErrorKind::kNonFinite, "non-finite KL loss");
  return out;
}

double KlLossValue(const std::array<float, 4>& logits, const std::array<float, 4>& scores,
                   KlDirection direction) {
  return KlLoss(ToDouble(logits), ToDouble(scores), direction).loss;
}

EvalResult Evaluate(const DoomEncoder& model, const std::vector<DemoRecord>& records,
                    KlDirection direction) {
  if (records.empty()) Fail(ErrorKind::kEmptyDataset, "nothing to evaluate");
  EvalResult r;
  int64_t correct = 0;
  double loss = 0;
  for (const DemoRecord& rec : records) {
    const std::array<float, 4> logits = model.ForwardLogits(Encode(rec.Frame(), rec.Depth()));
    int arg = 0;
    for (int i = 1; i < 4; ++i) {
      if (logits[i] > logits[arg]) arg = i;
    }
    correct += arg == HardLabel(rec.soft_scores);
    loss += KlLossValue(logits, rec.soft_scores, direction);
  }
  r.count = static_cast<int64_t>(records.size());
  r.accuracy = static_cast<double>(correct) / r.count;
  r.mean_loss = loss / r.count;
  return r;
}

double BatchGradient(const DoomEncoder& model, const std::vector<const DemoRecord*>& batch,
                     KlDirection direction, ModelParams* grads) {
  ForwardCacheT<float> cache;
  double total = 0;
  const double inv = 1.0 / batch.size();
  for (const DemoRecord* rec : batch) {
    const std::array<float, 4> logits =
        model.ForwardLogits(Encode(rec->Frame(), rec->Depth()), &cache);
    const LossAndGrad lg = KlLoss(ToDouble(logits), ToDouble(rec->soft_scores), direction);
    std::array<float, 4> dl;
    for (int i = 0; i < 4; ++i) dl[i] = static_cast<float>(lg.dlogits[i] * inv);
    model.Backward(cache, dl, grads);
    total += lg.loss;
  }
  return total * inv;
}

nlohmann::json TrainReport::ToJson() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const EpochStats& e : epochs) {
    rows.push_back({{"epoch", e.epoch},
                    {"train_loss", e.train_loss ? nlohmann::json(*e.train_loss) : nlohmann::json()},
                    {"val_loss", e.val_loss},
                    {"val_accuracy", e.val_accuracy},
                    {"seconds", e.seconds}});
  }
  return {{"epochs", rows},
          {"best_epoch", best_epoch},
          {"best_accuracy", best_accuracy},
          {"total_steps", total_steps}};
}

TrainReport Train(DoomEncoder* model, const DatasetSplit& split, const TrainConfig& cfg,
                  const TrainProgress& progress, double* first_batch_loss) {
  using Clock = std::chrono::steady_clock;
  if (cfg.epochs < 1) Fail(ErrorKind::kInvalidArgument, "nothing to train: epochs < 1");
  if (cfg.batch_size < 1) Fail(ErrorKind::kInvalidArgument, "batch_size must be >= 1");
  if (split.train.empty()) Fail(ErrorKind::kEmptyDataset, "empty training split");
  if (split.val.empty()) Fail(ErrorKind::kEmptyDataset, "empty validation split");
  const int64_t n = static_cast<int64_t>(split.train.size());
  const int64_t per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  TrainReport report;
  report.total_steps = per_epoch * cfg.epochs;
  if (cfg.warmup_steps >= report.total_steps) {
    Fail(ErrorKind::kInvalidArgument, "warmup_steps (" + std::to_string(cfg.warmup_steps) +
                                          ") must be below total steps (" +
                                          std::to_string(report.total_steps) + ")");
  }

  auto evaluate_epoch = [&](int epoch, std::optional<double> train_loss, Clock::time_point t0) {
    const EvalResult ev = Evaluate(*model, split.val, cfg.direction);
    EpochStats st{epoch, train_loss, ev.mean_loss, ev.accuracy,
                  std::chrono::duration<double>(Clock::now() - t0).count()};
    report.epochs.push_back(st);
    if (progress) progress(st);
    return st;
  };

  const Clock::time_point t_start = Clock::now();
  ModelParams best = model->params();
  const EpochStats initial = evaluate_epoch(0, std::nullopt, t_start);
  report.best_epoch = 0;
  report.best_accuracy = initial.val_accuracy;

  auto save_best = [&](int epoch) {
    if (cfg.checkpoint_path.empty()) return;
    Checkpoint ck{model->config(), model->params(), {}};
    ck.metadata = {{"epoch", epoch}, {"val_accuracy", report.best_accuracy}, {"seed", cfg.seed}};
    SaveCheckpoint(cfg.checkpoint_path, ck);
  };
  save_best(0);

  nn::AdamW opt(cfg.adamw);
  ModelParams grads = ModelParams::Zeros(model->config());
  std::vector<nn::Tensor*> param_ptrs;
  std::vector<const nn::Tensor*> grad_ptrs;
  model->mutable_params().ForEach([&](const std::string&, nn::Tensor& t) { param_ptrs.push_back(&t); });
  grads.ForEach([&](const std::string&, nn::Tensor& t) { grad_ptrs.push_back(&t); });

  int64_t step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const Clock::time_point t0 = Clock::now();
    const std::vector<size_t> order =
        SeededPermutation(split.train.size(), cfg.seed * 1000003ULL + static_cast<uint64_t>(epoch));
    double loss_sum = 0;
    for (int64_t b = 0; b < per_epoch; ++b) {
      std::vector<const DemoRecord*> batch;
      for (int64_t i = b * cfg.batch_size; i < std::min(n, (b + 1) * cfg.batch_size); ++i) {
        batch.push_back(&split.train[order[i]]);
      }
      grads.ForEach([](const std::string&, nn::Tensor& t) { t.SetZero(); });
      const double loss = BatchGradient(*model, batch, cfg.direction, &grads);
      if (!std::isfinite(loss)) {
        Fail(ErrorKind::kNonFinite, "non-finite loss at epoch " + std::to_string(epoch) +
                                        " batch " + std::to_string(b));
      }
      grads.ForEach([&](const std::string& name, const nn::Tensor& t) {
        if (!t.AllFinite()) Fail(ErrorKind::kNonFinite, "non-finite gradient in " + name);
      });
      if (step == 0 && first_batch_loss != nullptr) *first_batch_loss = loss;
      ++step;
      const double lr = nn::CosineLr(step, cfg.warmup_steps, report.total_steps, cfg.base_lr);
      opt.Step(param_ptrs, grad_ptrs, static_cast<float>(lr));
      loss_sum += loss;
    }
    const EpochStats st = evaluate_epoch(epoch, loss_sum / per_epoch, t0);
    if (st.val_accuracy > report.best_accuracy) {
      report.best_accuracy = st.val_accuracy;
      report.best_epoch = epoch;
      best = model->params();
      save_best(epoch);
    }
  }
  model->mutable_params() = best;
  return report;
}

}  // namespace microdoom
