#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "frnet/checkpoint.hpp"
#include "frnet/data.hpp"
#include "frnet/models.hpp"
#include "frnet/optim.hpp"

namespace frnet {

struct TrainConfig {
  double learning_rate = 1e-4;
  int epochs = 300;
  int batch_size = 2;
  std::uint64_t seed = 0;
  double smooth_eps = 1.0;
  double threshold = 0.5;
  int eval_every = 1;
  // Random aligned crop per batch; full images when unset (all training
  // images must then share one size).
  std::optional<std::pair<std::int64_t, std::int64_t>> crop;

  void validate() const;
};

struct MetricsRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_dice = 0.0;
  double val_acc = 0.0;
  double wall_time_s = 0.0;
};

struct EvalResult {
  double dice_mean = 0.0;
  double acc_mean = 0.0;
  std::vector<double> dice;  // per image, dataset order
  std::vector<double> acc;
};

struct TrainResult {
  Checkpoint best;  // meta.epoch / meta.val_dice / meta.val_acc recorded
  int best_epoch = 0;
  double best_val_dice = 0.0;
  std::vector<MetricsRecord> history;  // one row per validated epoch
};

// Eval-mode inference on each full image, binarized at `threshold`; means
// of per-image Dice and pixel accuracy.
EvalResult evaluate(SegmentationModel& model, const std::vector<Sample>& dataset,
                    double threshold = 0.5);

using EpochCallback = std::function<void(const MetricsRecord&)>;

// Epochs of shuffled mini-batches: forward, Dice loss, backward, Adam step.
// Validates every `eval_every` epochs and on the last epoch, keeping the
// checkpoint with the highest validation Dice (earliest epoch on ties).
// On return `model` holds the final (not the best) weights.
TrainResult train(SegmentationModel& model, const std::vector<Sample>& train_set,
                  const std::vector<Sample>& val_set, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

// CSV with header `epoch,train_loss,val_dice,val_acc,wall_time_s`.
void write_history_csv(const std::vector<MetricsRecord>& history,
                       const std::filesystem::path& path);
std::vector<MetricsRecord> read_history_csv(const std::filesystem::path& path);

}  // namespace frnet
