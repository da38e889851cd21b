#include "frnet/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "frnet/autograd.hpp"
#include "frnet/metrics.hpp"

namespace frnet {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ConfigError("threshold must lie in (0, 1)");
  }
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (crop && (crop->first < 1 || crop->second < 1)) {
    throw ConfigError("crop must be positive");
  }
}

EvalResult evaluate(SegmentationModel& model, const std::vector<Sample>& dataset,
                    double threshold) {
  if (dataset.empty()) throw ContractError("evaluate: empty dataset");
  const bool was_training = model.is_training();
  model.eval();
  NoGradGuard no_grad;
  EvalResult r;
  const DType dtype = model.parameters().front().dtype();
  for (const Sample& s : dataset) {
    const Shape shape{1, 1, s.height(), s.width()};
    Tensor x = Tensor::from_data(shape, s.image.to_vector()).to(dtype);
    Tensor target = Tensor::from_data(shape, s.mask.to_vector()).to(dtype);
    Tensor pred = binarize(model_forward(model, x), threshold);
    r.dice.push_back(dice_score(pred, target));
    r.acc.push_back(accuracy(pred, target));
  }
  const double n = static_cast<double>(dataset.size());
  r.dice_mean = std::accumulate(r.dice.begin(), r.dice.end(), 0.0) / n;
  r.acc_mean = std::accumulate(r.acc.begin(), r.acc.end(), 0.0) / n;
  model.train(was_training);
  return r;
}

TrainResult train(SegmentationModel& model, const std::vector<Sample>& train_set,
                  const std::vector<Sample>& val_set, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw ConfigError("train: empty training set");
  if (val_set.empty()) throw ConfigError("train: empty validation set");

  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(config.seed);
  Adam adam(model.named_parameters(), AdamHyper{config.learning_rate});
  const DType dtype = model.parameters().front().dtype();

  TrainResult result;
  bool have_best = false;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    model.train();
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t b = 0; b < order.size();
         b += static_cast<std::size_t>(config.batch_size)) {
      std::vector<const Sample*> batch;
      for (std::size_t i = b;
           i < std::min(order.size(), b + static_cast<std::size_t>(config.batch_size));
           ++i) {
        batch.push_back(&train_set[order[i]]);
      }
      auto [images, masks] =
          config.crop ? crop_batch(batch, config.crop->first, config.crop->second, rng())
                      : stack_batch(batch);
      if (dtype != DType::Float32) {
        images = images.to(dtype);
        masks = masks.to(dtype);
      }
      adam.zero_grad();
      Tensor pred = model_forward(model, images);
      Tensor loss = dice_loss(pred, masks, config.smooth_eps);
      const double value = loss.item();
      if (!std::isfinite(value)) {
        throw NumericError(fmt::format(
            "train: non-finite loss at epoch {} batch {}", epoch, batches + 1));
      }
      loss.backward();
      adam.step();
      loss_sum += value;
      ++batches;
    }

    if (epoch % config.eval_every != 0 && epoch != config.epochs) continue;
    const EvalResult ev = evaluate(model, val_set, config.threshold);
    MetricsRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / batches;
    rec.val_dice = ev.dice_mean;
    rec.val_acc = ev.acc_mean;
    rec.wall_time_s = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    result.history.push_back(rec);
    if (!have_best || rec.val_dice > result.best_val_dice) {
      have_best = true;
      result.best_val_dice = rec.val_dice;
      result.best_epoch = epoch;
      result.best = Checkpoint::capture(model);
      result.best.metadata["meta.epoch"] = std::to_string(epoch);
      result.best.metadata["meta.val_dice"] = fmt::format("{:.9g}", rec.val_dice);
      result.best.metadata["meta.val_acc"] = fmt::format("{:.9g}", rec.val_acc);
    }
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

void write_history_csv(const std::vector<MetricsRecord>& history,
                       const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot write '" + path.string() + "'");
  os << "epoch,train_loss,val_dice,val_acc,wall_time_s\n";
  for (const auto& r : history) {
    os << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.6f}\n", r.epoch,
                      r.train_loss, r.val_dice, r.val_acc, r.wall_time_s);
  }
}

std::vector<MetricsRecord> read_history_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot read '" + path.string() + "'");
  std::vector<MetricsRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (lineno == 1 || line.empty()) continue;
    std::istringstream ls(line);
    MetricsRecord r;
    char c1, c2, c3, c4;
    if (!(ls >> r.epoch >> c1 >> r.train_loss >> c2 >> r.val_dice >> c3 >>
          r.val_acc >> c4 >> r.wall_time_s) ||
        c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',') {
      throw ParseError(path.string(), lineno, "malformed history row");
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace frnet
