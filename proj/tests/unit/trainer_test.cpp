#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <cmath>
#include <limits>

#include "frnet/error.hpp"
#include "frnet/metrics.hpp"
#include "frnet/synth.hpp"
#include "frnet/trainer.hpp"
#include "test_support.hpp"

namespace frnet {
namespace {

// Returns the mask of the single image it was built for, as probabilities.
class OracleModel : public SegmentationModel {
 public:
  explicit OracleModel(const Sample& s)
      : SegmentationModel(ModelConfig::for_arch(Arch::FRNetBase), 0), mask_(s.mask) {
    register_parameter("unused", Tensor::zeros({1}));
  }
  Tensor forward(const Tensor& x) override {
    const auto v = mask_.to_vector();
    std::vector<double> p(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) p[i] = v[i] > 0.5 ? 0.9 : 0.1;
    return Tensor::from_data(x.shape(), p).to(x.dtype());
  }

 private:
  Tensor mask_;
};

SynthOptions small() {
  SynthOptions o;
  o.height = 24;
  o.width = 24;
  o.n_vessels = 3;
  return o;
}

TrainConfig quick(int epochs) {
  TrainConfig c;
  c.learning_rate = 1e-3;
  c.epochs = epochs;
  c.seed = 3;
  return c;
}

TEST(TrainConfig, Invariants) {
  TrainConfig c;
  EXPECT_EQ(c.learning_rate, 1e-4);
  EXPECT_EQ(c.epochs, 300);
  EXPECT_EQ(c.batch_size, 2);
  c.validate();
  for (auto mutate : std::vector<std::function<void(TrainConfig&)>>{
           [](TrainConfig& t) { t.learning_rate = 0; },
           [](TrainConfig& t) { t.epochs = 0; },
           [](TrainConfig& t) { t.batch_size = 0; },
           [](TrainConfig& t) { t.threshold = 1.0; },
           [](TrainConfig& t) { t.threshold = 0.0; }}) {
    TrainConfig bad;
    mutate(bad);
    EXPECT_THROW(bad.validate(), ConfigError);
  }
}

TEST(Evaluate, PerfectPredictionScoresOne) {
  const auto data = synth_dataset(1, 1, small());
  OracleModel m(data[0]);
  const EvalResult r = evaluate(m, data);
  EXPECT_EQ(r.dice_mean, 1.0);
  EXPECT_EQ(r.acc_mean, 1.0);
}

TEST(Evaluate, AggregateIsMeanOfPerImage) {
  const auto data = synth_dataset(2, 3, small());
  auto m = build_model(ModelConfig::for_arch(Arch::FRNetBase), 0);
  const EvalResult r = evaluate(*m, data);
  ASSERT_EQ(r.dice.size(), 3u);
  EXPECT_NEAR(r.dice_mean, (r.dice[0] + r.dice[1] + r.dice[2]) / 3.0, 1e-15);
  EXPECT_NEAR(r.acc_mean, (r.acc[0] + r.acc[1] + r.acc[2]) / 3.0, 1e-15);
  EXPECT_TRUE(m->is_training());
  EXPECT_THROW(evaluate(*m, {}), ContractError);
}

TEST(Train, BestCheckpointIsHistoryMaximum) {
  const auto train_set = synth_dataset(3, 4, small());
  const auto val_set = synth_dataset(4, 2, small());
  auto m = build_model(ModelConfig::for_arch(Arch::FRNetBase), 0);
  const TrainResult r = train(*m, train_set, val_set, quick(6));
  ASSERT_EQ(r.history.size(), 6u);
  double best = -1.0;
  int best_epoch = 0;
  for (std::size_t i = 0; i < r.history.size(); ++i) {
    EXPECT_EQ(r.history[i].epoch, static_cast<int>(i) + 1);
    EXPECT_GE(r.history[i].val_dice, 0.0);
    EXPECT_LE(r.history[i].val_dice, 1.0);
    EXPECT_GE(r.history[i].val_acc, 0.0);
    EXPECT_LE(r.history[i].val_acc, 1.0);
    if (r.history[i].val_dice > best) {
      best = r.history[i].val_dice;
      best_epoch = r.history[i].epoch;
    }
  }
  EXPECT_EQ(r.best_val_dice, best);
  EXPECT_EQ(r.best_epoch, best_epoch);
  EXPECT_EQ(r.best.metadata.at("meta.epoch"), std::to_string(best_epoch));
  // The stored weights reproduce the recorded validation score.
  auto restored = r.best.instantiate();
  EXPECT_EQ(evaluate(*restored, val_set).dice_mean, best);
}

TEST(Train, EvalEveryKeepsLastEpoch) {
  const auto d = synth_dataset(5, 2, small());
  auto m = build_model(ModelConfig::for_arch(Arch::FRNetBase), 0);
  TrainConfig c = quick(5);
  c.eval_every = 2;
  const TrainResult r = train(*m, d, d, c);
  ASSERT_EQ(r.history.size(), 3u);
  EXPECT_EQ(r.history[0].epoch, 2);
  EXPECT_EQ(r.history[1].epoch, 4);
  EXPECT_EQ(r.history[2].epoch, 5);
}

TEST(Train, DeterministicHistory) {
  const auto train_set = synth_dataset(6, 4, small());
  const auto val_set = synth_dataset(7, 2, small());
  auto run = [&] {
    auto m = build_model(ModelConfig::for_arch(Arch::FRNet), 1);
    TrainConfig c = quick(3);
    c.crop = std::make_pair<std::int64_t, std::int64_t>(16, 16);
    return train(*m, train_set, val_set, c);
  };
  const TrainResult a = run(), b = run();
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].train_loss, b.history[i].train_loss);
    EXPECT_EQ(a.history[i].val_dice, b.history[i].val_dice);
    EXPECT_EQ(a.history[i].val_acc, b.history[i].val_acc);
  }
  EXPECT_EQ(a.best.values, b.best.values);
}

TEST(Train, EmptyValidationSetRejected) {
  const auto d = synth_dataset(8, 2, small());
  auto m = build_model(ModelConfig::for_arch(Arch::FRNetBase), 0);
  EXPECT_THROW(train(*m, d, {}, quick(1)), ConfigError);
  EXPECT_THROW(train(*m, {}, d, quick(1)), ConfigError);
}

TEST(Train, NonFiniteLossAbortsWithContext) {
  const auto d = synth_dataset(9, 2, small());
  auto m = build_model(ModelConfig::for_arch(Arch::FRNetBase), 0);
  auto params = m->named_parameters();
  params.back().second.data<float>()[0] = std::numeric_limits<float>::quiet_NaN();
  try {
    train(*m, d, d, quick(2));
    FAIL();
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("epoch 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("batch 1"), std::string::npos) << msg;
  }
}

TEST(History, CsvRoundTrip) {
  testing::TempDir dir("hist");
  const std::vector<MetricsRecord> h{{1, 0.5, 0.25, 0.75, 1.5}, {2, 0.125, 1.0 / 3.0, 0.9, 3.25}};
  write_history_csv(h, dir.path() / "h.csv");
  std::ifstream is(dir.path() / "h.csv");
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "epoch,train_loss,val_dice,val_acc,wall_time_s");
  const auto back = read_history_csv(dir.path() / "h.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].epoch, 2);
  EXPECT_EQ(back[1].val_dice, 1.0 / 3.0);
  EXPECT_EQ(back[0].train_loss, 0.5);
}

}  // namespace
}  // namespace frnet
