#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "idsnet/errors.hpp"
#include "idsnet/trainer.hpp"
#include "synthetic_kdd.hpp"

using namespace idsnet;

namespace {

template <typename T>
struct Data {
  PreprocessorState pre;
  FeatureMatrix<T> x;
};

template <typename T>
Data<T> synthetic(std::size_t per_class, std::uint64_t seed, double noise = 0.0) {
  fixtures::SyntheticKddOptions o;
  o.normal = o.neptune = per_class;
  o.smurf = 2 * per_class;
  o.seed = seed;
  o.label_noise = noise;
  const auto ds = fixtures::synthetic_dataset(o);
  auto pre = fit_preprocessor(ds);
  return {pre, transform<T>(pre, ds)};
}

}  // namespace

TEST(SplitValidation, TenRows) {
  const auto s = split_validation(10, 0.3, 1);
  EXPECT_EQ(s.train.size(), 7u);
  EXPECT_EQ(s.validation.size(), 3u);
}

TEST(SplitValidation, DeterministicDisjointExhaustive) {
  const auto a = split_validation(1000, 0.3, 42), b = split_validation(1000, 0.3, 42), c = split_validation(1000, 0.3, 43);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.validation, b.validation);
  EXPECT_NE(a.validation, c.validation);
  std::set<std::size_t> all(a.train.begin(), a.train.end());
  for (auto v : a.validation) EXPECT_TRUE(all.insert(v).second);
  EXPECT_EQ(all.size(), 1000u);
  EXPECT_EQ(*all.rbegin(), 999u);
}

TEST(SplitValidation, FullSizeTrainingSet) {
  const auto s = split_validation(485253, 0.3, 42);
  EXPECT_EQ(s.validation.size(), 145576u);
  EXPECT_EQ(s.train.size(), 339677u);
  EXPECT_LE(s.validation.size() - 145575, 1u);
  EXPECT_LE(339678 - s.train.size(), 1u);
}

TEST(SplitValidation, FractionOutOfRange) {
  EXPECT_THROW(split_validation(10, 0.0, 1), InputError);
  EXPECT_THROW(split_validation(10, 1.0, 1), InputError);
  EXPECT_THROW(split_validation(10, -0.1, 1), InputError);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.epochs = 0;
  EXPECT_THROW(c.validate(), InputError);
  c = {};
  c.batch_size = 1;
  EXPECT_THROW(c.validate(), InputError);
  c = {};
  c.validation_fraction = 1.0;
  EXPECT_THROW(c.validate(), InputError);
}

TEST(Resample, BalancesClasses) {
  const std::vector<ClassLabel> labels{ClassLabel::normal, ClassLabel::smurf, ClassLabel::smurf, ClassLabel::smurf,
                                       ClassLabel::neptune, ClassLabel::smurf};
  const std::vector<std::size_t> rows{0, 1, 2, 3, 4, 5};
  auto count = [&](const std::vector<std::size_t>& r, ClassLabel c) {
    return std::count_if(r.begin(), r.end(), [&](std::size_t i) { return labels[i] == c; });
  };
  const auto up = resample_rows(labels, rows, Resampling::upsample, 1);
  EXPECT_EQ(up.size(), 12u);
  EXPECT_EQ(count(up, ClassLabel::normal), 4);
  const auto down = resample_rows(labels, rows, Resampling::downsample, 1);
  EXPECT_EQ(down.size(), 3u);
  EXPECT_EQ(count(down, ClassLabel::smurf), 1);
  EXPECT_EQ(resample_rows(labels, rows, Resampling::none, 1), rows);
}

TEST(Train, LearnsSyntheticTrafficAndKeepsBestEpoch) {
  auto d = synthetic<float>(150, 11, 0.01);
  Model<float> model(make_descriptor(ModelKind::dnn, d.x.cols), 42);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.batch_size = 32;
  const auto out = train(model, d.x, d.pre, cfg);
  ASSERT_EQ(out.log.epochs.size(), 4u);
  double best = 0.0;
  for (const auto& e : out.log.epochs) {
    best = std::max(best, e.val_accuracy);
    EXPECT_GE(e.seconds, 0.0);
  }
  EXPECT_GT(best, 0.95);
  EXPECT_EQ(out.log.epochs[out.log.best_epoch - 1].val_accuracy, best);
  for (std::size_t e = 0; e + 1 < out.log.best_epoch; ++e) EXPECT_LT(out.log.epochs[e].val_accuracy, best);
  EXPECT_EQ(out.best.log, out.log);

  // The model now holds the best epoch's parameters.
  const auto split = split_validation(d.x.rows, cfg.validation_fraction, Rng(cfg.seed).next());
  const auto again = evaluate_rows(model, d.x, split.validation, 20);
  EXPECT_EQ(again.accuracy, best);
}

TEST(Train, DeterministicDoubleRunsAreBitwiseIdentical) {
  auto d = synthetic<double>(40, 12);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 16;
  cfg.precision = Precision::dual;
  cfg.record_timing = false;
  auto run = [&] {
    Model<double> model(make_descriptor(ModelKind::cnn_lstm, d.x.cols), 42);
    return encode_checkpoint(train(model, d.x, d.pre, cfg).best);
  };
  EXPECT_EQ(run(), run());
}

TEST(Train, PartialFinalBatchNeedsTwoRows) {
  auto d = synthetic<float>(6, 13);  // 24 rows: 17 train, 7 validation
  ASSERT_EQ(d.x.rows, 24u);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 8;  // 8, 8, 1 -> the single row is dropped
  Model<float> model(make_descriptor(ModelKind::dnn, d.x.cols), 1);
  EXPECT_EQ(train(model, d.x, d.pre, cfg).log.step_losses.size(), 2u);
  cfg.batch_size = 5;  // 5, 5, 5, 2
  EXPECT_EQ(train(model, d.x, d.pre, cfg).log.step_losses.size(), 4u);
}

TEST(Train, NonFiniteLossAborts) {
  auto d = synthetic<float>(10, 14);
  Model<float> model(make_descriptor(ModelKind::dnn, d.x.cols), 1);
  model.parameters()[0][0] = std::numeric_limits<float>::quiet_NaN();
  TrainConfig cfg;
  cfg.batch_size = 8;
  try {
    train(model, d.x, d.pre, cfg);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1, step 1"), std::string::npos) << e.what();
  }
}

TEST(Train, PrecisionMustMatchModel) {
  auto d = synthetic<float>(10, 15);
  Model<float> model(make_descriptor(ModelKind::dnn, d.x.cols), 1);
  TrainConfig cfg;
  cfg.precision = Precision::dual;
  EXPECT_THROW(train(model, d.x, d.pre, cfg), InputError);
}

TEST(Train, EarlyLossTrendIsDownward) {
  auto d = synthetic<float>(400, 16);
  Model<float> model(make_descriptor(ModelKind::cnn_lstm, d.x.cols), 42);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 32;
  const auto out = train(model, d.x, d.pre, cfg);
  const auto& s = out.log.step_losses;
  const std::size_t window = 10;
  ASSERT_GE(s.size(), 3 * window);
  std::vector<double> means;
  for (std::size_t i = 0; i + window <= s.size(); i += window) {
    double m = 0.0;
    for (std::size_t k = i; k < i + window; ++k) m += s[k];
    means.push_back(m / window);
  }
  EXPECT_LT(means.back(), means.front() * 0.5);
}

TEST(EvaluateRows, IndependentOfBatchSize) {
  auto d = synthetic<float>(30, 17);
  Model<float> model(make_descriptor(ModelKind::cnn, d.x.cols), 2);
  std::vector<std::size_t> rows(d.x.rows);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const auto a = evaluate_rows(model, d.x, rows, 1);
  const auto b = evaluate_rows(model, d.x, rows, 20);
  const auto c = evaluate_rows(model, d.x, rows, 1000);
  EXPECT_EQ(a.loss, b.loss);
  EXPECT_EQ(b.loss, c.loss);
  EXPECT_EQ(a.accuracy, c.accuracy);
}

TEST(TrainLog, CsvHeaderAndRows) {
  TrainLog log;
  log.epochs.push_back({1, 0.25, 0.9, 0.125, 0.95, 2.5});
  const auto csv = train_log_csv(log);
  EXPECT_EQ(csv, "epoch,train_loss,train_acc,val_loss,val_acc,seconds\n1,0.25,0.9,0.125,0.95,2.500\n");
}
