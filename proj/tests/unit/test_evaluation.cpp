#include <gtest/gtest.h>

#include <cmath>

#include "idsnet/errors.hpp"
#include "idsnet/evaluation.hpp"
#include "idsnet/random.hpp"
#include "synthetic_kdd.hpp"

using namespace idsnet;

namespace {

constexpr std::size_t N = 0, P = 1, S = 2;  // normal, neptune, smurf

ConfusionMatrix reference_matrix() {
  ConfusionMatrix cm;
  cm.cells[N] = {59927, 17, 24};
  cm.cells[P] = {23, 57984, 0};
  cm.cells[S] = {640, 0, 164067};
  return cm;
}

ConfusionMatrix random_matrix(Rng& rng) {
  ConfusionMatrix cm;
  for (auto& row : cm.cells)
    for (auto& c : row) c = rng.below(50);
  cm.cells[0][0] += 1;
  return cm;
}

// Pairwise Mann-Whitney count: P(score_pos > score_neg) + 0.5 P(tie).
double brute_auc(std::span<const ClassLabel> truth, std::span<const double> scores, std::size_t c) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (class_index(truth[i]) != c) continue;
    for (std::size_t j = 0; j < truth.size(); ++j) {
      if (class_index(truth[j]) == c) continue;
      const double a = scores[i * 3 + c], b = scores[j * 3 + c];
      wins += a > b ? 1.0 : a == b ? 0.5 : 0.0;
      pairs += 1.0;
    }
  }
  return wins / pairs;
}

}  // namespace

TEST(Confusion, ReferenceMatrixOracle) {
  const auto cm = reference_matrix();
  EXPECT_EQ(cm.total(), 282682u);
  EXPECT_EQ(cm.actual_total(N), 60590u);
  EXPECT_EQ(cm.actual_total(P), 58001u);
  EXPECT_EQ(cm.actual_total(S), 164091u);
  EXPECT_EQ(cm.predicted_total(P), 58007u);
  EXPECT_EQ(cm.predicted_total(N), 59968u);
  EXPECT_EQ(cm.predicted_total(S), 164707u);

  EXPECT_NEAR(accuracy(cm), 281978.0 / 282682.0, 1e-15);
  EXPECT_NEAR(accuracy(cm), 0.9975, 5e-5);

  const auto prf = precision_recall_f1(cm, Averaging::none);
  EXPECT_NEAR(prf.per_class[P].precision, 57984.0 / 58007.0, 1e-15);
  EXPECT_NEAR(prf.per_class[N].precision, 59927.0 / 59968.0, 1e-15);
  EXPECT_NEAR(prf.per_class[S].precision, 164067.0 / 164707.0, 1e-15);
  EXPECT_NEAR(prf.per_class[P].precision, 0.9996, 5e-5);
  EXPECT_NEAR(prf.per_class[N].precision, 0.9993, 5e-5);
  EXPECT_NEAR(prf.per_class[S].precision, 0.9961, 5e-5);
  EXPECT_NEAR(prf.per_class[N].recall, 59927.0 / 60590.0, 1e-15);

  // Classwise table at two decimals.
  auto two = [](double v) { return std::round(v * 100.0) / 100.0; };
  EXPECT_EQ(two(prf.per_class[S].precision), 1.00);
  EXPECT_EQ(two(prf.per_class[S].recall), 1.00);
  EXPECT_EQ(two(prf.per_class[N].precision), 1.00);
  EXPECT_EQ(two(prf.per_class[N].recall), 0.99);
  EXPECT_EQ(two(prf.per_class[N].f1), 0.99);
  EXPECT_EQ(two(prf.per_class[P].f1), 1.00);
  EXPECT_EQ(prf.per_class[S].support, 164091u);
  EXPECT_EQ(prf.per_class[N].support, 60590u);
  EXPECT_EQ(prf.per_class[P].support, 58001u);
}

TEST(Confusion, FromLabels) {
  const std::vector<ClassLabel> t{ClassLabel::normal, ClassLabel::smurf, ClassLabel::smurf, ClassLabel::neptune};
  const std::vector<ClassLabel> p{ClassLabel::normal, ClassLabel::normal, ClassLabel::smurf, ClassLabel::neptune};
  const auto cm = confusion(t, p);
  EXPECT_EQ(cm.cells[N][S], 1u);
  EXPECT_EQ(cm.trace(), 3u);
  EXPECT_THROW(confusion(t, std::span(p).first(2)), InputError);
  EXPECT_THROW(accuracy(ConfusionMatrix{}), InputError);
}

TEST(Metrics, DiagonalIsPerfect) {
  ConfusionMatrix cm;
  cm.cells[0][0] = 5;
  cm.cells[1][1] = 7;
  cm.cells[2][2] = 9;
  for (auto mode : {Averaging::macro, Averaging::weighted, Averaging::micro}) {
    const auto r = precision_recall_f1(cm, mode);
    EXPECT_DOUBLE_EQ(r.aggregate.precision, 1.0);
    EXPECT_DOUBLE_EQ(r.aggregate.recall, 1.0);
    EXPECT_DOUBLE_EQ(r.aggregate.f1, 1.0);
    EXPECT_FALSE(r.any_undefined);
  }
}

TEST(Metrics, EmptyRowAndColumnAreFlagged) {
  ConfusionMatrix cm;
  cm.cells[0][0] = 4;
  cm.cells[0][2] = 2;
  cm.cells[2][2] = 3;
  const auto r = precision_recall_f1(cm, Averaging::macro);
  EXPECT_TRUE(r.any_undefined);
  EXPECT_TRUE(r.per_class[1].precision_undefined);
  EXPECT_TRUE(r.per_class[1].recall_undefined);
  EXPECT_EQ(r.per_class[1].precision, 0.0);
  EXPECT_NEAR(r.aggregate.precision, (4.0 / 6.0 + 0.0 + 1.0) / 3.0, 1e-15);
}

TEST(Metrics, RandomMatrixProperties) {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto cm = random_matrix(rng);
    const double acc = accuracy(cm);
    const auto micro = precision_recall_f1(cm, Averaging::micro).aggregate;
    EXPECT_NEAR(micro.precision, acc, 1e-12);
    EXPECT_NEAR(micro.recall, acc, 1e-12);
    EXPECT_NEAR(micro.f1, acc, 1e-12);

    const auto none = precision_recall_f1(cm, Averaging::none);
    const auto macro = precision_recall_f1(cm, Averaging::macro).aggregate;
    const auto weighted = precision_recall_f1(cm, Averaging::weighted).aggregate;
    double mp = 0.0, wr = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      const auto& m = none.per_class[c];
      if (!m.f1_undefined) {
        EXPECT_GE(m.f1, std::min(m.precision, m.recall) - 1e-12);
        EXPECT_LE(m.f1, std::max(m.precision, m.recall) + 1e-12);
      }
      mp += m.precision / 3.0;
      wr += m.recall * static_cast<double>(cm.actual_total(c)) / static_cast<double>(cm.total());
    }
    EXPECT_NEAR(macro.precision, mp, 1e-12);
    // Support-weighted recall is the accuracy.
    EXPECT_NEAR(weighted.recall, wr, 1e-12);
    EXPECT_NEAR(weighted.recall, acc, 1e-12);
  }
}

TEST(Metrics, ParseAveraging) {
  EXPECT_EQ(parse_averaging("macro"), Averaging::macro);
  EXPECT_EQ(parse_averaging("weighted"), Averaging::weighted);
  EXPECT_EQ(parse_averaging("micro"), Averaging::micro);
  EXPECT_EQ(parse_averaging("none"), Averaging::none);
  EXPECT_THROW(parse_averaging("samples"), InputError);
}

TEST(Auc, MatchesPairwiseOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 30 + rng.below(40);
    std::vector<ClassLabel> truth(n);
    std::vector<double> scores(n * 3);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = kAllClasses[rng.below(3)];
      // Coarse scores force many ties.
      for (std::size_t c = 0; c < 3; ++c) scores[i * 3 + c] = static_cast<double>(rng.below(6)) / 5.0;
    }
    const auto r = auc(truth, scores);
    for (std::size_t c = 0; c < 3; ++c) {
      if (!r.defined[c]) continue;
      EXPECT_NEAR(r.per_class[c], brute_auc(truth, scores, c), 1e-12);
    }
  }
}

TEST(Auc, InvariantUnderMonotoneTransform) {
  Rng rng(6);
  const std::size_t n = 80;
  std::vector<ClassLabel> truth(n);
  std::vector<double> scores(n * 3), warped(n * 3);
  for (std::size_t i = 0; i < n; ++i) {
    truth[i] = kAllClasses[i % 3];
    for (std::size_t c = 0; c < 3; ++c) {
      scores[i * 3 + c] = rng.uniform(0.0, 1.0) + (class_index(truth[i]) == c ? 0.3 : 0.0);
      warped[i * 3 + c] = std::exp(3.0 * scores[i * 3 + c]) - 7.0;
    }
  }
  const auto a = auc(truth, scores), b = auc(truth, warped);
  for (std::size_t c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(a.per_class[c], b.per_class[c]);
}

TEST(Auc, PerfectSeparationAndConstantScores) {
  const std::vector<ClassLabel> truth{ClassLabel::normal, ClassLabel::neptune, ClassLabel::smurf, ClassLabel::smurf};
  std::vector<double> perfect(12, 0.0), flat(12, 1.0 / 3.0);
  for (std::size_t i = 0; i < 4; ++i) perfect[i * 3 + class_index(truth[i])] = 1.0;
  const auto a = auc(truth, perfect);
  EXPECT_DOUBLE_EQ(a.macro, 1.0);
  const auto b = auc(truth, flat);
  EXPECT_DOUBLE_EQ(b.macro, 0.5);
}

TEST(Auc, AbsentClassIsExcluded) {
  const std::vector<ClassLabel> truth{ClassLabel::normal, ClassLabel::smurf, ClassLabel::smurf};
  const std::vector<double> scores{0.9, 0.0, 0.1, 0.2, 0.0, 0.8, 0.3, 0.1, 0.6};
  const auto r = auc(truth, scores);
  EXPECT_FALSE(r.defined[1]);
  EXPECT_TRUE(r.any_undefined);
  EXPECT_DOUBLE_EQ(r.macro, (r.per_class[0] + r.per_class[2]) / 2.0);
  EXPECT_THROW(auc(truth, std::span(scores).first(8)), InputError);
}

TEST(Argmax, LowestIndexWinsTies) {
  const std::vector<double> a{0.2, 0.5, 0.5}, b{1.0, 1.0, 1.0};
  EXPECT_EQ(argmax(a), 1u);
  EXPECT_EQ(argmax(b), 0u);
}

namespace {

FeatureMatrix<float> synthetic_matrix(PreprocessorState* pre_out = nullptr) {
  fixtures::SyntheticKddOptions o;
  o.normal = o.neptune = o.smurf = 20;
  const auto ds = fixtures::synthetic_dataset(o);
  const auto pre = fit_preprocessor(ds);
  if (pre_out) *pre_out = pre;
  return transform<float>(pre, ds);
}

}  // namespace

TEST(Evaluate, ReportIsIndependentOfBatchSize) {
  const auto x = synthetic_matrix();
  Model<float> model(make_descriptor(ModelKind::cnn_lstm, x.cols), 3);
  const auto a = format_report(evaluate(model, x, 1));
  const auto b = format_report(evaluate(model, x, 20));
  const auto c = format_report(evaluate(model, x, 1000));
  EXPECT_EQ(a, b);
  EXPECT_EQ(b, c);
}

TEST(Evaluate, ConstantModelFlagsUndefinedPrecision) {
  const auto x = synthetic_matrix();
  Model<float> model(make_descriptor(ModelKind::dnn, x.cols), 3);
  for (const auto& t : model.named_tensors())
    if (t.trainable) {
      Tensor<float> h = t.tensor;
      for (auto& v : h.values()) v = 0.0f;
    }
  const auto r = evaluate(model, x, 20);
  EXPECT_EQ(r.cm.predicted_total(0), x.rows);
  EXPECT_TRUE(r.per_class[1].precision_undefined);
  EXPECT_TRUE(r.per_class[2].precision_undefined);
  EXPECT_DOUBLE_EQ(r.auc.macro, 0.5);
  EXPECT_NE(format_report(r).find("zero_denominator: class.neptune.precision"), std::string::npos) << format_report(r);
}

TEST(Evaluate, CheckpointWidthMismatch) {
  PreprocessorState pre;
  const auto x = synthetic_matrix(&pre);
  Model<float> model(make_descriptor(ModelKind::dnn, x.cols + 3), 3);
  const auto ckpt = make_checkpoint(model, pre, OptimizerConfig{}, OptimizerState<float>{}, TrainLog{});
  EXPECT_THROW(evaluate_checkpoint(ckpt, x, 20), CompatibilityError);
}

TEST(Report, ConfusionCsv) {
  EXPECT_EQ(confusion_csv(reference_matrix()),
            "predicted\\actual,normal,neptune,smurf,sum\n"
            "normal,59927,17,24,59968\n"
            "neptune,23,57984,0,58007\n"
            "smurf,640,0,164067,164707\n"
            "sum,60590,58001,164091,282682\n");
}

TEST(Report, KeysAndSixDecimals) {
  const std::vector<ClassLabel> truth{ClassLabel::normal, ClassLabel::neptune, ClassLabel::smurf};
  const std::vector<double> scores{0.8, 0.1, 0.1, 0.2, 0.7, 0.1, 0.1, 0.1, 0.8};
  const auto text = format_report(make_report(truth, truth, scores));
  for (const char* key : {"samples: 3\n", "accuracy: 1.000000\n", "precision_macro: 1.000000\n", "auc_macro: 1.000000\n",
                          "class.smurf.support: 1\n", "confusion.normal.normal: 1\n", "zero_denominator: none\n"})
    EXPECT_NE(text.find(key), std::string::npos) << key << "\n" << text;
}
