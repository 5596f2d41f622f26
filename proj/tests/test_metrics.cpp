#include "tractparc/metrics.hpp"

#include <gtest/gtest.h>

#include "tractparc/rng.hpp"

using namespace tractparc;

TEST(Accuracy, Basics) {
  const std::vector<int> a{0, 1, 2, 3};
  EXPECT_DOUBLE_EQ(accuracy(a, a), 1.0);
  const std::vector<int> pred{0, 1, 1, 2}, truth{0, 1, 2, 2};
  EXPECT_DOUBLE_EQ(accuracy(pred, truth), 0.75);
  const std::vector<int> p2{0, 0}, t2{1, 1};
  EXPECT_DOUBLE_EQ(accuracy(p2, t2), 0.0);
  EXPECT_THROW(accuracy(pred, p2), ShapeMismatch);
  EXPECT_THROW(accuracy(std::vector<int>{}, std::vector<int>{}), EmptyInput);
}

TEST(MacroF1, PerfectPredictions) {
  const std::vector<int> v{0, 1, 2, 0, 1, 2};
  const std::vector<int> scope{0, 1, 2};
  EXPECT_DOUBLE_EQ(macro_f1(v, v, scope, 3), 1.0);
}

TEST(MacroF1, HandComputedCase) {
  // truth [0,0,1,1], preds [0,1,1,1]: F1(0) = 2/3, F1(1) = 4/5, macro = 11/15.
  const std::vector<int> truth{0, 0, 1, 1}, pred{0, 1, 1, 1};
  const std::vector<int> scope{0, 1};
  EXPECT_NEAR(macro_f1(pred, truth, scope, 2), 11.0 / 15.0, 1e-12);
}

TEST(MacroF1, AbsentClassExcludedFromMean) {
  const std::vector<int> truth{0, 0, 1, 1}, pred{0, 1, 1, 1};
  const std::vector<int> scope{0, 1, 2};  // class 2 appears nowhere
  EXPECT_NEAR(macro_f1(pred, truth, scope, 3), 11.0 / 15.0, 1e-12);
  const std::vector<int> scope_only_absent{2};
  EXPECT_THROW(macro_f1(pred, truth, scope_only_absent, 3), EmptyInput);
}

TEST(MacroF1, ZeroPrecisionRecallGivesZeroF1) {
  // Class 0: predicted never, present in truth -> recall 0 -> F1 0.
  const std::vector<int> truth{0, 1}, pred{1, 1};
  const std::vector<int> scope{0};
  EXPECT_DOUBLE_EQ(macro_f1(pred, truth, scope, 2), 0.0);
}

TEST(MacroF1, ClassPermutationInvariance) {
  Rng rng(5);
  std::vector<int> pred, truth;
  for (int i = 0; i < 500; ++i) {
    pred.push_back(static_cast<int>(rng.uniform_int(4)));
    truth.push_back(static_cast<int>(rng.uniform_int(4)));
  }
  const std::vector<int> scope{0, 1, 2, 3};
  const double base_f1 = macro_f1(pred, truth, scope, 4);
  const double base_acc = accuracy(pred, truth);

  const std::vector<int> perm{2, 3, 1, 0};
  std::vector<int> ppred, ptruth;
  for (int v : pred) ppred.push_back(perm[static_cast<std::size_t>(v)]);
  for (int v : truth) ptruth.push_back(perm[static_cast<std::size_t>(v)]);
  EXPECT_NEAR(macro_f1(ppred, ptruth, scope, 4), base_f1, 1e-12);
  EXPECT_DOUBLE_EQ(accuracy(ppred, ptruth), base_acc);
}

TEST(Tir, ThresholdInclusiveAtTwenty) {
  std::vector<std::int64_t> counts{0, 20, 19, 500};
  const std::vector<int> expected{1};
  EXPECT_DOUBLE_EQ(tir(counts, expected, 20), 1.0);  // exactly 20: identified
  const std::vector<int> expected2{2};
  EXPECT_DOUBLE_EQ(tir(counts, expected2, 20), 0.0);  // 19: not identified
  const std::vector<int> four{0, 1, 2, 3};
  EXPECT_DOUBLE_EQ(tir(counts, four, 20), 0.5);
}

TEST(Tir, FractionAndMonotonicity) {
  std::vector<std::int64_t> counts{25, 12, 40, 3};
  const std::vector<int> expected{0, 1, 2, 3};
  EXPECT_DOUBLE_EQ(tir(counts, expected, 20), 0.5);  // 25 and 40 qualify
  double prev = -1.0;
  for (std::int64_t thr : {40, 30, 20, 10, 4, 1}) {
    const double r = tir(counts, expected, thr);
    EXPECT_GE(r, prev);
    prev = r;
  }
  EXPECT_THROW(tir(counts, std::vector<int>{}, 20), EmptyInput);
}

TEST(Atd, IdenticalTractIsZero) {
  std::vector<Vec3> tract;
  Rng rng(3);
  for (int i = 0; i < 100; ++i)
    tract.push_back({rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)});
  EXPECT_DOUBLE_EQ(mean_nearest_point_distance(tract, tract), 0.0);
}

TEST(Atd, TranslationAgainstPlanarAtlasGivesOffset) {
  // Atlas dense on the x = 0 plane; prediction shifted by (2, 0, 0): every
  // predicted point is exactly 2 mm from its nearest atlas point.
  std::vector<Vec3> atlas, predicted;
  for (int y = -20; y <= 20; ++y)
    for (int z = -20; z <= 20; ++z) atlas.push_back({0.0, 1.0 * y, 1.0 * z});
  for (int y = -10; y <= 10; ++y)
    for (int z = -10; z <= 10; ++z) predicted.push_back({2.0, 1.0 * y, 1.0 * z});
  EXPECT_DOUBLE_EQ(mean_nearest_point_distance(predicted, atlas), 2.0);

  // Brute-force oracle on a random subset confirms the nearest-point scan.
  Rng rng(8);
  double sum = 0.0;
  for (const auto& p : predicted) {
    double best = 1e300;
    for (const auto& a : atlas) best = std::min(best, distance(p, a));
    sum += best;
  }
  EXPECT_DOUBLE_EQ(sum / static_cast<double>(predicted.size()), 2.0);
}

TEST(Atd, UnidentifiedTractReportedMissingNotZero) {
  std::vector<std::vector<Vec3>> pred(3), atlas(3);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 30; ++i) atlas[static_cast<std::size_t>(c)].push_back({1.0 * c, 1.0 * i, 0.0});
  pred[1] = atlas[1];
  const std::vector<int> scope{1, 2};
  const std::vector<std::int64_t> counts{0, 30, 0};
  const AtdResult r = atd(pred, atlas, scope, counts, 20);
  ASSERT_EQ(r.per_tract.size(), 2u);
  EXPECT_TRUE(r.per_tract[0].second.has_value());
  EXPECT_DOUBLE_EQ(*r.per_tract[0].second, 0.0);
  EXPECT_FALSE(r.per_tract[1].second.has_value());  // missing, not zero
  ASSERT_TRUE(r.mean_mm.has_value());
  EXPECT_DOUBLE_EQ(*r.mean_mm, 0.0);
}

TEST(EvaluateSplit, AllUnaffectedMirrorsAllGroup) {
  const std::vector<int> pred{0, 1, 2, 1}, truth{0, 1, 2, 2};
  const std::vector<CutStatus> status(4, CutStatus::Unaffected);
  const std::vector<int> scope{1, 2};
  const EvalReport r = evaluate_split(pred, truth, status, 3, scope);
  EXPECT_EQ(r.all.n, 4);
  EXPECT_EQ(r.unaffected.n, 4);
  EXPECT_DOUBLE_EQ(*r.all.accuracy, *r.unaffected.accuracy);
  EXPECT_EQ(r.cut.n, 0);
  EXPECT_FALSE(r.cut.accuracy.has_value());  // empty group flagged
}

TEST(EvaluateSplit, HandBuiltGroups) {
  // 6 streamlines, 2 cut. Cut group: both wrong. Unaffected: all right.
  const std::vector<int> truth{0, 1, 2, 0, 1, 2};
  const std::vector<int> pred{0, 1, 2, 0, 2, 1};
  const std::vector<CutStatus> status{CutStatus::Unaffected, CutStatus::Unaffected,
                                      CutStatus::Unaffected, CutStatus::Unaffected,
                                      CutStatus::Cut, CutStatus::Cut};
  const std::vector<int> scope{0, 1, 2};
  const EvalReport r = evaluate_split(pred, truth, status, 3, scope);
  EXPECT_DOUBLE_EQ(*r.all.accuracy, 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(*r.cut.accuracy, 0.0);
  EXPECT_DOUBLE_EQ(*r.unaffected.accuracy, 1.0);
}

TEST(EvaluateSplit, GroupConfusionCountsRecombine) {
  Rng rng(44);
  std::vector<int> pred, truth;
  std::vector<CutStatus> status;
  for (int i = 0; i < 1000; ++i) {
    pred.push_back(static_cast<int>(rng.uniform_int(5)));
    truth.push_back(static_cast<int>(rng.uniform_int(5)));
    status.push_back(rng.uniform01() < 0.3 ? CutStatus::Cut : CutStatus::Unaffected);
  }
  const std::vector<int> scope{1, 2, 3, 4};
  const EvalReport r = evaluate_split(pred, truth, status, 5, scope);
  for (int c = 0; c < 5; ++c) {
    EXPECT_EQ(r.all.counts[static_cast<std::size_t>(c)].tp,
              r.cut.counts[static_cast<std::size_t>(c)].tp +
                  r.unaffected.counts[static_cast<std::size_t>(c)].tp);
    EXPECT_EQ(r.all.counts[static_cast<std::size_t>(c)].fp,
              r.cut.counts[static_cast<std::size_t>(c)].fp +
                  r.unaffected.counts[static_cast<std::size_t>(c)].fp);
    EXPECT_EQ(r.all.counts[static_cast<std::size_t>(c)].fn,
              r.cut.counts[static_cast<std::size_t>(c)].fn +
                  r.unaffected.counts[static_cast<std::size_t>(c)].fn);
  }
}

TEST(EvaluateSplit, ReportJsonRoundTrip) {
  const std::vector<int> truth{0, 1, 2, 0, 1, 2};
  const std::vector<int> pred{0, 1, 2, 0, 2, 1};
  const std::vector<CutStatus> status{CutStatus::Cut,        CutStatus::Unaffected,
                                      CutStatus::Unaffected, CutStatus::Cut,
                                      CutStatus::Unaffected, CutStatus::Cut};
  const std::vector<int> scope{1, 2};
  EvalReport r = evaluate_split(pred, truth, status, 3, scope);
  r.method = "unit";
  r.class_names = {"other", "a", "b"};
  r.tir_mean = 0.75;
  r.tir_per_subject = {{"s0", 0.5}, {"s1", 1.0}};
  r.atd_mean_mm = 1.25;
  r.atd_per_tract = {{1, 1.25}, {2, std::nullopt}};

  const nlohmann::json j = report_to_json(r);
  const EvalReport back = report_from_json(j);
  EXPECT_EQ(back.method, r.method);
  EXPECT_EQ(back.class_names, r.class_names);
  EXPECT_DOUBLE_EQ(*back.all.accuracy, *r.all.accuracy);
  EXPECT_DOUBLE_EQ(*back.cut.accuracy, *r.cut.accuracy);
  EXPECT_EQ(back.cut.n, r.cut.n);
  EXPECT_DOUBLE_EQ(*back.tir_mean, 0.75);
  EXPECT_EQ(back.tir_per_subject.size(), 2u);
  EXPECT_DOUBLE_EQ(*back.atd_mean_mm, 1.25);
  ASSERT_EQ(back.atd_per_tract.size(), 2u);
  EXPECT_FALSE(back.atd_per_tract[1].second.has_value());
}

TEST(EvaluateSplit, CsvHasDocumentedHeader) {
  const std::vector<int> v{0, 1};
  const std::vector<CutStatus> status{CutStatus::Unaffected, CutStatus::Cut};
  const std::vector<int> scope{1};
  EvalReport r = evaluate_split(v, v, status, 2, scope);
  const std::string csv = report_to_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "method,group,n_streamlines,accuracy,macro_f1,tir,atd_mm");
  // One row per group after the header.
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}
