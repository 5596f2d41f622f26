#include "tractparc/network.hpp"

#include <gtest/gtest.h>

#include <filesystem>

#include "gradcheck_util.hpp"
#include "tractparc/model_io.hpp"
#include "tractparc/rng.hpp"
#include "tractparc/train.hpp"

using namespace tractparc;
using testutil::draw_gradcheck_case;
using testutil::gradcheck;
using testutil::oracle_forward;

namespace {

ModelConfig small_config(int n_points, int k_local, int k_global, int d0,
                         std::vector<int> head, int classes) {
  ModelConfig cfg;
  cfg.n_points = n_points;
  cfg.k_local = k_local;
  cfg.k_global = k_global;
  cfg.repr_dim = d0;
  cfg.head_widths = std::move(head);
  cfg.num_classes = classes;
  cfg.batch_size = 16;
  cfg.epochs = 20;
  cfg.seed = 1;
  return cfg;
}

ContextInput random_input(const ModelConfig& cfg, Rng& rng) {
  ContextInput in;
  in.rows = cfg.context_rows();
  in.width = cfg.input_width();
  in.data.resize(static_cast<std::size_t>(in.rows) * in.width);
  for (auto& v : in.data) v = rng.uniform(-1.0, 1.0);
  return in;
}

// Two well-separated straight-line classes for end-to-end training checks.
ContextDataset separable_toy_dataset(int per_class, std::uint64_t seed) {
  Rng rng(seed);
  Tractogram t;
  t.subject_id = "toy";
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < per_class; ++i) {
      Streamline s;
      const double x = c == 0 ? rng.uniform(-1.0, 1.0) : 20.0 + rng.uniform(-1.0, 1.0);
      for (int k = 0; k < 5; ++k) s.points.push_back({x, 0.3 * i, 2.0 * k});
      s.label = c;
      t.streamlines.push_back(std::move(s));
    }
  return assemble_dataset({t}, 5, 2, 2, seed, compute_normalization({t}), 1);
}

}  // namespace

TEST(Forward, PermutationOfContextRowsIsExactlyInvariant) {
  Rng rng(42);
  const ModelConfig cfg = small_config(4, 3, 4, 8, {6}, 3);
  const ModelParams params = init_params(cfg);
  for (int trial = 0; trial < 20; ++trial) {
    ContextInput in = random_input(cfg, rng);
    const auto base = forward(params, in);

    ContextInput shuffled = in;
    std::vector<int> perm;
    for (int r = 1; r < in.rows; ++r) perm.push_back(r);
    for (std::size_t i = perm.size(); i > 1; --i)
      std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.uniform_int(i))]);
    for (int r = 1; r < in.rows; ++r)
      std::copy(in.row(perm[static_cast<std::size_t>(r - 1)]),
                in.row(perm[static_cast<std::size_t>(r - 1)]) + in.width,
                shuffled.data.begin() + static_cast<std::ptrdiff_t>(r) * in.width);
    const auto permuted = forward(params, shuffled);
    for (std::size_t c = 0; c < base.size(); ++c)
      EXPECT_EQ(base[c], permuted[c]);  // bitwise equality, not approximate
  }
}

TEST(Forward, ZeroNetworkGivesZeroLogitsAndClassZero) {
  const ModelConfig cfg = small_config(4, 2, 2, 6, {5}, 4);
  const ModelParams zeros = make_zero_params(cfg);
  Rng rng(7);
  const ContextInput in = random_input(cfg, rng);
  const auto logits = forward(zeros, in);
  for (double v : logits) EXPECT_DOUBLE_EQ(v, 0.0);
  EXPECT_EQ(predict(zeros, in), 0);
}

TEST(Forward, SelfOnlyContextMatchesDenseOracle) {
  const ModelConfig cfg = small_config(5, 0, 0, 7, {6, 4}, 3);
  const ModelParams params = init_params(cfg);
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    ContextInput in = random_input(cfg, rng);
    ASSERT_EQ(in.rows, 1);
    // Force the [A; A] structure of a self-pair row.
    const int half = in.width / 2;
    for (int i = 0; i < half; ++i) in.data[static_cast<std::size_t>(half + i)] = in.data[static_cast<std::size_t>(i)];
    const auto lib = forward(params, in);
    const auto oracle = oracle_forward(params, in);
    ASSERT_EQ(lib.size(), oracle.size());
    for (std::size_t c = 0; c < lib.size(); ++c) EXPECT_NEAR(lib[c], oracle[c], 1e-9);
  }
}

TEST(Forward, ShapeAndFinitenessChecked) {
  const ModelConfig cfg = small_config(4, 1, 1, 4, {4}, 2);
  const ModelParams params = init_params(cfg);
  Rng rng(1);
  ContextInput bad = random_input(cfg, rng);
  bad.width -= 2;
  bad.data.resize(static_cast<std::size_t>(bad.rows) * bad.width);
  EXPECT_THROW(forward(params, bad), ShapeMismatch);
  ContextInput nan_in = random_input(cfg, rng);
  nan_in.data[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(forward(params, nan_in), NonFiniteInput);
}

TEST(Loss, UniformLogitsGiveLnC) {
  for (int c : {2, 3, 5, 74}) {
    const ModelConfig cfg = small_config(4, 1, 1, 4, {4}, c);
    const ModelParams zeros = make_zero_params(cfg);
    Rng rng(13);
    std::vector<ContextInput> batch{random_input(cfg, rng), random_input(cfg, rng)};
    const std::vector<int> labels{0, c - 1};
    const LossGrad lg = loss_and_grad(zeros, batch, labels);
    EXPECT_DOUBLE_EQ(lg.loss, std::log(static_cast<double>(c)));
  }
}

TEST(Loss, SpecExampleGradientsMatchFiniteDifferences) {
  // m = 3, d0 = 4, C = 3, 2 samples.
  const ModelConfig cfg = small_config(3, 1, 1, 4, {5}, 3);
  Rng rng(2025);
  for (int trial = 0; trial < 5; ++trial) {
    auto draw = draw_gradcheck_case(cfg, 2, rng);
    if (draw.diag.min_abs_preact < 1e-3 || draw.diag.min_pool_margin < 1e-3) continue;
    const auto res = gradcheck(cfg, draw.params, draw.batch, draw.labels);
    EXPECT_LE(res.max_rel_err, 1e-4) << "trial " << trial;
  }
}

TEST(Loss, DuplicatedBatchKeepsLossAndGradients) {
  const ModelConfig cfg = small_config(4, 2, 1, 6, {5}, 3);
  const ModelParams params = init_params(cfg);
  Rng rng(3);
  std::vector<ContextInput> batch{random_input(cfg, rng), random_input(cfg, rng)};
  std::vector<int> labels{1, 2};
  const LossGrad base = loss_and_grad(params, batch, labels);

  std::vector<ContextInput> doubled{batch[0], batch[0], batch[1], batch[1]};
  std::vector<int> dlabels{1, 1, 2, 2};
  const LossGrad dup = loss_and_grad(params, doubled, dlabels);
  EXPECT_NEAR(dup.loss, base.loss, 1e-12);
  const auto ga = testutil::flatten(base.grads);
  const auto gb = testutil::flatten(dup.grads);
  for (std::size_t i = 0; i < ga.size(); ++i) EXPECT_NEAR(ga[i], gb[i], 1e-12);
}

TEST(Loss, LabelOutOfRangeThrows) {
  const ModelConfig cfg = small_config(4, 1, 1, 4, {4}, 3);
  const ModelParams params = init_params(cfg);
  Rng rng(5);
  std::vector<ContextInput> batch{random_input(cfg, rng)};
  EXPECT_THROW(loss_and_grad(params, batch, std::vector<int>{3}), LabelOutOfRange);
  EXPECT_THROW(loss_and_grad(params, batch, std::vector<int>{-1}), LabelOutOfRange);
}

TEST(Adam, ZeroGradientIsFixedPoint) {
  ModelParams p;
  p.layers.emplace_back(2, 3);
  for (auto& w : p.layers[0].W) w = 0.5;
  ModelParams g;
  g.layers.emplace_back(2, 3);
  OptimState st = make_optim_state(p);
  const ModelParams before = p;
  for (int i = 0; i < 10; ++i) adam_step(st, p, g, 0.01);
  for (std::size_t i = 0; i < p.layers[0].W.size(); ++i)
    EXPECT_DOUBLE_EQ(p.layers[0].W[i], before.layers[0].W[i]);
  EXPECT_EQ(st.step, 10);
}

TEST(Adam, ClosedFormFirstStep) {
  ModelParams p;
  p.layers.emplace_back(1, 1);
  ModelParams g;
  g.layers.emplace_back(1, 1);
  g.layers[0].W[0] = 1.0;
  OptimState st = make_optim_state(p);
  adam_step(st, p, g, 0.001);
  // mhat = vhat = 1 after bias correction: update = -lr / (1 + eps).
  EXPECT_NEAR(p.layers[0].W[0], -0.001 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, ElementwiseIndependence) {
  ModelParams p;
  p.layers.emplace_back(1, 2);
  p.layers[0].W = {0.3, 0.3};
  ModelParams g;
  g.layers.emplace_back(1, 2);
  g.layers[0].W = {0.7, 0.7};
  OptimState st = make_optim_state(p);
  for (int i = 0; i < 5; ++i) adam_step(st, p, g, 0.01);
  EXPECT_DOUBLE_EQ(p.layers[0].W[0], p.layers[0].W[1]);
}

TEST(Train, SeparableToyReachesHighAccuracy) {
  ContextDataset ds = separable_toy_dataset(32, 7);
  ModelConfig cfg = small_config(5, 2, 2, 8, {8}, 2);
  cfg.epochs = 20;
  cfg.seed = 3;
  const TrainResult r = train_model(cfg, ds, nullptr, 1);
  EXPECT_GE(dataset_accuracy(r.final_, ds), 0.99);
}

TEST(Train, SameSeedBitIdenticalLog) {
  ContextDataset ds = separable_toy_dataset(16, 9);
  ModelConfig cfg = small_config(5, 2, 2, 6, {6}, 2);
  cfg.epochs = 5;
  cfg.seed = 77;
  const TrainResult a = train_model(cfg, ds, &ds, 1);
  const TrainResult b = train_model(cfg, ds, &ds, 1);
  ASSERT_EQ(a.log.size(), b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].train_loss, b.log[i].train_loss);
    EXPECT_EQ(a.log[i].train_accuracy, b.log[i].train_accuracy);
    EXPECT_EQ(*a.log[i].val_accuracy, *b.log[i].val_accuracy);
  }
  const auto fa = testutil::flatten(a.final_);
  const auto fb = testutil::flatten(b.final_);
  for (std::size_t i = 0; i < fa.size(); ++i) EXPECT_EQ(fa[i], fb[i]);
}

TEST(Train, JobsDoNotChangeParameters) {
  ContextDataset ds = separable_toy_dataset(16, 10);
  ModelConfig cfg = small_config(5, 2, 2, 6, {6}, 2);
  cfg.epochs = 3;
  cfg.seed = 12;
  const auto fa = testutil::flatten(train_model(cfg, ds, &ds, 1).final_);
  const auto fb = testutil::flatten(train_model(cfg, ds, &ds, 4).final_);
  ASSERT_EQ(fa.size(), fb.size());
  for (std::size_t i = 0; i < fa.size(); ++i) EXPECT_EQ(fa[i], fb[i]);
}

TEST(Train, ZeroLearningRateLeavesParamsUnchanged) {
  ContextDataset ds = separable_toy_dataset(16, 11);
  ModelConfig cfg = small_config(5, 2, 2, 6, {6}, 2);
  cfg.epochs = 3;
  cfg.learning_rate = 0.0;
  cfg.seed = 5;
  const TrainResult r = train_model(cfg, ds, nullptr, 1);
  const auto init = testutil::flatten(init_params(cfg));
  const auto fin = testutil::flatten(r.final_);
  for (std::size_t i = 0; i < init.size(); ++i) EXPECT_EQ(init[i], fin[i]);
  for (std::size_t e = 1; e < r.log.size(); ++e)
    EXPECT_DOUBLE_EQ(r.log[e].train_loss, r.log[0].train_loss);
}

TEST(Train, LossDecreasesInFirstEpochAcrossSeeds) {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    ContextDataset ds = separable_toy_dataset(32, 100 + seed);
    ModelConfig cfg = small_config(5, 2, 2, 8, {8}, 2);
    cfg.epochs = 1;
    cfg.seed = seed;
    const ModelParams initial = init_params(cfg);
    std::vector<ContextInput> all;
    std::vector<int> labels;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      all.push_back(ds.materialize(i));
      labels.push_back(ds.samples[i].label);
    }
    const double initial_loss = loss_and_grad(initial, all, labels).loss;
    const TrainResult r = train_model(cfg, ds, nullptr, 1);
    EXPECT_LT(r.log[0].train_loss, initial_loss) << "seed " << seed;
  }
}

TEST(Train, EmptyDatasetAndBadLabelsRejected) {
  ModelConfig cfg = small_config(5, 2, 2, 6, {6}, 2);
  ContextDataset empty;
  empty.n_points = 5;
  empty.k_local = 2;
  empty.k_global = 2;
  EXPECT_THROW(train_model(cfg, empty, nullptr, 1), EmptyDataset);

  ContextDataset ds = separable_toy_dataset(4, 1);
  ds.samples[0].label = 5;  // >= num_classes
  EXPECT_THROW(train_model(cfg, ds, nullptr, 1), LabelOutOfRange);
  ds.samples[0].label = -1;
  EXPECT_THROW(train_model(cfg, ds, nullptr, 1), MissingLabel);
}

TEST(Predict, ArgmaxAndTieBreak) {
  EXPECT_EQ(argmax_lowest(std::vector<double>{0.1, 0.9, 0.3}), 1);
  EXPECT_EQ(argmax_lowest(std::vector<double>{0.5, 0.2, 0.5}), 0);  // exact tie: lower index
  EXPECT_EQ(argmax_lowest(std::vector<double>{-1.0, -2.0}), 0);
}

TEST(Predict, BatchEqualsPerSample) {
  const ModelConfig cfg = small_config(4, 2, 3, 8, {6}, 4);
  const ModelParams params = init_params(cfg);
  Rng rng(21);
  ContextDataset ds;
  {
    Tractogram t;
    t.subject_id = "p";
    for (int i = 0; i < 30; ++i) {
      Streamline s;
      for (int k = 0; k < 4; ++k)
        s.points.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)});
      s.label = i % 4;
      t.streamlines.push_back(std::move(s));
    }
    ds = assemble_dataset({t}, 4, 2, 3, 8, {}, 1);
  }
  const auto batch_preds = predict_dataset(params, ds, 3);
  for (std::size_t i = 0; i < ds.samples.size(); ++i)
    EXPECT_EQ(batch_preds[i], predict(params, ds.materialize(i)));
}

TEST(ModelIo, RoundTripIsExact) {
  ModelConfig cfg = small_config(5, 3, 4, 10, {12, 6}, 5);
  cfg.norm.center = Vec3{1.5, -2.25, 0.0625};
  cfg.norm.scale = 83.7;
  cfg.seed = 991;
  const ModelParams params = init_params(cfg);
  const auto dir = std::filesystem::temp_directory_path() / "tractparc_model_io";
  std::filesystem::create_directories(dir);
  const std::string base = (dir / "model").string();
  save_model(base, cfg, params, {"a", "b", "c", "d", "e"});
  const ModelFile loaded = load_model(base + ".json");

  EXPECT_EQ(loaded.config.n_points, cfg.n_points);
  EXPECT_EQ(loaded.config.k_local, cfg.k_local);
  EXPECT_EQ(loaded.config.k_global, cfg.k_global);
  EXPECT_EQ(loaded.config.repr_dim, cfg.repr_dim);
  EXPECT_EQ(loaded.config.head_widths, cfg.head_widths);
  EXPECT_EQ(loaded.config.num_classes, cfg.num_classes);
  EXPECT_EQ(loaded.config.seed, cfg.seed);
  EXPECT_EQ(loaded.config.norm.center.x, cfg.norm.center.x);
  EXPECT_EQ(loaded.config.norm.scale, cfg.norm.scale);
  EXPECT_EQ(loaded.class_names, (std::vector<std::string>{"a", "b", "c", "d", "e"}));

  const auto pa = testutil::flatten(params);
  const auto pb = testutil::flatten(loaded.params);
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i], pb[i]);
  std::filesystem::remove_all(dir);
}
