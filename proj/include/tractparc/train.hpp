#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "tractparc/context.hpp"
#include "tractparc/errors.hpp"
#include "tractparc/network.hpp"
#include "tractparc/parallel.hpp"
#include "tractparc/rng.hpp"

namespace tractparc {

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> val_accuracy;
};

struct TrainResult {
  ModelParams best;    // highest validation accuracy (earliest epoch on ties)
  ModelParams final_;  // parameters after the last epoch
  std::vector<EpochRecord> log;
  int best_epoch = 0;
};

namespace detail {

// Gradient and loss accumulation uses a fixed number of batch chunks so the
// floating-point reduction tree does not depend on the worker count: chunk c
// is always the same contiguous slice of the batch, partials are summed in
// chunk order.
constexpr int kGradChunks = 16;

inline void zero_grads(ModelParams& g) {
  for_each_block(g, [](std::vector<double>& v) { std::fill(v.begin(), v.end(), 0.0); });
}

inline void add_grads(ModelParams& acc, const ModelParams& g) {
  for (std::size_t li = 0; li < acc.layers.size(); ++li) {
    auto& a = acc.layers[li];
    const auto& b = g.layers[li];
    for (std::size_t i = 0; i < a.W.size(); ++i) a.W[i] += b.W[i];
    for (std::size_t i = 0; i < a.b.size(); ++i) a.b[i] += b.b[i];
  }
}

}  // namespace detail

// Per-sample predictions for a dataset; embarrassingly parallel.
inline std::vector<int> predict_dataset(const ModelParams& params, const ContextDataset& ds,
                                        int jobs = 1) {
  std::vector<int> preds(ds.samples.size(), 0);
  const auto chunks = fixed_chunks(static_cast<std::int64_t>(ds.samples.size()),
                                   std::max(1, resolve_jobs(jobs) * 4));
  parallel_chunks(static_cast<int>(chunks.size()), jobs, [&](int c) {
    detail::NetWorkspace ws;
    std::vector<double> logits;
    for (std::int64_t i = chunks[static_cast<std::size_t>(c)].first;
         i < chunks[static_cast<std::size_t>(c)].second; ++i) {
      const ContextSample& s = ds.samples[static_cast<std::size_t>(i)];
      detail::forward_core(params,
                           detail::IdRows{&ds, &s, ds.anchor_coords(s)},
                           ds.context_rows(), ws, logits);
      preds[static_cast<std::size_t>(i)] = argmax_lowest(logits);
    }
  });
  return preds;
}

inline double dataset_accuracy(const ModelParams& params, const ContextDataset& ds,
                               int jobs = 1) {
  if (ds.samples.empty()) throw EmptyInput("accuracy of an empty dataset");
  const std::vector<int> preds = predict_dataset(params, ds, jobs);
  std::int64_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (preds[i] == ds.samples[i].label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

// Shuffled mini-batch training with Adam. Deterministic given config.seed:
// shuffles use the (seed, "shuffle", epoch) substream and gradient reductions
// use fixed chunking, so any --jobs value yields bit-identical parameters.
inline TrainResult train_model(const ModelConfig& cfg, const ContextDataset& train_set,
                               const ContextDataset* val_set = nullptr, int jobs = 1) {
  cfg.validate();
  if (train_set.samples.empty()) throw EmptyDataset("training set is empty");
  for (const auto& s : train_set.samples) {
    if (s.label < 0) throw MissingLabel("training sample without a label");
    if (s.label >= cfg.num_classes)
      throw LabelOutOfRange("label " + std::to_string(s.label) + " >= num_classes " +
                            std::to_string(cfg.num_classes));
  }
  if (train_set.row_width() != cfg.input_width() ||
      train_set.context_rows() != cfg.context_rows())
    throw ShapeMismatch("dataset shape does not match the model config");

  TrainResult result;
  ModelParams params = init_params(cfg);
  OptimState optim = make_optim_state(params);

  std::vector<ModelParams> chunk_grads(detail::kGradChunks);
  std::vector<detail::NetWorkspace> chunk_ws(detail::kGradChunks);
  for (auto& g : chunk_grads) g = make_zero_params(cfg);
  ModelParams grads = make_zero_params(cfg);

  const std::int64_t n = static_cast<std::int64_t>(train_set.samples.size());
  std::vector<std::int32_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  double best_val = -1.0;
  result.best_epoch = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng shuffle_rng = Rng::substream(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch));
    for (std::int64_t i = n - 1; i > 0; --i) {
      const std::int64_t j =
          static_cast<std::int64_t>(shuffle_rng.uniform_int(static_cast<std::uint64_t>(i + 1)));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    double epoch_loss_sum = 0.0;
    std::int64_t epoch_correct = 0;
    for (std::int64_t batch_begin = 0; batch_begin < n; batch_begin += cfg.batch_size) {
      const std::int64_t batch_end = std::min<std::int64_t>(n, batch_begin + cfg.batch_size);
      const std::int64_t batch_n = batch_end - batch_begin;
      const double scale = 1.0 / static_cast<double>(batch_n);
      const auto chunks = fixed_chunks(batch_n, detail::kGradChunks);

      std::vector<double> chunk_loss(chunks.size(), 0.0);
      std::vector<std::int64_t> chunk_correct(chunks.size(), 0);
      parallel_chunks(static_cast<int>(chunks.size()), jobs, [&](int c) {
        auto& g = chunk_grads[static_cast<std::size_t>(c)];
        auto& ws = chunk_ws[static_cast<std::size_t>(c)];
        detail::zero_grads(g);
        double loss = 0.0;
        std::int64_t correct = 0;
        for (std::int64_t bi = chunks[static_cast<std::size_t>(c)].first;
             bi < chunks[static_cast<std::size_t>(c)].second; ++bi) {
          const ContextSample& s =
              train_set.samples[static_cast<std::size_t>(order[static_cast<std::size_t>(batch_begin + bi)])];
          loss += detail::sample_loss_grad(
              params, detail::IdRows{&train_set, &s, train_set.anchor_coords(s)},
              train_set.context_rows(), s.label, scale, g, ws);
          if (argmax_lowest(ws.acts.back()) == s.label) ++correct;
        }
        chunk_loss[static_cast<std::size_t>(c)] = loss;
        chunk_correct[static_cast<std::size_t>(c)] = correct;
      });

      detail::zero_grads(grads);
      double batch_loss = 0.0;
      for (std::size_t c = 0; c < chunks.size(); ++c) {
        detail::add_grads(grads, chunk_grads[c]);
        batch_loss += chunk_loss[c];
        epoch_correct += chunk_correct[c];
      }
      adam_step(optim, params, grads, cfg.learning_rate);
      epoch_loss_sum += batch_loss * static_cast<double>(batch_n);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss_sum / static_cast<double>(n);
    rec.train_accuracy = static_cast<double>(epoch_correct) / static_cast<double>(n);
    if (val_set && !val_set->samples.empty()) {
      rec.val_accuracy = dataset_accuracy(params, *val_set, jobs);
      if (*rec.val_accuracy > best_val) {
        best_val = *rec.val_accuracy;
        result.best = params;
        result.best_epoch = epoch;
      }
    }
    result.log.push_back(rec);
  }

  result.final_ = params;
  if (best_val < 0.0) {
    result.best = result.final_;
    result.best_epoch = cfg.epochs;
  }
  return result;
}

}  // namespace tractparc
