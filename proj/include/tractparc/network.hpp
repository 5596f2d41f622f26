#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tractparc/context.hpp"
#include "tractparc/errors.hpp"
#include "tractparc/rng.hpp"

namespace tractparc {

// Streamline classifier: a shared fully connected layer with ReLU applied to
// every context row, max-pooled over rows into the local-global
// representation, then a ReLU MLP head and a linear output layer. The
// spatial-transformer stage of the original point network is deliberately
// absent so absolute streamline position is preserved. All arithmetic is
// 64-bit and summation orders are fixed, which keeps training deterministic
// and gradients finite-difference checkable.

struct ModelConfig {
  int n_points = 15;
  int k_local = 20;
  int k_global = 500;
  int repr_dim = 64;
  std::vector<int> head_widths{128, 256};
  int num_classes = 2;
  double learning_rate = 1e-3;
  int batch_size = 1024;
  int epochs = 20;
  std::uint64_t seed = 0;
  Normalization norm;

  int input_width() const { return 2 * n_points * 3; }
  int context_rows() const { return 1 + k_local + k_global; }

  void validate() const {
    if (n_points < 2) throw InvalidSpec("n_points must be >= 2");
    if (k_local < 0 || k_global < 0) throw InvalidSpec("context sizes must be >= 0");
    if (repr_dim < 1) throw InvalidSpec("repr_dim must be >= 1");
    for (int w : head_widths)
      if (w < 1) throw InvalidSpec("head widths must be >= 1");
    if (num_classes < 2) throw InvalidSpec("num_classes must be >= 2");
    if (!(learning_rate >= 0.0)) throw InvalidSpec("learning rate must be >= 0");
    if (batch_size < 1) throw InvalidSpec("batch_size must be >= 1");
    if (epochs < 0) throw InvalidSpec("epochs must be >= 0");
  }
};

struct LinearLayer {
  int out_dim = 0, in_dim = 0;
  std::vector<double> W;  // row-major out_dim x in_dim
  std::vector<double> b;  // out_dim

  LinearLayer() = default;
  LinearLayer(int out, int in)
      : out_dim(out), in_dim(in),
        W(static_cast<std::size_t>(out) * in, 0.0), b(static_cast<std::size_t>(out), 0.0) {}
};

struct ModelParams {
  // layers[0] is the shared representation layer over context rows; the rest
  // form the head; layers.back() maps to class logits.
  std::vector<LinearLayer> layers;

  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.W.size() + l.b.size();
    return n;
  }
};

template <typename F>
void for_each_block(ModelParams& p, F&& f) {
  for (auto& l : p.layers) {
    f(l.W);
    f(l.b);
  }
}
template <typename F>
void for_each_block(const ModelParams& p, F&& f) {
  for (const auto& l : p.layers) {
    f(l.W);
    f(l.b);
  }
}

inline ModelParams make_zero_params(const ModelConfig& cfg) {
  cfg.validate();
  ModelParams p;
  p.layers.emplace_back(cfg.repr_dim, cfg.input_width());
  int prev = cfg.repr_dim;
  for (int w : cfg.head_widths) {
    p.layers.emplace_back(w, prev);
    prev = w;
  }
  p.layers.emplace_back(cfg.num_classes, prev);
  return p;
}

// Symmetric uniform init in +-sqrt(6 / (fan_in + fan_out)), biases zero.
inline ModelParams init_params(const ModelConfig& cfg) {
  ModelParams p = make_zero_params(cfg);
  for (std::size_t li = 0; li < p.layers.size(); ++li) {
    Rng rng = Rng::substream(cfg.seed, "init", li);
    LinearLayer& l = p.layers[li];
    const double bound = std::sqrt(6.0 / (l.in_dim + l.out_dim));
    for (auto& w : l.W) w = rng.uniform(-bound, bound);
  }
  return p;
}

namespace detail {

inline double dot_n(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// Scratch buffers reused across samples; one instance per worker.
struct NetWorkspace {
  std::vector<double> repr;                  // repr_dim: pooled representation
  std::vector<int> argmax_row;               // repr_dim: pooling winner per feature
  std::vector<double> dlogits;
  std::vector<std::vector<double>> acts;     // post-ReLU head activations + logits
  std::vector<std::vector<double>> deltas;   // backward temporaries
};

// Rows are presented as (first_half, second_half) pointer pairs so the
// materialized ContextInput path and the id-based training path run the exact
// same arithmetic.
template <typename RowSource>
void forward_core(const ModelParams& params, const RowSource& rows, int n_rows,
                  NetWorkspace& ws, std::vector<double>& logits) {
  if (n_rows < 1) throw ShapeMismatch("forward needs at least one context row");
  const LinearLayer& l0 = params.layers.front();
  const int half = l0.in_dim / 2;
  const int d0 = l0.out_dim;
  ws.repr.assign(static_cast<std::size_t>(d0), 0.0);
  ws.argmax_row.assign(static_cast<std::size_t>(d0), -1);

  for (int j = 0; j < n_rows; ++j) {
    const double* first = rows.first_half(j);
    const double* second = rows.second_half(j);
    for (int f = 0; f < d0; ++f) {
      const double* wrow = l0.W.data() + static_cast<std::size_t>(f) * l0.in_dim;
      const double pre = (dot_n(wrow, first, half) + dot_n(wrow + half, second, half)) + l0.b[static_cast<std::size_t>(f)];
      const double h = pre > 0.0 ? pre : 0.0;
      if (j == 0 || h > ws.repr[static_cast<std::size_t>(f)]) {
        ws.repr[static_cast<std::size_t>(f)] = h;
        ws.argmax_row[static_cast<std::size_t>(f)] = j;
      }
    }
  }

  const std::size_t n_layers = params.layers.size();
  ws.acts.resize(n_layers);  // acts[0] = repr copy for uniform indexing
  ws.acts[0] = ws.repr;
  for (std::size_t li = 1; li < n_layers; ++li) {
    const LinearLayer& l = params.layers[li];
    auto& out = ws.acts[li];
    out.assign(static_cast<std::size_t>(l.out_dim), 0.0);
    const auto& in = ws.acts[li - 1];
    const bool is_output = li + 1 == n_layers;
    for (int o = 0; o < l.out_dim; ++o) {
      const double v =
          dot_n(l.W.data() + static_cast<std::size_t>(o) * l.in_dim, in.data(), l.in_dim) +
          l.b[static_cast<std::size_t>(o)];
      out[static_cast<std::size_t>(o)] = is_output ? v : (v > 0.0 ? v : 0.0);
    }
  }
  logits = ws.acts.back();
}

struct MatrixRows {
  const double* data;
  int width;
  const double* first_half(int j) const { return data + static_cast<std::size_t>(j) * width; }
  const double* second_half(int j) const {
    return data + static_cast<std::size_t>(j) * width + width / 2;
  }
};

struct IdRows {
  const ContextDataset* ds;
  const ContextSample* sample;
  const double* anchor;
  const double* first_half(int) const { return anchor; }
  const double* second_half(int j) const {
    return j == 0 ? anchor : ds->streamline(sample->tract, sample->context[static_cast<std::size_t>(j - 1)]);
  }
};

inline void check_input(const ModelParams& params, const ContextInput& in) {
  if (params.layers.empty()) throw ShapeMismatch("uninitialized model");
  if (in.width != params.layers.front().in_dim)
    throw ShapeMismatch("input width " + std::to_string(in.width) + ", model expects " +
                        std::to_string(params.layers.front().in_dim));
  for (double v : in.data)
    if (!std::isfinite(v)) throw NonFiniteInput("non-finite value in network input");
}

}  // namespace detail

inline std::vector<double> forward(const ModelParams& params, const ContextInput& in,
                                   detail::NetWorkspace* ws = nullptr) {
  detail::check_input(params, in);
  detail::NetWorkspace local;
  detail::NetWorkspace& w = ws ? *ws : local;
  std::vector<double> logits;
  detail::forward_core(params, detail::MatrixRows{in.data.data(), in.width}, in.rows, w, logits);
  return logits;
}

inline int argmax_lowest(std::span<const double> scores) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(scores.size()); ++i)
    if (scores[static_cast<std::size_t>(i)] > scores[static_cast<std::size_t>(best)]) best = i;
  return best;
}

inline int predict(const ModelParams& params, const ContextInput& in) {
  const auto logits = forward(params, in);
  return argmax_lowest(logits);
}

namespace detail {

// Softmax cross-entropy of one sample; fills dlogits with
// scale * (softmax - onehot) and returns scale * nll.
inline double softmax_xent(std::span<const double> logits, int label, double scale,
                           std::vector<double>& dlogits) {
  const int c = static_cast<int>(logits.size());
  if (label < 0 || label >= c)
    throw LabelOutOfRange("label " + std::to_string(label) + " outside [0, " +
                          std::to_string(c) + ")");
  double mx = logits[0];
  for (int i = 1; i < c; ++i) mx = std::max(mx, logits[static_cast<std::size_t>(i)]);
  double denom = 0.0;
  for (int i = 0; i < c; ++i) denom += std::exp(logits[static_cast<std::size_t>(i)] - mx);
  const double log_denom = std::log(denom);
  dlogits.resize(static_cast<std::size_t>(c));
  for (int i = 0; i < c; ++i) {
    const double p = std::exp(logits[static_cast<std::size_t>(i)] - mx) / denom;
    dlogits[static_cast<std::size_t>(i)] = scale * (p - (i == label ? 1.0 : 0.0));
  }
  return scale * (log_denom - (logits[static_cast<std::size_t>(label)] - mx));
}

// One forward/backward pass; gradients are accumulated into grads. The
// max-pool gradient goes to the argmax row, ties resolved toward the lowest
// row index during the forward scan.
template <typename RowSource>
double sample_loss_grad(const ModelParams& params, const RowSource& rows, int n_rows, int label,
                        double scale, ModelParams& grads, NetWorkspace& ws) {
  std::vector<double> logits;
  forward_core(params, rows, n_rows, ws, logits);
  const double loss = softmax_xent(logits, label, scale, ws.dlogits);

  const std::size_t n_layers = params.layers.size();
  ws.deltas.resize(n_layers);
  ws.deltas.back() = ws.dlogits;

  // Head and output layers.
  for (std::size_t li = n_layers - 1; li >= 1; --li) {
    const LinearLayer& l = params.layers[li];
    LinearLayer& g = grads.layers[li];
    const auto& in_act = ws.acts[li - 1];
    const auto& delta = ws.deltas[li];
    auto& delta_prev = ws.deltas[li - 1];
    delta_prev.assign(static_cast<std::size_t>(l.in_dim), 0.0);
    for (int o = 0; o < l.out_dim; ++o) {
      const double d = delta[static_cast<std::size_t>(o)];
      if (d == 0.0) continue;
      double* grow = g.W.data() + static_cast<std::size_t>(o) * l.in_dim;
      const double* wrow = l.W.data() + static_cast<std::size_t>(o) * l.in_dim;
      for (int i = 0; i < l.in_dim; ++i) {
        grow[i] += d * in_act[static_cast<std::size_t>(i)];
        delta_prev[static_cast<std::size_t>(i)] += d * wrow[i];
      }
      g.b[static_cast<std::size_t>(o)] += d;
    }
    if (li >= 2) {
      // Through the ReLU of the previous head layer.
      const auto& prev_act = ws.acts[li - 1];
      for (int i = 0; i < l.in_dim; ++i)
        if (prev_act[static_cast<std::size_t>(i)] <= 0.0) delta_prev[static_cast<std::size_t>(i)] = 0.0;
    }
  }

  // Representation layer: the pooled value r_f = ReLU(pre) of the winning
  // row; gradient flows only where r_f > 0.
  const LinearLayer& l0 = params.layers.front();
  LinearLayer& g0 = grads.layers.front();
  const int half = l0.in_dim / 2;
  const auto& drepr = ws.deltas[0];
  for (int f = 0; f < l0.out_dim; ++f) {
    const double d = drepr[static_cast<std::size_t>(f)];
    if (d == 0.0 || ws.repr[static_cast<std::size_t>(f)] <= 0.0) continue;
    const int j = ws.argmax_row[static_cast<std::size_t>(f)];
    const double* first = rows.first_half(j);
    const double* second = rows.second_half(j);
    double* grow = g0.W.data() + static_cast<std::size_t>(f) * l0.in_dim;
    for (int i = 0; i < half; ++i) grow[i] += d * first[i];
    for (int i = 0; i < half; ++i) grow[half + i] += d * second[i];
    g0.b[static_cast<std::size_t>(f)] += d;
  }
  return loss;
}

}  // namespace detail

struct LossGrad {
  double loss = 0.0;
  ModelParams grads;
};

// Mean cross-entropy over the batch plus analytic gradients.
inline LossGrad loss_and_grad(const ModelParams& params, std::span<const ContextInput> batch,
                              std::span<const int> labels) {
  if (batch.size() != labels.size())
    throw ShapeMismatch("batch/labels size mismatch: " + std::to_string(batch.size()) + " vs " +
                        std::to_string(labels.size()));
  if (batch.empty()) throw EmptyInput("loss_and_grad on an empty batch");
  LossGrad out;
  out.grads.layers.reserve(params.layers.size());
  for (const auto& l : params.layers) out.grads.layers.emplace_back(l.out_dim, l.in_dim);
  detail::NetWorkspace ws;
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    detail::check_input(params, batch[i]);
    out.loss += detail::sample_loss_grad(
        params, detail::MatrixRows{batch[i].data.data(), batch[i].width}, batch[i].rows,
        labels[i], scale, out.grads, ws);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Adam

struct OptimState {
  std::vector<LinearLayer> m, v;  // first/second moments, shaped like params
  std::int64_t step = 0;
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
};

inline OptimState make_optim_state(const ModelParams& params) {
  OptimState s;
  for (const auto& l : params.layers) {
    s.m.emplace_back(l.out_dim, l.in_dim);
    s.v.emplace_back(l.out_dim, l.in_dim);
  }
  return s;
}

inline void adam_step(OptimState& state, ModelParams& params, const ModelParams& grads,
                      double learning_rate) {
  if (state.m.size() != params.layers.size() || grads.layers.size() != params.layers.size())
    throw ShapeMismatch("adam_step: state/params/grads layer counts differ");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t li = 0; li < params.layers.size(); ++li) {
    auto& p = params.layers[li];
    const auto& g = grads.layers[li];
    if (g.W.size() != p.W.size() || g.b.size() != p.b.size())
      throw ShapeMismatch("adam_step: gradient shape mismatch at layer " + std::to_string(li));
    auto update = [&](std::vector<double>& pv, const std::vector<double>& gv,
                      std::vector<double>& mv, std::vector<double>& vv) {
      for (std::size_t i = 0; i < pv.size(); ++i) {
        mv[i] = state.beta1 * mv[i] + (1.0 - state.beta1) * gv[i];
        vv[i] = state.beta2 * vv[i] + (1.0 - state.beta2) * gv[i] * gv[i];
        const double mhat = mv[i] / bc1;
        const double vhat = vv[i] / bc2;
        pv[i] -= learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
      }
    };
    update(p.W, g.W, state.m[li].W, state.v[li].W);
    update(p.b, g.b, state.m[li].b, state.v[li].b);
  }
}

}  // namespace tractparc
