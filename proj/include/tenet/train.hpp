// Copyright 2026 The TENet-KWS Authors
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

// Training: reverse-mode gradients through the TENet graph, Adam with a
// step-decay schedule and decoupled weight decay, waveform augmentation,
// evaluation and ROC sweeps.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tenet/audio.hpp"
#include "tenet/dataset.hpp"
#include "tenet/model.hpp"
#include "tenet/random.hpp"
#include "tenet/tensor_grad.hpp"

namespace tenet {

struct TrainConfig {
  double learning_rate = 0.01;
  double decay_factor = 0.1;
  std::size_t decay_every = 10000;
  std::size_t total_iterations = 30000;
  double weight_decay = 0.00004;
  std::size_t batch_size = 100;
  bool augment = true;
  double noise_prob = 0.8;
  double noise_coeff_max = 0.1;
  double shift_ms_max = 100.0;
  double bn_momentum = 0.99;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::size_t eval_every = 500;
  /// Stop at an evaluation point once training-split accuracy reaches this
  /// value (0 disables the check).
  double target_train_accuracy = 0.0;
  std::uint64_t seed = 0;
  MfccConfig mfcc;

  void validate() const {
    require(learning_rate > 0 && decay_factor > 0 && decay_every > 0 && batch_size > 0 &&
                eval_every > 0 && weight_decay >= 0 && noise_coeff_max >= 0 && shift_ms_max >= 0,
            Errc::invalid_argument, "training hyper-parameters must be positive");
    require(noise_prob >= 0 && noise_prob <= 1, Errc::invalid_argument, "noise_prob must be in [0, 1]");
    require(bn_momentum >= 0 && bn_momentum < 1, Errc::invalid_argument, "bn_momentum must be in [0, 1)");
  }
};

/// lr(i) = lr0 * decay^floor(i / decay_every).
inline double learning_rate_at(const TrainConfig& cfg, std::size_t iteration) {
  return cfg.learning_rate *
         std::pow(cfg.decay_factor, static_cast<double>(iteration / cfg.decay_every));
}

// ---------------------------------------------------------------------------
// Gradients
// ---------------------------------------------------------------------------

/// One gradient array per parameter array, stored in a model-shaped container
/// so names and shapes line up with the weights. Running BN statistics have
/// slots too but they stay zero.
template <typename T>
struct GradientSet {
  Model<T> grads;

  static GradientSet zeros_like(const Model<T>& model) {
    GradientSet g{model};
    g.grads.visit_tensors([](const auto&, const auto&, std::span<T> v, TensorRole) {
      std::fill(v.begin(), v.end(), T{0});
    });
    return g;
  }
};

template <typename T>
struct TensorRef {
  std::string name;
  std::vector<std::size_t> shape;
  std::span<T> values;
  TensorRole role;
};

template <typename T>
std::vector<TensorRef<T>> collect_tensors(Model<T>& model) {
  std::vector<TensorRef<T>> out;
  model.visit_tensors([&](const std::string& name, const std::vector<std::size_t>& shape,
                          std::span<T> v, TensorRole role) { out.push_back({name, shape, v, role}); });
  return out;
}

template <typename T>
std::vector<TensorRef<const T>> collect_tensors(const Model<T>& model) {
  std::vector<TensorRef<const T>> out;
  model.visit_tensors([&](const std::string& name, const std::vector<std::size_t>& shape,
                          std::span<const T> v, TensorRole role) { out.push_back({name, shape, v, role}); });
  return out;
}

template <typename T>
struct BackwardResult {
  T loss{};
  GradientSet<T> gradients;
  std::vector<Prediction<T>> predictions;
  NetworkTape<T> tape;
};

namespace detail {

template <typename T>
Batch<T> bn_backward(const BnBatchCache<T>& cache, const BnParams<T>& bn, const Batch<T>& grad_out,
                     BnParams<T>& grad) {
  return batchnorm_train_backward(cache, bn, grad_out, std::span(grad.gamma), std::span(grad.beta));
}

template <typename T>
Batch<T> relu_backward_batch(const Batch<T>& outputs, Batch<T> grads) {
  for (std::size_t n = 0; n < grads.size(); ++n) grads[n] = relu_backward(outputs[n], std::move(grads[n]));
  return grads;
}

template <typename T>
Batch<T> ibb_backward(const IbbSpec& spec, const IbbWeights<T>& w, const BlockTape<T>& tp,
                      const Batch<T>& grad_out, IbbWeights<T>& g) {
  const std::size_t batch = grad_out.size();
  const Batch<T> g_sum = relu_backward_batch(tp.output, grad_out);

  // main path: project BN -> project conv -> ReLU -> branches -> ReLU -> expand
  const auto g_project = bn_backward(tp.project_bn, w.project_bn, g_sum, g.project_bn);
  Batch<T> g_dw_act;
  for (std::size_t n = 0; n < batch; ++n)
    g_dw_act.push_back(pointwise_conv_backward(tp.dw_act[n], w.project, 1, g_project[n],
                                               std::span(g.project.weights)));
  const Batch<T> g_dw_sum = relu_backward_batch(tp.dw_act, std::move(g_dw_act));

  Batch<T> g_expand_act;
  for (std::size_t b = 0; b < w.depthwise.size(); ++b) {
    const auto& br = w.depthwise[b];
    auto& gbr = g.depthwise[b];
    const auto g_pre = bn_backward(tp.branch_bn[b], br.bn, g_dw_sum, gbr.bn);
    for (std::size_t n = 0; n < batch; ++n) {
      auto gi = depthwise_conv_backward(tp.expand_act[n], br.kernel, 1, g_pre[n],
                                        std::span(gbr.kernel.weights));
      if (b == 0)
        g_expand_act.push_back(std::move(gi));
      else
        g_expand_act[n] = add(std::move(g_expand_act[n]), gi);
    }
  }
  const Batch<T> g_expand_bn = relu_backward_batch(tp.expand_act, std::move(g_expand_act));
  const auto g_expand = bn_backward(tp.expand_bn, w.expand_bn, g_expand_bn, g.expand_bn);
  Batch<T> g_in;
  for (std::size_t n = 0; n < batch; ++n)
    g_in.push_back(pointwise_conv_backward(tp.input[n], w.expand, spec.stride, g_expand[n],
                                           std::span(g.expand.weights)));

  // shortcut path
  if (w.shortcut) {
    const auto g_sc = bn_backward(tp.shortcut_bn, *w.shortcut_bn, g_sum, *g.shortcut_bn);
    for (std::size_t n = 0; n < batch; ++n)
      g_in[n] = add(std::move(g_in[n]),
                    pointwise_conv_backward(tp.input[n], *w.shortcut, spec.stride, g_sc[n],
                                            std::span(g.shortcut->weights)));
  } else {
    for (std::size_t n = 0; n < batch; ++n) g_in[n] = add(std::move(g_in[n]), g_sum[n]);
  }
  return g_in;
}

}  // namespace detail

/// Mean softmax cross-entropy over the batch and its exact gradient with
/// respect to every trainable tensor. BN runs in batch-statistics mode.
template <typename T>
BackwardResult<T> backward(const Model<T>& model, const Batch<T>& inputs,
                           std::span<const std::size_t> labels) {
  require(!inputs.empty(), Errc::empty_input, "backward over an empty batch");
  require(inputs.size() == labels.size(), Errc::invalid_argument, "one label per input required");
  for (auto l : labels)
    require(l < model.spec.num_classes, Errc::invalid_argument, "label out of range");

  BackwardResult<T> r{T{0}, GradientSet<T>::zeros_like(model), {}, {}};
  r.predictions = forward(model, inputs, Mode::train, &r.tape);
  Model<T>& g = r.gradients.grads;
  const auto& tape = r.tape;
  const std::size_t batch = inputs.size();
  const T inv_batch = T{1} / static_cast<T>(batch);

  Batch<T> grad_h;
  std::vector<T> g_logits(model.spec.num_classes);
  for (std::size_t n = 0; n < batch; ++n) {
    r.loss += softmax_cross_entropy<T>(tape.logits[n], labels[n], inv_batch, g_logits) * inv_batch;
    const auto g_pooled = dense_backward<T>(tape.pooled[n], model.head, g_logits,
                                            std::span(g.head.weights), std::span(g.head.bias));
    const std::size_t frames = model.blocks.empty() ? tape.stem_act[n].frames()
                                                    : tape.blocks.back().output[n].frames();
    grad_h.push_back(avg_pool_time_backward<T>(frames, g_pooled));
  }
  require(std::isfinite(r.loss), Errc::numeric, "non-finite loss");

  for (std::size_t i = model.blocks.size(); i-- > 0;)
    grad_h = detail::ibb_backward(model.spec.blocks[i], model.blocks[i], tape.blocks[i], grad_h,
                                  g.blocks[i]);

  const auto g_stem_bn = detail::relu_backward_batch(tape.stem_act, std::move(grad_h));
  const auto g_stem = detail::bn_backward(tape.stem_bn, model.stem_bn, g_stem_bn, g.stem_bn);
  for (std::size_t n = 0; n < batch; ++n)
    temporal_conv_backward(tape.input[n], model.stem, 1, g_stem[n], std::span(g.stem.weights));
  return r;
}

/// Mean cross-entropy only (train-mode BN), used by finite-difference checks.
template <typename T>
T batch_loss(const Model<T>& model, const Batch<T>& inputs, std::span<const std::size_t> labels) {
  const auto preds = forward(model, inputs, Mode::train);
  T loss{0};
  std::vector<T> scratch(model.spec.num_classes);
  for (std::size_t n = 0; n < inputs.size(); ++n)
    loss += softmax_cross_entropy<T>(preds[n].logits, labels[n], T{1}, scratch);
  return loss / static_cast<T>(inputs.size());
}

/// Running-statistics update from the batch statistics in `tape`:
/// mu <- m*mu + (1-m)*mean, sigma^2 <- m*sigma^2 + (1-m)*var.
template <typename T>
void update_running_stats(Model<T>& model, const NetworkTape<T>& tape, double momentum) {
  const T m = static_cast<T>(momentum);
  auto update = [m](BnParams<T>& bn, const BnBatchCache<T>& cache) {
    for (std::size_t j = 0; j < bn.channels(); ++j) {
      bn.mu[j] = m * bn.mu[j] + (T{1} - m) * cache.mean[j];
      bn.sigma[j] = std::sqrt(m * bn.sigma[j] * bn.sigma[j] + (T{1} - m) * cache.var[j]);
    }
  };
  update(model.stem_bn, tape.stem_bn);
  for (std::size_t i = 0; i < model.blocks.size(); ++i) {
    auto& b = model.blocks[i];
    const auto& tp = tape.blocks[i];
    update(b.expand_bn, tp.expand_bn);
    for (std::size_t k = 0; k < b.depthwise.size(); ++k) update(b.depthwise[k].bn, tp.branch_bn[k]);
    update(b.project_bn, tp.project_bn);
    if (b.shortcut_bn) update(*b.shortcut_bn, tp.shortcut_bn);
  }
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

template <typename T>
struct AdamState {
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;
  std::uint64_t steps = 0;
};

/// One Adam update with bias correction and decoupled weight decay
/// (p <- p - lr*wd*p) on conv / dense weights only. Running BN statistics are
/// never touched.
template <typename T>
void adam_step(Model<T>& params, const GradientSet<T>& grads, AdamState<T>& state,
               std::size_t iteration, const TrainConfig& cfg) {
  auto p = collect_tensors(params);
  const auto g = collect_tensors(grads.grads);
  require(p.size() == g.size(), Errc::invalid_argument, "gradient set does not match the model");
  if (state.m.empty()) {
    for (const auto& t : p) {
      state.m.emplace_back(t.values.size(), T{0});
      state.v.emplace_back(t.values.size(), T{0});
    }
  }
  ++state.steps;
  const double lr = learning_rate_at(cfg, iteration);
  const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.steps));
  const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.steps));
  const T b1 = static_cast<T>(cfg.adam_beta1), b2 = static_cast<T>(cfg.adam_beta2);
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (!is_trainable(p[k].role)) continue;
    require(g[k].values.size() == p[k].values.size(), Errc::invalid_argument,
            "gradient shape mismatch for " + p[k].name);
    const bool decay = p[k].role == TensorRole::weight && cfg.weight_decay > 0;
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t i = 0; i < p[k].values.size(); ++i) {
      const T gi = g[k].values[i];
      m[i] = b1 * m[i] + (T{1} - b1) * gi;
      v[i] = b2 * v[i] + (T{1} - b2) * gi * gi;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      double x = p[k].values[i];
      if (decay) x -= lr * cfg.weight_decay * x;
      x -= lr * m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon);
      p[k].values[i] = static_cast<T>(x);
    }
  }
}

// ---------------------------------------------------------------------------
// Augmentation
// ---------------------------------------------------------------------------

/// Delays (positive) or advances (negative) the clip by `shift` samples,
/// zero-filling what is vacated. Length is unchanged.
inline AudioClip time_shift(const AudioClip& clip, std::ptrdiff_t shift) {
  AudioClip out{std::vector<float>(clip.size(), 0.0f), clip.sample_rate_hz};
  const auto n = static_cast<std::ptrdiff_t>(clip.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t src = i - shift;
    if (src >= 0 && src < n) out.samples[static_cast<std::size_t>(i)] = clip.samples[static_cast<std::size_t>(src)];
  }
  return out;
}

/// Random time shift of Y ms, Y ~ U(-shift_ms_max, shift_ms_max), then with
/// probability noise_prob adds coeff * (random noise-bank segment),
/// coeff ~ U(0, noise_coeff_max). Output clamped to [-1, 1].
inline AudioClip augment(const AudioClip& clip, const std::vector<AudioClip>& noise_bank, Rng& rng,
                         const TrainConfig& cfg) {
  require(!noise_bank.empty() || cfg.noise_prob == 0.0, Errc::invalid_argument,
          "augmentation needs a non-empty noise bank");
  const double shift_ms = rng.uniform(-cfg.shift_ms_max, cfg.shift_ms_max);
  const auto shift = static_cast<std::ptrdiff_t>(std::lround(shift_ms * clip.sample_rate_hz / 1000.0));
  AudioClip out = time_shift(clip, shift);
  if (rng.bernoulli(cfg.noise_prob)) {
    const auto& noise = noise_bank[rng.below(noise_bank.size())];
    const double coeff = rng.uniform(0.0, cfg.noise_coeff_max);
    const std::size_t span = noise.size() > out.size() ? noise.size() - out.size() : 0;
    const std::size_t offset = rng.below(span + 1);
    for (std::size_t i = 0; i < out.size() && offset + i < noise.size(); ++i)
      out.samples[i] += static_cast<float>(coeff * noise.samples[offset + i]);
  }
  for (float& s : out.samples) s = std::clamp(s, -1.0f, 1.0f);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation and ROC
// ---------------------------------------------------------------------------

struct ScoreRow {
  std::string path;
  std::size_t label = 0;
  std::vector<double> scores;
};

struct EvalResult {
  double accuracy = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::vector<ScoreRow> scores;
  std::vector<std::size_t> predictions;
};

/// Accuracy, confusion matrix and per-item softmax scores over precomputed
/// features (infer-mode BN).
template <typename T>
EvalResult evaluate_features(const Model<T>& model, const Batch<T>& features,
                             std::span<const std::size_t> labels, std::span<const std::string> paths = {},
                             std::size_t chunk = 64) {
  require(!features.empty(), Errc::empty_input, "evaluation split is empty");
  const std::size_t classes = model.spec.num_classes;
  EvalResult r;
  r.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  std::size_t correct = 0;
  for (std::size_t start = 0; start < features.size(); start += chunk) {
    const std::size_t stop = std::min(features.size(), start + chunk);
    Batch<T> part(features.begin() + static_cast<std::ptrdiff_t>(start),
                  features.begin() + static_cast<std::ptrdiff_t>(stop));
    const auto preds = forward(model, part, Mode::infer);
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const std::size_t n = start + i;
      const std::size_t top = preds[i].top1();
      r.predictions.push_back(top);
      ++r.confusion[labels[n]][top];
      if (top == labels[n]) ++correct;
      r.scores.push_back(ScoreRow{paths.empty() ? std::to_string(n) : paths[n], labels[n],
                                  std::vector<double>(preds[i].probs.begin(), preds[i].probs.end())});
    }
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(features.size());
  return r;
}

template <typename T>
struct LabeledFeatures {
  Batch<T> features;
  std::vector<std::size_t> labels;
  std::vector<std::string> paths;
};

template <typename T>
LabeledFeatures<T> extract_features(const Corpus& corpus, const std::vector<const LabeledClip*>& items,
                                    const MfccConfig& mfcc = {}) {
  LabeledFeatures<T> out;
  for (const auto* item : items) {
    out.features.push_back(compute_mfcc(corpus.audio(*item), mfcc).template cast<T>());
    out.labels.push_back(item->label);
    out.paths.push_back(item->path);
  }
  return out;
}

template <typename T>
EvalResult evaluate(const Model<T>& model, const Corpus& corpus, Split split, const MfccConfig& mfcc = {}) {
  const auto items = corpus.split(split);
  require(!items.empty(), Errc::empty_input, std::string("split '") + std::string(to_string(split)) + "' is empty");
  const auto data = extract_features<T>(corpus, items, mfcc);
  return evaluate_features(model, data.features, data.labels, data.paths);
}

/// path,label,score_0..score_11 with a header row.
inline void write_scores_csv(std::ostream& os, const std::vector<ScoreRow>& rows) {
  const std::size_t classes = rows.empty() ? kNumClasses : rows.front().scores.size();
  os << "path,label";
  for (std::size_t c = 0; c < classes; ++c) os << ",score_" << c;
  os << '\n';
  os.precision(17);  // lossless for doubles
  for (const auto& r : rows) {
    os << r.path << ',' << r.label;
    for (double s : r.scores) os << ',' << s;
    os << '\n';
  }
}

inline std::vector<ScoreRow> read_scores_csv(std::istream& is) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)) && line.rfind("path,label", 0) == 0,
          Errc::bad_header, "scores CSV must start with 'path,label,score_0,...'");
  std::vector<ScoreRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    ScoreRow row;
    require(static_cast<bool>(std::getline(ss, row.path, ',')), Errc::bad_header, "missing path");
    require(static_cast<bool>(std::getline(ss, field, ',')), Errc::bad_header, "missing label");
    try {
      row.label = std::stoul(field);
      while (std::getline(ss, field, ',')) row.scores.push_back(std::stod(field));
    } catch (const std::exception&) {
      throw Error(Errc::bad_header, "unparsable scores row: " + line);
    }
    require(row.scores.size() == kNumClasses && row.label < kNumClasses, Errc::bad_header,
            "scores row needs a label < 12 and 12 scores: " + line);
    rows.push_back(std::move(row));
  }
  return rows;
}

struct RocPoint {
  double threshold = 0.0;
  double far = 0.0;  // false-alarm rate
  double frr = 0.0;  // false-reject rate
};

/// Keyword-vs-rest threshold sweep. A clip is accepted for keyword k when its
/// score for k is >= the threshold. FRR pools the 10 keywords (true-class
/// score below threshold); FAR is the fraction of (unknown/silence clip,
/// keyword) pairs that are accepted. Points are ordered by increasing FAR,
/// from a threshold above every score (FAR 0, FRR 1) down to 0 (FAR 1, FRR 0).
inline std::vector<RocPoint> roc_points(const std::vector<ScoreRow>& table) {
  require(!table.empty(), Errc::empty_input, "ROC needs a non-empty score table");
  std::vector<double> positives, negatives;
  for (const auto& row : table) {
    require(row.label < row.scores.size(), Errc::invalid_argument, "score row label out of range");
    for (double s : row.scores)
      require(s >= 0.0 && s <= 1.0, Errc::invalid_argument, "scores must lie in [0, 1]");
    if (row.label < kKeywords.size())
      positives.push_back(row.scores[row.label]);
    else
      for (std::size_t k = 0; k < kKeywords.size() && k < row.scores.size(); ++k)
        negatives.push_back(row.scores[k]);
  }
  std::sort(positives.begin(), positives.end());
  std::sort(negatives.begin(), negatives.end());

  std::vector<double> thresholds(positives.begin(), positives.end());
  thresholds.insert(thresholds.end(), negatives.begin(), negatives.end());
  thresholds.push_back(0.0);
  thresholds.push_back(std::nextafter(1.0, 2.0));
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  auto fraction_at_least = [](const std::vector<double>& sorted, double th) {
    if (sorted.empty()) return 0.0;
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), th);
    return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
  };
  std::vector<RocPoint> out;
  for (double th : thresholds) {
    const double far = fraction_at_least(negatives, th);
    const double frr = positives.empty() ? 0.0 : 1.0 - fraction_at_least(positives, th);
    out.push_back({th, far, frr});
  }
  return out;
}

inline void write_roc_csv(std::ostream& os, const std::vector<RocPoint>& points) {
  os << "threshold,far,frr\n";
  os.precision(9);
  for (const auto& p : points) os << p.threshold << ',' << p.far << ',' << p.frr << '\n';
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

struct MetricRow {
  std::size_t iteration = 0;
  double lr = 0.0;
  double loss = 0.0;
  double val_accuracy = 0.0;
};

inline void write_metrics_csv(std::ostream& os, const std::vector<MetricRow>& rows) {
  os << "iteration,lr,loss,val_accuracy\n";
  os.precision(9);
  for (const auto& r : rows) os << r.iteration << ',' << r.lr << ',' << r.loss << ',' << r.val_accuracy << '\n';
}

template <typename T>
struct TrainResult {
  Model<T> best;           // checkpoint with the highest validation accuracy
  Model<T> last;
  std::vector<MetricRow> log;
  double best_val_accuracy = 0.0;
  std::size_t best_iteration = 0;
  std::size_t iterations_run = 0;
  double last_train_accuracy = 0.0;  // only measured when a target is set
};

/// Mini-batch training on the corpus' train split with validation every
/// eval_every iterations (and after the final one). Deterministic for a given
/// (model, corpus, cfg); single-threaded.
template <typename T>
TrainResult<T> train(Model<T> model, const Corpus& corpus, const TrainConfig& cfg,
                     const std::function<void(const MetricRow&)>& on_eval = {}) {
  cfg.validate();
  const auto train_items = corpus.split(Split::train);
  const auto val_items = corpus.split(Split::validation);
  require(!train_items.empty(), Errc::empty_input, "training split is empty");
  require(!val_items.empty(), Errc::empty_input, "validation split is empty");

  const auto val = extract_features<T>(corpus, val_items, cfg.mfcc);
  // without augmentation every clip always yields the same features
  LabeledFeatures<T> cached;
  const bool need_train_features = !cfg.augment || cfg.target_train_accuracy > 0;
  if (need_train_features) cached = extract_features<T>(corpus, train_items, cfg.mfcc);

  Rng rng(cfg.seed);
  Rng order_rng = rng.fork();
  Rng augment_rng = rng.fork();
  std::vector<std::size_t> order(train_items.size());
  std::size_t cursor = order.size();

  TrainResult<T> result{model, model, {}, -1.0, 0, 0, 0.0};
  AdamState<T> adam;
  std::vector<std::size_t> labels;
  Batch<T> inputs;

  auto run_eval = [&](std::size_t iteration, double loss) {
    const auto ev = evaluate_features(model, val.features, val.labels);
    MetricRow row{iteration, learning_rate_at(cfg, iteration), loss, ev.accuracy};
    result.log.push_back(row);
    if (on_eval) on_eval(row);
    if (ev.accuracy > result.best_val_accuracy) {
      result.best_val_accuracy = ev.accuracy;
      result.best_iteration = iteration;
      result.best = model;
    }
  };

  for (std::size_t it = 0; it < cfg.total_iterations; ++it) {
    inputs.clear();
    labels.clear();
    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
      if (cursor == order.size()) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        order_rng.shuffle(order.begin(), order.end());
        cursor = 0;
      }
      const std::size_t k = order[cursor++];
      const LabeledClip& item = *train_items[k];
      if (cfg.augment) {
        TrainConfig aug = cfg;
        if (corpus.noise_bank.empty()) aug.noise_prob = 0.0;
        inputs.push_back(compute_mfcc(augment(corpus.audio(item), corpus.noise_bank, augment_rng, aug), cfg.mfcc)
                             .template cast<T>());
      } else {
        inputs.push_back(cached.features[k]);
      }
      labels.push_back(item.label);
    }

    auto step = backward(model, inputs, labels);
    if (!std::isfinite(step.loss))
      throw Error(Errc::numeric, "training diverged at iteration " + std::to_string(it));
    update_running_stats(model, step.tape, cfg.bn_momentum);
    adam_step(model, step.gradients, adam, it, cfg);
    result.iterations_run = it + 1;

    const bool last = it + 1 == cfg.total_iterations;
    if (it == 0 || (it + 1) % cfg.eval_every == 0 || last) {
      run_eval(it + 1, static_cast<double>(step.loss));
      if (cfg.target_train_accuracy > 0 && it > 0) {
        result.last_train_accuracy = evaluate_features(model, cached.features, cached.labels).accuracy;
        if (result.last_train_accuracy >= cfg.target_train_accuracy) break;
      }
    }
  }
  result.last = model;
  return result;
}

}  // namespace tenet
