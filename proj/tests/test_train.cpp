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

#include <gtest/gtest.h>

#include <numbers>
#include <numeric>
#include <sstream>

#include "test_support.hpp"

namespace tenet {
namespace {

using testing::random_bn;
using testing::random_map;

TEST(Backward, MatchesCentralFiniteDifferences) {
  const auto f = testing::gradient_fixture(41);
  const auto report = testing::finite_difference_check(f.model, f.inputs, f.labels);
  EXPECT_GT(report.size(), 30u);
  for (const auto& r : report) EXPECT_LE(r.relative_error, 1e-4) << r.name;
}

// Projects an op's output onto a fixed random direction r, so the scalar
// L = <r, op(x)> has gradient backward(grad_out = r).
double dot(const FeatureMap<double>& a, const FeatureMap<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

template <typename Op>
double input_grad_error(FeatureMap<double> x, const FeatureMap<double>& analytic, Op op) {
  const double h = 1e-5;
  double diff = 0, norm = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x.data()[i];
    x.data()[i] = saved + h;
    const double up = op(x);
    x.data()[i] = saved - h;
    const double down = op(x);
    x.data()[i] = saved;
    const double fd = (up - down) / (2 * h);
    diff += (fd - analytic.data()[i]) * (fd - analytic.data()[i]);
    norm += fd * fd;
  }
  return std::sqrt(diff) / std::max(std::sqrt(norm), 1e-12);
}

TEST(Backward, OpInputGradientsMatchFiniteDifferences) {
  Rng rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t frames = 1 + rng.below(12), c = 1 + rng.below(5), stride = 1 + rng.below(2);
    const std::size_t out_frames = (frames + stride - 1) / stride;
    const auto x = random_map<double>(rng, frames, c);

    const auto k = testing::random_kernel<double>(rng, 2 * rng.below(4) + 1, c);
    const auto r = random_map<double>(rng, out_frames, c);
    std::vector<double> gk(k.weights.size());
    const auto gx = depthwise_conv_backward(x, k, stride, r, std::span(gk));
    EXPECT_LE(input_grad_error(x, gx, [&](const auto& v) { return dot(r, depthwise_conv(v, k, stride)); }), 1e-8);

    const std::size_t c_out = 1 + rng.below(5);
    const auto pw = testing::random_pointwise<double>(rng, c, c_out, true);
    const auto rp = random_map<double>(rng, out_frames, c_out);
    std::vector<double> gw(pw.weights.size()), gb(c_out);
    const auto gpx = pointwise_conv_backward(x, pw, stride, rp, std::span(gw), std::span(gb));
    EXPECT_LE(input_grad_error(x, gpx, [&](const auto& v) { return dot(rp, pointwise_conv(v, pw, stride)); }), 1e-8);

    std::vector<double> tw(3 * c * c_out);
    for (auto& v : tw) v = rng.uniform(-1, 1);
    const TemporalConvWeights<double> tc(3, c, c_out, tw);
    std::vector<double> gt(tw.size());
    const auto gtx = temporal_conv_backward(x, tc, stride, rp, std::span(gt));
    EXPECT_LE(input_grad_error(x, gtx, [&](const auto& v) { return dot(rp, temporal_conv(v, tc, stride)); }), 1e-8);
  }
}

TEST(Backward, TrainModeBatchNormInputGradient) {
  Rng rng(44);
  const auto bn = random_bn<double>(rng, 3);
  Batch<double> xs = {random_map<double>(rng, 5, 3), random_map<double>(rng, 5, 3)};
  const Batch<double> rs = {random_map<double>(rng, 5, 3), random_map<double>(rng, 5, 3)};
  BnBatchCache<double> cache;
  batchnorm_train(xs, bn, &cache);
  std::vector<double> gg(3), gb(3);
  const auto gx = batchnorm_train_backward(cache, bn, rs, std::span(gg), std::span(gb));
  auto loss = [&](const Batch<double>& in) {
    const auto y = batchnorm_train<double>(in, bn, nullptr);
    return dot(rs[0], y[0]) + dot(rs[1], y[1]);
  };
  const double h = 1e-5;
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t i = 0; i < xs[n].size(); ++i) {
      const double saved = xs[n].data()[i];
      xs[n].data()[i] = saved + h;
      const double up = loss(xs);
      xs[n].data()[i] = saved - h;
      const double down = loss(xs);
      xs[n].data()[i] = saved;
      EXPECT_NEAR(gx[n].data()[i], (up - down) / (2 * h), 1e-7);
    }
}

TEST(Backward, LossOfUniformLogitsIsLogTwelve) {
  const auto model = build_model<double>("tenet6-narrow", DepthwiseKind::standard(), 1);
  const Batch<double> zeros(3, FeatureMap<double>(98, 40));
  const std::vector<std::size_t> labels = {0, 5, 11};
  EXPECT_NEAR(backward(model, zeros, labels).loss, std::log(12.0), 1e-12);
}

TEST(Backward, RejectsBadLabelsAndEmptyBatch) {
  const auto model = testing::gradient_fixture(1).model;
  const Batch<double> one(1, FeatureMap<double>(16, 40));
  const std::vector<std::size_t> bad = {12};
  EXPECT_THROW(backward(model, one, bad), Error);
  EXPECT_THROW(backward(model, Batch<double>{}, std::vector<std::size_t>{}), Error);
}

TEST(Backward, DisabledProjectionPathGetsZeroGradient) {
  auto c = testing::gradient_fixture(42);
  auto& block = c.model.blocks[0];  // stride 1, identity shortcut
  ASSERT_FALSE(block.shortcut.has_value());
  std::fill(block.project_bn.gamma.begin(), block.project_bn.gamma.end(), 0.0);
  const auto r = backward(c.model, c.inputs, c.labels);
  const auto& g = r.gradients.grads.blocks[0];
  auto all_zero = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
  };
  EXPECT_TRUE(all_zero(g.project.weights));
  EXPECT_TRUE(all_zero(g.expand.weights));
  EXPECT_TRUE(all_zero(g.expand_bn.gamma));
  for (const auto& br : g.depthwise) {
    EXPECT_TRUE(all_zero(br.kernel.weights));
    EXPECT_TRUE(all_zero(br.bn.gamma));
    EXPECT_TRUE(all_zero(br.bn.beta));
  }
  EXPECT_FALSE(all_zero(r.gradients.grads.stem.weights));  // shortcut still carries signal
}

TEST(Schedule, StepDecay) {
  const TrainConfig cfg;
  EXPECT_DOUBLE_EQ(learning_rate_at(cfg, 0), 0.01);
  EXPECT_DOUBLE_EQ(learning_rate_at(cfg, 9999), 0.01);
  EXPECT_NEAR(learning_rate_at(cfg, 10000), 0.001, 1e-15);
  EXPECT_NEAR(learning_rate_at(cfg, 20000), 0.0001, 1e-15);
}

TEST(Adam, ZeroGradientWithoutDecayIsNoOp) {
  auto model = testing::gradient_fixture(3).model;
  const auto before = model;
  TrainConfig cfg;
  cfg.weight_decay = 0.0;
  AdamState<double> state;
  const auto zero = GradientSet<double>::zeros_like(model);
  for (std::size_t it = 0; it < 5; ++it) adam_step(model, zero, state, it, cfg);
  EXPECT_EQ(model, before);
}

TEST(Adam, ZeroGradientDecayShrinksWeightsOnly) {
  auto model = testing::gradient_fixture(4).model;
  const auto before = model;
  TrainConfig cfg;
  cfg.weight_decay = 0.5;
  AdamState<double> state;
  adam_step(model, GradientSet<double>::zeros_like(model), state, 0, cfg);
  const auto a = collect_tensors(model);
  const auto b = collect_tensors(before);
  const double factor = 1.0 - 0.01 * 0.5;
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t i = 0; i < a[k].values.size(); ++i) {
      if (a[k].role == TensorRole::weight)
        EXPECT_NEAR(a[k].values[i], b[k].values[i] * factor, 1e-15) << a[k].name;
      else
        EXPECT_EQ(a[k].values[i], b[k].values[i]) << a[k].name;
    }
}

TEST(Adam, FirstStepMovesByLearningRate) {
  auto model = testing::gradient_fixture(5).model;
  const auto before = model;
  TrainConfig cfg;
  cfg.weight_decay = 0.0;
  auto grads = GradientSet<double>::zeros_like(model);
  grads.grads.head.bias[3] = 2.0;
  AdamState<double> state;
  adam_step(model, grads, state, 0, cfg);
  EXPECT_NEAR(model.head.bias[3], before.head.bias[3] - 0.01, 1e-9);
}

AudioClip ramp_clip() {
  AudioClip clip{std::vector<float>(16000), 16000};
  for (std::size_t i = 0; i < clip.size(); ++i) clip.samples[i] = 0.5f * std::sin(0.01f * static_cast<float>(i));
  return clip;
}

TEST(Augment, NoNoiseNoShiftIsIdentity) {
  TrainConfig cfg;
  cfg.noise_prob = 0.0;
  cfg.shift_ms_max = 0.0;
  Rng rng(6);
  const auto clip = ramp_clip();
  EXPECT_EQ(augment(clip, toy_noise_bank(1), rng, cfg), clip);
}

TEST(Augment, HundredMillisecondShiftDelaysContent) {
  const auto clip = ramp_clip();
  const auto shifted = time_shift(clip, 1600);
  ASSERT_EQ(shifted.size(), clip.size());
  for (std::size_t i = 0; i < 1600; ++i) ASSERT_EQ(shifted.samples[i], 0.0f);
  for (std::size_t i = 1600; i < clip.size(); ++i) ASSERT_EQ(shifted.samples[i], clip.samples[i - 1600]);
  const auto advanced = time_shift(clip, -1600);
  for (std::size_t i = clip.size() - 1600; i < clip.size(); ++i) ASSERT_EQ(advanced.samples[i], 0.0f);
}

TEST(Augment, SeededRunsAreIdenticalAndKeepLength) {
  const TrainConfig cfg;
  const auto bank = toy_noise_bank(2);
  Rng a(7), b(7);
  for (int n = 0; n < 20; ++n) {
    const auto clip = render_toy_template(static_cast<std::size_t>(n % 14));
    const auto x = augment(clip, bank, a, cfg), y = augment(clip, bank, b, cfg);
    EXPECT_EQ(x, y);
    EXPECT_EQ(x.size(), clip.size());
    for (float s : x.samples) ASSERT_LE(std::abs(s), 1.0f);
  }
  Rng c(7);
  EXPECT_THROW(augment(ramp_clip(), {}, c, cfg), Error);
}

TEST(Evaluate, ConstantPredictorScoresOneTwelfth) {
  auto model = build_model<double>("tenet6-narrow", DepthwiseKind::standard(), 8);
  std::fill(model.head.weights.begin(), model.head.weights.end(), 0.0);
  model.head.bias[0] = 1.0;
  Rng rng(9);
  Batch<double> features;
  std::vector<std::size_t> labels;
  for (std::size_t n = 0; n < 36; ++n) {
    features.push_back(random_map<double>(rng, 98, 40));
    labels.push_back(n % 12);
  }
  const auto r = evaluate_features(model, features, labels);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0 / 12.0);
  for (std::size_t k = 0; k < 12; ++k) {
    EXPECT_EQ(std::accumulate(r.confusion[k].begin(), r.confusion[k].end(), std::size_t{0}), 3u);
    EXPECT_EQ(r.confusion[k][0], 3u);
  }
  EXPECT_EQ(r.scores.size(), 36u);
}

ScoreRow row(std::size_t label, std::size_t hot, double p) {
  ScoreRow r{"x", label, std::vector<double>(12, (1.0 - p) / 11.0)};
  r.scores[hot] = p;
  return r;
}

TEST(Roc, PerfectScoresReachZeroZero) {
  std::vector<ScoreRow> table;
  for (std::size_t k = 0; k < 12; ++k) table.push_back(row(k, k, 1.0));
  const auto pts = roc_points(table);
  EXPECT_TRUE(std::any_of(pts.begin(), pts.end(), [](const RocPoint& p) { return p.far == 0.0 && p.frr == 0.0; }));
}

TEST(Roc, ZeroThresholdAcceptsEverything) {
  std::vector<ScoreRow> table = {row(0, 0, 0.9), row(10, 3, 0.6), row(11, 11, 0.8), row(4, 2, 0.5)};
  const auto pts = roc_points(table);
  const auto zero = std::find_if(pts.begin(), pts.end(), [](const RocPoint& p) { return p.threshold == 0.0; });
  ASSERT_NE(zero, pts.end());
  EXPECT_EQ(zero->far, 1.0);
  EXPECT_EQ(zero->frr, 0.0);
  EXPECT_THROW(roc_points({}), Error);
}

TEST(Roc, RandomScoresTrackTheDiagonal) {
  Rng rng(10);
  std::vector<ScoreRow> table;
  for (std::size_t n = 0; n < 2400; ++n) {
    std::vector<double> logits(12);
    for (auto& v : logits) v = rng.normal();
    const auto p = softmax<double>(logits);
    table.push_back({"r", n % 12, p});
  }
  const auto pts = roc_points(table);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    EXPECT_GE(pts[i].far, pts[i - 1].far);
    EXPECT_LE(pts[i].frr, pts[i - 1].frr);
  }
  for (const auto& p : pts) EXPECT_NEAR(p.frr, 1.0 - p.far, 0.06);
}

TEST(Roc, ScoresCsvRoundTrip) {
  std::vector<ScoreRow> table = {row(0, 0, 0.25), row(11, 2, 0.5)};
  table[1].path = "dir/clip.wav";
  std::stringstream ss;
  write_scores_csv(ss, table);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')),
            "path,label,score_0,score_1,score_2,score_3,score_4,score_5,score_6,score_7,score_8,score_9,score_10,score_11");
  const auto back = read_scores_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].path, "dir/clip.wav");
  EXPECT_EQ(back[1].label, 11u);
  for (std::size_t k = 0; k < 12; ++k) EXPECT_NEAR(back[0].scores[k], table[0].scores[k], 1e-12);
}

TEST(BatchNormConsistency, RunningStatsFromOneBatchReproduceTrainMode) {
  Rng rng(11);
  auto model = build_model<double>("tenet6-narrow", DepthwiseKind::mtconv({3, 5, 7, 9}), 12);
  Batch<double> batch;
  for (int n = 0; n < 6; ++n) batch.push_back(random_map<double>(rng, 98, 40, 5.0));
  NetworkTape<double> tape;
  const auto train_out = forward(model, batch, Mode::train, &tape);
  update_running_stats(model, tape, 0.0);
  const auto infer_out = forward(model, batch, Mode::infer);
  for (std::size_t n = 0; n < batch.size(); ++n)
    EXPECT_LE(max_abs_diff<double>(train_out[n].logits, infer_out[n].logits), 1e-6);
}

TrainConfig short_config(std::size_t iters) {
  TrainConfig cfg;
  cfg.total_iterations = iters;
  cfg.batch_size = 16;
  cfg.eval_every = 5;
  cfg.seed = 3;
  return cfg;
}

TEST(Train, InitialLossNearLogTwelve) {
  const auto corpus = make_toy_corpus(1, 10);
  const auto items = corpus.split(Split::train);
  const auto data = extract_features<float>(corpus, {items.begin(), items.begin() + 32});
  const auto model = build_model<float>("tenet6-narrow", DepthwiseKind::standard(), 1);
  EXPECT_NEAR(backward(model, data.features, data.labels).loss, std::log(12.0), 0.3);
}

TEST(Train, SeededRunIsBitReproducible) {
  const auto corpus = make_toy_corpus(2, 10);
  const auto model = build_model<float>("tenet6-narrow", DepthwiseKind::mtconv({3, 5, 7, 9}), 2);
  const auto a = train(model, corpus, short_config(12));
  const auto b = train(model, corpus, short_config(12));
  EXPECT_EQ(a.last, b.last);
  EXPECT_EQ(a.best, b.best);
  ASSERT_EQ(a.log.size(), b.log.size());
  EXPECT_EQ(a.log.back().loss, b.log.back().loss);
  EXPECT_NE(a.last, model);
  // evaluations at the first step, every 5 and at the end
  std::vector<std::size_t> iters;
  for (const auto& r : a.log) iters.push_back(r.iteration);
  EXPECT_EQ(iters, (std::vector<std::size_t>{1, 5, 10, 12}));
}

TEST(Train, DivergenceAbortsWithNumericError) {
  const auto corpus = make_toy_corpus(3, 10);
  auto model = build_model<float>("tenet6-narrow", DepthwiseKind::standard(), 3);
  for (auto& w : model.head.weights) w = 3e38f;
  try {
    train(model, corpus, short_config(3));
    FAIL() << "expected divergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::numeric);
  }
}

TEST(Train, FusedCheckpointAgreesOnValidation) {
  const auto corpus = make_toy_corpus(4, 10);
  auto cfg = short_config(30);
  cfg.eval_every = 10;
  const auto model = build_model<float>("tenet6-narrow", DepthwiseKind::mtconv({3, 5, 7, 9}), 4);
  const auto trained = train(model, corpus, cfg).last;
  const auto fused = fuse_model(trained);
  const auto a = evaluate(trained, corpus, Split::validation);
  const auto b = evaluate(fused, corpus, Split::validation);
  EXPECT_EQ(a.predictions, b.predictions);
  EXPECT_EQ(a.accuracy, b.accuracy);
}

}  // namespace
}  // namespace tenet
