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

// Acceptance run: one PASS / FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

#include "test_support.hpp"

namespace tenet {
namespace {

// Tolerances.
constexpr double kParamTolerance = 0.10;
constexpr double kMultTolerance = 0.15;
constexpr double kFusionTolDouble = 1e-10;
constexpr double kFusionTolFloat = 1e-5;
constexpr double kModelLogitTol = 1e-5;
constexpr double kGradientTol = 1e-4;
constexpr double kTrainTarget = 0.95;
constexpr std::size_t kTrainBudget = 2000;
constexpr double kSplitTol = 0.02;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome footprint() {
  struct Row {
    const char* name;
    double params, mults;
  };
  bool ok = true;
  std::string detail;
  for (const Row r : {Row{"tenet6-narrow", 17e3, 553e3}, Row{"tenet12-narrow", 31e3, 895e3},
                      Row{"tenet6", 54e3, 1.68e6}, Row{"tenet12", 100e3, 2.90e6}}) {
    const auto report = count_report(variant_spec(r.name), 98);
    const double dp = report.parameters / r.params - 1.0, dm = report.multiplies / r.mults - 1.0;
    ok = ok && std::abs(dp) <= kParamTolerance && std::abs(dm) <= kMultTolerance;
    detail += fmt("%s %zu (%+.1f%%) / %zu (%+.1f%%); ", r.name, report.parameters, 100 * dp, report.multiplies,
                  100 * dm);
  }
  return {ok, detail};
}

Outcome fusion_equivalence() {
  Rng rng(2);
  constexpr std::size_t kChannels[] = {1, 4, 16, 96};
  constexpr std::size_t kFrames[] = {9, 20, 98};
  constexpr std::size_t kSizes[] = {1, 3, 5, 7, 9};
  double worst_d = 0, worst_f = 0, worst_ff = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t c = kChannels[rng.below(4)], t = kFrames[rng.below(3)], stride = 1 + rng.below(2);
    std::size_t mask = 0;
    while (mask == 0) mask = rng.below(32);
    std::vector<DepthwiseBranch<double>> branches;
    for (std::size_t i = 0; i < 5; ++i)
      if (mask >> i & 1)
        branches.push_back({testing::random_kernel<double>(rng, kSizes[i], c), testing::random_bn<double>(rng, c)});
    const MtConvSpec<double> spec(std::move(branches));
    const auto x = testing::random_map<double>(rng, t, c);
    const auto fused = fuse_mtconv(spec);
    const auto want = spec.branch_sum(x, stride);
    const auto got = depthwise_conv(x, fused.kernel, stride, std::optional<std::span<const double>>(fused.bias));
    worst_d = std::max(worst_d, testing::max_abs(got, want));

    // single precision: fused layer run in float against the exact branch sum,
    // and against the branch sum also evaluated in float (reported only)
    const auto fused_f = fused.cast<float>();
    const auto xf = x.cast<float>();
    const auto got_f = depthwise_conv(xf, fused_f.kernel, stride, std::optional<std::span<const float>>(fused_f.bias));
    const auto branch_f = spec.cast<float>().branch_sum(xf, stride);
    for (std::size_t i = 0; i < want.size(); ++i) {
      worst_f = std::max(worst_f, std::abs(static_cast<double>(got_f.data()[i]) - want.data()[i]));
      worst_ff = std::max(worst_ff, static_cast<double>(std::abs(got_f.data()[i] - branch_f.data()[i])));
    }
  }

  auto mt = build_model<float>("tenet12", DepthwiseKind::mtconv({3, 5, 7, 9}), 3);
  for (auto& block : mt.blocks)
    for (auto& br : block.depthwise) br.bn = testing::random_bn<float>(rng, br.bn.channels(), 0.5, 2.0);
  const auto fused = fuse_model(mt);
  double worst_model = 0;
  bool same_top1 = true;
  for (int n = 0; n < 100; ++n) {
    const auto x = testing::random_map<float>(rng, 98, 40, 10.0);
    const auto a = forward(mt, x), b = forward(fused, x);
    same_top1 = same_top1 && a.top1() == b.top1();
    worst_model = std::max(worst_model, static_cast<double>(max_abs_diff<float>(a.logits, b.logits)));
  }
  return {worst_d <= kFusionTolDouble && worst_f <= kFusionTolFloat && worst_model <= kModelLogitTol && same_top1,
          fmt("double %.2e, float %.2e (float branch sum %.2e), TENet12 logits %.2e, same top-1 %s", worst_d, worst_f, worst_ff, worst_model,
              same_top1 ? "yes" : "no")};
}

Outcome zero_cost() {
  bool ok = true;
  for (const auto& name : variant_names()) {
    const auto fused = fuse_model(build_model<float>(name, DepthwiseKind::mtconv({3, 5, 7, 9}), 4));
    const auto base = build_model<float>(name, DepthwiseKind::standard(), 4);
    ok = ok && model_manifest(fused) == model_manifest(base) && count_report(fused) == count_report(base);
  }
  return {ok, "manifest and count report of every fused variant equal the base"};
}

Outcome gradients() {
  const auto f = testing::gradient_fixture(41);
  const auto report = testing::finite_difference_check(f.model, f.inputs, f.labels);
  double worst = 0;
  std::size_t elements = 0, refined = 0;
  for (const auto& r : report) {
    worst = std::max(worst, r.relative_error);
    elements += r.elements;
    refined += r.refined;
  }
  return {worst <= kGradientTol && !report.empty(),
          fmt("%zu tensors, %zu elements, worst relative error %.2e (%zu elements re-measured at a smaller step)",
              report.size(), elements, worst, refined)};
}

Outcome toy_training() {
  const auto corpus = make_toy_corpus(11, 40);
  TrainConfig cfg;
  cfg.total_iterations = kTrainBudget;
  cfg.batch_size = 32;
  cfg.eval_every = 50;
  cfg.target_train_accuracy = kTrainTarget;
  cfg.seed = 11;

  const auto std_run = train(build_model<float>("tenet6-narrow", DepthwiseKind::standard(), 11), corpus, cfg);
  const auto mt_run =
      train(build_model<float>("tenet6-narrow", DepthwiseKind::mtconv({3, 5, 7, 9}), 11), corpus, cfg);
  const auto fused = fuse_model(mt_run.last);
  const auto a = evaluate(mt_run.last, corpus, Split::validation);
  const auto b = evaluate(fused, corpus, Split::validation);
  const bool same = a.predictions == b.predictions;
  return {std_run.last_train_accuracy >= kTrainTarget && same,
          fmt("train accuracy %.3f after %zu iterations; MTConv run %.3f after %zu, fused validation argmax "
              "identical on %zu items: %s",
              std_run.last_train_accuracy, std_run.iterations_run, mt_run.last_train_accuracy,
              mt_run.iterations_run, a.predictions.size(), same ? "yes" : "no")};
}

Outcome frontend() {
  bool ok = true;
  Rng rng(6);
  const auto dir = testing::scratch_dir("acceptance_frontend");
  for (std::size_t n : {4000u, 16000u, 24000u}) {
    AudioClip clip;
    clip.samples.resize(n);
    for (auto& v : clip.samples) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    save_wav(dir / "clip.wav", clip);
    const auto f = compute_mfcc(load_wav(dir / "clip.wav"));
    ok = ok && f.frames() == 98 && f.channels() == 40;
  }
  AudioClip zero;
  zero.samples.assign(16000, 0.0f);
  const auto f = compute_mfcc(zero);
  ok = ok && f.frames() == 98 && f.channels() == 40;
  for (std::size_t t = 1; t < f.frames(); ++t)
    for (std::size_t c = 0; c < f.channels(); ++c) ok = ok && f(t, c) == f(0, c);
  return {ok, "98x1x40 for WAV clips of 0.25 s, 1 s and 1.5 s; all-zero clip frame-invariant"};
}

Outcome split() {
  bool ok = assign_split("spk004") == Split::validation && assign_split("spk014") == Split::test &&
            assign_split("0a7c2a8d_nohash_0.wav") == Split::train &&
            std::abs(split_percentage("bed/00176480_nohash_0.wav") - 69.7981549039) < 1e-9;
  Rng rng(7);
  std::size_t counts[3] = {0, 0, 0};
  static constexpr char kHex[] = "0123456789abcdef";
  for (int i = 0; i < 10000; ++i) {
    std::string name;
    for (int j = 0; j < 8; ++j) name += kHex[rng.below(16)];
    name += "_nohash_0.wav";
    const auto s = assign_split(name);
    ok = ok && s == assign_split(name);
    ++counts[static_cast<int>(s)];
  }
  const double fr[3] = {counts[0] / 1e4, counts[1] / 1e4, counts[2] / 1e4};
  ok = ok && std::abs(fr[0] - 0.8) <= kSplitTol && std::abs(fr[1] - 0.1) <= kSplitTol &&
       std::abs(fr[2] - 0.1) <= kSplitTol;
  return {ok, fmt("reference digests reproduced; fractions %.3f / %.3f / %.3f", fr[0], fr[1], fr[2])};
}

}  // namespace
}  // namespace tenet

int main() {
  using namespace tenet;
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"1 footprint", footprint},      {"2 fusion equivalence", fusion_equivalence},
      {"3 zero-cost deployment", zero_cost}, {"4 gradient correctness", gradients},
      {"5 toy-scale training", toy_training}, {"6 frontend shape", frontend},
      {"7 split determinism", split}};
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  %-24s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  std::printf("SKIP  %-24s full 30000-iteration protocol on the real corpus; run scripts/full_protocol.sh\n",
              "8 full-corpus accuracy");
  return failures == 0 ? 0 : 1;
}
