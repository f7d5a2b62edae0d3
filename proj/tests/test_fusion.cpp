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

#include <algorithm>

#include "test_support.hpp"

namespace tenet {
namespace {

using testing::max_abs;
using testing::random_bn;
using testing::random_kernel;
using testing::random_map;

BnParams<double> identity_bn(std::size_t c) { return BnParams<double>::identity(c, 0.0); }

FeatureMap<double> fused_output(const FusedDepthwise<double>& f, const FeatureMap<double>& x, std::size_t stride) {
  return depthwise_conv(x, f.kernel, stride, std::optional<std::span<const double>>(f.bias));
}

MtConvSpec<double> random_mtconv(Rng& rng, std::vector<std::size_t> sizes, std::size_t channels) {
  std::vector<DepthwiseBranch<double>> branches;
  for (auto d : sizes) branches.push_back({random_kernel<double>(rng, d, channels), random_bn<double>(rng, channels)});
  return MtConvSpec<double>(std::move(branches));
}

TEST(FoldBn, IdentityLeavesKernel) {
  const DepthwiseKernel<double> k(3, 1, std::vector<double>{0.5, -1, 2});
  const auto f = fold_bn(k, identity_bn(1));
  EXPECT_EQ(f.kernel, k);
  EXPECT_EQ(f.bias, std::vector<double>{0.0});
}

TEST(FoldBn, DirectSubstitution) {
  const DepthwiseKernel<double> k(3, 1, std::vector<double>{1, 1, 1});
  const BnParams<double> bn{{2.0}, {0.1}, {0.5}, {1.0}, 0.0};
  const auto f = fold_bn(k, bn);
  EXPECT_EQ(f.kernel.weights, (std::vector<double>{2, 2, 2}));
  EXPECT_NEAR(f.bias[0], -0.9, 1e-15);
}

TEST(FoldBn, RejectsZeroEffectiveSigmaAndMismatch) {
  auto bn = identity_bn(1);
  bn.sigma[0] = 0.0;
  EXPECT_THROW(fold_bn(DepthwiseKernel<double>(3, 1), bn), Error);
  EXPECT_THROW(fold_bn(DepthwiseKernel<double>(3, 2), identity_bn(1)), Error);
}

TEST(FoldBn, FoldedConvEqualsConvThenBn) {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t c = 1 + rng.below(16), d = 2 * rng.below(5) + 1, stride = 1 + rng.below(2);
    const auto x = random_map<double>(rng, 1 + rng.below(40), c, 3.0);
    const auto k = random_kernel<double>(rng, d, c);
    const auto bn = random_bn<double>(rng, c);
    EXPECT_LE(max_abs(fused_output(fold_bn(k, bn), x, stride), batchnorm(depthwise_conv(x, k, stride), bn)), 1e-10);
  }
}

TEST(PadToMax, CentresSmallKernel) {
  const DepthwiseKernel<double> k(3, 1, std::vector<double>{1, 2, 3});
  EXPECT_EQ(pad_to_max(k, 4).weights, (std::vector<double>{0, 0, 0, 1, 2, 3, 0, 0, 0}));
  Rng rng(22);
  const auto nine = random_kernel<double>(rng, 9, 3);
  EXPECT_EQ(pad_to_max(nine, 4), nine);
  EXPECT_THROW(pad_to_max(nine, 3), Error);
}

TEST(PadToMax, ConvolutionUnchangedByPadding) {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t c = 1 + rng.below(8), d = 2 * rng.below(5) + 1, km = (d - 1) / 2 + rng.below(4);
    const std::size_t stride = 1 + rng.below(2);
    const auto x = random_map<double>(rng, 1 + rng.below(40), c);
    const auto k = random_kernel<double>(rng, d, c);
    // zero padding outside the signal makes every frame agree, not just the interior
    EXPECT_LE(max_abs(depthwise_conv(x, pad_to_max(k, km), stride), depthwise_conv(x, k, stride)), 1e-12);
  }
}

TEST(FuseMtConv, SingleIdentityBranchIsUnchanged) {
  Rng rng(24);
  const auto k = random_kernel<double>(rng, 9, 4);
  const auto f = fuse_mtconv(MtConvSpec<double>({{k, identity_bn(4)}}));
  EXPECT_EQ(f.kernel, k);
  EXPECT_EQ(f.bias, std::vector<double>(4, 0.0));
}

TEST(FuseMtConv, OneAndThreeTapBranchesAlignAtCentre) {
  const double u = 0.7, p = 1.0, q = 2.0, r = 3.0;
  const auto f = fuse_mtconv(MtConvSpec<double>({{DepthwiseKernel<double>(1, 1, std::vector<double>{u}), identity_bn(1)},
                                                 {DepthwiseKernel<double>(3, 1, std::vector<double>{p, q, r}), identity_bn(1)}}));
  EXPECT_EQ(f.kernel.weights, (std::vector<double>{p, q + u, r}));
  EXPECT_EQ(f.bias, std::vector<double>{0.0});
}

TEST(FuseMtConv, RejectsDuplicateSizesAndMixedChannels) {
  Rng rng(25);
  EXPECT_THROW(MtConvSpec<double>({{random_kernel<double>(rng, 3, 2), identity_bn(2)},
                                   {random_kernel<double>(rng, 3, 2), identity_bn(2)}}),
               Error);
  EXPECT_THROW(MtConvSpec<double>({{random_kernel<double>(rng, 3, 2), identity_bn(2)},
                                   {random_kernel<double>(rng, 5, 3), identity_bn(3)}}),
               Error);
  EXPECT_THROW(MtConvSpec<double>(std::vector<DepthwiseBranch<double>>{}), Error);
}

TEST(FuseMtConv, FourBranchEquivalenceOverThousandTrials) {
  Rng rng(26);
  double worst_d = 0;
  float worst_f = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto spec = random_mtconv(rng, {3, 5, 7, 9}, 8);
    const auto x = random_map<double>(rng, 20, 8);
    const std::size_t stride = 1 + (trial % 2);
    const auto fused = fuse_mtconv(spec);
    worst_d = std::max(worst_d, max_abs(fused_output(fused, x, stride), spec.branch_sum(x, stride)));

    const auto spec_f = spec.cast<float>();
    const auto fused_f = fuse_mtconv(spec).cast<float>();  // fused in double, stored in float
    const auto xf = x.cast<float>();
    const auto got = depthwise_conv(xf, fused_f.kernel, stride, std::optional<std::span<const float>>(fused_f.bias));
    worst_f = std::max(worst_f, max_abs(got, spec_f.branch_sum(xf, stride)));
  }
  EXPECT_LE(worst_d, 1e-10);
  EXPECT_LE(worst_f, 1e-5f);
}

TEST(FuseMtConv, EdgeFramesExactForBothStrides) {
  Rng rng(27);
  for (std::size_t frames : {1u, 2u, 3u, 4u, 5u, 8u, 9u, 10u}) {
    for (std::size_t stride : {1u, 2u}) {
      const auto spec = random_mtconv(rng, {1, 3, 5, 7, 9}, 4);
      const auto x = random_map<double>(rng, frames, 4);
      const auto got = fused_output(fuse_mtconv(spec), x, stride);
      ASSERT_EQ(got.frames(), (frames + stride - 1) / stride);
      EXPECT_LE(max_abs(got, spec.branch_sum(x, stride)), 1e-10) << frames << " frames, stride " << stride;
    }
  }
}

TEST(FuseMtConv, BranchOrderDoesNotMatter) {
  Rng rng(28);
  const auto spec = random_mtconv(rng, {3, 5, 7, 9}, 6);
  auto shuffled = spec.branches();
  std::reverse(shuffled.begin(), shuffled.end());
  std::swap(shuffled[0], shuffled[2]);
  const auto a = fuse_mtconv(spec), b = fuse_mtconv(MtConvSpec<double>(shuffled));
  EXPECT_EQ(a.kernel, b.kernel);
  EXPECT_EQ(a.bias, b.bias);
}

TEST(FuseMtConv, RefusingIsIdempotent) {
  Rng rng(29);
  const auto spec = random_mtconv(rng, {3, 5, 7, 9}, 6);
  const auto once = fuse_mtconv(spec);
  const auto twice = fuse_mtconv(MtConvSpec<double>({{once.kernel, bias_only_bn<double>(once.bias, 1e-3)}}));
  for (std::size_t i = 0; i < once.kernel.weights.size(); ++i)
    EXPECT_NEAR(twice.kernel.weights[i], once.kernel.weights[i], 1e-14);
  for (std::size_t j = 0; j < once.bias.size(); ++j) EXPECT_NEAR(twice.bias[j], once.bias[j], 1e-14);
}

TEST(FuseMtConv, ScalingOneGammaScalesItsContribution) {
  Rng rng(30);
  const auto spec = random_mtconv(rng, {3, 5, 7, 9}, 5);
  const double c = 2.5;
  auto branches = spec.branches();
  for (auto& g : branches[1].bn.gamma) g *= c;
  const auto base = fuse_mtconv(spec), scaled = fuse_mtconv(MtConvSpec<double>(branches));
  const auto contribution = pad_to_max(fold_bn(spec.branches()[1].kernel, spec.branches()[1].bn).kernel, 4);
  for (std::size_t i = 0; i < base.kernel.weights.size(); ++i)
    EXPECT_NEAR(scaled.kernel.weights[i] - base.kernel.weights[i], (c - 1.0) * contribution.weights[i], 1e-12);
}

TEST(FuseModel, MatchesBaseArchitectureAndCounts) {
  const auto mt = build_model<float>("tenet12", DepthwiseKind::mtconv({3, 5, 7, 9}), 31);
  const auto fused = fuse_model(mt);
  const auto base = build_model<float>("tenet12", DepthwiseKind::standard(), 31);
  EXPECT_EQ(fused.spec, base.spec);
  EXPECT_EQ(count_report(fused), count_report(base));
  EXPECT_EQ(count_report(fused).parameters, count_report(base).parameters);
}

TEST(FuseModel, SameArgmaxAndTightLogitsOnRandomInputs) {
  Rng rng(32);
  auto mt = build_model<float>("tenet12", DepthwiseKind::mtconv({3, 5, 7, 9}), 33);
  // non-trivial running statistics so folding is exercised
  for (auto& block : mt.blocks)
    for (auto& br : block.depthwise) br.bn = random_bn<float>(rng, br.bn.channels(), 0.5, 2.0);
  const auto fused = fuse_model(mt);
  float worst = 0;
  for (int n = 0; n < 100; ++n) {
    const auto x = random_map<float>(rng, 98, 40, 10.0);
    const auto a = forward(mt, x), b = forward(fused, x);
    EXPECT_EQ(a.top1(), b.top1());
    worst = std::max(worst, max_abs_diff<float>(a.logits, b.logits));
  }
  EXPECT_LE(worst, 1e-5f);
}

}  // namespace
}  // namespace tenet
