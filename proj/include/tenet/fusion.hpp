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

// Kernel fusion for multi-branch temporal convolutions (MTConv).
//
// Each branch i is a depthwise conv F_i (size D_i = 2k_i + 1) followed by its
// own batch norm. Because BN is a per-channel affine map it folds into the
// kernel (F_i * gamma/s_i) and a bias (beta - mu*gamma/s_i), s_i being
// sqrt(sigma^2 + eps). Centring every folded kernel inside a zero kernel of
// the largest size D_m and adding them elementwise gives one depthwise conv
// whose output equals the branch sum frame for frame, edges included, since
// all branches share the same centre tap and the same zero padding.

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "tenet/model.hpp"
#include "tenet/tensor.hpp"

namespace tenet {

/// Depthwise kernel plus per-channel bias: one conv layer with no BN.
template <typename T>
struct FusedDepthwise {
  DepthwiseKernel<T> kernel;
  std::vector<T> bias;

  template <typename U>
  FusedDepthwise<U> cast() const {
    return {kernel.template cast<U>(), std::vector<U>(bias.begin(), bias.end())};
  }
};

/// Ordered set of branches with distinct odd kernel sizes sharing C.
/// Branches are kept sorted by kernel size.
template <typename T>
class MtConvSpec {
 public:
  explicit MtConvSpec(std::vector<DepthwiseBranch<T>> branches) : branches_(std::move(branches)) {
    require(!branches_.empty(), Errc::invalid_argument, "MTConv needs at least one branch");
    std::stable_sort(branches_.begin(), branches_.end(), [](const auto& a, const auto& b) {
      return a.kernel.size < b.kernel.size;
    });
    const std::size_t c = branches_.front().kernel.channels;
    for (std::size_t i = 0; i < branches_.size(); ++i) {
      const auto& br = branches_[i];
      br.kernel.validate();
      br.bn.validate();
      require(br.kernel.channels == c && br.bn.channels() == c, Errc::invalid_argument,
              "MTConv branches must share the channel count");
      require(i == 0 || br.kernel.size > branches_[i - 1].kernel.size, Errc::invalid_argument,
              "MTConv branch kernel sizes must be distinct");
    }
  }

  const std::vector<DepthwiseBranch<T>>& branches() const noexcept { return branches_; }
  std::size_t channels() const noexcept { return branches_.front().kernel.channels; }
  std::size_t max_half_width() const noexcept { return branches_.back().kernel.half_width(); }

  /// Reference path: sum over branches of BN_i(depthwise_conv(x, F_i)).
  FeatureMap<T> branch_sum(const FeatureMap<T>& input, std::size_t stride = 1) const {
    FeatureMap<T> acc = batchnorm(depthwise_conv(input, branches_[0].kernel, stride), branches_[0].bn);
    for (std::size_t i = 1; i < branches_.size(); ++i)
      acc = add(std::move(acc),
                batchnorm(depthwise_conv(input, branches_[i].kernel, stride), branches_[i].bn));
    return acc;
  }

  template <typename U>
  MtConvSpec<U> cast() const {
    std::vector<DepthwiseBranch<U>> out;
    for (const auto& b : branches_) out.push_back(b.template cast<U>());
    return MtConvSpec<U>(std::move(out));
  }

 private:
  std::vector<DepthwiseBranch<T>> branches_;
};

/// Folds BN into the kernel: F' = F * gamma/s, bias = beta - mu*gamma/s.
template <typename T>
FusedDepthwise<T> fold_bn(const DepthwiseKernel<T>& kernel, const BnParams<T>& bn) {
  require(kernel.channels == bn.channels(), Errc::invalid_argument,
          "fold_bn channel mismatch: kernel C=" + std::to_string(kernel.channels) +
              " bn C=" + std::to_string(bn.channels()));
  bn.validate();
  FusedDepthwise<T> out{kernel, std::vector<T>(kernel.channels)};
  for (std::size_t j = 0; j < kernel.channels; ++j) {
    const T scale = bn.scale(j);
    for (std::size_t i = 0; i < kernel.size; ++i) out.kernel(i, j) *= scale;
    out.bias[j] = bn.beta[j] - bn.mu[j] * scale;
  }
  return out;
}

/// Zero-pads a kernel to size 2 * target_half_width + 1, centred: source tap
/// i lands at i + (k_m - k).
template <typename T>
DepthwiseKernel<T> pad_to_max(const DepthwiseKernel<T>& kernel, std::size_t target_half_width) {
  const std::size_t half = kernel.half_width();
  require(half <= target_half_width, Errc::invalid_argument,
          "pad_to_max target size " + std::to_string(2 * target_half_width + 1) +
              " is smaller than kernel size " + std::to_string(kernel.size));
  const std::size_t offset = target_half_width - half;
  DepthwiseKernel<T> out(2 * target_half_width + 1, kernel.channels);
  for (std::size_t i = 0; i < kernel.size; ++i)
    for (std::size_t j = 0; j < kernel.channels; ++j) out(i + offset, j) = kernel(i, j);
  return out;
}

/// Collapses every branch into one enhanced kernel of the largest size and a
/// summed bias.
template <typename T>
FusedDepthwise<T> fuse_mtconv(const MtConvSpec<T>& spec) {
  const std::size_t km = spec.max_half_width();
  const std::size_t c = spec.channels();
  FusedDepthwise<T> out{DepthwiseKernel<T>(2 * km + 1, c), std::vector<T>(c, T{0})};
  for (const auto& br : spec.branches()) {
    const auto folded = fold_bn(br.kernel, br.bn);
    const auto padded = pad_to_max(folded.kernel, km);
    for (std::size_t i = 0; i < out.kernel.weights.size(); ++i)
      out.kernel.weights[i] += padded.weights[i];
    for (std::size_t j = 0; j < c; ++j) out.bias[j] += folded.bias[j];
  }
  return out;
}

/// BN parameters that act as "+ bias" on every channel: mean 0, sigma 1 and
/// gamma = sqrt(1 + eps) so gamma / sqrt(sigma^2 + eps) is one.
template <typename T>
BnParams<T> bias_only_bn(std::span<const T> bias, T epsilon) {
  const std::size_t c = bias.size();
  return BnParams<T>{std::vector<T>(c, static_cast<T>(std::sqrt(1.0 + static_cast<double>(epsilon)))),
                     std::vector<T>(bias.begin(), bias.end()), std::vector<T>(c, T{0}),
                     std::vector<T>(c, T{1}), epsilon};
}

/// Rewrites every multi-branch depthwise stage as a single standard depthwise
/// conv of the largest branch size. Fusion is done in double precision, then
/// stored back in T. The fused stage keeps the base variant's tensor layout
/// (one kernel + one BN), with the fused bias carried in BN beta.
template <typename T>
Model<T> fuse_model(const Model<T>& model) {
  Model<T> out = model;
  for (std::size_t i = 0; i < out.blocks.size(); ++i) {
    auto& block = out.blocks[i];
    auto& spec = out.spec.blocks[i];
    std::vector<DepthwiseBranch<double>> branches;
    for (const auto& br : block.depthwise) branches.push_back(br.template cast<double>());
    const auto fused = fuse_mtconv(MtConvSpec<double>(std::move(branches)));
    const T eps = block.depthwise.front().bn.epsilon;
    const auto bias = std::vector<T>(fused.bias.begin(), fused.bias.end());
    block.depthwise = {DepthwiseBranch<T>{fused.kernel.template cast<T>(),
                                          bias_only_bn<T>(bias, eps)}};
    spec.depthwise = DepthwiseKind::standard(fused.kernel.size);
  }
  return out;
}

}  // namespace tenet
