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

// Reverse-mode counterparts of the ops in tensor.hpp, plus training-mode
// batch normalization. Parameter gradients are accumulated (+=) so a caller
// can sum contributions over the samples of a batch.

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "tenet/tensor.hpp"

namespace tenet {

/// Gradient of depthwise_conv. Returns dL/d(input); adds dL/dF into
/// `grad_kernel` (D*C, same layout as the kernel).
template <typename T>
FeatureMap<T> depthwise_conv_backward(const FeatureMap<T>& input, const DepthwiseKernel<T>& kernel,
                                      std::size_t stride, const FeatureMap<T>& grad_out,
                                      std::span<T> grad_kernel) {
  const std::size_t frames = input.frames();
  const std::size_t channels = input.channels();
  const auto half = static_cast<std::ptrdiff_t>(kernel.half_width());
  require(grad_kernel.size() == kernel.weights.size(), Errc::invalid_argument,
          "depthwise grad buffer size");
  FeatureMap<T> grad_in(frames, channels);
  for (std::size_t t = 0; t < grad_out.frames(); ++t) {
    const auto g = grad_out.frame(t);
    const auto centre = static_cast<std::ptrdiff_t>(t * stride);
    for (std::ptrdiff_t i = -half; i <= half; ++i) {
      const std::ptrdiff_t src_t = centre + i;
      if (src_t < 0 || src_t >= static_cast<std::ptrdiff_t>(frames)) continue;
      const auto src = input.frame(static_cast<std::size_t>(src_t));
      auto gin = grad_in.frame(static_cast<std::size_t>(src_t));
      const std::size_t tap = static_cast<std::size_t>(i + half) * channels;
      const T* w = kernel.weights.data() + tap;
      T* gw = grad_kernel.data() + tap;
      for (std::size_t c = 0; c < channels; ++c) {
        gw[c] += g[c] * src[c];
        gin[c] += g[c] * w[c];
      }
    }
  }
  return grad_in;
}

/// Gradient of pointwise_conv. Adds dL/dW (and dL/dbias when the layer has
/// one and `grad_bias` is non-empty).
template <typename T>
FeatureMap<T> pointwise_conv_backward(const FeatureMap<T>& input, const PointwiseWeights<T>& w,
                                      std::size_t stride, const FeatureMap<T>& grad_out,
                                      std::span<T> grad_weights, std::span<T> grad_bias = {}) {
  require(grad_weights.size() == w.weights.size(), Errc::invalid_argument,
          "pointwise grad buffer size");
  FeatureMap<T> grad_in(input.frames(), input.channels());
  for (std::size_t t = 0; t < grad_out.frames(); ++t) {
    const auto g = grad_out.frame(t);
    const auto src = input.frame(t * stride);
    auto gin = grad_in.frame(t * stride);
    for (std::size_t ci = 0; ci < w.in_channels; ++ci) {
      const T x = src[ci];
      const T* row = w.weights.data() + ci * w.out_channels;
      T* grow = grad_weights.data() + ci * w.out_channels;
      T acc{0};
      for (std::size_t co = 0; co < w.out_channels; ++co) {
        grow[co] += x * g[co];
        acc += row[co] * g[co];
      }
      gin[ci] += acc;
    }
    if (!grad_bias.empty())
      for (std::size_t co = 0; co < w.out_channels; ++co) grad_bias[co] += g[co];
  }
  return grad_in;
}

template <typename T>
FeatureMap<T> temporal_conv_backward(const FeatureMap<T>& input, const TemporalConvWeights<T>& w,
                                     std::size_t stride, const FeatureMap<T>& grad_out,
                                     std::span<T> grad_weights) {
  require(grad_weights.size() == w.weights.size(), Errc::invalid_argument,
          "temporal conv grad buffer size");
  const std::size_t frames = input.frames();
  const auto half = static_cast<std::ptrdiff_t>((w.size - 1) / 2);
  FeatureMap<T> grad_in(frames, input.channels());
  for (std::size_t t = 0; t < grad_out.frames(); ++t) {
    const auto g = grad_out.frame(t);
    const auto centre = static_cast<std::ptrdiff_t>(t * stride);
    for (std::ptrdiff_t i = -half; i <= half; ++i) {
      const std::ptrdiff_t src_t = centre + i;
      if (src_t < 0 || src_t >= static_cast<std::ptrdiff_t>(frames)) continue;
      const auto src = input.frame(static_cast<std::size_t>(src_t));
      auto gin = grad_in.frame(static_cast<std::size_t>(src_t));
      const auto tap = static_cast<std::size_t>(i + half);
      for (std::size_t ci = 0; ci < w.in_channels; ++ci) {
        const std::size_t base = (tap * w.in_channels + ci) * w.out_channels;
        const T x = src[ci];
        T acc{0};
        for (std::size_t co = 0; co < w.out_channels; ++co) {
          grad_weights[base + co] += x * g[co];
          acc += w.weights[base + co] * g[co];
        }
        gin[ci] += acc;
      }
    }
  }
  return grad_in;
}

/// dL/dx for y = relu(x), given the forward output y.
template <typename T>
FeatureMap<T> relu_backward(const FeatureMap<T>& output, FeatureMap<T> grad_out) {
  auto y = output.data();
  auto g = grad_out.data();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(y[i] > T{0})) g[i] = T{0};
  return grad_out;
}

template <typename T>
FeatureMap<T> avg_pool_time_backward(std::size_t frames, std::span<const T> grad_out) {
  FeatureMap<T> grad_in(frames, grad_out.size());
  const T inv = T{1} / static_cast<T>(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    auto row = grad_in.frame(t);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = grad_out[c] * inv;
  }
  return grad_in;
}

template <typename T>
std::vector<T> dense_backward(std::span<const T> x, const PointwiseWeights<T>& w,
                              std::span<const T> grad_out, std::span<T> grad_weights,
                              std::span<T> grad_bias) {
  std::vector<T> grad_in(w.in_channels, T{0});
  for (std::size_t i = 0; i < w.in_channels; ++i) {
    const T* row = w.weights.data() + i * w.out_channels;
    T* grow = grad_weights.data() + i * w.out_channels;
    for (std::size_t o = 0; o < w.out_channels; ++o) {
      grow[o] += x[i] * grad_out[o];
      grad_in[i] += row[o] * grad_out[o];
    }
  }
  for (std::size_t o = 0; o < grad_bias.size(); ++o) grad_bias[o] += grad_out[o];
  return grad_in;
}

/// Cross-entropy of softmax(logits) against `label`; writes dL/dlogits
/// scaled by `weight` (1/N for a batch mean) and returns the unscaled loss.
template <typename T>
T softmax_cross_entropy(std::span<const T> logits, std::size_t label, T weight,
                        std::span<T> grad_logits) {
  require(label < logits.size(), Errc::invalid_argument, "label out of range");
  const auto probs = softmax(logits);
  for (std::size_t i = 0; i < probs.size(); ++i)
    grad_logits[i] = weight * (probs[i] - (i == label ? T{1} : T{0}));
  // log-sum-exp form keeps the loss finite when probs[label] underflows
  const T peak = *std::max_element(logits.begin(), logits.end());
  T total{0};
  for (T v : logits) total += std::exp(v - peak);
  return std::log(total) + peak - logits[label];
}

// ---------------------------------------------------------------------------
// Training-mode batch normalization: statistics over every frame of every
// sample in the batch (N * T values per channel), biased variance.
// ---------------------------------------------------------------------------

template <typename T>
struct BnBatchCache {
  std::vector<T> mean;
  std::vector<T> var;
  std::vector<T> inv_std;
  Batch<T> normalized;  // x-hat
};

template <typename T>
Batch<T> batchnorm_train(const Batch<T>& inputs, const BnParams<T>& bn, BnBatchCache<T>* cache) {
  require(!inputs.empty(), Errc::empty_input, "batch-norm over an empty batch");
  const std::size_t channels = bn.channels();
  std::vector<T> mean(channels, T{0}), var(channels, T{0});
  std::size_t count = 0;
  for (const auto& x : inputs) {
    require(x.channels() == channels, Errc::invalid_argument, "batch-norm length mismatch");
    for (std::size_t t = 0; t < x.frames(); ++t) {
      const auto row = x.frame(t);
      for (std::size_t j = 0; j < channels; ++j) mean[j] += row[j];
    }
    count += x.frames();
  }
  const T inv_count = T{1} / static_cast<T>(count);
  for (T& m : mean) m *= inv_count;
  for (const auto& x : inputs)
    for (std::size_t t = 0; t < x.frames(); ++t) {
      const auto row = x.frame(t);
      for (std::size_t j = 0; j < channels; ++j) {
        const T d = row[j] - mean[j];
        var[j] += d * d;
      }
    }
  std::vector<T> inv_std(channels);
  for (std::size_t j = 0; j < channels; ++j) {
    var[j] *= inv_count;
    inv_std[j] = T{1} / std::sqrt(var[j] + bn.epsilon);
  }

  Batch<T> normalized;
  normalized.reserve(inputs.size());
  Batch<T> outputs;
  outputs.reserve(inputs.size());
  for (const auto& x : inputs) {
    FeatureMap<T> xhat(x.frames(), channels);
    FeatureMap<T> y(x.frames(), channels);
    for (std::size_t t = 0; t < x.frames(); ++t) {
      const auto src = x.frame(t);
      auto h = xhat.frame(t);
      auto dst = y.frame(t);
      for (std::size_t j = 0; j < channels; ++j) {
        h[j] = (src[j] - mean[j]) * inv_std[j];
        dst[j] = h[j] * bn.gamma[j] + bn.beta[j];
      }
    }
    if (cache) normalized.push_back(std::move(xhat));
    outputs.push_back(std::move(y));
  }
  if (cache) *cache = BnBatchCache<T>{std::move(mean), std::move(var), std::move(inv_std),
                                      std::move(normalized)};
  return outputs;
}

/// Backward through batchnorm_train. Adds dL/dgamma and dL/dbeta.
template <typename T>
Batch<T> batchnorm_train_backward(const BnBatchCache<T>& cache, const BnParams<T>& bn,
                                  const Batch<T>& grad_out, std::span<T> grad_gamma,
                                  std::span<T> grad_beta) {
  const std::size_t channels = bn.channels();
  std::vector<T> sum_g(channels, T{0}), sum_gx(channels, T{0});
  std::size_t count = 0;
  for (std::size_t n = 0; n < grad_out.size(); ++n) {
    const auto& g = grad_out[n];
    const auto& xhat = cache.normalized[n];
    for (std::size_t t = 0; t < g.frames(); ++t) {
      const auto gr = g.frame(t);
      const auto hr = xhat.frame(t);
      for (std::size_t j = 0; j < channels; ++j) {
        sum_g[j] += gr[j];
        sum_gx[j] += gr[j] * hr[j];
      }
    }
    count += g.frames();
  }
  for (std::size_t j = 0; j < channels; ++j) {
    grad_gamma[j] += sum_gx[j];
    grad_beta[j] += sum_g[j];
  }
  // dx = gamma * inv_std * (g - mean(g) - xhat * mean(g * xhat))
  const T inv_count = T{1} / static_cast<T>(count);
  Batch<T> grad_in;
  grad_in.reserve(grad_out.size());
  for (std::size_t n = 0; n < grad_out.size(); ++n) {
    const auto& g = grad_out[n];
    const auto& xhat = cache.normalized[n];
    FeatureMap<T> dx(g.frames(), channels);
    for (std::size_t t = 0; t < g.frames(); ++t) {
      const auto gr = g.frame(t);
      const auto hr = xhat.frame(t);
      auto out = dx.frame(t);
      for (std::size_t j = 0; j < channels; ++j)
        out[j] = bn.gamma[j] * cache.inv_std[j] *
                 (gr[j] - sum_g[j] * inv_count - hr[j] * sum_gx[j] * inv_count);
    }
    grad_in.push_back(std::move(dx));
  }
  return grad_in;
}

}  // namespace tenet
