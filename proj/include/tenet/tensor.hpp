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

// Dense temporal kernels shared by inference, kernel fusion and training.
//
// Every activation is a FeatureMap of shape T x 1 x C stored frame-major
// (data[t * C + c]), so the per-channel inner loops are contiguous.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tenet/error.hpp"

namespace tenet {

/// Output length of a temporal op with "same" zero padding.
constexpr std::size_t output_frames(std::size_t frames, std::size_t stride) {
  return (frames + stride - 1) / stride;
}

inline void check_stride(std::size_t stride) {
  require(stride == 1 || stride == 2, Errc::invalid_argument,
          "stride must be 1 or 2, got " + std::to_string(stride));
}

template <typename T>
bool all_finite(std::span<const T> values) {
  return std::all_of(values.begin(), values.end(), [](T v) { return std::isfinite(v); });
}

/// Rank-3 activation tensor T x 1 x C.
template <typename T>
class FeatureMap {
 public:
  using value_type = T;

  FeatureMap() = default;

  FeatureMap(std::size_t frames, std::size_t channels, T fill = T{0})
      : frames_(frames), channels_(channels), data_(frames * channels, fill) {
    require(frames >= 1 && channels >= 1, Errc::invalid_argument,
            "feature map needs T >= 1 and C >= 1");
  }

  FeatureMap(std::size_t frames, std::size_t channels, std::vector<T> data)
      : frames_(frames), channels_(channels), data_(std::move(data)) {
    require(frames >= 1 && channels >= 1, Errc::invalid_argument,
            "feature map needs T >= 1 and C >= 1");
    require(data_.size() == frames * channels, Errc::invalid_argument,
            "feature map data length " + std::to_string(data_.size()) + " != T*C");
    require(all_finite<T>(data_), Errc::numeric, "feature map contains non-finite values");
  }

  std::size_t frames() const noexcept { return frames_; }
  std::size_t height() const noexcept { return 1; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(std::size_t t, std::size_t c) noexcept { return data_[t * channels_ + c]; }
  T operator()(std::size_t t, std::size_t c) const noexcept { return data_[t * channels_ + c]; }

  std::span<T> frame(std::size_t t) noexcept { return {data_.data() + t * channels_, channels_}; }
  std::span<const T> frame(std::size_t t) const noexcept {
    return {data_.data() + t * channels_, channels_};
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  template <typename U>
  FeatureMap<U> cast() const {
    return FeatureMap<U>(frames_, channels_, std::vector<U>(data_.begin(), data_.end()));
  }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  std::size_t frames_ = 0;
  std::size_t channels_ = 0;
  std::vector<T> data_;
};

template <typename T>
using Batch = std::vector<FeatureMap<T>>;

/// Depthwise filter bank F of shape D x 1 x C; weights[i * C + c].
template <typename T>
struct DepthwiseKernel {
  std::size_t size = 1;
  std::size_t channels = 1;
  std::vector<T> weights;

  DepthwiseKernel() : weights(1, T{0}) {}

  DepthwiseKernel(std::size_t kernel_size, std::size_t num_channels, T fill = T{0})
      : size(kernel_size), channels(num_channels), weights(kernel_size * num_channels, fill) {
    validate();
  }

  DepthwiseKernel(std::size_t kernel_size, std::size_t num_channels, std::vector<T> w)
      : size(kernel_size), channels(num_channels), weights(std::move(w)) {
    validate();
  }

  void validate() const {
    require(size >= 1 && size % 2 == 1, Errc::invalid_argument,
            "depthwise kernel size must be odd, got " + std::to_string(size));
    require(channels >= 1, Errc::invalid_argument, "depthwise kernel needs C >= 1");
    require(weights.size() == size * channels, Errc::invalid_argument,
            "depthwise kernel weight count != D*C");
    require(all_finite<T>(weights), Errc::numeric, "depthwise kernel has non-finite weights");
  }

  std::size_t half_width() const noexcept { return (size - 1) / 2; }

  T& operator()(std::size_t i, std::size_t c) noexcept { return weights[i * channels + c]; }
  T operator()(std::size_t i, std::size_t c) const noexcept { return weights[i * channels + c]; }

  template <typename U>
  DepthwiseKernel<U> cast() const {
    return DepthwiseKernel<U>(size, channels, std::vector<U>(weights.begin(), weights.end()));
  }

  friend bool operator==(const DepthwiseKernel&, const DepthwiseKernel&) = default;
};

/// Per-channel batch normalization statistics and affine parameters.
/// `sigma` is the running standard deviation; epsilon is added to sigma^2.
template <typename T>
struct BnParams {
  std::vector<T> gamma;
  std::vector<T> beta;
  std::vector<T> mu;
  std::vector<T> sigma;
  T epsilon = T(1e-3);

  static BnParams identity(std::size_t channels, T eps = T(1e-3)) {
    return BnParams{std::vector<T>(channels, T{1}), std::vector<T>(channels, T{0}),
                    std::vector<T>(channels, T{0}), std::vector<T>(channels, T{1}), eps};
  }

  std::size_t channels() const noexcept { return gamma.size(); }

  void validate() const {
    const auto c = gamma.size();
    require(c >= 1 && beta.size() == c && mu.size() == c && sigma.size() == c,
            Errc::invalid_argument, "batch-norm arrays must share one channel count");
    require(std::isfinite(epsilon) && epsilon >= T{0}, Errc::numeric,
            "batch-norm epsilon must be finite and non-negative");
    for (auto* v : {&gamma, &beta, &mu, &sigma})
      require(all_finite<T>(*v), Errc::numeric, "batch-norm parameters must be finite");
    for (std::size_t j = 0; j < c; ++j) {
      require(sigma[j] >= T{0}, Errc::invalid_argument, "batch-norm sigma must be >= 0");
      require(effective_sigma(j) > T{0}, Errc::numeric,
              "batch-norm effective divisor sqrt(sigma^2 + eps) is zero");
    }
  }

  T effective_sigma(std::size_t j) const { return std::sqrt(sigma[j] * sigma[j] + epsilon); }
  T scale(std::size_t j) const { return gamma[j] / effective_sigma(j); }

  template <typename U>
  BnParams<U> cast() const {
    auto conv = [](const std::vector<T>& v) { return std::vector<U>(v.begin(), v.end()); };
    return BnParams<U>{conv(gamma), conv(beta), conv(mu), conv(sigma), static_cast<U>(epsilon)};
  }

  friend bool operator==(const BnParams&, const BnParams&) = default;
};

/// 1x1 convolution (also used as the dense head): weights[ci * C_out + co].
template <typename T>
struct PointwiseWeights {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::vector<T> weights;
  std::vector<T> bias;  // empty when absent

  PointwiseWeights() : weights(1, T{0}) {}

  PointwiseWeights(std::size_t c_in, std::size_t c_out, bool with_bias = false)
      : in_channels(c_in), out_channels(c_out), weights(c_in * c_out, T{0}),
        bias(with_bias ? c_out : 0, T{0}) {
    validate();
  }

  PointwiseWeights(std::size_t c_in, std::size_t c_out, std::vector<T> w, std::vector<T> b = {})
      : in_channels(c_in), out_channels(c_out), weights(std::move(w)), bias(std::move(b)) {
    validate();
  }

  void validate() const {
    require(in_channels >= 1 && out_channels >= 1, Errc::invalid_argument,
            "pointwise weights need C_in, C_out >= 1");
    require(weights.size() == in_channels * out_channels, Errc::invalid_argument,
            "pointwise weight count != C_in*C_out");
    require(bias.empty() || bias.size() == out_channels, Errc::invalid_argument,
            "pointwise bias length != C_out");
    require(all_finite<T>(weights) && all_finite<T>(bias), Errc::numeric,
            "pointwise weights must be finite");
  }

  bool has_bias() const noexcept { return !bias.empty(); }
  T& operator()(std::size_t ci, std::size_t co) noexcept { return weights[ci * out_channels + co]; }
  T operator()(std::size_t ci, std::size_t co) const noexcept {
    return weights[ci * out_channels + co];
  }

  template <typename U>
  PointwiseWeights<U> cast() const {
    return PointwiseWeights<U>(in_channels, out_channels,
                               std::vector<U>(weights.begin(), weights.end()),
                               std::vector<U>(bias.begin(), bias.end()));
  }

  friend bool operator==(const PointwiseWeights&, const PointwiseWeights&) = default;
};

/// Full (channel-mixing) temporal convolution D x 1 x C_in x C_out;
/// weights[(i * C_in + ci) * C_out + co]. Used by the network stem.
template <typename T>
struct TemporalConvWeights {
  std::size_t size = 1;
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::vector<T> weights;

  TemporalConvWeights() : weights(1, T{0}) {}

  TemporalConvWeights(std::size_t kernel_size, std::size_t c_in, std::size_t c_out,
                      std::vector<T> w = {})
      : size(kernel_size), in_channels(c_in), out_channels(c_out), weights(std::move(w)) {
    if (weights.empty()) weights.assign(size * in_channels * out_channels, T{0});
    require(size % 2 == 1, Errc::invalid_argument, "temporal conv kernel size must be odd");
    require(weights.size() == size * in_channels * out_channels, Errc::invalid_argument,
            "temporal conv weight count != D*C_in*C_out");
  }

  T& operator()(std::size_t i, std::size_t ci, std::size_t co) noexcept {
    return weights[(i * in_channels + ci) * out_channels + co];
  }
  T operator()(std::size_t i, std::size_t ci, std::size_t co) const noexcept {
    return weights[(i * in_channels + ci) * out_channels + co];
  }

  template <typename U>
  TemporalConvWeights<U> cast() const {
    return TemporalConvWeights<U>(size, in_channels, out_channels,
                                  std::vector<U>(weights.begin(), weights.end()));
  }

  friend bool operator==(const TemporalConvWeights&, const TemporalConvWeights&) = default;
};

// ---------------------------------------------------------------------------
// Forward ops
// ---------------------------------------------------------------------------

/// out[t, j] = sum_{i=-k..k} in[t*stride + i, j] * F[i + k, j] (+ bias[j]),
/// taps outside [0, T) read as zero. Left pad is k for either stride, so every
/// kernel size is centred on the same input frame.
template <typename T>
FeatureMap<T> depthwise_conv(const FeatureMap<T>& input, const DepthwiseKernel<T>& kernel,
                             std::size_t stride = 1,
                             std::optional<std::span<const T>> bias = std::nullopt) {
  check_stride(stride);
  require(kernel.size % 2 == 1, Errc::invalid_argument, "depthwise kernel size must be odd");
  require(input.channels() == kernel.channels, Errc::invalid_argument,
          "depthwise channel mismatch: input C=" + std::to_string(input.channels()) +
              " kernel C=" + std::to_string(kernel.channels));
  const std::size_t frames = input.frames();
  const std::size_t channels = input.channels();
  require(!bias || bias->size() == channels, Errc::invalid_argument, "depthwise bias length != C");

  const std::size_t out_frames = output_frames(frames, stride);
  const auto half = static_cast<std::ptrdiff_t>(kernel.half_width());
  FeatureMap<T> out(out_frames, channels);
  for (std::size_t t = 0; t < out_frames; ++t) {
    auto dst = out.frame(t);
    if (bias) std::copy(bias->begin(), bias->end(), dst.begin());
    const auto centre = static_cast<std::ptrdiff_t>(t * stride);
    for (std::ptrdiff_t i = -half; i <= half; ++i) {
      const std::ptrdiff_t src_t = centre + i;
      if (src_t < 0 || src_t >= static_cast<std::ptrdiff_t>(frames)) continue;
      const auto src = input.frame(static_cast<std::size_t>(src_t));
      const T* w = kernel.weights.data() + static_cast<std::size_t>(i + half) * channels;
      for (std::size_t c = 0; c < channels; ++c) dst[c] += src[c] * w[c];
    }
  }
  return out;
}

/// out[t, o] = sum_c in[t*stride, c] * W[c, o] (+ bias[o]).
template <typename T>
FeatureMap<T> pointwise_conv(const FeatureMap<T>& input, const PointwiseWeights<T>& w,
                             std::size_t stride = 1) {
  check_stride(stride);
  require(input.channels() == w.in_channels, Errc::invalid_argument,
          "pointwise channel mismatch: input C=" + std::to_string(input.channels()) +
              " weights C_in=" + std::to_string(w.in_channels));
  const std::size_t out_frames = output_frames(input.frames(), stride);
  FeatureMap<T> out(out_frames, w.out_channels);
  for (std::size_t t = 0; t < out_frames; ++t) {
    auto dst = out.frame(t);
    if (w.has_bias()) std::copy(w.bias.begin(), w.bias.end(), dst.begin());
    const auto src = input.frame(t * stride);
    for (std::size_t ci = 0; ci < w.in_channels; ++ci) {
      const T x = src[ci];
      const T* row = w.weights.data() + ci * w.out_channels;
      for (std::size_t co = 0; co < w.out_channels; ++co) dst[co] += x * row[co];
    }
  }
  return out;
}

/// Channel-mixing temporal convolution with centred zero padding.
template <typename T>
FeatureMap<T> temporal_conv(const FeatureMap<T>& input, const TemporalConvWeights<T>& w,
                            std::size_t stride = 1) {
  check_stride(stride);
  require(input.channels() == w.in_channels, Errc::invalid_argument,
          "temporal conv channel mismatch");
  const std::size_t frames = input.frames();
  const std::size_t out_frames = output_frames(frames, stride);
  const auto half = static_cast<std::ptrdiff_t>((w.size - 1) / 2);
  FeatureMap<T> out(out_frames, w.out_channels);
  for (std::size_t t = 0; t < out_frames; ++t) {
    auto dst = out.frame(t);
    const auto centre = static_cast<std::ptrdiff_t>(t * stride);
    for (std::ptrdiff_t i = -half; i <= half; ++i) {
      const std::ptrdiff_t src_t = centre + i;
      if (src_t < 0 || src_t >= static_cast<std::ptrdiff_t>(frames)) continue;
      const auto src = input.frame(static_cast<std::size_t>(src_t));
      const auto tap = static_cast<std::size_t>(i + half);
      for (std::size_t ci = 0; ci < w.in_channels; ++ci) {
        const T x = src[ci];
        const T* row = &w.weights[(tap * w.in_channels + ci) * w.out_channels];
        for (std::size_t co = 0; co < w.out_channels; ++co) dst[co] += x * row[co];
      }
    }
  }
  return out;
}

/// Inference-mode batch normalization with running statistics.
template <typename T>
FeatureMap<T> batchnorm(const FeatureMap<T>& input, const BnParams<T>& bn) {
  bn.validate();
  require(input.channels() == bn.channels(), Errc::invalid_argument,
          "batch-norm length mismatch: input C=" + std::to_string(input.channels()) +
              " bn C=" + std::to_string(bn.channels()));
  const std::size_t channels = input.channels();
  std::vector<T> scale(channels), shift(channels);
  for (std::size_t j = 0; j < channels; ++j) {
    scale[j] = bn.scale(j);
    shift[j] = bn.beta[j];
  }
  FeatureMap<T> out = input;
  for (std::size_t t = 0; t < out.frames(); ++t) {
    auto row = out.frame(t);
    for (std::size_t j = 0; j < channels; ++j) row[j] = (row[j] - bn.mu[j]) * scale[j] + shift[j];
  }
  return out;
}

template <typename T>
FeatureMap<T> relu(FeatureMap<T> input) {
  for (T& v : input.data()) v = v > T{0} ? v : T{0};
  return input;
}

template <typename T>
FeatureMap<T> add(FeatureMap<T> a, const FeatureMap<T>& b) {
  require(a.frames() == b.frames() && a.channels() == b.channels(), Errc::invalid_argument,
          "elementwise add shape mismatch");
  auto dst = a.data();
  auto src = b.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  return a;
}

/// Mean over time, one value per channel.
template <typename T>
std::vector<T> avg_pool_time(const FeatureMap<T>& input) {
  require(input.size() > 0, Errc::empty_input, "average pooling of an empty feature map");
  std::vector<T> out(input.channels(), T{0});
  for (std::size_t t = 0; t < input.frames(); ++t) {
    const auto row = input.frame(t);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += row[c];
  }
  const T inv = T{1} / static_cast<T>(input.frames());
  for (T& v : out) v *= inv;
  return out;
}

/// y[o] = sum_i x[i] * W[i, o] + bias[o].
template <typename T>
std::vector<T> dense(std::span<const T> x, const PointwiseWeights<T>& w) {
  require(!x.empty(), Errc::empty_input, "dense layer input is empty");
  require(x.size() == w.in_channels, Errc::invalid_argument, "dense input length mismatch");
  std::vector<T> y = w.has_bias() ? w.bias : std::vector<T>(w.out_channels, T{0});
  for (std::size_t i = 0; i < w.in_channels; ++i) {
    const T* row = w.weights.data() + i * w.out_channels;
    for (std::size_t o = 0; o < w.out_channels; ++o) y[o] += x[i] * row[o];
  }
  return y;
}

template <typename T>
std::vector<T> softmax(std::span<const T> logits) {
  require(!logits.empty(), Errc::empty_input, "softmax of an empty vector");
  const T peak = *std::max_element(logits.begin(), logits.end());
  std::vector<T> out(logits.size());
  T total{0};
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (T& v : out) v /= total;
  return out;
}

template <typename T>
T max_abs_diff(std::span<const T> a, std::span<const T> b) {
  require(a.size() == b.size(), Errc::invalid_argument, "max_abs_diff length mismatch");
  T worst{0};
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace tenet
