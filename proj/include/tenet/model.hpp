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

// TENet model descriptions, weights, forward pass and footprint accounting.
//
// A TENet is a 3x1 stem conv (+BN+ReLU), a stack of inverted bottleneck
// blocks (IBBs) and an average-pool / dense / softmax head. Each IBB is
//
//   expand 1x1 (stride s) -> BN -> ReLU
//   depthwise Dx1 -> BN -> ReLU        (MTConv: sum of per-branch conv+BN)
//   project 1x1 -> BN
//   + shortcut (identity, or 1x1 stride-s conv + BN) -> ReLU
//
// A standard depthwise layer is stored as a single branch, so an MTConv is the
// same structure with more branches and fusion simply collapses the list.

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tenet/random.hpp"
#include "tenet/tensor.hpp"
#include "tenet/tensor_grad.hpp"

namespace tenet {

inline constexpr std::size_t kNumClasses = 12;
inline constexpr std::size_t kMfccChannels = 40;
inline constexpr std::size_t kStandardKernel = 9;

// ---------------------------------------------------------------------------
// Specs
// ---------------------------------------------------------------------------

/// Branch kernel sizes of the depthwise stage, strictly increasing and odd.
/// {9} is the standard depthwise layer.
struct DepthwiseKind {
  std::vector<std::size_t> kernel_sizes{kStandardKernel};

  static DepthwiseKind standard(std::size_t size = kStandardKernel) { return DepthwiseKind{{size}}; }

  static DepthwiseKind mtconv(std::vector<std::size_t> sizes) {
    std::sort(sizes.begin(), sizes.end());
    DepthwiseKind kind{std::move(sizes)};
    kind.validate();
    return kind;
  }

  void validate() const {
    require(!kernel_sizes.empty(), Errc::invalid_argument, "depthwise stage needs >= 1 branch");
    for (std::size_t i = 0; i < kernel_sizes.size(); ++i) {
      require(kernel_sizes[i] % 2 == 1, Errc::invalid_argument,
              "branch kernel sizes must be odd, got " + std::to_string(kernel_sizes[i]));
      require(i == 0 || kernel_sizes[i] > kernel_sizes[i - 1], Errc::invalid_argument,
              "branch kernel sizes must be distinct");
    }
  }

  bool is_mtconv() const noexcept { return kernel_sizes.size() > 1; }
  std::size_t fused_size() const { return kernel_sizes.back(); }

  /// "standard:9" or "mtconv:3,5,7,9".
  std::string to_string() const {
    std::string out = is_mtconv() ? "mtconv:" : "standard:";
    for (std::size_t i = 0; i < kernel_sizes.size(); ++i)
      out += (i ? "," : "") + std::to_string(kernel_sizes[i]);
    return out;
  }

  static DepthwiseKind parse(std::string_view text) {
    if (auto colon = text.find(':'); colon != std::string_view::npos) text = text.substr(colon + 1);
    std::vector<std::size_t> sizes;
    std::string token;
    std::stringstream ss{std::string(text)};
    while (std::getline(ss, token, ',')) {
      require(!token.empty() && std::all_of(token.begin(), token.end(), ::isdigit),
              Errc::invalid_argument, "bad kernel size list '" + std::string(text) + "'");
      sizes.push_back(std::stoul(token));
    }
    return mtconv(std::move(sizes));
  }

  friend bool operator==(const DepthwiseKind&, const DepthwiseKind&) = default;
};

struct IbbSpec {
  std::size_t in_channels = 32;
  std::size_t out_channels = 32;
  std::size_t stride = 1;
  std::size_t expansion_ratio = 3;
  DepthwiseKind depthwise;

  std::size_t expansion_channels() const { return out_channels * expansion_ratio; }
  bool has_projection_shortcut() const { return stride != 1 || in_channels != out_channels; }

  friend bool operator==(const IbbSpec&, const IbbSpec&) = default;
};

struct ModelSpec {
  std::string name;
  std::size_t input_channels = kMfccChannels;
  std::size_t width = 32;
  std::size_t num_classes = kNumClasses;
  std::size_t stem_kernel = 3;
  double epsilon = 1e-3;
  std::vector<IbbSpec> blocks;

  std::vector<std::size_t> strides() const {
    std::vector<std::size_t> out;
    for (const auto& b : blocks) out.push_back(b.stride);
    return out;
  }

  DepthwiseKind depthwise() const {
    return blocks.empty() ? DepthwiseKind{} : blocks.front().depthwise;
  }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

inline ModelSpec make_model_spec(std::string name, std::size_t width,
                                 const std::vector<std::size_t>& strides,
                                 const DepthwiseKind& kind = DepthwiseKind::standard(),
                                 std::size_t input_channels = kMfccChannels,
                                 std::size_t num_classes = kNumClasses) {
  kind.validate();
  require(width >= 1 && input_channels >= 1 && num_classes >= 1, Errc::invalid_argument,
          "model dimensions must be positive");
  ModelSpec spec;
  spec.name = std::move(name);
  spec.input_channels = input_channels;
  spec.width = width;
  spec.num_classes = num_classes;
  for (auto s : strides) {
    check_stride(s);
    spec.blocks.push_back(IbbSpec{width, width, s, 3, kind});
  }
  return spec;
}

namespace detail {
inline std::string normalize_variant(std::string_view name) {
  std::string out;
  for (char ch : name) {
    if (ch == '_') ch = '-';
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  return out;
}
}  // namespace detail

inline const std::vector<std::size_t>& tenet12_strides() {
  static const std::vector<std::size_t> s{1, 2, 1, 1, 2, 1, 1, 2, 1, 1, 2, 1};
  return s;
}
inline const std::vector<std::size_t>& tenet6_strides() {
  static const std::vector<std::size_t> s{2, 1, 2, 1, 2, 1};
  return s;
}

/// One of TENet6, TENet12, TENet6-narrow, TENet12-narrow (case and '_'/'-'
/// insensitive).
inline ModelSpec variant_spec(std::string_view variant,
                              const DepthwiseKind& kind = DepthwiseKind::standard()) {
  const std::string key = detail::normalize_variant(variant);
  if (key == "tenet6") return make_model_spec("TENet6", 32, tenet6_strides(), kind);
  if (key == "tenet12") return make_model_spec("TENet12", 32, tenet12_strides(), kind);
  if (key == "tenet6-narrow") return make_model_spec("TENet6-narrow", 16, tenet6_strides(), kind);
  if (key == "tenet12-narrow")
    return make_model_spec("TENet12-narrow", 16, tenet12_strides(), kind);
  throw Error(Errc::invalid_argument, "unknown TENet variant '" + std::string(variant) + "'");
}

inline std::vector<std::string> variant_names() {
  return {"TENet6-narrow", "TENet12-narrow", "TENet6", "TENet12"};
}

// ---------------------------------------------------------------------------
// Weights
// ---------------------------------------------------------------------------

enum class TensorRole { weight, bias, bn_gamma, bn_beta, bn_mean, bn_sigma };

inline bool is_trainable(TensorRole role) {
  return role != TensorRole::bn_mean && role != TensorRole::bn_sigma;
}

template <typename T>
struct DepthwiseBranch {
  DepthwiseKernel<T> kernel;
  BnParams<T> bn;

  template <typename U>
  DepthwiseBranch<U> cast() const {
    return {kernel.template cast<U>(), bn.template cast<U>()};
  }
  friend bool operator==(const DepthwiseBranch&, const DepthwiseBranch&) = default;
};

template <typename T>
struct IbbWeights {
  PointwiseWeights<T> expand;
  BnParams<T> expand_bn;
  std::vector<DepthwiseBranch<T>> depthwise;
  PointwiseWeights<T> project;
  BnParams<T> project_bn;
  std::optional<PointwiseWeights<T>> shortcut;
  std::optional<BnParams<T>> shortcut_bn;

  template <typename U>
  IbbWeights<U> cast() const {
    IbbWeights<U> out;
    out.expand = expand.template cast<U>();
    out.expand_bn = expand_bn.template cast<U>();
    for (const auto& b : depthwise) out.depthwise.push_back(b.template cast<U>());
    out.project = project.template cast<U>();
    out.project_bn = project_bn.template cast<U>();
    if (shortcut) out.shortcut = shortcut->template cast<U>();
    if (shortcut_bn) out.shortcut_bn = shortcut_bn->template cast<U>();
    return out;
  }
  friend bool operator==(const IbbWeights&, const IbbWeights&) = default;
};

template <typename T>
struct Model {
  ModelSpec spec;
  TemporalConvWeights<T> stem;
  BnParams<T> stem_bn;
  std::vector<IbbWeights<T>> blocks;
  PointwiseWeights<T> head;  // dense width -> classes, with bias

  template <typename U>
  Model<U> cast() const {
    Model<U> out;
    out.spec = spec;
    out.stem = stem.template cast<U>();
    out.stem_bn = stem_bn.template cast<U>();
    for (const auto& b : blocks) out.blocks.push_back(b.template cast<U>());
    out.head = head.template cast<U>();
    return out;
  }

  /// Calls f(name, shape, values, role) for every stored tensor in a fixed
  /// order; `values` is a mutable span when the model is non-const.
  template <typename F>
  void visit_tensors(F&& f) {
    visit_impl(*this, f);
  }
  template <typename F>
  void visit_tensors(F&& f) const {
    visit_impl(*this, f);
  }

  friend bool operator==(const Model&, const Model&) = default;

 private:
  template <typename Self, typename F>
  static void visit_impl(Self& self, F& f) {
    using Shape = std::vector<std::size_t>;
    auto bn = [&f](const std::string& prefix, auto& params) {
      f(prefix + ".gamma", Shape{params.gamma.size()}, std::span(params.gamma), TensorRole::bn_gamma);
      f(prefix + ".beta", Shape{params.beta.size()}, std::span(params.beta), TensorRole::bn_beta);
      f(prefix + ".mean", Shape{params.mu.size()}, std::span(params.mu), TensorRole::bn_mean);
      f(prefix + ".sigma", Shape{params.sigma.size()}, std::span(params.sigma), TensorRole::bn_sigma);
    };
    auto pw = [&f](const std::string& prefix, auto& w) {
      f(prefix + ".weight", Shape{1, 1, w.in_channels, w.out_channels}, std::span(w.weights),
        TensorRole::weight);
    };
    f("stem.conv.weight", Shape{self.stem.size, 1, self.stem.in_channels, self.stem.out_channels},
      std::span(self.stem.weights), TensorRole::weight);
    bn("stem.bn", self.stem_bn);
    for (std::size_t i = 0; i < self.blocks.size(); ++i) {
      auto& b = self.blocks[i];
      const std::string p = "blocks." + std::to_string(i);
      pw(p + ".expand", b.expand);
      bn(p + ".expand_bn", b.expand_bn);
      for (auto& br : b.depthwise) {
        const std::string q = p + ".dw.k" + std::to_string(br.kernel.size);
        f(q + ".weight", Shape{br.kernel.size, 1, br.kernel.channels}, std::span(br.kernel.weights),
          TensorRole::weight);
        bn(q + ".bn", br.bn);
      }
      pw(p + ".project", b.project);
      bn(p + ".project_bn", b.project_bn);
      if (b.shortcut) pw(p + ".shortcut", *b.shortcut);
      if (b.shortcut_bn) bn(p + ".shortcut_bn", *b.shortcut_bn);
    }
    f("head.weight", Shape{self.head.in_channels, self.head.out_channels},
      std::span(self.head.weights), TensorRole::weight);
    f("head.bias", Shape{self.head.out_channels}, std::span(self.head.bias), TensorRole::bias);
  }
};

/// Zero-initialised weights with the structure dictated by `spec`
/// (BN set to the identity transform).
template <typename T>
Model<T> allocate_model(const ModelSpec& spec) {
  const T eps = static_cast<T>(spec.epsilon);
  Model<T> m;
  m.spec = spec;
  m.stem = TemporalConvWeights<T>(spec.stem_kernel, spec.input_channels, spec.width);
  m.stem_bn = BnParams<T>::identity(spec.width, eps);
  std::size_t channels = spec.width;
  for (const auto& b : spec.blocks) {
    require(b.in_channels == channels, Errc::invalid_argument, "block input width mismatch");
    b.depthwise.validate();
    IbbWeights<T> w;
    const std::size_t e = b.expansion_channels();
    w.expand = PointwiseWeights<T>(b.in_channels, e);
    w.expand_bn = BnParams<T>::identity(e, eps);
    for (auto d : b.depthwise.kernel_sizes)
      w.depthwise.push_back({DepthwiseKernel<T>(d, e), BnParams<T>::identity(e, eps)});
    w.project = PointwiseWeights<T>(e, b.out_channels);
    w.project_bn = BnParams<T>::identity(b.out_channels, eps);
    if (b.has_projection_shortcut()) {
      w.shortcut = PointwiseWeights<T>(b.in_channels, b.out_channels);
      w.shortcut_bn = BnParams<T>::identity(b.out_channels, eps);
    }
    m.blocks.push_back(std::move(w));
    channels = b.out_channels;
  }
  m.head = PointwiseWeights<T>(channels, spec.num_classes, /*with_bias=*/true);
  return m;
}

/// Deterministic initialisation: every conv / dense weight ~ U(-1/sqrt(fan_in),
/// 1/sqrt(fan_in)) drawn in visit order from one seeded stream; biases zero;
/// BN gamma=1, beta=0, mean=0, sigma=1.
template <typename T>
Model<T> build_model(const ModelSpec& spec, std::uint64_t seed) {
  Model<T> m = allocate_model<T>(spec);
  Rng rng(seed);
  m.visit_tensors([&](const std::string&, const std::vector<std::size_t>& shape, std::span<T> v,
                      TensorRole role) {
    if (role != TensorRole::weight) return;
    // fan-in: every dim except the output-channel one
    std::size_t fan_in = 1;
    for (std::size_t d = 0; d + 1 < shape.size(); ++d) fan_in *= shape[d];
    if (shape.size() == 3) fan_in = shape[0];  // depthwise D x 1 x C
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (T& x : v) x = static_cast<T>(rng.uniform(-bound, bound));
  });
  return m;
}

template <typename T>
Model<T> build_model(std::string_view variant, const DepthwiseKind& kind, std::uint64_t seed) {
  return build_model<T>(variant_spec(variant, kind), seed);
}

// ---------------------------------------------------------------------------
// Forward pass
// ---------------------------------------------------------------------------

enum class Mode { train, infer };

template <typename T>
struct BlockTape {
  Batch<T> input;
  Batch<T> expand_pre;
  BnBatchCache<T> expand_bn;
  Batch<T> expand_act;
  std::vector<Batch<T>> branch_pre;
  std::vector<BnBatchCache<T>> branch_bn;
  Batch<T> dw_act;
  Batch<T> project_pre;
  BnBatchCache<T> project_bn;
  Batch<T> shortcut_pre;
  BnBatchCache<T> shortcut_bn;
  Batch<T> output;
};

/// Intermediate activations recorded by a train-mode forward for backward().
template <typename T>
struct NetworkTape {
  Batch<T> input;
  Batch<T> stem_pre;
  BnBatchCache<T> stem_bn;
  Batch<T> stem_act;
  std::vector<BlockTape<T>> blocks;
  std::vector<std::vector<T>> pooled;
  std::vector<std::vector<T>> logits;
};

template <typename T>
struct Prediction {
  std::vector<T> logits;
  std::vector<T> probs;

  std::size_t top1() const {
    return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
  }
};

namespace detail {

template <typename T, typename Op>
Batch<T> map_batch(const Batch<T>& xs, Op op) {
  Batch<T> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(op(x));
  return out;
}

template <typename T>
Batch<T> bn_forward(const Batch<T>& xs, const BnParams<T>& bn, Mode mode, BnBatchCache<T>* cache) {
  if (mode == Mode::train) return batchnorm_train(xs, bn, cache);
  return map_batch(xs, [&](const FeatureMap<T>& x) { return batchnorm(x, bn); });
}

template <typename T>
Batch<T> relu_batch(Batch<T> xs) {
  for (auto& x : xs) x = relu(std::move(x));
  return xs;
}

}  // namespace detail

/// One inverted bottleneck block over a batch. In train mode BN uses the
/// batch statistics; `tape` (optional) records what backward() needs.
template <typename T>
Batch<T> ibb_forward(const IbbSpec& spec, const IbbWeights<T>& w, const Batch<T>& input, Mode mode,
                     BlockTape<T>* tape = nullptr) {
  using detail::bn_forward;
  using detail::map_batch;
  BlockTape<T> local;
  BlockTape<T>& tp = tape ? *tape : local;
  const bool keep = tape != nullptr;

  auto expand_pre = map_batch(input, [&](const auto& x) {
    return pointwise_conv(x, w.expand, spec.stride);
  });
  auto expand_act =
      detail::relu_batch(bn_forward(expand_pre, w.expand_bn, mode, keep ? &tp.expand_bn : nullptr));

  Batch<T> dw_sum;
  if (keep) {
    tp.branch_pre.resize(w.depthwise.size());
    tp.branch_bn.resize(w.depthwise.size());
  }
  for (std::size_t b = 0; b < w.depthwise.size(); ++b) {
    const auto& br = w.depthwise[b];
    auto pre = map_batch(expand_act, [&](const auto& x) { return depthwise_conv(x, br.kernel, 1); });
    auto normed = bn_forward(pre, br.bn, mode, keep ? &tp.branch_bn[b] : nullptr);
    if (b == 0) {
      dw_sum = std::move(normed);
    } else {
      for (std::size_t n = 0; n < dw_sum.size(); ++n) dw_sum[n] = add(std::move(dw_sum[n]), normed[n]);
    }
    if (keep) tp.branch_pre[b] = std::move(pre);
  }
  auto dw_act = detail::relu_batch(std::move(dw_sum));

  auto project_pre = map_batch(dw_act, [&](const auto& x) { return pointwise_conv(x, w.project, 1); });
  auto out = bn_forward(project_pre, w.project_bn, mode, keep ? &tp.project_bn : nullptr);

  if (w.shortcut) {
    auto sc_pre = map_batch(input, [&](const auto& x) {
      return pointwise_conv(x, *w.shortcut, spec.stride);
    });
    auto sc = bn_forward(sc_pre, *w.shortcut_bn, mode, keep ? &tp.shortcut_bn : nullptr);
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = add(std::move(out[n]), sc[n]);
    if (keep) tp.shortcut_pre = std::move(sc_pre);
  } else {
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = add(std::move(out[n]), input[n]);
  }
  out = detail::relu_batch(std::move(out));

  if (keep) {
    tp.input = input;
    tp.expand_pre = std::move(expand_pre);
    tp.expand_act = std::move(expand_act);
    tp.dw_act = std::move(dw_act);
    tp.project_pre = std::move(project_pre);
    tp.output = out;
  }
  return out;
}

/// Batched forward pass. Each input is T x 1 x input_channels.
template <typename T>
std::vector<Prediction<T>> forward(const Model<T>& model, const Batch<T>& inputs, Mode mode,
                                   NetworkTape<T>* tape = nullptr) {
  require(!inputs.empty(), Errc::empty_input, "forward over an empty batch");
  for (const auto& x : inputs)
    require(x.channels() == model.spec.input_channels, Errc::invalid_argument,
            "input has " + std::to_string(x.channels()) + " channels, model expects " +
                std::to_string(model.spec.input_channels));
  require(model.blocks.size() == model.spec.blocks.size(), Errc::invalid_argument,
          "model weights do not match spec block count");
  const bool keep = tape != nullptr;

  auto stem_pre = detail::map_batch(inputs, [&](const auto& x) { return temporal_conv(x, model.stem); });
  auto h = detail::relu_batch(
      detail::bn_forward(stem_pre, model.stem_bn, mode, keep ? &tape->stem_bn : nullptr));
  if (keep) {
    tape->input = inputs;
    tape->stem_pre = std::move(stem_pre);
    tape->stem_act = h;
    tape->blocks.assign(model.blocks.size(), BlockTape<T>{});
    tape->pooled.clear();
    tape->logits.clear();
  }
  for (std::size_t i = 0; i < model.blocks.size(); ++i)
    h = ibb_forward(model.spec.blocks[i], model.blocks[i], h, mode, keep ? &tape->blocks[i] : nullptr);

  std::vector<Prediction<T>> out;
  out.reserve(h.size());
  for (const auto& x : h) {
    auto pooled = avg_pool_time(x);
    auto logits = dense<T>(pooled, model.head);
    require(all_finite<T>(logits), Errc::numeric, "non-finite logits in forward pass");
    auto probs = softmax<T>(logits);
    if (keep) {
      tape->pooled.push_back(pooled);
      tape->logits.push_back(logits);
    }
    out.push_back(Prediction<T>{std::move(logits), std::move(probs)});
  }
  return out;
}

/// Single-clip inference with running BN statistics.
template <typename T>
Prediction<T> forward(const Model<T>& model, const FeatureMap<T>& input) {
  return forward(model, Batch<T>{input}, Mode::infer).front();
}

// ---------------------------------------------------------------------------
// Footprint accounting
// ---------------------------------------------------------------------------

struct CountRow {
  std::string layer;
  std::uint64_t params = 0;
  std::uint64_t mults = 0;

  friend bool operator==(const CountRow&, const CountRow&) = default;
};

struct CountReport {
  std::vector<CountRow> rows;
  std::uint64_t parameters = 0;
  std::uint64_t multiplies = 0;

  void add(std::string layer, std::uint64_t params, std::uint64_t mults) {
    rows.push_back({std::move(layer), params, mults});
    parameters += params;
    multiplies += mults;
  }

  /// layer,params,mults with a trailing "total" row.
  void write_csv(std::ostream& os) const {
    os << "layer,params,mults\n";
    for (const auto& r : rows) os << r.layer << ',' << r.params << ',' << r.mults << '\n';
    os << "total," << parameters << ',' << multiplies << '\n';
  }

  friend bool operator==(const CountReport&, const CountReport&) = default;
};

/// Parameters and multiplies of the deployed (single-branch) form. Conv and
/// dense weights count one multiply per MAC at their actual frame length; BN
/// contributes gamma and beta per channel and no multiplies (it folds into
/// the preceding conv at deployment).
inline CountReport count_report(const ModelSpec& spec, std::size_t frames = 98) {
  CountReport r;
  const std::uint64_t w = spec.width;
  std::uint64_t t = frames;
  r.add("stem.conv", spec.stem_kernel * spec.input_channels * w,
        t * spec.stem_kernel * spec.input_channels * w);
  r.add("stem.bn", 2 * w, 0);
  std::uint64_t channels = w;
  for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
    const auto& b = spec.blocks[i];
    const std::string p = "blocks." + std::to_string(i);
    const std::uint64_t e = b.expansion_channels();
    const std::uint64_t out_t = output_frames(t, b.stride);
    const std::uint64_t d = b.depthwise.fused_size();
    r.add(p + ".expand", b.in_channels * e, out_t * b.in_channels * e);
    r.add(p + ".expand_bn", 2 * e, 0);
    r.add(p + ".dw", d * e, out_t * d * e);
    r.add(p + ".dw_bn", 2 * e, 0);
    r.add(p + ".project", e * b.out_channels, out_t * e * b.out_channels);
    r.add(p + ".project_bn", 2 * b.out_channels, 0);
    if (b.has_projection_shortcut()) {
      r.add(p + ".shortcut", b.in_channels * b.out_channels, out_t * b.in_channels * b.out_channels);
      r.add(p + ".shortcut_bn", 2 * b.out_channels, 0);
    }
    t = out_t;
    channels = b.out_channels;
  }
  r.add("head.dense", channels * spec.num_classes + spec.num_classes, channels * spec.num_classes);
  return r;
}

template <typename T>
CountReport count_report(const Model<T>& model, std::size_t frames = 98) {
  return count_report(model.spec, frames);
}

}  // namespace tenet
