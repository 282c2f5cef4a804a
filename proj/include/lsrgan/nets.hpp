// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lsrgan/tensor.hpp"

namespace lsrgan {

inline constexpr std::uint64_t kDefaultProbeSeed = 0x1F5EED0F0E47A9B3ULL;

/// Network dimensions. Defaults are the desk-scale configuration.
struct NetConfig {
  std::size_t g_blocks = 4;     // residual blocks in the generator trunk
  std::size_t g_channels = 32;  // generator feature width
  std::size_t d_channels = 32;  // discriminator base width
  std::size_t d_hidden = 64;    // discriminator fully-connected width
  std::size_t hr_size = 32;     // square HR side the discriminator accepts
  std::size_t l_channels = 32;  // encoder width
  std::size_t probe_channels[3] = {16, 32, 32};
  std::size_t probe_stage = 3;  // 1..3: stage whose pre-activation is the feature map
  std::uint64_t probe_seed = kDefaultProbeSeed;

  // Human-readable list of every violated constraint; empty when valid.
  std::vector<std::string> violations() const;
  void validate() const;  // throws ConfigError with all violations
};

/// Named parameter tensors in stable insertion order.
template <typename T>
class NetworkParams {
 public:
  using Entry = std::pair<std::string, Tensor<T>>;

  void add(std::string name, Tensor<T> tensor);
  bool contains(std::string_view name) const;
  const Tensor<T>& at(std::string_view name) const;
  // Replaces the values of an existing entry; shapes must agree.
  void assign(std::string_view name, const Tensor<T>& values);

  std::size_t size() const { return entries_.size(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }

  void zero_grad();
  void set_requires_grad(bool requires_grad);
  std::size_t parameter_count() const;
  // FNV-1a over the raw bytes of every value, in order.
  std::uint64_t fingerprint() const;
  // Independent leaves with copied values and the same requires_grad flags.
  NetworkParams deep_copy() const;

 private:
  std::vector<Entry> entries_;
};

/// Residual-block generator: LR [N,3,h,w] -> HR [N,3,4h,4w]. ReLU only,
/// nearest-neighbor upsampling, so the map is piecewise linear.
template <typename T>
struct Generator {
  NetConfig config;
  NetworkParams<T> params;
  Tensor<T> forward(const Tensor<T>& lr) const;
};

/// Strided conv stack with a fully-connected head: HR [N,3,S,S] -> logits [N,1].
template <typename T>
struct Discriminator {
  NetConfig config;
  NetworkParams<T> params;
  Tensor<T> forward(const Tensor<T>& hr) const;
};

/// Companion encoder: HR [N,3,H,W] -> LR-shaped [N,3,H/4,W/4].
template <typename T>
struct Encoder {
  NetConfig config;
  NetworkParams<T> params;
  Tensor<T> forward(const Tensor<T>& hr) const;
};

/// Frozen conv+ReLU stages with strides (1,2,2). The output is the
/// pre-activation of stage `probe_stage`. Parameters never require grad.
template <typename T>
struct FeatureProbe {
  NetConfig config;
  NetworkParams<T> params;
  Tensor<T> forward(const Tensor<T>& hr) const;
};

template <typename T>
struct Networks {
  Generator<T> generator;
  Discriminator<T> discriminator;
  Encoder<T> encoder;
  FeatureProbe<T> probe;
};

// std = sqrt(2 / fan_in) normal weights, zero biases. G, D and L draw from
// streams of `seed`; the probe always draws from config.probe_seed.
template <typename T>
Networks<T> init_networks(const NetConfig& config, std::uint64_t seed);

template <typename T>
FeatureProbe<T> make_probe(const NetConfig& config);

}  // namespace lsrgan
