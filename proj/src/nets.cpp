// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "lsrgan/nets.hpp"

#include <cmath>
#include <cstring>

#include "lsrgan/ops.hpp"
#include "lsrgan/rng.hpp"

namespace lsrgan {

std::vector<std::string> NetConfig::violations() const {
  std::vector<std::string> out;
  auto positive = [&out](std::size_t v, const char* name) {
    if (v == 0) out.push_back(std::string(name) + " must be positive");
  };
  positive(g_channels, "g_channels");
  positive(d_channels, "d_channels");
  positive(d_hidden, "d_hidden");
  positive(l_channels, "l_channels");
  for (auto c : probe_channels) positive(c, "probe_channels");
  if (hr_size == 0 || hr_size % 4 != 0) out.push_back("hr_size must be a positive multiple of 4");
  if (probe_stage < 1 || probe_stage > 3) out.push_back("probe_stage must be in 1..3");
  return out;
}

void NetConfig::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::string msg = "invalid network config:";
  for (const auto& s : v) msg += "\n  - " + s;
  throw ConfigError(msg);
}

template <typename T>
void NetworkParams<T>::add(std::string name, Tensor<T> tensor) {
  if (contains(name)) throw Error("duplicate parameter name: " + name);
  entries_.emplace_back(std::move(name), std::move(tensor));
}

template <typename T>
bool NetworkParams<T>::contains(std::string_view name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return true;
  }
  return false;
}

template <typename T>
const Tensor<T>& NetworkParams<T>::at(std::string_view name) const {
  for (const auto& [n, t] : entries_) {
    if (n == name) return t;
  }
  throw Error("unknown parameter: " + std::string(name));
}

template <typename T>
void NetworkParams<T>::assign(std::string_view name, const Tensor<T>& values) {
  Tensor<T> target = at(name);
  if (target.shape() != values.shape()) {
    throw ShapeError("parameter " + std::string(name) + " has shape " + to_string(target.shape()) +
                     ", cannot assign " + to_string(values.shape()));
  }
  auto dst = target.mutable_data();
  std::copy(values.data().begin(), values.data().end(), dst.begin());
}

template <typename T>
void NetworkParams<T>::zero_grad() {
  for (auto& [n, t] : entries_) t.zero_grad();
}

template <typename T>
void NetworkParams<T>::set_requires_grad(bool requires_grad) {
  for (auto& [n, t] : entries_) t.set_requires_grad(requires_grad);
}

template <typename T>
std::size_t NetworkParams<T>::parameter_count() const {
  std::size_t total = 0;
  for (const auto& [n, t] : entries_) total += t.numel();
  return total;
}

template <typename T>
std::uint64_t NetworkParams<T>::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [n, t] : entries_) {
    for (T v : t.data()) {
      unsigned char bytes[sizeof(T)];
      std::memcpy(bytes, &v, sizeof(T));
      for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
      }
    }
  }
  return h;
}

template <typename T>
NetworkParams<T> NetworkParams<T>::deep_copy() const {
  NetworkParams<T> copy;
  for (const auto& [n, t] : entries_) {
    copy.add(n, Tensor<T>::from(t.shape(), std::vector<T>(t.data().begin(), t.data().end()),
                                t.requires_grad()));
  }
  return copy;
}

namespace {

template <typename T>
void add_conv(NetworkParams<T>& params, CounterRng& rng, const std::string& name,
              std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
              bool trainable) {
  const std::size_t fan_in = in_channels * kernel * kernel;
  const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
  std::vector<T> w(out_channels * fan_in);
  for (auto& v : w) v = static_cast<T>(rng.normal() * stddev);
  params.add(name + ".weight",
             Tensor<T>::from({out_channels, in_channels, kernel, kernel}, std::move(w), trainable));
  params.add(name + ".bias", Tensor<T>::zeros({out_channels}, trainable));
}

template <typename T>
void add_linear(NetworkParams<T>& params, CounterRng& rng, const std::string& name,
                std::size_t in_features, std::size_t out_features) {
  const double stddev = std::sqrt(2.0 / static_cast<double>(in_features));
  std::vector<T> w(out_features * in_features);
  for (auto& v : w) v = static_cast<T>(rng.normal() * stddev);
  params.add(name + ".weight", Tensor<T>::from({out_features, in_features}, std::move(w), true));
  params.add(name + ".bias", Tensor<T>::zeros({out_features}, true));
}

template <typename T>
Tensor<T> conv(const NetworkParams<T>& params, const std::string& name, const Tensor<T>& x,
               std::size_t stride) {
  const auto& w = params.at(name + ".weight");
  const std::size_t pad = w.dim(2) / 2;
  return ops::add_channel_bias(ops::conv2d(x, w, stride, pad), params.at(name + ".bias"));
}

template <typename T>
Tensor<T> linear(const NetworkParams<T>& params, const std::string& name, const Tensor<T>& x) {
  return ops::fully_connected(x, params.at(name + ".weight"), params.at(name + ".bias"));
}

template <typename T>
void require_image(const char* net, const Tensor<T>& x) {
  if (x.rank() != 4 || x.dim(1) != 3) {
    throw ShapeError(std::string(net) + ": expected [N,3,H,W] input, got " + to_string(x.shape()));
  }
}

std::size_t strided(std::size_t size) { return (size + 2 - 3) / 2 + 1; }

}  // namespace

template <typename T>
Tensor<T> Generator<T>::forward(const Tensor<T>& lr) const {
  require_image("generator", lr);
  const Tensor<T> head = conv(params, "head", lr, 1);
  Tensor<T> trunk = head;
  for (std::size_t b = 0; b < config.g_blocks; ++b) {
    const std::string block = "block" + std::to_string(b);
    const auto inner = ops::relu(conv(params, block + ".conv1", trunk, 1));
    trunk = ops::add(trunk, conv(params, block + ".conv2", inner, 1));
  }
  Tensor<T> features = ops::add(head, conv(params, "trunk", trunk, 1));
  features = ops::relu(conv(params, "up1", ops::nearest_upsample(features, 2), 1));
  features = ops::relu(conv(params, "up2", ops::nearest_upsample(features, 2), 1));
  features = ops::relu(conv(params, "hr", features, 1));
  return conv(params, "out", features, 1);
}

template <typename T>
Tensor<T> Discriminator<T>::forward(const Tensor<T>& hr) const {
  require_image("discriminator", hr);
  if (hr.dim(2) != config.hr_size || hr.dim(3) != config.hr_size) {
    throw ShapeError("discriminator: expected " + std::to_string(config.hr_size) + "x" +
                     std::to_string(config.hr_size) + " input, got " + to_string(hr.shape()));
  }
  Tensor<T> x = ops::leaky_relu(conv(params, "conv0", hr, 1));
  x = ops::leaky_relu(conv(params, "conv1", x, 2));
  x = ops::leaky_relu(conv(params, "conv2", x, 2));
  x = ops::leaky_relu(conv(params, "conv3", x, 2));
  x = ops::leaky_relu(linear(params, "fc1", ops::flatten(x)));
  return linear(params, "fc2", x);
}

template <typename T>
Tensor<T> Encoder<T>::forward(const Tensor<T>& hr) const {
  require_image("encoder", hr);
  if (hr.dim(2) % 4 != 0 || hr.dim(3) % 4 != 0) {
    throw ShapeError("encoder: spatial dims must be divisible by 4, got " + to_string(hr.shape()));
  }
  Tensor<T> x = ops::relu(conv(params, "conv0", hr, 1));
  x = ops::relu(conv(params, "conv1", x, 2));
  x = ops::relu(conv(params, "conv2", x, 2));
  return conv(params, "conv3", x, 1);
}

template <typename T>
Tensor<T> FeatureProbe<T>::forward(const Tensor<T>& hr) const {
  require_image("feature probe", hr);
  static constexpr std::size_t kStrides[3] = {1, 2, 2};
  Tensor<T> x = hr;
  for (std::size_t s = 0; s < config.probe_stage; ++s) {
    x = conv(params, "stage" + std::to_string(s), x, kStrides[s]);
    if (s + 1 < config.probe_stage) x = ops::relu(x);
  }
  return x;
}

template <typename T>
FeatureProbe<T> make_probe(const NetConfig& config) {
  config.validate();
  FeatureProbe<T> probe{config, {}};
  auto rng = CounterRng::stream(config.probe_seed, "init/probe");
  std::size_t in = 3;
  for (std::size_t s = 0; s < config.probe_stage; ++s) {
    add_conv(probe.params, rng, "stage" + std::to_string(s), in, config.probe_channels[s], 3,
             false);
    in = config.probe_channels[s];
  }
  return probe;
}

template <typename T>
Networks<T> init_networks(const NetConfig& config, std::uint64_t seed) {
  config.validate();
  Networks<T> nets{{config, {}}, {config, {}}, {config, {}}, make_probe<T>(config)};

  auto g_rng = CounterRng::stream(seed, "init/G");
  auto& g = nets.generator.params;
  const std::size_t gc = config.g_channels;
  add_conv(g, g_rng, "head", 3, gc, 3, true);
  for (std::size_t b = 0; b < config.g_blocks; ++b) {
    const std::string block = "block" + std::to_string(b);
    add_conv(g, g_rng, block + ".conv1", gc, gc, 3, true);
    add_conv(g, g_rng, block + ".conv2", gc, gc, 3, true);
  }
  add_conv(g, g_rng, "trunk", gc, gc, 3, true);
  add_conv(g, g_rng, "up1", gc, gc, 3, true);
  add_conv(g, g_rng, "up2", gc, gc, 3, true);
  add_conv(g, g_rng, "hr", gc, gc, 3, true);
  add_conv(g, g_rng, "out", gc, 3, 3, true);

  auto d_rng = CounterRng::stream(seed, "init/D");
  auto& d = nets.discriminator.params;
  const std::size_t dc = config.d_channels;
  add_conv(d, d_rng, "conv0", 3, dc, 3, true);
  add_conv(d, d_rng, "conv1", dc, dc, 3, true);
  add_conv(d, d_rng, "conv2", dc, 2 * dc, 3, true);
  add_conv(d, d_rng, "conv3", 2 * dc, 2 * dc, 3, true);
  const std::size_t side = strided(strided(strided(config.hr_size)));
  add_linear(d, d_rng, "fc1", 2 * dc * side * side, config.d_hidden);
  add_linear(d, d_rng, "fc2", config.d_hidden, 1);

  auto l_rng = CounterRng::stream(seed, "init/L");
  auto& l = nets.encoder.params;
  const std::size_t lc = config.l_channels;
  add_conv(l, l_rng, "conv0", 3, lc, 3, true);
  add_conv(l, l_rng, "conv1", lc, lc, 3, true);
  add_conv(l, l_rng, "conv2", lc, lc, 3, true);
  add_conv(l, l_rng, "conv3", lc, 3, 3, true);
  return nets;
}

template class NetworkParams<float>;
template class NetworkParams<double>;
template struct Generator<float>;
template struct Generator<double>;
template struct Discriminator<float>;
template struct Discriminator<double>;
template struct Encoder<float>;
template struct Encoder<double>;
template struct FeatureProbe<float>;
template struct FeatureProbe<double>;
template Networks<float> init_networks<float>(const NetConfig&, std::uint64_t);
template Networks<double> init_networks<double>(const NetConfig&, std::uint64_t);
template FeatureProbe<float> make_probe<float>(const NetConfig&);
template FeatureProbe<double> make_probe<double>(const NetConfig&);

}  // namespace lsrgan
