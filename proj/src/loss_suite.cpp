// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "lsrgan/loss_suite.hpp"

#include <algorithm>
#include <cmath>

#include "lsrgan/losses.hpp"
#include "lsrgan/ops.hpp"
#include "lsrgan/nets.hpp"
#include "lsrgan/rng.hpp"

namespace lsrgan {

namespace {

using T64 = Tensor<double>;

T64 random_image(CounterRng& rng) {
  std::vector<double> v(3 * 8 * 8);
  for (auto& x : v) x = rng.uniform();
  return T64::from({1, 3, 8, 8}, std::move(v), true);
}

NetConfig suite_config() {
  NetConfig c;
  c.g_blocks = 1;
  c.g_channels = 4;
  c.d_channels = 4;
  c.d_hidden = 8;
  c.hr_size = 8;
  c.l_channels = 4;
  c.probe_channels[0] = 4;
  c.probe_channels[1] = 8;
  c.probe_channels[2] = 8;
  c.probe_stage = 3;
  return c;
}

double min_abs(const T64& t) {
  double m = HUGE_VAL;
  for (double v : t.data()) m = std::min(m, std::abs(v));
  return m;
}

double min_abs_diff(const T64& a, const T64& b) { return min_abs(ops::sub(a, b)); }

T64 conv_layer(const NetworkParams<double>& p, const std::string& name, const T64& x,
               std::size_t stride) {
  const auto& w = p.at(name + ".weight");
  return ops::add_channel_bias(ops::conv2d(x, w, stride, w.dim(2) / 2), p.at(name + ".bias"));
}

// Smallest distance of any ReLU/leaky ReLU input of a conv stack from zero.
// Also returns the stack output through `out`.
double stack_margin(const NetworkParams<double>& p, const std::string& prefix,
                    const std::vector<std::size_t>& strides, bool relu_last, T64 x, T64& out) {
  double m = HUGE_VAL;
  for (std::size_t s = 0; s < strides.size(); ++s) {
    x = conv_layer(p, prefix + std::to_string(s), x, strides[s]);
    if (s + 1 < strides.size() || relu_last) {
      m = std::min(m, min_abs(x));
      x = ops::relu(x);
    }
  }
  out = x;
  return m;
}

// Distance of the inputs from every non-differentiable point the losses can
// reach: ReLU kinks in the probe, encoder and discriminator, and the |.| of
// each L1 term.
double kink_margin(const Networks<double>& nets, const T64& gz, const T64& y) {
  NoGradGuard no_grad;
  double m = min_abs_diff(gz, y);
  const auto probe_strides = std::vector<std::size_t>{1, 2, 2};
  const std::vector<std::size_t> strides(probe_strides.begin(),
                                         probe_strides.begin() + nets.probe.config.probe_stage);
  T64 pg, py, lg, ly, dg;
  m = std::min(m, stack_margin(nets.probe.params, "stage", strides, false, gz, pg));
  m = std::min(m, stack_margin(nets.probe.params, "stage", strides, false, y, py));
  m = std::min(m, min_abs_diff(pg, py));
  m = std::min(m, stack_margin(nets.encoder.params, "conv", {1, 2, 2, 1}, false, gz, lg));
  m = std::min(m, stack_margin(nets.encoder.params, "conv", {1, 2, 2, 1}, false, y, ly));
  m = std::min(m, min_abs_diff(lg, ly));
  for (const auto* img : {&gz, &y}) {
    m = std::min(m, stack_margin(nets.discriminator.params, "conv", {1, 2, 2, 2}, true, *img, dg));
    const auto& w = nets.discriminator.params.at("fc1.weight");
    const auto h = ops::fully_connected(ops::flatten(dg), w,
                                        nets.discriminator.params.at("fc1.bias"));
    m = std::min(m, min_abs(h));
  }
  return m;
}

GradcheckReport merge(const std::vector<GradcheckReport>& parts, double tolerance) {
  GradcheckReport all;
  all.tolerance = tolerance;
  for (const auto& p : parts) {
    all.max_relative_error.insert(all.max_relative_error.end(), p.max_relative_error.begin(),
                                  p.max_relative_error.end());
  }
  all.passed = all.worst() <= tolerance;
  return all;
}

}  // namespace

std::vector<LossSuiteEntry> loss_gradcheck_suite(const LossSuiteOptions& options) {
  auto rng = CounterRng::stream(options.seed, "gradcheck/inputs");
  const auto nets = init_networks<double>(suite_config(), options.seed);
  const auto& d = nets.discriminator;
  const auto& l = nets.encoder;
  const auto& probe = nets.probe;
  const double step = options.step, tol = options.tolerance;
  // Central differences are meaningless across a kink, so inputs are redrawn
  // until every kink is well outside the step.
  const double margin = 10.0 * options.step;
  T64 gz = random_image(rng);
  T64 y = random_image(rng);
  while (kink_margin(nets, gz, y) < margin) {
    gz = random_image(rng);
    y = random_image(rng);
  }
  const LossWeights weights;
  const CCXConfig ccx;

  std::vector<LossSuiteEntry> out;
  auto check = [&](std::string name, std::function<T64()> f, std::vector<T64> inputs) {
    out.push_back({std::move(name), gradcheck<double>(f, std::move(inputs), step, tol)});
  };

  check("l1_loss", [&] { return l1_loss(gz, y); }, {gz, y});

  std::vector<T64> encoder_inputs{gz, y};
  for (const auto& [name, t] : l.params) encoder_inputs.push_back(t);
  check("encoder_loss", [&] { return encoder_loss(y, gz, l); }, encoder_inputs);

  check("perceptual_probe_loss", [&] { return perceptual_probe_loss(gz, y, probe); }, {gz, y});
  check("relativistic_d",
        [&] { return relativistic_pair(d.forward(y), d.forward(gz)).discriminator; }, {gz, y});
  check("relativistic_g",
        [&] { return relativistic_pair(d.forward(y), d.forward(gz)).generator; }, {gz, y});
  check("standard_adversarial_g", [&] { return standard_adversarial_g(d.forward(gz)); }, {gz});
  check("ccx_loss",
        [&] { return ccx_feature_loss(probe.forward(gz), probe.forward(y), ccx); }, {gz, y});

  std::vector<GradcheckReport> kinds;
  for (auto kind : {ObjectiveKind::kESR, ObjectiveKind::kLSR, ObjectiveKind::kCESR,
                    ObjectiveKind::kCLSR, ObjectiveKind::kKKTStandard}) {
    kinds.push_back(gradcheck<double>(
        [&, kind] { return generator_objective(kind, gz, y, d, l, probe, weights, ccx).total; },
        {gz, y}, step, tol));
  }
  out.push_back({"generator_objective", merge(kinds, tol)});
  return out;
}

}  // namespace lsrgan
