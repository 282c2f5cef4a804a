// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "lsrgan/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace lsrgan {

double GradcheckReport::worst() const {
  double w = 0.0;
  for (double e : max_relative_error) w = std::max(w, e);
  return w;
}

template <typename T>
GradcheckReport gradcheck(const std::function<Tensor<T>()>& f, std::vector<Tensor<T>> inputs,
                          T step, double tolerance) {
  for (const auto& in : inputs) {
    if (!in.is_leaf() || !in.requires_grad()) {
      throw Error("gradcheck: inputs must be leaves with requires_grad");
    }
  }
  for (auto& in : inputs) in.zero_grad();
  const Tensor<T> root = f();
  if (root.numel() != 1) {
    throw ShapeError("gradcheck: function output must be scalar, got " + to_string(root.shape()));
  }
  root.backward();

  GradcheckReport report;
  report.tolerance = tolerance;
  NoGradGuard no_grad;
  // Errors are relative to the largest gradient entry over all inputs, so an
  // input whose gradient is structurally zero is not judged on roundoff alone.
  std::vector<double> max_diff(inputs.size(), 0.0);
  double scale = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto& in = inputs[k];
    std::vector<double> analytic(in.numel(), 0.0);
    if (in.has_grad()) {
      for (std::size_t i = 0; i < analytic.size(); ++i) analytic[i] = in.grad()[i];
    }
    auto values = in.mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const T original = values[i];
      values[i] = original + step;
      const double plus = f().item();
      values[i] = original - step;
      const double minus = f().item();
      values[i] = original;
      const double numeric = (plus - minus) / (2.0 * static_cast<double>(step));
      max_diff[k] = std::max(max_diff[k], std::abs(numeric - analytic[i]));
      scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric)});
    }
    in.zero_grad();
  }
  for (double d : max_diff) report.max_relative_error.push_back(scale > 0.0 ? d / scale : 0.0);
  report.passed = report.worst() <= tolerance;
  return report;
}

template GradcheckReport gradcheck<float>(const std::function<Tensor<float>()>&,
                                          std::vector<Tensor<float>>, float, double);
template GradcheckReport gradcheck<double>(const std::function<Tensor<double>()>&,
                                           std::vector<Tensor<double>>, double, double);

}  // namespace lsrgan
