// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lsrgan/tensor.hpp"

namespace lsrgan {

struct GradcheckReport {
  // Per input: max |analytic - numeric| over its elements, divided by the
  // largest |analytic| or |numeric| entry over all inputs. Zero when every
  // gradient vanishes.
  std::vector<double> max_relative_error;
  double tolerance = 0.0;
  bool passed = false;

  double worst() const;
};

/// Compares reverse-mode gradients of the scalar `f` with central finite
/// differences (f(x+h) - f(x-h)) / 2h for every element of every input.
/// `inputs` must be leaves with requires_grad set; `f` reads them directly.
template <typename T>
GradcheckReport gradcheck(const std::function<Tensor<T>()>& f, std::vector<Tensor<T>> inputs,
                          T step, double tolerance);

extern template GradcheckReport gradcheck<float>(const std::function<Tensor<float>()>&,
                                                 std::vector<Tensor<float>>, float, double);
extern template GradcheckReport gradcheck<double>(const std::function<Tensor<double>()>&,
                                                  std::vector<Tensor<double>>, double, double);

}  // namespace lsrgan
