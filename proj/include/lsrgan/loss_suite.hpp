// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsrgan/gradcheck.hpp"

namespace lsrgan {

struct LossSuiteOptions {
  std::uint64_t seed = 1;
  double step = 1e-4;
  double tolerance = 1e-4;
};

struct LossSuiteEntry {
  std::string name;
  GradcheckReport report;
};

// Finite-difference checks (64-bit) of every loss with respect to seeded
// random 1x3x8x8 images: l1_loss, encoder_loss (also w.r.t. the encoder
// weights), perceptual_probe_loss, relativistic_d, relativistic_g,
// standard_adversarial_g, ccx_loss (on probe features) and
// generator_objective (all kinds, reported together).
std::vector<LossSuiteEntry> loss_gradcheck_suite(const LossSuiteOptions& options = {});

}  // namespace lsrgan
