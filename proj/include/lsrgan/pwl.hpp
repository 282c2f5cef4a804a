// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lsrgan/image.hpp"
#include "lsrgan/nets.hpp"

namespace lsrgan {

using ScalarFunction = std::function<double(double)>;

/// Continuous piecewise linear function on [x.front(), x.back()].
class PWLFunction {
 public:
  // Vertices must be finite, with strictly increasing x and at least two
  // points.
  static PWLFunction from_vertices(std::vector<double> x, std::vector<double> f);

  double operator()(double t) const;

  double a() const { return x_.front(); }
  double b() const { return x_.back(); }
  std::size_t segments() const { return slopes_.size(); }
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& f() const { return f_; }
  const std::vector<double>& slopes() const { return slopes_; }

 private:
  std::vector<double> x_, f_, slopes_;
};

// Interpolates f at x_i = a + i (b - a) / n, i = 0..n.
PWLFunction build_interpolant(const ScalarFunction& f, double a, double b, std::size_t n);

// Smallest n whose uniform spacing (b - a) / n is at most eps / (3 K).
std::size_t density_rule_segments(double a, double b, double lipschitz_k, double eps);

// `count` evenly spaced points covering [a, b] inclusive.
std::vector<double> uniform_grid(double a, double b, std::size_t count);

struct ErrorBoundReport {
  double measured_max_error = 0.0;  // max |f - f_pwl| over the grid
  // max over segments of (max f - min f) over the segment's endpoints and the
  // grid points inside it: a grid estimate of the oscillation sup.
  double oscillation_bound = 0.0;
  double grid_slack = 0.0;  // rounding allowance of the comparison
  bool holds = false;       // measured <= bound + slack
};

ErrorBoundReport error_bound(const PWLFunction& pwl, const ScalarFunction& f,
                             std::span<const double> grid);

struct LipschitzReport {
  double tight_k = 0.0;               // max |s_i|
  double proof_k = 0.0;               // sum |s_i|
  double empirical_max_ratio = 0.0;   // network probes only
};

LipschitzReport lipschitz_of_pwl(const PWLFunction& pwl);

using ImageMap = std::function<Image(const Image&)>;
// Returns input `which` (0 or 1) of pair `index`; must be deterministic.
using PairSampler = std::function<Image(std::size_t index, int which)>;

struct ProbeReport {
  struct Row {
    std::size_t pair = 0;
    double ratio = 0.0;
  };
  std::vector<Row> rows;  // evaluated pairs in index order
  std::size_t skipped = 0;
  double max = 0.0, median = 0.0, q05 = 0.0, q25 = 0.0, q75 = 0.0, q95 = 0.0;
  LipschitzReport lipschitz;

  // "pair,ratio" rows followed by summary rows keyed in the first column.
  std::string to_csv() const;
};

inline constexpr double kProbeDegenerate = 1e-12;

// For each pair (z1, z2): |G(z1) - G(z2)|_1 / |L(G(z1)) - L(G(z2))|_1 with
// element sums on both sides. Pairs whose denominator is below 1e-12 are
// skipped; DegenerateInputError when every pair is skipped.
ProbeReport empirical_lipschitz_probe(const ImageMap& generator, const ImageMap& encoder,
                                      const PairSampler& sampler, std::size_t pairs,
                                      std::size_t threads = 1);

template <typename T>
ProbeReport empirical_lipschitz_probe(const Generator<T>& generator, const Encoder<T>& encoder,
                                      const PairSampler& sampler, std::size_t pairs,
                                      std::size_t threads = 1);

// Uniform [0, 1] RGB images of size h x w from streams of `seed`.
PairSampler uniform_pair_sampler(std::uint64_t seed, std::size_t h, std::size_t w);

}  // namespace lsrgan
