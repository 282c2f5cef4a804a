// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lsrgan/ops.hpp"
#include "lsrgan/pwl.hpp"
#include "lsrgan/rng.hpp"
#include "test_util.hpp"

namespace lsrgan {
namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

double sin_fn(double x) { return std::sin(x); }

TEST(Interpolant, LinearFunctionIsExact) {
  const auto pwl = build_interpolant([](double x) { return 2 * x; }, 0, 1, 1);
  EXPECT_EQ(pwl(0.5), 1.0);
  for (double t = 0; t <= 1; t += 0.0625) EXPECT_EQ(pwl(t), 2 * t);
  EXPECT_EQ(pwl.slopes(), (std::vector<double>{2.0}));
}

TEST(Interpolant, AbsoluteValue) {
  const auto pwl = build_interpolant([](double x) { return std::abs(x); }, -1, 1, 2);
  EXPECT_EQ(pwl.x(), (std::vector<double>{-1, 0, 1}));
  EXPECT_EQ(pwl.slopes(), (std::vector<double>{-1, 1}));
  for (double t = -1; t <= 1; t += 0.125) EXPECT_EQ(pwl(t), std::abs(t));
}

TEST(Interpolant, ExactAtVertices) {
  const auto pwl = build_interpolant(sin_fn, 0, kTwoPi, 64);
  ASSERT_EQ(pwl.segments(), 64u);
  for (std::size_t i = 0; i <= 64; ++i) {
    const double x = kTwoPi * static_cast<double>(i) / 64;
    EXPECT_NEAR(pwl.x()[i], x, 1e-15);
    EXPECT_EQ(pwl(pwl.x()[i]), std::sin(pwl.x()[i]));
  }
}

TEST(Interpolant, Errors) {
  EXPECT_THROW(build_interpolant(sin_fn, 1, 1, 4), DomainError);
  EXPECT_THROW(build_interpolant(sin_fn, 0, 1, 0), DomainError);
  EXPECT_THROW(build_interpolant([](double x) { return 1 / x; }, 0, 1, 4), NumericError);
  EXPECT_THROW(PWLFunction::from_vertices({0, 0}, {1, 2}), DomainError);
  EXPECT_THROW(build_interpolant(sin_fn, 0, 1, 2)(1.5), DomainError);
}

TEST(ErrorBound, LinearHasZeroError) {
  const auto f = [](double x) { return 3 * x - 1; };
  const auto grid = uniform_grid(0, 1, 1001);
  const auto r = error_bound(build_interpolant(f, 0, 1, 5), f, grid);
  EXPECT_LE(r.measured_max_error, 1e-15);
  EXPECT_TRUE(r.holds);
}

TEST(ErrorBound, DensityRuleMeetsTarget) {
  const auto grid = uniform_grid(0, kTwoPi, 10000);
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const auto n = density_rule_segments(0, kTwoPi, 1.0, eps);
    EXPECT_LE(kTwoPi / static_cast<double>(n), eps / 3);
    const auto r = error_bound(build_interpolant(sin_fn, 0, kTwoPi, n), sin_fn, grid);
    EXPECT_LT(r.measured_max_error, eps) << eps;
    EXPECT_TRUE(r.holds);
  }
}

TEST(ErrorBound, RefinementDoesNotIncreaseError) {
  const auto grid = uniform_grid(0, kTwoPi, 10000);
  double last = INFINITY;
  for (std::size_t n = 4; n <= 512; n *= 2) {
    const auto r = error_bound(build_interpolant(sin_fn, 0, kTwoPi, n), sin_fn, grid);
    EXPECT_LE(r.measured_max_error, last) << n;
    last = r.measured_max_error;
  }
}

TEST(ErrorBound, HoldsOnAssortedFunctions) {
  const std::vector<ScalarFunction> fns{sin_fn, [](double x) { return std::abs(x - 0.3); },
                                        [](double x) { return x * x * x - x; },
                                        [](double x) { return std::exp(x); }};
  const auto grid = uniform_grid(-1, 1, 4001);
  for (const auto& f : fns)
    for (std::size_t n : {1, 3, 7, 16, 100}) {
      const auto r = error_bound(build_interpolant(f, -1, 1, n), f, grid);
      EXPECT_TRUE(r.holds) << n;
      EXPECT_LE(r.measured_max_error, r.oscillation_bound + r.grid_slack);
    }
  std::vector<double> outside{-2.0, 0.0};
  EXPECT_THROW(error_bound(build_interpolant(sin_fn, -1, 1, 2), sin_fn, outside), DomainError);
}

TEST(Lipschitz, Examples) {
  const auto abs_r = lipschitz_of_pwl(PWLFunction::from_vertices({-1, 0, 1}, {1, 0, 1}));
  EXPECT_EQ(abs_r.tight_k, 1.0);
  EXPECT_EQ(abs_r.proof_k, 2.0);
  const auto flat = lipschitz_of_pwl(PWLFunction::from_vertices({0, 1, 2}, {4, 4, 4}));
  EXPECT_EQ(flat.tight_k, 0.0);
  EXPECT_EQ(flat.proof_k, 0.0);
  const auto line = lipschitz_of_pwl(PWLFunction::from_vertices({0, 1}, {0, 3}));
  EXPECT_EQ(line.tight_k, 3.0);
  EXPECT_EQ(line.proof_k, 3.0);
}

TEST(Lipschitz, RandomPwlRespectsTightConstant) {
  auto rng = CounterRng::stream(1, "test/pwl_lip");
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(20);
    std::vector<double> x{rng.uniform(-5, 0)}, f{rng.uniform(-3, 3)};
    for (std::size_t i = 0; i < n; ++i) {
      x.push_back(x.back() + rng.uniform(0.01, 1.0));
      f.push_back(rng.uniform(-3, 3));
    }
    const auto pwl = PWLFunction::from_vertices(x, f);
    const auto r = lipschitz_of_pwl(pwl);
    ASSERT_LE(r.tight_k, r.proof_k);
    ASSERT_GE(r.tight_k, 0.0);
    for (int k = 0; k < 1000; ++k) {
      const double s = rng.uniform(pwl.a(), pwl.b()), t = rng.uniform(pwl.a(), pwl.b());
      ASSERT_LE(std::abs(pwl(s) - pwl(t)), r.tight_k * std::abs(s - t) + 1e-12);
    }
  }
}

Image identity(const Image& img) { return img; }

TEST(Probe, IdentityMapsGiveRatioOne) {
  const auto report = empirical_lipschitz_probe(identity, identity, uniform_pair_sampler(3, 6, 5), 50);
  ASSERT_EQ(report.rows.size(), 50u);
  EXPECT_EQ(report.skipped, 0u);
  for (const auto& r : report.rows) EXPECT_EQ(r.ratio, 1.0);
  EXPECT_EQ(report.max, 1.0);
  EXPECT_EQ(report.median, 1.0);
}

TEST(Probe, UnitConvNetworksGiveRatioOne) {
  const auto eye = Tensor<double>::from({3, 3, 1, 1}, {1, 0, 0, 0, 1, 0, 0, 0, 1}, false);
  const ImageMap unit_conv = [&](const Image& img) {
    return from_tensor(ops::conv2d(to_tensor<double>(img), eye, 1, 0), 0);
  };
  const auto report =
      empirical_lipschitz_probe(unit_conv, unit_conv, uniform_pair_sampler(4, 4, 4), 20);
  ASSERT_EQ(report.rows.size(), 20u);
  for (const auto& r : report.rows) EXPECT_EQ(r.ratio, 1.0);
}

TEST(Probe, EqualInputsAreSkipped) {
  auto rng = CounterRng::stream(5, "test/probe");
  const auto fixed = testing::random_image(rng, 3, 4, 4);
  const auto other = testing::random_image(rng, 3, 4, 4);
  const PairSampler sampler = [&](std::size_t index, int which) {
    if (index % 2 == 0) return fixed;
    return which == 0 ? fixed : other;
  };
  const auto report = empirical_lipschitz_probe(identity, identity, sampler, 10);
  EXPECT_EQ(report.skipped, 5u);
  ASSERT_EQ(report.rows.size(), 5u);
  for (const auto& r : report.rows) EXPECT_EQ(r.pair % 2, 1u);
  const PairSampler same = [&](std::size_t, int) { return fixed; };
  EXPECT_THROW(empirical_lipschitz_probe(identity, identity, same, 4), DegenerateInputError);
  EXPECT_THROW(empirical_lipschitz_probe(identity, identity, same, 0), DomainError);
}

TEST(Probe, NetworksAreFiniteAndThreadIndependent) {
  const auto nets = init_networks<float>(testing::tiny_config(), 2);
  const auto sampler = uniform_pair_sampler(1, 4, 4);
  const auto a = empirical_lipschitz_probe(nets.generator, nets.encoder, sampler, 12, 1);
  const auto b = empirical_lipschitz_probe(nets.generator, nets.encoder, sampler, 12, 3);
  EXPECT_EQ(a.to_csv(), b.to_csv());
  EXPECT_TRUE(std::isfinite(a.max));
  EXPECT_LE(a.q05, a.median);
  EXPECT_LE(a.median, a.q95);
  EXPECT_LE(a.q95, a.max);
  const auto csv = a.to_csv();
  EXPECT_EQ(csv.substr(0, 11), "pair,ratio\n");
  EXPECT_NE(csv.find("\nskipped,0\n"), std::string::npos);
}

}  // namespace
}  // namespace lsrgan
