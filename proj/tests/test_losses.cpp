// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lsrgan/loss_suite.hpp"
#include "lsrgan/losses.hpp"
#include "lsrgan/ops.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace lsrgan {
namespace {

using testing::random_tensor;
using testing::tiny_config;
using testing::values;
using T64 = Tensor<double>;
using oracles::ccx_oracle;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<std::vector<double>> rows_of(const T64& t) {
  std::vector<std::vector<double>> out(t.dim(0), std::vector<double>(t.dim(1)));
  for (std::size_t i = 0; i < t.dim(0); ++i)
    for (std::size_t k = 0; k < t.dim(1); ++k) out[i][k] = t.at(i * t.dim(1) + k);
  return out;
}

T64 permute_rows(const T64& t, const std::vector<std::size_t>& perm) {
  std::vector<double> v;
  const std::size_t c = t.dim(1);
  for (auto p : perm)
    for (std::size_t k = 0; k < c; ++k) v.push_back(t.at(p * c + k));
  return T64::from(t.shape(), v);
}

TEST(L1Loss, Examples) {
  EXPECT_EQ(l1_loss(T64::from({2}, {1, 2}), T64::from({2}, {1, 4})).item(), 1.0);
  const auto a = T64::from({3}, {0.1, -2, 5});
  EXPECT_EQ(l1_loss(a, a).item(), 0.0);
  EXPECT_THROW(l1_loss(T64::zeros({2}), T64::zeros({3})), ShapeError);
}

TEST(L1Loss, MatchesElementwiseOracle) {
  auto rng = CounterRng::stream(1, "test/l1");
  const auto a = random_tensor(rng, {3, 3}, -1, 1, false);
  const auto b = random_tensor(rng, {3, 3}, -1, 1, false);
  double want = 0.0;
  for (std::size_t i = 0; i < 9; ++i) want += std::abs(a.at(i) - b.at(i));
  EXPECT_NEAR(l1_loss(a, b).item(), want / 9.0, 1e-12);
}

class WithNets : public ::testing::Test {
 protected:
  Networks<double> nets = init_networks<double>(tiny_config(), 3);
  CounterRng rng = CounterRng::stream(3, "test/losses");
  T64 image() { return random_tensor(rng, {2, 3, 8, 8}, 0, 1, false); }
};

TEST_F(WithNets, EncoderLoss) {
  const auto y = image(), gz = image();
  EXPECT_EQ(encoder_loss(y, y, nets.encoder).item(), 0.0);
  const double got = encoder_loss(y, gz, nets.encoder).item();
  EXPECT_EQ(got, l1_loss(nets.encoder.forward(y), nets.encoder.forward(gz)).item());
  const auto ly = values(nets.encoder.forward(y)), lg = values(nets.encoder.forward(gz));
  double want = 0.0;
  for (std::size_t i = 0; i < ly.size(); ++i) want += std::abs(ly[i] - lg[i]);
  EXPECT_NEAR(got, want / static_cast<double>(ly.size()), 1e-12);
  EXPECT_THROW(encoder_loss(y, T64::zeros({1, 3, 8, 8}), nets.encoder), ShapeError);
}

TEST_F(WithNets, PerceptualProbeLoss) {
  const auto y = image(), gz = image();
  EXPECT_EQ(perceptual_probe_loss(y, y, nets.probe).item(), 0.0);
  const double got = perceptual_probe_loss(gz, y, nets.probe).item();
  EXPECT_EQ(got, l1_loss(nets.probe.forward(gz), nets.probe.forward(y)).item());
  const auto fy = values(nets.probe.forward(y)), fg = values(nets.probe.forward(gz));
  double want = 0.0;
  for (std::size_t i = 0; i < fy.size(); ++i) want += std::abs(fy[i] - fg[i]);
  EXPECT_NEAR(got, want / static_cast<double>(fy.size()), 1e-12);
}

TEST(Relativistic, EqualLogits) {
  for (double v : {0.0, 1.5, -7.0}) {
    const auto p = relativistic_pair(T64::from({3, 1}, {v, v, v}), T64::from({3, 1}, {v, v, v}));
    EXPECT_NEAR(p.discriminator.item(), 2.0 * std::numbers::ln2, 1e-9);
    EXPECT_NEAR(p.generator.item(), 2.0 * std::numbers::ln2, 1e-9);
  }
}

TEST(Relativistic, SaturationStaysFinite) {
  const auto p = relativistic_pair(T64::from({2, 1}, {1e4, 1e4}), T64::from({2, 1}, {-1e4, -1e4}));
  EXPECT_TRUE(std::isfinite(p.discriminator.item()));
  EXPECT_TRUE(std::isfinite(p.generator.item()));
  EXPECT_LT(p.discriminator.item(), 1e-6);
  EXPECT_GT(p.generator.item(), 20.0);
}

TEST(Relativistic, MatchesScalarOracle) {
  auto rng = CounterRng::stream(4, "test/ra");
  const auto real = random_tensor(rng, {5, 1}, -3, 3, false);
  const auto fake = random_tensor(rng, {5, 1}, -3, 3, false);
  double mr = 0, mf = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    mr += real.at(i) / 5;
    mf += fake.at(i) / 5;
  }
  double d = 0, g = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    const double rf = sigmoid(real.at(i) - mf), fr = sigmoid(fake.at(i) - mr);
    d -= (std::log(rf) + std::log(1 - fr)) / 5;
    g -= (std::log(1 - rf) + std::log(fr)) / 5;
  }
  const auto p = relativistic_pair(real, fake);
  EXPECT_NEAR(p.discriminator.item(), d, 1e-10);
  EXPECT_NEAR(p.generator.item(), g, 1e-10);
}

TEST(Relativistic, SwapSwapsExactly) {
  auto rng = CounterRng::stream(5, "test/ra");
  const auto a = random_tensor(rng, {4, 1}, -2, 2, false);
  const auto b = random_tensor(rng, {4, 1}, -2, 2, false);
  const auto ab = relativistic_pair(a, b), ba = relativistic_pair(b, a);
  EXPECT_EQ(ab.discriminator.item(), ba.generator.item());
  EXPECT_EQ(ab.generator.item(), ba.discriminator.item());
}

TEST(StandardAdversarial, Examples) {
  EXPECT_EQ(standard_adversarial_g(T64::from({1, 1}, {0.0})).item(), 0.5);
  EXPECT_EQ(standard_adversarial_g(T64::from({2, 1}, {0.0, 0.0})).item(), 0.5);
  EXPECT_LT(standard_adversarial_g(T64::from({1, 1}, {50.0})).item(), 1e-20);
}

TEST(Ccx, HandExample) {
  const auto x = T64::from({2, 2}, {1, 0, 0, 1});
  AffinityMatrix<double> a;
  const double loss = ccx_loss(x, x, CCXConfig{}, &a).item();
  EXPECT_NEAR(a.distance[1], 2.0, 1e-12);
  EXPECT_NEAR(a.distance[2], 2.0, 1e-12);
  EXPECT_NEAR(a.distance[0], 0.0, 1e-12);
  EXPECT_NEAR(a.affinity[0], 1.0, 1e-12);
  EXPECT_NEAR(a.affinity[3], 1.0, 1e-12);
  EXPECT_NEAR(loss, 0.0, 1e-12);
}

TEST(Ccx, DegenerateSetsAreErrors) {
  const auto y = T64::from({2, 2}, {1, 1, 1, 1});
  EXPECT_THROW(ccx_loss(y, y, CCXConfig{}), DegenerateInputError);
}

TEST(Ccx, MatchesLoopOracleBothDistanceModes) {
  auto rng = CounterRng::stream(6, "test/ccx");
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_tensor(rng, {4, 3}, -1, 1, false);
    const auto y = random_tensor(rng, {4, 3}, -1, 1, false);
    for (auto mode : {DistanceMode::kCosineDistance, DistanceMode::kLiteralSimilarity}) {
      CCXConfig cfg;
      cfg.distance = mode;
      AffinityMatrix<double> a;
      const double got = ccx_loss(x, y, cfg, &a).item();
      const auto want = ccx_oracle(rows_of(x), rows_of(y), cfg.h, cfg.epsilon,
                                   mode == DistanceMode::kCosineDistance);
      if (mode == DistanceMode::kLiteralSimilarity) {
        // min_k d_ik + eps can be negative or near zero; only compare when the
        // normalization is well posed.
        bool ok = true;
        for (std::size_t i = 0; i < 4; ++i) {
          double m = a.distance[i * 4];
          for (std::size_t k = 1; k < 4; ++k) m = std::min(m, a.distance[i * 4 + k]);
          ok = ok && m > 0.05;
        }
        if (!ok) continue;
      }
      EXPECT_NEAR(got, want.loss, 1e-10);
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(a.affinity[i * 4 + j], want.a[i][j], 1e-10);
    }
  }
}

TEST(Ccx, RowsSumToOne) {
  auto rng = CounterRng::stream(7, "test/ccx");
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = random_tensor(rng, {6, 5}, -1, 1, false);
    const auto y = random_tensor(rng, {6, 5}, -1, 1, false);
    AffinityMatrix<double> a;
    ccx_loss(x, y, CCXConfig{}, &a);
    for (std::size_t i = 0; i < 6; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < 6; ++j) {
        const double v = a.affinity[i * 6 + j];
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        s += v;
      }
      EXPECT_NEAR(s, 1.0, 1e-6);
    }
  }
}

TEST(Ccx, PermutationInvariant) {
  auto rng = CounterRng::stream(8, "test/ccx");
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_tensor(rng, {5, 4}, -1, 1, false);
    const auto y = random_tensor(rng, {5, 4}, -1, 1, false);
    const double base = ccx_loss(x, y, CCXConfig{}).item();
    const auto px = random_permutation(5, rng), py = random_permutation(5, rng);
    EXPECT_NEAR(ccx_loss(permute_rows(x, px), y, CCXConfig{}).item(), base, 1e-10);
    EXPECT_NEAR(ccx_loss(x, permute_rows(y, py), CCXConfig{}).item(), base, 1e-10);
  }
}

TEST(Ccx, SelfIsClosest) {
  auto rng = CounterRng::stream(9, "test/ccx");
  int wins = 0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    // Well separated: points near distinct scaled basis directions.
    std::vector<double> v(4 * 4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t k = 0; k < 4; ++k) v[i * 4 + k] = (i == k ? 3.0 : 0.0) + rng.uniform(-0.3, 0.3);
    const auto x = T64::from({4, 4}, v);
    const auto y = random_tensor(rng, {4, 4}, -1, 1, false);
    if (ccx_loss(x, x, CCXConfig{}).item() <= ccx_loss(x, y, CCXConfig{}).item()) ++wins;
  }
  EXPECT_GE(wins, 950);
}

TEST(LossConfig, Violations) {
  LossWeights w;
  w.lambda = -1;
  w.mu = std::nan("");
  EXPECT_EQ(w.violations().size(), 2u);
  CCXConfig c;
  c.h = 0;
  c.epsilon = -1;
  EXPECT_EQ(c.violations().size(), 2u);
  EXPECT_EQ(parse_objective_kind("clsr"), ObjectiveKind::kCLSR);
  EXPECT_EQ(parse_objective_kind("kkt"), ObjectiveKind::kKKTStandard);
  EXPECT_THROW(parse_objective_kind("gan"), ConfigError);
}

class Objective : public WithNets {
 protected:
  CCXConfig ccx;
  LossWeights weights;
  double run(ObjectiveKind kind, const T64& gz, const T64& y) {
    return generator_objective(kind, gz, y, nets.discriminator, nets.encoder, nets.probe, weights,
                               ccx)
        .total.item();
  }
};

TEST_F(Objective, MuZeroCollapsesClsrToCesr) {
  weights.mu = 0.0;
  const auto gz = image(), y = image();
  EXPECT_EQ(run(ObjectiveKind::kCLSR, gz, y), run(ObjectiveKind::kCESR, gz, y));
  EXPECT_EQ(run(ObjectiveKind::kLSR, gz, y), run(ObjectiveKind::kESR, gz, y));
}

TEST_F(Objective, ZeroWeightsAndPerfectOutputGiveZero) {
  weights.lambda = weights.eta = weights.mu = 0.0;
  const auto y = image();
  for (auto kind : {ObjectiveKind::kESR, ObjectiveKind::kLSR, ObjectiveKind::kCESR,
                    ObjectiveKind::kCLSR}) {
    EXPECT_NEAR(run(kind, y, y), 0.0, 1e-9) << to_string(kind);
  }
}

TEST_F(Objective, EqualsHandComposedTerms) {
  weights.lambda = 0.3;
  weights.eta = 0.7;
  weights.mu = 0.2;
  const auto gz = image(), y = image();
  const double pixel = l1_loss(y, gz).item();
  const double latent = encoder_loss(y, gz, nets.encoder).item();
  const double percep = perceptual_probe_loss(gz, y, nets.probe).item();
  const double cx = ccx_feature_loss(nets.probe.forward(gz), nets.probe.forward(y), ccx).item();
  const double ra =
      relativistic_pair(nets.discriminator.forward(y), nets.discriminator.forward(gz)).generator.item();
  const double std_adv = standard_adversarial_g(nets.discriminator.forward(gz)).item();
  const double lam = 0.3, eta = 0.7, mu = 0.2;
  EXPECT_NEAR(run(ObjectiveKind::kESR, gz, y), percep + lam * ra + eta * pixel, 1e-12);
  EXPECT_NEAR(run(ObjectiveKind::kLSR, gz, y), percep + lam * ra + eta * pixel - mu * latent, 1e-12);
  EXPECT_NEAR(run(ObjectiveKind::kCESR, gz, y), cx + lam * ra + eta * pixel, 1e-12);
  EXPECT_NEAR(run(ObjectiveKind::kCLSR, gz, y), cx + lam * ra + eta * pixel - mu * latent, 1e-12);
  EXPECT_NEAR(run(ObjectiveKind::kKKTStandard, gz, y), std_adv + eta * pixel - mu * latent, 1e-12);

  const auto terms = generator_objective(ObjectiveKind::kLSR, gz, y, nets.discriminator,
                                         nets.encoder, nets.probe, weights, ccx);
  EXPECT_EQ(terms.pixel, pixel);
  EXPECT_EQ(terms.latent, latent);
  EXPECT_EQ(terms.perceptual, percep);
  EXPECT_EQ(terms.adversarial, ra);
}

TEST_F(Objective, LsrMinusEsrIsTheLatentTerm) {
  const auto gz = image(), y = image();
  const double delta = run(ObjectiveKind::kLSR, gz, y) - run(ObjectiveKind::kESR, gz, y);
  EXPECT_NEAR(delta, -weights.mu * encoder_loss(y, gz, nets.encoder).item(), 1e-10);
  weights.lsr_sign = 1.0;
  const double flipped = run(ObjectiveKind::kLSR, gz, y) - run(ObjectiveKind::kESR, gz, y);
  EXPECT_NEAR(flipped, -delta, 1e-10);
}

TEST(LossSuite, EveryLossPassesGradcheck) {
  const auto suite = loss_gradcheck_suite();
  ASSERT_EQ(suite.size(), 8u);
  for (const auto& entry : suite) {
    EXPECT_TRUE(entry.report.passed) << entry.name << " " << entry.report.worst();
  }
}

TEST(LossSuite, LsrObjectiveOnTinyImages) {
  NetConfig c = tiny_config(4);
  c.probe_stage = 1;
  const auto nets = init_networks<double>(c, 2);
  auto rng = CounterRng::stream(2, "test/lsr4");
  auto gz = random_tensor(rng, {1, 3, 4, 4}, 0, 1, true);
  auto y = random_tensor(rng, {1, 3, 4, 4}, 0, 1, true);
  const auto report = gradcheck<double>(
      [&] {
        return generator_objective(ObjectiveKind::kLSR, gz, y, nets.discriminator, nets.encoder,
                                   nets.probe, LossWeights{}, CCXConfig{})
            .total;
      },
      {gz, y}, 1e-4, 1e-4);
  EXPECT_TRUE(report.passed) << report.worst();
}

}  // namespace
}  // namespace lsrgan
