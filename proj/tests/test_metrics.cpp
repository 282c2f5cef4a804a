// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "lsrgan/dataset.hpp"
#include "lsrgan/metrics.hpp"
#include "lsrgan/ops.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace lsrgan {
namespace {

using oracles::ssim_oracle;
using testing::random_image;

Image rgb(double r, double g, double b) {
  Image img(3, 1, 1);
  img.pixels = {r, g, b};
  return img;
}

TEST(Luma, Examples) {
  EXPECT_NEAR(rgb_to_luma(rgb(1, 1, 1)).pixels[0], 235.0 / 255.0, 1e-9);
  EXPECT_NEAR(rgb_to_luma(rgb(0, 0, 0)).pixels[0], 16.0 / 255.0, 1e-9);
  EXPECT_NEAR(rgb_to_luma(rgb(0.5, 0.5, 0.5)).pixels[0], (16.0 + 109.5) / 255.0, 1e-9);
  EXPECT_THROW(rgb_to_luma(Image(1, 2, 2)), ShapeError);
}

TEST(Psnr, Examples) {
  auto rng = CounterRng::stream(1, "test/psnr");
  const auto a = random_image(rng, 1, 8, 8);
  EXPECT_EQ(psnr(a, a), kPsnrIdentical);
  Image b = a;
  for (std::size_t i = 0; i < b.pixels.size(); ++i) b.pixels[i] += (i % 2 ? 16.0 : -16.0) / 255.0;
  EXPECT_NEAR(psnr(a, b), 24.048, 1e-3);
  EXPECT_NEAR(psnr(a, b), 20 * std::log10(255.0) - 10 * std::log10(256.0), 1e-9);
}

TEST(Psnr, MatchesFormulaAndIsSymmetric) {
  auto rng = CounterRng::stream(2, "test/psnr");
  const auto a = random_image(rng, 1, 12, 9), b = random_image(rng, 1, 12, 9);
  double mse = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) mse += std::pow(255 * (a.pixels[i] - b.pixels[i]), 2);
  mse /= static_cast<double>(a.pixels.size());
  EXPECT_NEAR(psnr(a, b), 10 * std::log10(255.0 * 255.0 / mse), 1e-9);
  EXPECT_NEAR(psnr(a, b), psnr(b, a), 1e-12);
}

TEST(Psnr, DecreasesWithNoise) {
  auto rng = CounterRng::stream(3, "test/psnr");
  const auto a = random_image(rng, 1, 16, 16);
  auto noise = random_image(rng, 1, 16, 16);
  double last = kPsnrIdentical;
  for (double amp : {0.01, 0.02, 0.05, 0.1, 0.2}) {
    Image b = a;
    for (std::size_t i = 0; i < b.pixels.size(); ++i) b.pixels[i] += amp * (noise.pixels[i] - 0.5);
    const double p = psnr(a, b);
    EXPECT_LT(p, last);
    last = p;
  }
}

TEST(Ssim, IdenticalIsExactlyOne) {
  auto rng = CounterRng::stream(4, "test/ssim");
  const auto a = random_image(rng, 1, 16, 20);
  EXPECT_EQ(ssim(a, a), 1.0);
}

TEST(Ssim, InvertedIsWorse) {
  auto rng = CounterRng::stream(5, "test/ssim");
  const auto a = random_image(rng, 1, 16, 16);
  Image b = a;
  for (auto& v : b.pixels) v = 1.0 - v;
  const double s = ssim(a, b);
  EXPECT_LT(s, 1.0);
  EXPECT_GE(s, -1.0);
}

TEST(Ssim, MatchesSlidingWindowOracle) {
  auto rng = CounterRng::stream(6, "test/ssim");
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_image(rng, 1, 16, 16), b = random_image(rng, 1, 16, 16);
    const double s = ssim(a, b);
    EXPECT_NEAR(s, ssim_oracle(a, b), 1e-8);
    EXPECT_NEAR(s, ssim(b, a), 1e-12);
  }
}

TEST(Ssim, Errors) {
  EXPECT_THROW(ssim(Image(1, 10, 16), Image(1, 10, 16)), ShapeError);
  EXPECT_THROW(ssim(Image(3, 16, 16), Image(3, 16, 16)), ShapeError);
  EXPECT_THROW(ssim(Image(1, 16, 16), Image(1, 16, 17)), ShapeError);
}

TEST(Summary, PopulationStatistics) {
  const auto s = summarize({1.0, 2.0, 3.0, 4.0});
  EXPECT_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.stddev, std::sqrt(1.25), 1e-15);
  EXPECT_EQ(summarize({7.0}).stddev, 0.0);
  const auto inf = summarize({kPsnrIdentical, kPsnrIdentical});
  EXPECT_EQ(inf.mean, kPsnrIdentical);
  EXPECT_EQ(inf.stddev, 0.0);
  EXPECT_EQ(summarize({kPsnrIdentical, 3.0}).mean, kPsnrIdentical);
}

ImagePair constant_pair(double v, std::size_t lr_size) {
  return make_pair(Image(3, 4 * lr_size, 4 * lr_size, v), "const");
}

Image nearest4(const Image& lr) {
  const auto t = ops::nearest_upsample(to_tensor<double>(lr), 4);
  return from_tensor(t, 0);
}

TEST(Evaluate, IdentityPipeline) {
  const std::vector<ImagePair> pairs{constant_pair(0.25, 4), constant_pair(0.75, 4)};
  const auto report = evaluate(nearest4, pairs);
  ASSERT_EQ(report.images.size(), 2u);
  EXPECT_EQ(report.psnr.mean, kPsnrIdentical);
  EXPECT_EQ(report.ssim.mean, 1.0);
  EXPECT_EQ(report.l1.mean, 0.0);
  EXPECT_EQ(report.l1.stddev, 0.0);
}

TEST(Evaluate, SingleImageHasZeroDeviation) {
  auto rng = CounterRng::stream(7, "test/eval");
  const std::vector<ImagePair> pairs{make_pair(random_image(rng, 3, 16, 16), "r")};
  const auto report = evaluate(nearest4, pairs);
  EXPECT_EQ(report.psnr.stddev, 0.0);
  EXPECT_EQ(report.ssim.stddev, 0.0);
  EXPECT_EQ(report.l1.stddev, 0.0);
}

TEST(Evaluate, TwoImagesAggregateByHand) {
  auto rng = CounterRng::stream(8, "test/eval");
  const std::vector<ImagePair> pairs{make_pair(random_image(rng, 3, 16, 16), "a"),
                                     make_pair(random_image(rng, 3, 12, 16), "b")};
  const auto report = evaluate(nearest4, pairs);
  double p[2], s[2], l[2];
  for (int i = 0; i < 2; ++i) {
    const auto sr = rgb_to_luma(clamp01(nearest4(pairs[i].lr)));
    const auto hr = rgb_to_luma(pairs[i].hr);
    p[i] = psnr(sr, hr);
    s[i] = ssim(sr, hr);
    l[i] = mean_l1(sr, hr);
    EXPECT_EQ(report.images[i].name, pairs[i].source);
    EXPECT_EQ(report.images[i].psnr, p[i]);
  }
  EXPECT_NEAR(report.psnr.mean, (p[0] + p[1]) / 2, 1e-12);
  EXPECT_NEAR(report.ssim.mean, (s[0] + s[1]) / 2, 1e-12);
  EXPECT_NEAR(report.l1.mean, (l[0] + l[1]) / 2, 1e-12);
  EXPECT_NEAR(report.psnr.stddev, std::abs(p[0] - p[1]) / 2, 1e-12);
}

TEST(Evaluate, ThreadCountDoesNotMatter) {
  const auto data = Dataset::synthetic(3, 6, 16, false);
  const auto nets = init_networks<float>(testing::tiny_config(16), 1);
  EXPECT_EQ(evaluate(nets.generator, data.pairs(), 1).to_csv(),
            evaluate(nets.generator, data.pairs(), 3).to_csv());
}

TEST(Evaluate, CsvLayout) {
  const std::vector<ImagePair> pairs{constant_pair(0.5, 4)};
  const auto csv = evaluate(nearest4, pairs).to_csv();
  EXPECT_EQ(csv,
            "image,psnr_db,ssim,l1\n"
            "const,inf,1,0\n"
            "mean,inf,1,0\n"
            "stddev,0,0,0\n");
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1e-7), "1e-07");
  EXPECT_EQ(format_number(kPsnrIdentical), "inf");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  const double v = 0.123456789012345678;
  EXPECT_EQ(std::stod(format_number(v)), v);
}

}  // namespace
}  // namespace lsrgan
