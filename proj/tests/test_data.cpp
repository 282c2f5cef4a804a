// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "lsrgan/dataset.hpp"
#include "lsrgan/image.hpp"
#include "test_util.hpp"

namespace lsrgan {
namespace {

using testing::random_image;

double max_abs_diff(const Image& a, const Image& b) {
  EXPECT_TRUE(a.same_shape(b));
  double m = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) m = std::max(m, std::abs(a.pixels[i] - b.pixels[i]));
  return m;
}

// Keys cubic with a = -0.5, written from the piecewise definition.
double keys(double x) {
  x = std::abs(x);
  if (x <= 1) return 1.5 * x * x * x - 2.5 * x * x + 1;
  if (x < 2) return -0.5 * x * x * x + 2.5 * x * x - 4 * x + 2;
  return 0;
}

// Direct 2-D weighted sum with explicit stretched-kernel weights.
Image downscale_oracle(const Image& hr) {
  Image out(hr.channels, hr.height / 4, hr.width / 4);
  auto clampi = [](long v, long n) { return std::clamp<long>(v, 0, n - 1); };
  for (std::size_t c = 0; c < hr.channels; ++c)
    for (std::size_t oy = 0; oy < out.height; ++oy)
      for (std::size_t ox = 0; ox < out.width; ++ox) {
        const double cy = 4.0 * (oy + 0.5) - 0.5, cx = 4.0 * (ox + 0.5) - 0.5;
        double acc = 0, wsum = 0;
        for (long j = static_cast<long>(std::floor(cy - 8)); j <= static_cast<long>(std::ceil(cy + 8)); ++j)
          for (long k = static_cast<long>(std::floor(cx - 8)); k <= static_cast<long>(std::ceil(cx + 8)); ++k) {
            const double w = keys((j - cy) / 4.0) * keys((k - cx) / 4.0);
            if (w == 0.0) continue;
            acc += w * hr.at(c, clampi(j, hr.height), clampi(k, hr.width));
            wsum += w;
          }
        out.at(c, oy, ox) = acc / wsum;
      }
  return out;
}

TEST(Bicubic, KernelNodes) {
  EXPECT_EQ(bicubic_kernel(0.0), 1.0);
  EXPECT_EQ(bicubic_kernel(1.0), 0.0);
  EXPECT_EQ(bicubic_kernel(2.0), 0.0);
  EXPECT_EQ(bicubic_kernel(-1.0), 0.0);
  EXPECT_EQ(bicubic_kernel(3.0), 0.0);
  EXPECT_NEAR(bicubic_kernel(0.5), 0.5625, 1e-12);
  EXPECT_NEAR(bicubic_kernel(1.5), keys(1.5), 1e-15);
}

TEST(Bicubic, TapsAreNormalized) {
  for (const auto& tap : downscale_taps(24)) {
    double s = 0.0;
    for (double w : tap.weight) s += w;
    EXPECT_NEAR(s, 1.0, 1e-15);
    for (auto i : tap.index) EXPECT_LT(i, 24u);
  }
  EXPECT_THROW(downscale_taps(10), ShapeError);
}

TEST(Downscale, ConstantStaysConstant) {
  for (double c : {0.0, 0.3, 1.0}) {
    const auto lr = downscale4(Image(3, 16, 24, c));
    EXPECT_EQ(lr.height, 4u);
    EXPECT_EQ(lr.width, 6u);
    for (double v : lr.pixels) EXPECT_NEAR(v, c, 1e-12);
  }
}

TEST(Downscale, CheckerboardMatchesOracle) {
  Image hr(1, 8, 8);
  for (std::size_t y = 0; y < 8; ++y)
    for (std::size_t x = 0; x < 8; ++x) hr.at(0, y, x) = (x + y) % 2;
  EXPECT_LT(max_abs_diff(downscale4(hr), downscale_oracle(hr)), 1e-10);
}

TEST(Downscale, RandomMatchesOracle) {
  auto rng = CounterRng::stream(2, "test/down");
  const auto hr = random_image(rng, 3, 20, 12);
  EXPECT_LT(max_abs_diff(downscale4(hr), downscale_oracle(hr)), 1e-10);
}

TEST(Downscale, CommutesWithAugmentation) {
  auto rng = CounterRng::stream(3, "test/down");
  const auto hr = random_image(rng, 3, 16, 24);
  for (int v = 0; v < 8; ++v) {
    EXPECT_LT(max_abs_diff(downscale4(augment(hr, v)), augment(downscale4(hr), v)), 1e-10) << v;
  }
}

TEST(Downscale, RejectsIndivisibleSizes) {
  EXPECT_THROW(downscale4(Image(3, 10, 8)), ShapeError);
}

TEST(Augment, GroupLaws) {
  auto rng = CounterRng::stream(4, "test/aug");
  const auto img = random_image(rng, 3, 5, 7);
  EXPECT_EQ(augment(img, 0), img);
  EXPECT_EQ(augment(augment(img, 4), 4), img);
  Image r = img;
  for (int i = 0; i < 4; ++i) r = augment(r, 1);
  EXPECT_EQ(r, img);
  // All eight variants are distinct for a generic image.
  for (int a = 0; a < 8; ++a)
    for (int b = a + 1; b < 8; ++b) EXPECT_FALSE(augment(img, a) == augment(img, b));
  EXPECT_THROW(augment(img, 8), DomainError);
  EXPECT_THROW(augment(img, -1), DomainError);
}

TEST(Augment, QuarterTurnIsCounterClockwise) {
  Image img(1, 2, 3);
  for (std::size_t i = 0; i < 6; ++i) img.pixels[i] = static_cast<double>(i);
  // [[0 1 2] [3 4 5]] -> [[2 5] [1 4] [0 3]]
  EXPECT_EQ(augment(img, 1).pixels, (std::vector<double>{2, 5, 1, 4, 0, 3}));
  EXPECT_EQ(augment(img, 4).pixels, (std::vector<double>{2, 1, 0, 5, 4, 3}));
}

TEST(Synthetic, DeterministicAndWellFormed) {
  const auto a = Dataset::synthetic(7, 16, 32);
  const auto b = Dataset::synthetic(7, 16, 32);
  ASSERT_EQ(a.size(), 16u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& p = a.pair(i);
    EXPECT_EQ(p.hr, b.pair(i).hr);
    EXPECT_EQ(p.hr.channels, 3u);
    EXPECT_EQ(p.hr.height, 32u);
    EXPECT_EQ(p.hr.width, 32u);
    EXPECT_EQ(p.lr.height, 8u);
    EXPECT_EQ(p.lr.width, 8u);
    EXPECT_EQ(p.lr, downscale4(p.hr));
    for (double v : p.hr.pixels) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  EXPECT_FALSE(Dataset::synthetic(8, 1, 32).pair(0).hr == a.pair(0).hr);
}

TEST(Synthetic, DatasetSpecValidation) {
  DatasetSpec spec;
  spec.patch_size = 6;
  EXPECT_EQ(spec.violations().size(), 1u);
  spec.patch_size = 12;
  EXPECT_TRUE(spec.violations().empty());
  spec.source = DatasetSpec::Source::kDirectory;
  spec.directory = "/nonexistent/lsrgan";
  EXPECT_EQ(spec.violations().size(), 1u);
}

TEST(Sampling, OrderDeterministicPerEpoch) {
  const auto data = Dataset::synthetic(1, 10, 16);
  const auto o1 = data.epoch_order(5, 0);
  EXPECT_EQ(o1, data.epoch_order(5, 0));
  EXPECT_NE(o1, data.epoch_order(5, 1));
  auto sorted = o1;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Sampling, BatchSamplerRestoresExactly) {
  const auto data = Dataset::synthetic(1, 5, 16);
  BatchSampler a(data, 3, 2);
  for (int i = 0; i < 4; ++i) a.next();
  const auto state = a.state();
  const auto expected = a.next();
  BatchSampler b(data, 3, 2);
  b.restore(state);
  const auto got = b.next();
  ASSERT_EQ(got.size(), expected.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i].hr, expected[i].hr);
    EXPECT_EQ(got[i].augmentation, expected[i].augmentation);
  }
}

TEST(Sampling, TrainingPairCropsAndKeepsInvariant) {
  const auto data = Dataset::synthetic(2, 2, 32);
  auto rng = CounterRng::stream(1, "test/crop");
  for (int i = 0; i < 10; ++i) {
    const auto p = data.training_pair(i % 2, rng);
    EXPECT_EQ(p.hr.height, 32u);
    EXPECT_EQ(p.lr.height, 8u);
    EXPECT_LT(max_abs_diff(p.lr, downscale4(p.hr)), 1e-10);
  }
}

TEST(ImageIo, Quantization) {
  EXPECT_EQ(quantize(1.0), 255);
  EXPECT_EQ(quantize(0.5), 128);
  EXPECT_EQ(quantize(0.0), 0);
  EXPECT_EQ(quantize(-3.0), 0);
  EXPECT_EQ(quantize(7.0), 255);
}

TEST(ImageIo, QuantizedRoundTripIsBitwise) {
  const auto dir = testing::scratch_dir("io");
  auto rng = CounterRng::stream(5, "test/io");
  Image img(3, 6, 5);
  for (auto& v : img.pixels) v = static_cast<double>(rng.below(256)) / 255.0;
  for (const char* name : {"a.png", "a.ppm"}) {
    write_image(img, dir / name);
    EXPECT_EQ(read_image(dir / name), img) << name;
  }
}

TEST(ImageIo, PpmCommentsAndErrors) {
  const auto dir = testing::scratch_dir("ppm");
  {
    std::ofstream out(dir / "c.ppm", std::ios::binary);
    out << "P6\n# comment\n1 1\n255\n";
    out.put(static_cast<char>(255)).put(0).put(static_cast<char>(128));
  }
  const auto img = read_image(dir / "c.ppm");
  EXPECT_EQ(img.pixels, (std::vector<double>{1.0, 0.0, 128.0 / 255.0}));
  EXPECT_THROW(read_image(dir / "missing.png"), IoError);
  {
    std::ofstream out(dir / "bad.png", std::ios::binary);
    out << "not a png";
  }
  EXPECT_THROW(read_image(dir / "bad.png"), IoError);
}

TEST(Directory, LoadsSortedAndCropped) {
  const auto dir = testing::scratch_dir("dir");
  auto rng = CounterRng::stream(6, "test/dir");
  Image big(3, 34, 37);
  for (auto& v : big.pixels) v = static_cast<double>(rng.below(256)) / 255.0;
  write_image(big, dir / "b.png");
  write_image(Image(3, 16, 16, 0.5), dir / "a.ppm");
  {
    std::ofstream(dir / "notes.txt") << "ignored";
  }
  const auto data = Dataset::from_directory(dir, 16, false);
  ASSERT_EQ(data.size(), 2u);
  EXPECT_EQ(data.pair(0).hr.height, 16u);
  EXPECT_EQ(data.pair(1).hr.height, 32u);
  EXPECT_EQ(data.pair(1).hr.width, 36u);
  EXPECT_THROW(Dataset::from_directory(dir, 20, false), Error);
}

}  // namespace
}  // namespace lsrgan
