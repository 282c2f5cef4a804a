// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "lsrgan/image.hpp"
#include "lsrgan/nets.hpp"

namespace lsrgan {

// Studio-swing BT.601 luma of an RGB image in [0, 1]:
// Y = (16 + 65.481 R + 128.553 G + 24.966 B) / 255.
Image rgb_to_luma(const Image& rgb);

// Returned by psnr() for identical images.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

// PSNR in dB on the 0-255 scale: 20 log10(255) - 10 log10(MSE).
double psnr(const Image& a, const Image& b);

inline constexpr std::size_t kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
std::vector<double> ssim_gaussian_taps();

// Mean SSIM over all valid 11x11 window positions of single-channel images,
// dynamic range 255.
double ssim(const Image& a, const Image& b);

// Mean absolute difference.
double mean_l1(const Image& a, const Image& b);

struct ImageMetrics {
  std::string name;
  double psnr = 0.0;
  double ssim = 0.0;
  double l1 = 0.0;
};

// Population statistics. An infinite PSNR makes the mean infinite; the
// deviation is 0 when every value is infinite and infinite otherwise.
struct Summary {
  double mean = 0.0;
  double stddev = 0.0;
};
Summary summarize(const std::vector<double>& values);

struct EvalReport {
  std::vector<ImageMetrics> images;
  Summary psnr, ssim, l1;

  static EvalReport aggregate(std::vector<ImageMetrics> images);
  // Header, one row per image, then "mean" and "stddev" rows.
  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
};

// Upscales one LR image.
using SuperResolver = std::function<Image(const Image& lr)>;

// Runs the model on every LR image, clamps the result to [0, 1] and compares
// its luma against the HR luma. Images are processed on up to `threads`
// threads; the report does not depend on the thread count.
EvalReport evaluate(const SuperResolver& model, const std::vector<ImagePair>& pairs,
                    std::size_t threads = 1);

template <typename T>
Image super_resolve(const Generator<T>& generator, const Image& lr);

template <typename T>
EvalReport evaluate(const Generator<T>& generator, const std::vector<ImagePair>& pairs,
                    std::size_t threads = 1);

// Shortest decimal text that reads back to the same double; "inf"/"nan".
std::string format_number(double value);

}  // namespace lsrgan
