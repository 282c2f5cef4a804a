// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lsrgan/tensor.hpp"

namespace lsrgan {

/// Planar CHW image of doubles, nominally in [0, 1].
struct Image {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(std::size_t c, std::size_t h, std::size_t w, double fill = 0.0)
      : channels(c), height(h), width(w), pixels(c * h * w, fill) {}

  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return pixels[(c * height + y) * width + x];
  }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return pixels[(c * height + y) * width + x];
  }
  bool same_shape(const Image& other) const {
    return channels == other.channels && height == other.height && width == other.width;
  }
  bool operator==(const Image& other) const = default;
};

/// An LR input and its HR target; hr is exactly 4x lr in both dimensions.
struct ImagePair {
  Image lr;
  Image hr;
  std::string source;
  int augmentation = 0;  // dihedral variant applied, 0..7
};

inline constexpr std::size_t kScale = 4;

// Cubic convolution kernel with parameter a (Keys); a = -0.5 matches the
// MATLAB bicubic kernel.
double bicubic_kernel(double x, double a = -0.5);

/// One output pixel's contributing input indices (already clamped to the
/// image) and normalized weights.
struct ResampleTap {
  std::vector<std::size_t> index;
  std::vector<double> weight;
};

// Taps of the antialiased x4 cubic downscale along one axis of length
// `input_size`: the kernel is stretched by 4, output pixel i is centered at
// input coordinate 4 * (i + 0.5) - 0.5, weights are renormalized to sum to
// one, and out-of-range coordinates are clamped to the border.
std::vector<ResampleTap> downscale_taps(std::size_t input_size);

// Separable x4 downscale (rows first, then columns). Dimensions must be
// divisible by 4.
Image downscale4(const Image& hr);

// Dihedral transform: variant = rotation (variant % 4 quarter turns
// counter-clockwise) followed by a horizontal flip when variant >= 4.
// Variant 0 is the identity.
Image augment(const Image& image, int variant);
ImagePair augment(const ImagePair& pair, int variant);

ImagePair make_pair(Image hr, std::string source);

// Procedural HR patch: a color gradient overlaid with sinusoidal gratings
// and translucent rectangles, clamped to [0, 1].
Image synth_image(std::uint64_t seed, std::size_t index, std::size_t size);

// Converts to/from NCHW tensors. Images in a batch must share one shape.
template <typename T>
Tensor<T> to_tensor(std::span<const Image> images);
template <typename T>
Tensor<T> to_tensor(const Image& image) {
  return to_tensor<T>(std::span<const Image>(&image, 1));
}
template <typename T>
Image from_tensor(const Tensor<T>& batch, std::size_t index);

Image clamp01(const Image& image);
// round-half-up of clamp(v, 0, 1) * 255.
unsigned char quantize(double value);

// 8-bit PNG (gray, gray+alpha, RGB, RGBA, palette; alpha dropped) or binary
// PPM (P6, maxval 255). Values are scaled to [0, 1]; gray becomes 3 equal
// channels.
Image read_image(const std::filesystem::path& path);
// Writes PNG unless the extension is .ppm. Values are clamped and quantized.
void write_image(const Image& image, const std::filesystem::path& path);

}  // namespace lsrgan
