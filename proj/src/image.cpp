// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "lsrgan/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "lsrgan/rng.hpp"

namespace lsrgan {

double bicubic_kernel(double x, double a) {
  const double t = std::abs(x);
  if (t <= 1.0) return (a + 2.0) * t * t * t - (a + 3.0) * t * t + 1.0;
  if (t < 2.0) return a * t * t * t - 5.0 * a * t * t + 8.0 * a * t - 4.0 * a;
  return 0.0;
}

std::vector<ResampleTap> downscale_taps(std::size_t input_size) {
  if (input_size % kScale != 0) {
    throw ShapeError("downscale4: dimension " + std::to_string(input_size) +
                     " is not divisible by 4");
  }
  const double scale = static_cast<double>(kScale);
  const double support = 2.0 * scale;
  const std::size_t outputs = input_size / kScale;
  std::vector<ResampleTap> taps(outputs);
  for (std::size_t i = 0; i < outputs; ++i) {
    const double center = (static_cast<double>(i) + 0.5) * scale - 0.5;
    const auto first = static_cast<long>(std::floor(center - support)) + 1;
    const auto last = static_cast<long>(std::ceil(center + support)) - 1;
    double total = 0.0;
    for (long j = first; j <= last; ++j) {
      const double w = bicubic_kernel((static_cast<double>(j) - center) / scale);
      const long clamped = std::clamp(j, 0L, static_cast<long>(input_size) - 1);
      taps[i].index.push_back(static_cast<std::size_t>(clamped));
      taps[i].weight.push_back(w);
      total += w;
    }
    for (auto& w : taps[i].weight) w /= total;
  }
  return taps;
}

Image downscale4(const Image& hr) {
  const auto col_taps = downscale_taps(hr.width);
  const auto row_taps = downscale_taps(hr.height);
  const std::size_t ow = hr.width / kScale, oh = hr.height / kScale;

  Image horizontal(hr.channels, hr.height, ow);
  for (std::size_t c = 0; c < hr.channels; ++c) {
    for (std::size_t y = 0; y < hr.height; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        const auto& tap = col_taps[x];
        double acc = 0.0;
        for (std::size_t k = 0; k < tap.index.size(); ++k) acc += tap.weight[k] * hr.at(c, y, tap.index[k]);
        horizontal.at(c, y, x) = acc;
      }
    }
  }
  Image out(hr.channels, oh, ow);
  for (std::size_t c = 0; c < hr.channels; ++c) {
    for (std::size_t y = 0; y < oh; ++y) {
      const auto& tap = row_taps[y];
      for (std::size_t x = 0; x < ow; ++x) {
        double acc = 0.0;
        for (std::size_t k = 0; k < tap.index.size(); ++k) acc += tap.weight[k] * horizontal.at(c, tap.index[k], x);
        out.at(c, y, x) = acc;
      }
    }
  }
  return out;
}

namespace {

Image rotate90(const Image& in) {
  Image out(in.channels, in.width, in.height);
  for (std::size_t c = 0; c < in.channels; ++c) {
    for (std::size_t y = 0; y < out.height; ++y) {
      for (std::size_t x = 0; x < out.width; ++x) {
        out.at(c, y, x) = in.at(c, x, in.width - 1 - y);
      }
    }
  }
  return out;
}

Image flip_horizontal(const Image& in) {
  Image out(in.channels, in.height, in.width);
  for (std::size_t c = 0; c < in.channels; ++c) {
    for (std::size_t y = 0; y < in.height; ++y) {
      for (std::size_t x = 0; x < in.width; ++x) out.at(c, y, x) = in.at(c, y, in.width - 1 - x);
    }
  }
  return out;
}

}  // namespace

Image augment(const Image& image, int variant) {
  if (variant < 0 || variant >= 8) {
    throw DomainError("augment: variant " + std::to_string(variant) + " outside 0..7");
  }
  Image out = image;
  for (int r = 0; r < variant % 4; ++r) out = rotate90(out);
  if (variant >= 4) out = flip_horizontal(out);
  return out;
}

ImagePair augment(const ImagePair& pair, int variant) {
  return ImagePair{augment(pair.lr, variant), augment(pair.hr, variant), pair.source, variant};
}

ImagePair make_pair(Image hr, std::string source) {
  Image lr = downscale4(hr);
  return ImagePair{std::move(lr), std::move(hr), std::move(source), 0};
}

Image synth_image(std::uint64_t seed, std::size_t index, std::size_t size) {
  const auto base = CounterRng::stream(seed, "synth");
  CounterRng rng(mix64(base.key() ^ mix64(static_cast<std::uint64_t>(index) + 1)));
  Image img(3, size, size);
  const double s = static_cast<double>(size);

  double from[3], to[3];
  for (int c = 0; c < 3; ++c) {
    from[c] = rng.uniform(0.05, 0.95);
    to[c] = rng.uniform(0.05, 0.95);
  }
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double dx = std::cos(angle), dy = std::sin(angle);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double u = ((static_cast<double>(x) / s - 0.5) * dx +
                        (static_cast<double>(y) / s - 0.5) * dy) / std::numbers::sqrt2 + 0.5;
      for (std::size_t c = 0; c < 3; ++c) img.at(c, y, x) = from[c] + (to[c] - from[c]) * u;
    }
  }

  const auto gratings = 1 + rng.below(3);
  for (std::uint64_t g = 0; g < gratings; ++g) {
    const double freq = rng.uniform(0.03, 0.25);  // cycles per pixel
    const double theta = rng.uniform(0.0, std::numbers::pi);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double amplitude = rng.uniform(0.05, 0.2);
    double tint[3];
    for (auto& t : tint) t = rng.uniform(0.3, 1.0);
    const double kx = 2.0 * std::numbers::pi * freq * std::cos(theta);
    const double ky = 2.0 * std::numbers::pi * freq * std::sin(theta);
    for (std::size_t y = 0; y < size; ++y) {
      for (std::size_t x = 0; x < size; ++x) {
        const double wave = amplitude * std::sin(kx * static_cast<double>(x) +
                                                 ky * static_cast<double>(y) + phase);
        for (std::size_t c = 0; c < 3; ++c) img.at(c, y, x) += tint[c] * wave;
      }
    }
  }

  const auto rectangles = 1 + rng.below(3);
  for (std::uint64_t r = 0; r < rectangles; ++r) {
    const auto x0 = rng.below(size), y0 = rng.below(size);
    const auto w = 2 + rng.below(size / 2), h = 2 + rng.below(size / 2);
    const double alpha = rng.uniform(0.4, 1.0);
    double color[3];
    for (auto& c : color) c = rng.uniform(0.0, 1.0);
    for (std::size_t y = y0; y < std::min<std::size_t>(size, y0 + h); ++y) {
      for (std::size_t x = x0; x < std::min<std::size_t>(size, x0 + w); ++x) {
        for (std::size_t c = 0; c < 3; ++c) {
          img.at(c, y, x) = (1.0 - alpha) * img.at(c, y, x) + alpha * color[c];
        }
      }
    }
  }
  return clamp01(img);
}

template <typename T>
Tensor<T> to_tensor(std::span<const Image> images) {
  if (images.empty()) throw ShapeError("to_tensor: empty batch");
  const Image& first = images.front();
  std::vector<T> values;
  values.reserve(images.size() * first.pixels.size());
  for (const auto& img : images) {
    if (!img.same_shape(first)) throw ShapeError("to_tensor: images in a batch differ in shape");
    for (double v : img.pixels) values.push_back(static_cast<T>(v));
  }
  return Tensor<T>::from({images.size(), first.channels, first.height, first.width},
                         std::move(values));
}

template <typename T>
Image from_tensor(const Tensor<T>& batch, std::size_t index) {
  if (batch.rank() != 4 || index >= batch.dim(0)) {
    throw ShapeError("from_tensor: expected [N,C,H,W] with N > " + std::to_string(index) +
                     ", got " + to_string(batch.shape()));
  }
  Image img(batch.dim(1), batch.dim(2), batch.dim(3));
  const auto offset = index * img.pixels.size();
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = batch.data()[offset + i];
  return img;
}

template Tensor<float> to_tensor<float>(std::span<const Image>);
template Tensor<double> to_tensor<double>(std::span<const Image>);
template Image from_tensor<float>(const Tensor<float>&, std::size_t);
template Image from_tensor<double>(const Tensor<double>&, std::size_t);

Image clamp01(const Image& image) {
  Image out = image;
  for (auto& v : out.pixels) v = std::clamp(v, 0.0, 1.0);
  return out;
}

unsigned char quantize(double value) {
  if (!std::isfinite(value)) throw NumericError("quantize: non-finite pixel value");
  const double scaled = std::clamp(value, 0.0, 1.0) * 255.0;
  return static_cast<unsigned char>(std::floor(scaled + 0.5));
}

namespace {

bool has_extension(const std::filesystem::path& path, const char* ext) {
  auto e = path.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e == ext;
}

Image from_interleaved(const std::vector<unsigned char>& rgb, std::size_t h, std::size_t w) {
  Image img(3, h, w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) img.at(c, y, x) = rgb[(y * w + x) * 3 + c] / 255.0;
    }
  }
  return img;
}

std::vector<unsigned char> to_interleaved(const Image& image) {
  if (image.channels != 3 && image.channels != 1) {
    throw ShapeError("write_image: expected 1 or 3 channels, got " + std::to_string(image.channels));
  }
  std::vector<unsigned char> rgb(image.height * image.width * 3);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        const std::size_t src = image.channels == 3 ? c : 0;
        rgb[(y * image.width + x) * 3 + c] = quantize(image.at(src, y, x));
      }
    }
  }
  return rgb;
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  auto token = [&in, &path]() {
    std::string tok;
    char ch;
    while (in.get(ch)) {
      if (ch == '#') {
        std::string comment;
        std::getline(in, comment);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(ch))) {
        if (!tok.empty()) break;
        continue;
      }
      tok.push_back(ch);
    }
    if (tok.empty()) throw IoError(path.string() + ": truncated PPM header");
    return tok;
  };
  if (token() != "P6") throw IoError(path.string() + ": only binary PPM (P6) is supported");
  const auto w = std::stoul(token());
  const auto h = std::stoul(token());
  const auto maxval = std::stoul(token());
  if (maxval != 255) throw IoError(path.string() + ": only 8-bit PPM (maxval 255) is supported");
  if (w == 0 || h == 0) throw IoError(path.string() + ": empty image");
  std::vector<unsigned char> rgb(w * h * 3);
  in.read(reinterpret_cast<char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
  if (in.gcount() != static_cast<std::streamsize>(rgb.size())) {
    throw IoError(path.string() + ": truncated PPM payload");
  }
  return from_interleaved(rgb, h, w);
}

void write_ppm(const Image& image, const std::filesystem::path& path) {
  const auto rgb = to_interleaved(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Image read_png(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw IoError(path.string() + ": " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> rgb(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, rgb.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw IoError(path.string() + ": " + msg);
  }
  return from_interleaved(rgb, png.height, png.width);
}

void write_png(const Image& image, const std::filesystem::path& path) {
  const auto rgb = to_interleaved(image);
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, rgb.data(), 0, nullptr)) {
    throw IoError(path.string() + ": " + png.message);
  }
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
  if (has_extension(path, ".ppm")) return read_ppm(path);
  if (has_extension(path, ".png")) return read_png(path);
  throw IoError(path.string() + ": unsupported image format (expected .png or .ppm)");
}

void write_image(const Image& image, const std::filesystem::path& path) {
  for (double v : image.pixels) {
    if (!std::isfinite(v)) throw NumericError("write_image: non-finite pixel value");
  }
  if (has_extension(path, ".ppm")) {
    write_ppm(image, path);
  } else {
    write_png(image, path);
  }
}

}  // namespace lsrgan
