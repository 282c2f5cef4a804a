// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "lsrgan/metrics.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>

#include "lsrgan/error.hpp"
#include "lsrgan/parallel.hpp"

namespace lsrgan {

namespace {

void require_same(const Image& a, const Image& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shapes differ (" + std::to_string(a.channels) + "x" +
                     std::to_string(a.height) + "x" + std::to_string(a.width) + " vs " +
                     std::to_string(b.channels) + "x" + std::to_string(b.height) + "x" +
                     std::to_string(b.width) + ")");
  }
}

}  // namespace

Image rgb_to_luma(const Image& rgb) {
  if (rgb.channels != 3) {
    throw ShapeError("rgb_to_luma: expected 3 channels, got " + std::to_string(rgb.channels));
  }
  Image y(1, rgb.height, rgb.width);
  for (std::size_t i = 0; i < rgb.height; ++i) {
    for (std::size_t j = 0; j < rgb.width; ++j) {
      y.at(0, i, j) = (16.0 + 65.481 * rgb.at(0, i, j) + 128.553 * rgb.at(1, i, j) +
                       24.966 * rgb.at(2, i, j)) / 255.0;
    }
  }
  return y;
}

double psnr(const Image& a, const Image& b) {
  require_same(a, b, "psnr");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = 255.0 * a.pixels[i] - 255.0 * b.pixels[i];
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(a.pixels.size());
  if (mse == 0.0) return kPsnrIdentical;
  return 20.0 * std::log10(255.0) - 10.0 * std::log10(mse);
}

std::vector<double> ssim_gaussian_taps() {
  std::vector<double> taps(kSsimWindow);
  const double center = static_cast<double>(kSsimWindow - 1) / 2.0;
  double total = 0.0;
  for (std::size_t i = 0; i < kSsimWindow; ++i) {
    const double d = static_cast<double>(i) - center;
    taps[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    total += taps[i];
  }
  for (auto& t : taps) t /= total;
  return taps;
}

namespace {

// Valid-region separable filtering of one plane.
std::vector<double> filter_valid(const std::vector<double>& plane, std::size_t h, std::size_t w,
                                 const std::vector<double>& taps) {
  const std::size_t k = taps.size(), oh = h - k + 1, ow = w - k + 1;
  std::vector<double> rows(h * ow);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) acc += taps[t] * plane[y * w + x + t];
      rows[y * ow + x] = acc;
    }
  }
  std::vector<double> out(oh * ow);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) acc += taps[t] * rows[(y + t) * ow + x];
      out[y * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
  require_same(a, b, "ssim");
  if (a.channels != 1) throw ShapeError("ssim: expected single-channel images");
  if (a.height < kSsimWindow || a.width < kSsimWindow) {
    throw ShapeError("ssim: image " + std::to_string(a.height) + "x" + std::to_string(a.width) +
                     " is smaller than the 11x11 window");
  }
  const std::size_t n = a.pixels.size();
  std::vector<double> pa(n), pb(n), aa(n), bb(n), ab(n);
  for (std::size_t i = 0; i < n; ++i) {
    pa[i] = 255.0 * a.pixels[i];
    pb[i] = 255.0 * b.pixels[i];
    aa[i] = pa[i] * pa[i];
    bb[i] = pb[i] * pb[i];
    ab[i] = pa[i] * pb[i];
  }
  const auto taps = ssim_gaussian_taps();
  const auto mu_a = filter_valid(pa, a.height, a.width, taps);
  const auto mu_b = filter_valid(pb, a.height, a.width, taps);
  const auto e_aa = filter_valid(aa, a.height, a.width, taps);
  const auto e_bb = filter_valid(bb, a.height, a.width, taps);
  const auto e_ab = filter_valid(ab, a.height, a.width, taps);

  const double c1 = (kSsimK1 * 255.0) * (kSsimK1 * 255.0);
  const double c2 = (kSsimK2 * 255.0) * (kSsimK2 * 255.0);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double va = e_aa[i] - ma * ma;
    const double vb = e_bb[i] - mb * mb;
    const double cov = e_ab[i] - ma * mb;
    total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
             ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return total / static_cast<double>(mu_a.size());
}

double mean_l1(const Image& a, const Image& b) {
  require_same(a, b, "mean_l1");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) sum += std::abs(a.pixels[i] - b.pixels[i]);
  return sum / static_cast<double>(a.pixels.size());
}

Summary summarize(const std::vector<double>& values) {
  if (values.empty()) throw DegenerateInputError("summarize: no values");
  std::size_t infinite = 0;
  double sum = 0.0;
  for (double v : values) {
    if (std::isinf(v)) {
      ++infinite;
    } else {
      sum += v;
    }
  }
  if (infinite > 0) {
    return {kPsnrIdentical, infinite == values.size() ? 0.0 : kPsnrIdentical};
  }
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

EvalReport EvalReport::aggregate(std::vector<ImageMetrics> images) {
  EvalReport report;
  std::vector<double> p, s, l;
  for (const auto& m : images) {
    p.push_back(m.psnr);
    s.push_back(m.ssim);
    l.push_back(m.l1);
  }
  report.psnr = summarize(p);
  report.ssim = summarize(s);
  report.l1 = summarize(l);
  report.images = std::move(images);
  return report;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return fmt::format("{}", value);
}

std::string EvalReport::to_csv() const {
  std::string out = "image,psnr_db,ssim,l1\n";
  for (const auto& m : images) {
    out += m.name + "," + format_number(m.psnr) + "," + format_number(m.ssim) + "," +
           format_number(m.l1) + "\n";
  }
  out += "mean," + format_number(psnr.mean) + "," + format_number(ssim.mean) + "," +
         format_number(l1.mean) + "\n";
  out += "stddev," + format_number(psnr.stddev) + "," + format_number(ssim.stddev) + "," +
         format_number(l1.stddev) + "\n";
  return out;
}

void EvalReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << to_csv();
  if (!out) throw IoError("failed writing " + path.string());
}

EvalReport evaluate(const SuperResolver& model, const std::vector<ImagePair>& pairs,
                    std::size_t threads) {
  if (pairs.empty()) throw DegenerateInputError("evaluate: empty dataset");
  std::vector<ImageMetrics> metrics(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    const ImagePair& pair = pairs[i];
    const Image sr = clamp01(model(pair.lr));
    if (!sr.same_shape(pair.hr)) {
      throw ShapeError("evaluate: model output " + std::to_string(sr.channels) + "x" +
                       std::to_string(sr.height) + "x" + std::to_string(sr.width) +
                       " does not match HR " + std::to_string(pair.hr.channels) + "x" +
                       std::to_string(pair.hr.height) + "x" + std::to_string(pair.hr.width) +
                       " for " + pair.source);
    }
    const Image ys = rgb_to_luma(sr), yh = rgb_to_luma(pair.hr);
    metrics[i] = ImageMetrics{pair.source, psnr(ys, yh), ssim(ys, yh), mean_l1(ys, yh)};
  });
  return EvalReport::aggregate(std::move(metrics));
}

template <typename T>
Image super_resolve(const Generator<T>& generator, const Image& lr) {
  NoGradGuard no_grad;
  return from_tensor(generator.forward(to_tensor<T>(lr)), 0);
}

template <typename T>
EvalReport evaluate(const Generator<T>& generator, const std::vector<ImagePair>& pairs,
                    std::size_t threads) {
  return evaluate([&generator](const Image& lr) { return super_resolve(generator, lr); }, pairs,
                  threads);
}

template Image super_resolve<float>(const Generator<float>&, const Image&);
template Image super_resolve<double>(const Generator<double>&, const Image&);
template EvalReport evaluate<float>(const Generator<float>&, const std::vector<ImagePair>&,
                                    std::size_t);
template EvalReport evaluate<double>(const Generator<double>&, const std::vector<ImagePair>&,
                                     std::size_t);

}  // namespace lsrgan
