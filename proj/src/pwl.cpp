// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "lsrgan/pwl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lsrgan/error.hpp"
#include "lsrgan/metrics.hpp"
#include "lsrgan/parallel.hpp"
#include "lsrgan/rng.hpp"

namespace lsrgan {

PWLFunction PWLFunction::from_vertices(std::vector<double> x, std::vector<double> f) {
  if (x.size() != f.size()) throw ShapeError("pwl: vertex x and f lengths differ");
  if (x.size() < 2) throw DomainError("pwl: need at least two vertices");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(f[i])) throw NumericError("pwl: non-finite vertex");
    if (i > 0 && !(x[i] > x[i - 1])) throw DomainError("pwl: vertices must be strictly increasing");
  }
  PWLFunction p;
  p.slopes_.resize(x.size() - 1);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    p.slopes_[i] = (f[i + 1] - f[i]) / (x[i + 1] - x[i]);
  }
  p.x_ = std::move(x);
  p.f_ = std::move(f);
  return p;
}

double PWLFunction::operator()(double t) const {
  if (!(t >= a() && t <= b())) throw DomainError("pwl: evaluation point outside [a, b]");
  auto it = std::upper_bound(x_.begin(), x_.end(), t);
  std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  if (i >= segments()) i = segments() - 1;
  if (t == x_[i]) return f_[i];
  if (t == x_[i + 1]) return f_[i + 1];
  return f_[i] + (t - x_[i]) / (x_[i + 1] - x_[i]) * (f_[i + 1] - f_[i]);
}

PWLFunction build_interpolant(const ScalarFunction& f, double a, double b, std::size_t n) {
  if (!(a < b)) throw DomainError("build_interpolant: need a < b");
  if (n < 1) throw DomainError("build_interpolant: need n >= 1");
  std::vector<double> x(n + 1), y(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    x[i] = i == n ? b : a + static_cast<double>(i) * (b - a) / static_cast<double>(n);
    y[i] = f(x[i]);
    if (!std::isfinite(y[i])) {
      throw NumericError("build_interpolant: non-finite sample at x = " + std::to_string(x[i]));
    }
  }
  return PWLFunction::from_vertices(std::move(x), std::move(y));
}

std::size_t density_rule_segments(double a, double b, double lipschitz_k, double eps) {
  if (!(a < b) || !(lipschitz_k > 0.0) || !(eps > 0.0)) {
    throw DomainError("density rule: need a < b, K > 0 and eps > 0");
  }
  return static_cast<std::size_t>(std::ceil((b - a) * 3.0 * lipschitz_k / eps));
}

std::vector<double> uniform_grid(double a, double b, std::size_t count) {
  if (count < 2 || !(a < b)) throw DomainError("uniform_grid: need a < b and count >= 2");
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) {
    g[i] = i + 1 == count ? b : a + static_cast<double>(i) * (b - a) / static_cast<double>(count - 1);
  }
  return g;
}

ErrorBoundReport error_bound(const PWLFunction& pwl, const ScalarFunction& f,
                             std::span<const double> grid) {
  const auto& xs = pwl.x();
  std::vector<double> lo(pwl.segments()), hi(pwl.segments());
  for (std::size_t i = 0; i < pwl.segments(); ++i) {
    lo[i] = std::min(pwl.f()[i], pwl.f()[i + 1]);
    hi[i] = std::max(pwl.f()[i], pwl.f()[i + 1]);
  }
  ErrorBoundReport r;
  double scale = 1.0;
  for (double t : grid) {
    if (!(t >= pwl.a() && t <= pwl.b())) throw DomainError("error_bound: grid point outside [a, b]");
    const double ft = f(t);
    if (!std::isfinite(ft)) throw NumericError("error_bound: non-finite f on the grid");
    r.measured_max_error = std::max(r.measured_max_error, std::abs(ft - pwl(t)));
    scale = std::max(scale, std::abs(ft));
    // A grid point on an interior vertex belongs to both neighbours.
    auto first = std::lower_bound(xs.begin(), xs.end(), t);
    std::size_t seg = first == xs.begin() ? 0 : static_cast<std::size_t>(first - xs.begin()) - 1;
    const std::size_t last = std::min(static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), t) - xs.begin()),
                                      pwl.segments());
    for (; seg < last && seg < pwl.segments(); ++seg) {
      lo[seg] = std::min(lo[seg], ft);
      hi[seg] = std::max(hi[seg], ft);
    }
  }
  for (std::size_t i = 0; i < pwl.segments(); ++i) {
    r.oscillation_bound = std::max(r.oscillation_bound, hi[i] - lo[i]);
  }
  r.grid_slack = 64.0 * std::numeric_limits<double>::epsilon() * scale;
  r.holds = r.measured_max_error <= r.oscillation_bound + r.grid_slack;
  return r;
}

LipschitzReport lipschitz_of_pwl(const PWLFunction& pwl) {
  LipschitzReport r;
  for (double s : pwl.slopes()) {
    r.tight_k = std::max(r.tight_k, std::abs(s));
    r.proof_k += std::abs(s);
  }
  return r;
}

namespace {

double l1_sum(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw ShapeError("probe: outputs of one pair differ in shape");
  double s = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) s += std::abs(a.pixels[i] - b.pixels[i]);
  return s;
}

// Linear-interpolated quantile of sorted values.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(i);
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

}  // namespace

ProbeReport empirical_lipschitz_probe(const ImageMap& generator, const ImageMap& encoder,
                                      const PairSampler& sampler, std::size_t pairs,
                                      std::size_t threads) {
  if (pairs < 1) throw DomainError("probe: need at least one pair");
  std::vector<double> ratios(pairs, std::numeric_limits<double>::quiet_NaN());
  parallel_for(pairs, threads, [&](std::size_t i) {
    const Image g1 = generator(sampler(i, 0));
    const Image g2 = generator(sampler(i, 1));
    const double num = l1_sum(g1, g2);
    const double den = l1_sum(encoder(g1), encoder(g2));
    if (den >= kProbeDegenerate) ratios[i] = num / den;
  });
  ProbeReport report;
  std::vector<double> kept;
  for (std::size_t i = 0; i < pairs; ++i) {
    if (std::isnan(ratios[i])) {
      ++report.skipped;
      continue;
    }
    if (!std::isfinite(ratios[i])) throw NumericError("probe: non-finite ratio at pair " + std::to_string(i));
    report.rows.push_back({i, ratios[i]});
    kept.push_back(ratios[i]);
  }
  if (kept.empty()) throw DegenerateInputError("probe: every pair was degenerate");
  std::sort(kept.begin(), kept.end());
  report.max = kept.back();
  report.median = quantile(kept, 0.5);
  report.q05 = quantile(kept, 0.05);
  report.q25 = quantile(kept, 0.25);
  report.q75 = quantile(kept, 0.75);
  report.q95 = quantile(kept, 0.95);
  report.lipschitz.empirical_max_ratio = report.max;
  return report;
}

template <typename T>
ProbeReport empirical_lipschitz_probe(const Generator<T>& generator, const Encoder<T>& encoder,
                                      const PairSampler& sampler, std::size_t pairs,
                                      std::size_t threads) {
  const ImageMap g = [&generator](const Image& z) {
    NoGradGuard no_grad;
    return from_tensor(generator.forward(to_tensor<T>(z)), 0);
  };
  const ImageMap l = [&encoder](const Image& x) {
    NoGradGuard no_grad;
    return from_tensor(encoder.forward(to_tensor<T>(x)), 0);
  };
  return empirical_lipschitz_probe(g, l, sampler, pairs, threads);
}

template ProbeReport empirical_lipschitz_probe<float>(const Generator<float>&,
                                                      const Encoder<float>&, const PairSampler&,
                                                      std::size_t, std::size_t);
template ProbeReport empirical_lipschitz_probe<double>(const Generator<double>&,
                                                       const Encoder<double>&,
                                                       const PairSampler&, std::size_t,
                                                       std::size_t);

PairSampler uniform_pair_sampler(std::uint64_t seed, std::size_t h, std::size_t w) {
  const std::uint64_t key = CounterRng::stream(seed, "probe/pairs").key();
  return [key, h, w](std::size_t index, int which) {
    CounterRng rng(mix64(key ^ mix64(2 * static_cast<std::uint64_t>(index) +
                                     static_cast<std::uint64_t>(which) + 1)));
    Image img(3, h, w);
    for (auto& v : img.pixels) v = rng.uniform();
    return img;
  };
}

std::string ProbeReport::to_csv() const {
  std::string out = "pair,ratio\n";
  for (const auto& r : rows) out += std::to_string(r.pair) + "," + format_number(r.ratio) + "\n";
  out += "max," + format_number(max) + "\n";
  out += "q05," + format_number(q05) + "\n";
  out += "q25," + format_number(q25) + "\n";
  out += "median," + format_number(median) + "\n";
  out += "q75," + format_number(q75) + "\n";
  out += "q95," + format_number(q95) + "\n";
  out += "skipped," + std::to_string(skipped) + "\n";
  return out;
}

}  // namespace lsrgan
