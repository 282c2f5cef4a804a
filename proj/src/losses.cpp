// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "lsrgan/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lsrgan/ops.hpp"

namespace lsrgan {

namespace {

void check_weight(std::vector<std::string>& out, double v, const char* name) {
  if (!std::isfinite(v)) {
    out.push_back(std::string(name) + " must be finite");
  } else if (v < 0.0) {
    out.push_back(std::string(name) + " must be >= 0");
  }
}

template <typename T>
void require_same_shape(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
  }
}

template <typename T>
Tensor<T> clamp_probability(const Tensor<T>& p) {
  const T lo = static_cast<T>(kProbabilityFloor);
  const T hi = static_cast<T>(
      1.0 - std::max(kProbabilityFloor, static_cast<double>(std::numeric_limits<T>::epsilon())));
  return ops::clamp(p, lo, hi);
}

template <typename T>
Tensor<T> one_minus(const Tensor<T>& p) {
  return ops::add_scalar(ops::scale(p, T{-1}), T{1});
}

template <typename T>
Tensor<T> as_vector(const Tensor<T>& logits) {
  return ops::reshape(logits, {logits.numel()});
}

// Rows of `points` minus the reference must have a well-defined direction.
template <typename T>
void require_directions(const char* which, const Tensor<T>& centered, const Tensor<T>& points,
                        const Tensor<T>& reference) {
  const std::size_t n = centered.dim(0), c = centered.dim(1);
  T ref_scale{0};
  for (T v : reference.data()) ref_scale = std::max(ref_scale, std::abs(v));
  const auto cv = centered.data();
  const auto pv = points.data();
  for (std::size_t i = 0; i < n; ++i) {
    T sq{0}, scale = ref_scale;
    for (std::size_t k = 0; k < c; ++k) {
      sq += cv[i * c + k] * cv[i * c + k];
      scale = std::max(scale, std::abs(pv[i * c + k]));
    }
    const T threshold = T{64} * std::numeric_limits<T>::epsilon() *
                        std::sqrt(static_cast<T>(c)) * scale;
    if (std::sqrt(sq) <= threshold) {
      throw DegenerateInputError(std::string("ccx_loss: ") + which + " point " + std::to_string(i) +
                                 " coincides with the reference; its direction is undefined");
    }
  }
}

}  // namespace

std::vector<std::string> LossWeights::violations() const {
  std::vector<std::string> out;
  check_weight(out, lambda, "lambda");
  check_weight(out, eta, "eta");
  check_weight(out, mu, "mu");
  if (lsr_sign != 1.0 && lsr_sign != -1.0) out.push_back("lsr_sign must be -1 or +1");
  return out;
}

std::vector<std::string> CCXConfig::violations() const {
  std::vector<std::string> out;
  if (!(std::isfinite(h) && h > 0.0)) out.push_back("h must be finite and > 0");
  if (!(std::isfinite(epsilon) && epsilon > 0.0)) out.push_back("epsilon must be finite and > 0");
  return out;
}

ObjectiveKind parse_objective_kind(std::string_view text) {
  if (text == "esr") return ObjectiveKind::kESR;
  if (text == "lsr") return ObjectiveKind::kLSR;
  if (text == "cesr") return ObjectiveKind::kCESR;
  if (text == "clsr") return ObjectiveKind::kCLSR;
  if (text == "kkt") return ObjectiveKind::kKKTStandard;
  throw ConfigError("unknown objective kind '" + std::string(text) +
                    "' (expected esr, lsr, cesr, clsr or kkt)");
}

std::string_view to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kESR: return "esr";
    case ObjectiveKind::kLSR: return "lsr";
    case ObjectiveKind::kCESR: return "cesr";
    case ObjectiveKind::kCLSR: return "clsr";
    case ObjectiveKind::kKKTStandard: return "kkt";
  }
  throw ConfigError("unknown objective kind");
}

ReferenceMode parse_reference_mode(std::string_view text) {
  if (text == "mean_of_y") return ReferenceMode::kMeanOfY;
  if (text == "zero") return ReferenceMode::kZero;
  throw ConfigError("unknown reference mode '" + std::string(text) + "' (mean_of_y or zero)");
}

DistanceMode parse_distance_mode(std::string_view text) {
  if (text == "cosine_distance") return DistanceMode::kCosineDistance;
  if (text == "literal_similarity") return DistanceMode::kLiteralSimilarity;
  throw ConfigError("unknown distance mode '" + std::string(text) +
                    "' (cosine_distance or literal_similarity)");
}

std::string_view to_string(ReferenceMode mode) {
  return mode == ReferenceMode::kMeanOfY ? "mean_of_y" : "zero";
}

std::string_view to_string(DistanceMode mode) {
  return mode == DistanceMode::kCosineDistance ? "cosine_distance" : "literal_similarity";
}

template <typename T>
Tensor<T> l1_loss(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape("l1_loss", a, b);
  return ops::mean(ops::abs(ops::sub(a, b)));
}

template <typename T>
Tensor<T> encoder_loss(const Tensor<T>& y, const Tensor<T>& gz, const Encoder<T>& encoder) {
  require_same_shape("encoder_loss", y, gz);
  return l1_loss(encoder.forward(y), encoder.forward(gz));
}

template <typename T>
Tensor<T> perceptual_probe_loss(const Tensor<T>& gz, const Tensor<T>& y,
                                const FeatureProbe<T>& probe) {
  require_same_shape("perceptual_probe_loss", gz, y);
  return l1_loss(probe.forward(gz), probe.forward(y));
}

template <typename T>
RelativisticLosses<T> relativistic_pair(const Tensor<T>& c_real, const Tensor<T>& c_fake) {
  if (c_real.numel() != c_fake.numel()) {
    throw ShapeError("relativistic_pair: batch sizes differ (" + std::to_string(c_real.numel()) +
                     " real, " + std::to_string(c_fake.numel()) + " fake)");
  }
  const auto real = as_vector(c_real);
  const auto fake = as_vector(c_fake);
  const auto real_vs_fake = clamp_probability(ops::sigmoid(ops::sub(real, ops::mean(fake))));
  const auto fake_vs_real = clamp_probability(ops::sigmoid(ops::sub(fake, ops::mean(real))));
  const auto log_rf = ops::mean(ops::log(real_vs_fake));
  const auto log_not_rf = ops::mean(ops::log(one_minus(real_vs_fake)));
  const auto log_fr = ops::mean(ops::log(fake_vs_real));
  const auto log_not_fr = ops::mean(ops::log(one_minus(fake_vs_real)));
  return {ops::scale(ops::add(log_rf, log_not_fr), T{-1}),
          ops::scale(ops::add(log_not_rf, log_fr), T{-1})};
}

template <typename T>
Tensor<T> standard_adversarial_g(const Tensor<T>& d_fake) {
  return ops::mean(one_minus(ops::sigmoid(d_fake)));
}

template <typename T>
Tensor<T> ccx_loss(const Tensor<T>& x_points, const Tensor<T>& y_points, const CCXConfig& cfg,
                   AffinityMatrix<T>* inspect) {
  if (auto v = cfg.violations(); !v.empty()) throw ConfigError("ccx_loss: " + v.front());
  if (x_points.rank() != 2 || y_points.rank() != 2) {
    throw ShapeError("ccx_loss: point sets must be [N,C], got " + to_string(x_points.shape()) +
                     " and " + to_string(y_points.shape()));
  }
  if (x_points.shape() != y_points.shape()) {
    throw ShapeError("ccx_loss: point sets differ in shape: " + to_string(x_points.shape()) +
                     " vs " + to_string(y_points.shape()));
  }
  const std::size_t n = x_points.dim(0), c = x_points.dim(1);

  const Tensor<T> reference = cfg.reference == ReferenceMode::kMeanOfY
                                  ? ops::mean_rows(y_points)
                                  : Tensor<T>::zeros({1, c});
  const auto x_centered = ops::sub(x_points, ops::expand_rows(reference, n));
  const auto y_centered = ops::sub(y_points, ops::expand_rows(reference, n));
  require_directions("x", x_centered, x_points, reference);
  require_directions("y", y_centered, y_points, reference);

  const auto similarity =
      ops::matmul_nt(ops::normalize_rows(x_centered), ops::normalize_rows(y_centered));
  const auto distance = cfg.distance == DistanceMode::kCosineDistance
                            ? ops::add_scalar(ops::scale(similarity, T{-1}), T{1})
                            : similarity;
  const auto row_floor = ops::add_scalar(ops::row_min(distance), static_cast<T>(cfg.epsilon));
  const auto normalized = ops::div(distance, ops::expand_cols(row_floor, n));
  const auto logits =
      ops::scale(ops::add_scalar(ops::scale(normalized, T{-1}), T{1}), static_cast<T>(1.0 / cfg.h));
  const auto affinity = ops::softmax_rows(logits);
  const auto loss = ops::scale(ops::log(ops::mean(ops::col_max(affinity))), T{-1});

  if (inspect) {
    inspect->rows = n;
    inspect->cols = n;
    inspect->distance.assign(distance.data().begin(), distance.data().end());
    inspect->normalized.assign(normalized.data().begin(), normalized.data().end());
    inspect->affinity.assign(affinity.data().begin(), affinity.data().end());
  }
  return loss;
}

template <typename T>
Tensor<T> ccx_feature_loss(const Tensor<T>& gz_features, const Tensor<T>& y_features,
                           const CCXConfig& cfg) {
  require_same_shape("ccx_feature_loss", gz_features, y_features);
  if (gz_features.rank() != 4) {
    throw ShapeError("ccx_feature_loss: expected [N,C,H,W] features, got " +
                     to_string(gz_features.shape()));
  }
  const std::size_t batch = gz_features.dim(0);
  Tensor<T> total;
  for (std::size_t i = 0; i < batch; ++i) {
    auto term = ccx_loss(ops::feature_points(gz_features, i), ops::feature_points(y_features, i), cfg);
    total = total.defined() ? ops::add(total, term) : term;
  }
  return ops::scale(total, T{1} / static_cast<T>(batch));
}

template <typename T>
ObjectiveTerms<T> generator_objective(ObjectiveKind kind, const Tensor<T>& gz, const Tensor<T>& y,
                                      const Discriminator<T>& discriminator,
                                      const Encoder<T>& encoder, const FeatureProbe<T>& probe,
                                      const LossWeights& weights, const CCXConfig& cfg) {
  if (auto v = weights.violations(); !v.empty()) {
    throw ConfigError("generator_objective: " + v.front());
  }
  require_same_shape("generator_objective", gz, y);
  const T lambda = static_cast<T>(weights.lambda);
  const T eta = static_cast<T>(weights.eta);
  const T signed_mu = static_cast<T>(weights.lsr_sign * weights.mu);

  ObjectiveTerms<T> terms;
  const auto pixel = l1_loss(y, gz);
  terms.pixel = pixel.item();

  const bool with_latent = kind == ObjectiveKind::kLSR || kind == ObjectiveKind::kCLSR ||
                           kind == ObjectiveKind::kKKTStandard;
  Tensor<T> latent;
  if (with_latent) {
    latent = encoder_loss(y, gz, encoder);
    terms.latent = latent.item();
  }

  Tensor<T> total;
  if (kind == ObjectiveKind::kKKTStandard) {
    const auto adversarial = standard_adversarial_g(discriminator.forward(gz));
    terms.adversarial = adversarial.item();
    total = ops::add(adversarial, ops::scale(pixel, eta));
  } else {
    Tensor<T> perceptual;
    if (kind == ObjectiveKind::kESR || kind == ObjectiveKind::kLSR) {
      perceptual = perceptual_probe_loss(gz, y, probe);
    } else if (kind == ObjectiveKind::kCESR || kind == ObjectiveKind::kCLSR) {
      perceptual = ccx_feature_loss(probe.forward(gz), probe.forward(y), cfg);
    } else {
      throw ConfigError("generator_objective: unknown objective kind");
    }
    terms.perceptual = perceptual.item();
    const auto adversarial =
        relativistic_pair(discriminator.forward(y), discriminator.forward(gz)).generator;
    terms.adversarial = adversarial.item();
    total = ops::add(ops::add(perceptual, ops::scale(adversarial, lambda)),
                     ops::scale(pixel, eta));
  }
  if (with_latent) total = ops::add(total, ops::scale(latent, signed_mu));
  terms.total = total;
  return terms;
}

#define LSRGAN_INSTANTIATE_LOSSES(T)                                                           \
  template Tensor<T> l1_loss(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> encoder_loss(const Tensor<T>&, const Tensor<T>&, const Encoder<T>&);      \
  template Tensor<T> perceptual_probe_loss(const Tensor<T>&, const Tensor<T>&,                 \
                                           const FeatureProbe<T>&);                            \
  template RelativisticLosses<T> relativistic_pair(const Tensor<T>&, const Tensor<T>&);        \
  template Tensor<T> standard_adversarial_g(const Tensor<T>&);                                 \
  template Tensor<T> ccx_loss(const Tensor<T>&, const Tensor<T>&, const CCXConfig&,            \
                              AffinityMatrix<T>*);                                             \
  template Tensor<T> ccx_feature_loss(const Tensor<T>&, const Tensor<T>&, const CCXConfig&);   \
  template ObjectiveTerms<T> generator_objective(                                              \
      ObjectiveKind, const Tensor<T>&, const Tensor<T>&, const Discriminator<T>&,              \
      const Encoder<T>&, const FeatureProbe<T>&, const LossWeights&, const CCXConfig&);

LSRGAN_INSTANTIATE_LOSSES(float)
LSRGAN_INSTANTIATE_LOSSES(double)

#undef LSRGAN_INSTANTIATE_LOSSES

}  // namespace lsrgan
