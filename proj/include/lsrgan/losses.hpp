// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lsrgan/nets.hpp"
#include "lsrgan/tensor.hpp"

namespace lsrgan {

/// Weights of the generator objective terms.
struct LossWeights {
  double lambda = 5e-3;  // adversarial
  double eta = 1e-2;     // pixel L1
  double mu = 1e-3;      // latent-space regularization
  // Sign applied to mu * |L(y) - L(G(z))|. -1 rewards a larger latent
  // distance for G while the encoder shrinks it; +1 is the experimental flip.
  double lsr_sign = -1.0;

  std::vector<std::string> violations() const;
};

enum class ReferenceMode { kMeanOfY, kZero };
enum class DistanceMode { kCosineDistance, kLiteralSimilarity };

struct CCXConfig {
  double h = 0.5;         // bandwidth
  double epsilon = 1e-5;  // added to the row minimum before normalizing
  ReferenceMode reference = ReferenceMode::kMeanOfY;
  DistanceMode distance = DistanceMode::kCosineDistance;

  std::vector<std::string> violations() const;
};

enum class ObjectiveKind { kESR, kLSR, kCESR, kCLSR, kKKTStandard };

ObjectiveKind parse_objective_kind(std::string_view text);
std::string_view to_string(ObjectiveKind kind);
ReferenceMode parse_reference_mode(std::string_view text);
DistanceMode parse_distance_mode(std::string_view text);
std::string_view to_string(ReferenceMode mode);
std::string_view to_string(DistanceMode mode);

// Probabilities are clamped to [kProbabilityFloor, 1 - max(kProbabilityFloor,
// machine epsilon)] before any logarithm.
inline constexpr double kProbabilityFloor = 1e-12;

// Mean absolute difference over all elements.
template <typename T>
Tensor<T> l1_loss(const Tensor<T>& a, const Tensor<T>& b);

// mean |L(y) - L(gz)|.
template <typename T>
Tensor<T> encoder_loss(const Tensor<T>& y, const Tensor<T>& gz, const Encoder<T>& encoder);

// L1 distance between probe feature maps of gz and y.
template <typename T>
Tensor<T> perceptual_probe_loss(const Tensor<T>& gz, const Tensor<T>& y,
                                const FeatureProbe<T>& probe);

template <typename T>
struct RelativisticLosses {
  Tensor<T> discriminator;
  Tensor<T> generator;
};

/// Relativistic average losses from critic logits C(x_r), C(x_f):
///   D_Ra(a, b) = sigmoid(C(a) - mean C(b))
///   L_D = -mean log D_Ra(x_r, x_f) - mean log(1 - D_Ra(x_f, x_r))
///   L_G = -mean log(1 - D_Ra(x_r, x_f)) - mean log D_Ra(x_f, x_r)
template <typename T>
RelativisticLosses<T> relativistic_pair(const Tensor<T>& c_real, const Tensor<T>& c_fake);

// mean(1 - sigmoid(d_fake)).
template <typename T>
Tensor<T> standard_adversarial_g(const Tensor<T>& d_fake);

/// Intermediate matrices of the cosine contextual loss, row-major [N,M].
template <typename T>
struct AffinityMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<T> distance;    // d_ij
  std::vector<T> normalized;  // d_ij / (min_k d_ik + epsilon)
  std::vector<T> affinity;    // row softmax of (1 - normalized) / h
};

/// Cosine contextual loss between point sets X (from G(z)) and Y (from y),
/// both [N,C]. Returns -log(mean_j max_i A_ij). A point coinciding with the
/// reference is a DegenerateInputError. `inspect`, when given, receives the
/// intermediate matrices.
template <typename T>
Tensor<T> ccx_loss(const Tensor<T>& x_points, const Tensor<T>& y_points, const CCXConfig& cfg,
                   AffinityMatrix<T>* inspect = nullptr);

// Batch mean of ccx_loss over per-image feature points of [N,C,H,W] maps.
template <typename T>
Tensor<T> ccx_feature_loss(const Tensor<T>& gz_features, const Tensor<T>& y_features,
                           const CCXConfig& cfg);

template <typename T>
struct ObjectiveTerms {
  Tensor<T> total;
  // Unweighted term values, for logging.
  double perceptual = 0.0;  // probe L1 or CCX; 0 for the KKT form
  double adversarial = 0.0;
  double pixel = 0.0;
  double latent = 0.0;  // |L(y) - L(G(z))|; 0 for kinds without it
};

/// Generator objective of the given kind for a batch whose generator output
/// is `gz` and target is `y`:
///   ESR  perceptual + lambda*L_G^Ra + eta*L1
///   LSR  ESR + sign*mu*latent
///   CESR CCX + lambda*L_G^Ra + eta*L1
///   CLSR CESR + sign*mu*latent
///   KKT  (1 - D(G(z))) + eta*L1 + sign*mu*latent
template <typename T>
ObjectiveTerms<T> generator_objective(ObjectiveKind kind, const Tensor<T>& gz, const Tensor<T>& y,
                                      const Discriminator<T>& discriminator,
                                      const Encoder<T>& encoder, const FeatureProbe<T>& probe,
                                      const LossWeights& weights, const CCXConfig& cfg);

}  // namespace lsrgan
