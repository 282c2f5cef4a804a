// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lsrgan/dataset.hpp"
#include "lsrgan/losses.hpp"
#include "lsrgan/nets.hpp"
#include "lsrgan/trainer.hpp"

namespace lsrgan {

/// Everything a training or sweep run needs, read from an INI file:
///
///   seed, output_dir                     (top level)
///   [data]     source, synth_seed, directory, patch_size, augment, count
///   [network]  g_blocks, g_channels, d_channels, d_hidden, l_channels,
///              probe_channels (a,b,c), probe_stage, probe_seed, probe_weights
///   [loss]     lambda, eta, mu, lsr_sign, h, epsilon, reference, distance
///   [pretrain] lr, halve_every, max_iters, batch_size
///   [finetune] lr, milestones (comma list), max_iters, batch_size, kind
///   [adam]     beta1, beta2, eps, weight_decay
///
/// Every key is optional; absent keys keep the defaults below.
struct RunConfig {
  std::uint64_t seed = 7;
  std::filesystem::path output_dir = "runs";
  DatasetSpec data;
  NetConfig network;
  std::filesystem::path probe_weights;  // checkpoint with P/ records; empty for the seeded probe
  LossWeights weights;
  CCXConfig ccx;
  ScheduleConfig pretrain = ScheduleConfig::pretrain_defaults();
  ScheduleConfig finetune = ScheduleConfig::finetune_defaults();
  ObjectiveKind kind = ObjectiveKind::kLSR;
  AdamConfig adam;

  // Parses without validating semantics. Malformed values and unknown keys
  // are collected; ConfigError lists all of them.
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);

  std::vector<std::string> violations() const;
  void validate() const;  // ConfigError listing every violation

  TrainConfig train_config(Stage stage) const;
};

// Initial networks for a config: seeded G/D/L and the probe, with external
// probe weights applied when configured.
Networks<float> initial_networks(const RunConfig& config);

}  // namespace lsrgan
