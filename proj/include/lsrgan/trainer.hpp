// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lsrgan/checkpoint.hpp"
#include "lsrgan/dataset.hpp"
#include "lsrgan/losses.hpp"
#include "lsrgan/metrics.hpp"
#include "lsrgan/nets.hpp"

namespace lsrgan {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // L2 coefficient added to the gradient; off by default

  std::vector<std::string> violations() const;
};

// One Adam update of a single parameter tensor; `step` is the 1-based
// update count after incrementing.
template <typename T>
void adam_update(std::span<T> theta, std::span<const T> grad, std::span<T> m, std::span<T> v,
                 std::uint64_t step, double lr, const AdamConfig& cfg);

/// Adam moments for every parameter of one network.
template <typename T>
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(const NetworkParams<T>& params);

  // Applies one update to every parameter. A parameter that received no
  // gradient is treated as having a zero gradient. A non-finite gradient
  // throws NumericError naming the parameter before anything is modified.
  void step(NetworkParams<T>& params, double lr, const AdamConfig& cfg);

  std::uint64_t steps() const { return steps_; }
  const std::vector<T>& first_moment(std::string_view name) const;
  const std::vector<T>& second_moment(std::string_view name) const;

  void store(Checkpoint& ckpt, std::string_view prefix) const;
  void restore(const Checkpoint& ckpt, std::string_view prefix);

 private:
  struct Moments {
    std::string name;
    std::vector<T> m, v;
  };
  const Moments& find(std::string_view name) const;
  std::vector<Moments> moments_;
  std::uint64_t steps_ = 0;
};

enum class Stage { kPretrain, kFinetune };

std::string_view to_string(Stage stage);

struct ScheduleConfig {
  Stage stage = Stage::kPretrain;
  double base_lr = 2e-4;
  std::uint64_t halve_every = 200000;  // pretrain
  std::vector<std::uint64_t> milestones{50000, 100000, 200000, 300000};  // finetune
  std::uint64_t max_iters = 2000;
  std::size_t batch_size = 4;

  static ScheduleConfig pretrain_defaults();
  static ScheduleConfig finetune_defaults();
  std::vector<std::string> violations() const;
};

// pretrain: base * 0.5^floor(iter / halve_every);
// finetune: base * 0.5^(number of milestones <= iter).
double lr_at(std::uint64_t iter, const ScheduleConfig& schedule);

/// One logged iteration.
struct LossRecord {
  std::uint64_t iteration = 0;
  double lr = 0.0;
  std::vector<double> terms;  // in the order of TrainSession::term_names()
  double wall_ms = 0.0;
};

struct TrainConfig {
  ScheduleConfig schedule;
  AdamConfig adam;
  std::uint64_t seed = 7;
  // Finetune only.
  ObjectiveKind kind = ObjectiveKind::kLSR;
  LossWeights weights;
  CCXConfig ccx;
  // Loss curve CSV (iteration, lr, terms..., wall_ms); empty for none.
  std::filesystem::path loss_csv;
  std::size_t history_capacity = 256;

  std::vector<std::string> violations() const;
};

template <typename T>
struct TrainState {
  std::uint64_t iteration = 0;
  double lr = 0.0;
  AdamState<T> adam_g, adam_d, adam_l;
  BatchSampler::State sampler;
  std::deque<LossRecord> history;  // most recent records, bounded
};

/// Owns networks and optimizer state for one training stage. Networks are
/// taken by value but share tensors with the caller's copy; pass
/// deep copies to keep an untouched original.
///
/// pretrain: G on L1(G(z), y); L on L1(L(y), z).
/// finetune: per iteration D on L_D^Ra, then G on the generator objective of
/// the configured kind (D and L frozen, gradients pass through them), then L
/// on L1(L(y), L(G(z))). The G output is computed once per iteration, before
/// any update.
template <typename T>
class TrainSession {
 public:
  TrainSession(Networks<T> nets, const Dataset& data, TrainConfig config);
  // Continues from a checkpoint. Optimizer, sampler and iteration state are
  // restored when the checkpoint was written by the same stage; otherwise only
  // the networks are taken and the stage starts at iteration 0.
  TrainSession(const Checkpoint& ckpt, const Dataset& data, TrainConfig config);

  void step();
  // Steps until schedule.max_iters iterations have run.
  void run();

  Checkpoint checkpoint() const;
  const Networks<T>& networks() const { return nets_; }
  const TrainState<T>& state() const { return state_; }
  const TrainConfig& config() const { return config_; }
  std::vector<std::string> term_names() const;

 private:
  void init();
  void open_log(bool append);
  void pretrain_step(const Tensor<T>& z, const Tensor<T>& y, std::vector<double>& terms);
  void finetune_step(const Tensor<T>& z, const Tensor<T>& y, std::vector<double>& terms);

  Networks<T> nets_;
  const Dataset* data_;
  TrainConfig config_;
  BatchSampler sampler_;
  TrainState<T> state_;
  std::unique_ptr<std::ofstream> log_;
};

// Mean L1(G(z), y) over every whole-image pair of the dataset.
template <typename T>
double dataset_l1(const Generator<T>& generator, const Dataset& data);

/// One row of a mu sweep.
struct SweepRow {
  double mu = 0.0;
  std::uint64_t fingerprint = 0;  // generator parameter hash
  EvalReport report;
  Checkpoint checkpoint;
};

// Finetunes one model per mu value from the same starting checkpoint and
// seed, then evaluates each on `eval`. Values outside [0, 1e-2] are logged
// as warnings.
std::vector<SweepRow> mu_sweep(const std::vector<double>& mus, const Checkpoint& start,
                               const Dataset& data, const TrainConfig& base,
                               const std::vector<ImagePair>& eval,
                               const std::filesystem::path& loss_csv_dir = {});

// mu, psnr_db, ssim, l1, psnr_stddev, ssim_stddev, l1_stddev, fingerprint.
std::string sweep_table_csv(const std::vector<SweepRow>& rows);

}  // namespace lsrgan
