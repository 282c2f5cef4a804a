// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lsrgan/image.hpp"
#include "lsrgan/rng.hpp"

namespace lsrgan {

struct DatasetSpec {
  enum class Source { kSynthetic, kDirectory };
  Source source = Source::kSynthetic;
  std::uint64_t synth_seed = 7;
  std::filesystem::path directory;
  std::size_t patch_size = 32;  // HR side; full-scale training uses 128
  bool augment = true;
  std::size_t count = 16;  // synthetic: images generated; directory: cap (0 = all)

  std::vector<std::string> violations() const;
};

/// Immutable collection of HR images with their bicubic LR mates.
class Dataset {
 public:
  static Dataset synthetic(std::uint64_t seed, std::size_t count, std::size_t patch,
                           bool augment = true);
  // Flat folder of .png/.ppm files in name order. Each image is cropped to
  // dimensions divisible by 4 and must be at least patch x patch.
  static Dataset from_directory(const std::filesystem::path& dir, std::size_t patch,
                                bool augment = true, std::size_t limit = 0);
  static Dataset from_spec(const DatasetSpec& spec);

  std::size_t size() const { return pairs_.size(); }
  std::size_t patch_size() const { return patch_; }
  bool augments() const { return augment_; }

  // Whole-image pairs, unaugmented.
  const ImagePair& pair(std::size_t i) const { return pairs_.at(i); }
  const std::vector<ImagePair>& pairs() const { return pairs_; }

  // Visiting order for one epoch; a pure function of (seed, epoch).
  std::vector<std::size_t> epoch_order(std::uint64_t seed, std::uint64_t epoch) const;

  // Random patch_size crop of image i (LR rebuilt from the crop) followed by
  // a random dihedral variant when augmentation is on.
  ImagePair training_pair(std::size_t i, CounterRng& rng) const;

 private:
  Dataset(std::vector<ImagePair> pairs, std::size_t patch, bool augment);
  std::vector<ImagePair> pairs_;
  std::size_t patch_ = 0;
  bool augment_ = true;
};

/// Endless deterministic stream of training batches.
class BatchSampler {
 public:
  struct State {
    std::uint64_t epoch = 0;
    std::uint64_t position = 0;     // index into the epoch order
    std::uint64_t rng_counter = 0;  // augmentation/crop stream position
  };

  BatchSampler(const Dataset& data, std::uint64_t seed, std::size_t batch_size);

  std::vector<ImagePair> next();

  State state() const { return {epoch_, position_, rng_.counter()}; }
  void restore(const State& state);

 private:
  const Dataset* data_;
  std::uint64_t seed_;
  std::size_t batch_;
  std::uint64_t epoch_ = 0;
  std::uint64_t position_ = 0;
  std::vector<std::size_t> order_;
  CounterRng rng_;
};

}  // namespace lsrgan
