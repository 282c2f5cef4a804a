// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#include "lsrgan/dataset.hpp"

#include <algorithm>

#include "lsrgan/error.hpp"

namespace lsrgan {

std::vector<std::string> DatasetSpec::violations() const {
  std::vector<std::string> out;
  if (patch_size < 8 || patch_size % kScale != 0) {
    out.push_back("data.patch_size must be >= 8 and divisible by 4 (got " +
                  std::to_string(patch_size) + ")");
  }
  if (source == Source::kSynthetic && count < 1) out.push_back("data.count must be >= 1");
  if (source == Source::kDirectory && !std::filesystem::is_directory(directory)) {
    out.push_back("data.directory does not exist: " + directory.string());
  }
  return out;
}

Dataset::Dataset(std::vector<ImagePair> pairs, std::size_t patch, bool augment)
    : pairs_(std::move(pairs)), patch_(patch), augment_(augment) {}

Dataset Dataset::synthetic(std::uint64_t seed, std::size_t count, std::size_t patch,
                           bool augment) {
  if (count < 1) throw ConfigError("synthetic dataset needs count >= 1");
  if (patch < 8 || patch % kScale != 0) {
    throw ConfigError("patch size must be >= 8 and divisible by 4, got " + std::to_string(patch));
  }
  std::vector<ImagePair> pairs;
  pairs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    pairs.push_back(make_pair(synth_image(seed, i, patch),
                              "synth:" + std::to_string(seed) + "/" + std::to_string(i)));
  }
  return Dataset(std::move(pairs), patch, augment);
}

Dataset Dataset::from_directory(const std::filesystem::path& dir, std::size_t patch, bool augment,
                                std::size_t limit) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".ppm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (limit > 0 && files.size() > limit) files.resize(limit);
  if (files.empty()) throw IoError("no .png or .ppm images in " + dir.string());

  std::vector<ImagePair> pairs;
  for (const auto& file : files) {
    Image img = read_image(file);
    const std::size_t h = img.height - img.height % kScale, w = img.width - img.width % kScale;
    if (h < patch || w < patch) {
      throw DegenerateInputError(file.string() + " is smaller than the " + std::to_string(patch) +
                                 "x" + std::to_string(patch) + " patch");
    }
    if (h != img.height || w != img.width) {
      Image cropped(img.channels, h, w);
      for (std::size_t c = 0; c < img.channels; ++c) {
        for (std::size_t y = 0; y < h; ++y) {
          for (std::size_t x = 0; x < w; ++x) cropped.at(c, y, x) = img.at(c, y, x);
        }
      }
      img = std::move(cropped);
    }
    pairs.push_back(make_pair(std::move(img), file.filename().string()));
  }
  return Dataset(std::move(pairs), patch, augment);
}

Dataset Dataset::from_spec(const DatasetSpec& spec) {
  const auto problems = spec.violations();
  if (!problems.empty()) throw ConfigError(problems.front());
  if (spec.source == DatasetSpec::Source::kSynthetic) {
    return synthetic(spec.synth_seed, spec.count, spec.patch_size, spec.augment);
  }
  return from_directory(spec.directory, spec.patch_size, spec.augment, spec.count);
}

std::vector<std::size_t> Dataset::epoch_order(std::uint64_t seed, std::uint64_t epoch) const {
  const auto base = CounterRng::stream(seed, "data/order");
  CounterRng rng(mix64(base.key() ^ mix64(epoch + 1)));
  return random_permutation(pairs_.size(), rng);
}

ImagePair Dataset::training_pair(std::size_t i, CounterRng& rng) const {
  const ImagePair& full = pairs_.at(i);
  ImagePair sample;
  if (full.hr.height == patch_ && full.hr.width == patch_) {
    sample = full;
  } else {
    const auto y0 = rng.below(full.hr.height - patch_ + 1);
    const auto x0 = rng.below(full.hr.width - patch_ + 1);
    Image crop(full.hr.channels, patch_, patch_);
    for (std::size_t c = 0; c < crop.channels; ++c) {
      for (std::size_t y = 0; y < patch_; ++y) {
        for (std::size_t x = 0; x < patch_; ++x) crop.at(c, y, x) = full.hr.at(c, y0 + y, x0 + x);
      }
    }
    sample = make_pair(std::move(crop), full.source);
  }
  if (augment_) {
    const int variant = static_cast<int>(rng.below(8));
    if (variant != 0) sample = augment(sample, variant);
    sample.augmentation = variant;
  }
  return sample;
}

BatchSampler::BatchSampler(const Dataset& data, std::uint64_t seed, std::size_t batch_size)
    : data_(&data),
      seed_(seed),
      batch_(batch_size),
      order_(data.epoch_order(seed, 0)),
      rng_(CounterRng::stream(seed, "data/augment")) {
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
}

std::vector<ImagePair> BatchSampler::next() {
  std::vector<ImagePair> batch;
  batch.reserve(batch_);
  while (batch.size() < batch_) {
    if (position_ == order_.size()) {
      ++epoch_;
      position_ = 0;
      order_ = data_->epoch_order(seed_, epoch_);
    }
    batch.push_back(data_->training_pair(order_[position_++], rng_));
  }
  return batch;
}

void BatchSampler::restore(const State& state) {
  epoch_ = state.epoch;
  position_ = state.position;
  order_ = data_->epoch_order(seed_, epoch_);
  if (position_ > order_.size()) throw IoError("sampler state position beyond epoch length");
  rng_ = CounterRng(rng_.key(), state.rng_counter);
}

}  // namespace lsrgan
