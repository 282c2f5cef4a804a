// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace lsrgan {

/// Counter-based 64-bit generator. Draw k of a stream with key K is
/// splitmix64_finalize(K + (k + 1) * 0x9E3779B97F4A7C15), so any draw can be
/// reproduced from (key, counter) alone. One root seed fans out to
/// independent per-purpose streams through stream().
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0)
      : key_(key), counter_(counter) {}

  static CounterRng stream(std::uint64_t root_seed, std::string_view purpose);

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal by the Box-Muller transform; consumes two draws.
  double normal();
  // Uniform integer on [0, bound), bound > 0, without modulo bias.
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

std::uint64_t mix64(std::uint64_t x);

// Fisher-Yates permutation of [0, n).
std::vector<std::size_t> random_permutation(std::size_t n, CounterRng& rng);

}  // namespace lsrgan
