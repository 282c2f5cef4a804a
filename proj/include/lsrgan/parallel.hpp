// Copyright 2026 The LSRGAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace lsrgan {

// Worker cap from LSRGAN_THREADS; 1 when unset or invalid.
std::size_t worker_threads();

// Runs fn(i) for i in [0, n) on up to `threads` threads. Each index is
// handled by exactly one call, so writing results into slot i keeps the
// outcome independent of the thread count. The first exception is rethrown.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace lsrgan
