// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic multi-source benchmark with staggered starts.
//
// Every source s carries D_s latent features over the whole timeline,
//
//   x[s][d](t) = A·sin(2πt/P + φ) + z(t),   z(t) = 0.8·z(t-1) + 0.3·ε(t),
//
// with amplitude A ∈ [0.5, 1.5], period P ∈ [8, 30] and phase φ drawn per
// feature. Source s only reveals ticks t >= offsets[s]. The forecasting
// target, stored as column "target" of source 0, is
//
//   target(t) = Σ_s w_s · mean{ x[s][d](t-k) : d < D_s, 3 <= k <= 7 } + noise·ε(t)
//
// with lags clamped at tick 0, so the target is a fixed function of the
// last seven days of every source.

#pragma once

#include <cstdint>
#include <vector>

#include "piets/data.hpp"

namespace piets {

struct SynthConfig {
  std::size_t sources = 3;
  std::vector<std::int64_t> offsets{0, 15, 30};
  /// Latent features per source; a single value applies to every source.
  std::vector<std::size_t> dims{2};
  std::size_t length = 200;
  double noise = 0.05;
  /// Per-source weights in the target equation; empty means 1 for all.
  std::vector<double> weights;
  std::uint64_t seed = 1;
};

/// Deterministic in (cfg, seed). Source 0 is the target provider.
AlignedTimeline generate_synthetic(const SynthConfig& cfg);

}  // namespace piets
