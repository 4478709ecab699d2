// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0

#include "piets/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "piets/errors.hpp"
#include "piets/random.hpp"

namespace piets {

AlignedTimeline generate_synthetic(const SynthConfig& cfg) {
  const std::size_t S = cfg.sources;
  const std::size_t L = cfg.length;
  if (S == 0) throw DomainError("synthetic benchmark needs at least one source");
  if (cfg.offsets.size() != S) {
    throw DomainError("expected " + std::to_string(S) + " offsets, got " + std::to_string(cfg.offsets.size()));
  }
  if (cfg.dims.size() != 1 && cfg.dims.size() != S) {
    throw DomainError("dims must list one value or one per source");
  }
  if (!cfg.weights.empty() && cfg.weights.size() != S) {
    throw DomainError("weights must list one value per source");
  }
  if (cfg.noise < 0.0) throw DomainError("noise level must be non-negative");
  for (auto off : cfg.offsets) {
    if (off < 0 || off >= static_cast<std::int64_t>(L)) {
      throw DomainError("offset " + std::to_string(off) + " must lie in [0, length " +
                        std::to_string(L) + ")");
    }
  }

  auto dim_of = [&](std::size_t s) { return cfg.dims.size() == 1 ? cfg.dims[0] : cfg.dims[s]; };

  // Latent features over the full timeline.
  std::vector<Matrix> latent;
  for (std::size_t s = 0; s < S; ++s) {
    const std::size_t D = dim_of(s);
    if (D == 0) throw DomainError("every source needs at least one feature");
    Matrix x(L, D);
    for (std::size_t d = 0; d < D; ++d) {
      Rng rng(cfg.seed, "synth.source." + std::to_string(s) + "." + std::to_string(d));
      const double amp = rng.uniform(0.5, 1.5);
      const double period = rng.uniform(8.0, 30.0);
      const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      double z = 0.0;
      for (std::size_t t = 0; t < L; ++t) {
        z = 0.8 * z + 0.3 * rng.normal();
        x.at(t, d) = amp * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period + phase) + z;
      }
    }
    latent.push_back(std::move(x));
  }

  std::vector<double> target(L, 0.0);
  Rng noise_rng(cfg.seed, "synth.target.noise");
  for (std::size_t t = 0; t < L; ++t) {
    double y = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      const double w = cfg.weights.empty() ? 1.0 : cfg.weights[s];
      const std::size_t D = dim_of(s);
      double acc = 0.0;
      for (std::size_t k = 3; k <= 7; ++k) {
        const std::size_t lagged = t >= k ? t - k : 0;
        for (std::size_t d = 0; d < D; ++d) acc += latent[s].at(lagged, d);
      }
      y += w * acc / static_cast<double>(5 * D);
    }
    const double eps = noise_rng.normal();
    target[t] = y + cfg.noise * eps;
  }

  std::vector<SourceSeries> sources;
  for (std::size_t s = 0; s < S; ++s) {
    const std::size_t D = dim_of(s);
    const auto start = static_cast<std::size_t>(cfg.offsets[s]);
    SourceSeries src;
    src.id = "s" + std::to_string(s);
    src.initial_t = cfg.offsets[s];
    const std::size_t extra = s == 0 ? 1 : 0;
    if (extra) src.feature_names.push_back("target");
    for (std::size_t d = 0; d < D; ++d) src.feature_names.push_back("f" + std::to_string(d));
    src.features = Matrix(L - start, D + extra);
    for (std::size_t t = start; t < L; ++t) {
      if (extra) src.features.at(t - start, 0) = target[t];
      for (std::size_t d = 0; d < D; ++d) src.features.at(t - start, d + extra) = latent[s].at(t, d);
    }
    sources.push_back(std::move(src));
  }
  return make_timeline(std::move(sources), 0, 0);
}

}  // namespace piets
