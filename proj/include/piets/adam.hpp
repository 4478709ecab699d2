// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <string>

#include "piets/autodiff.hpp"

namespace piets {

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  /// Moments keyed by parameter name, created on first update.
  std::map<std::string, Tensor> m;
  std::map<std::string, Tensor> v;
};

/// One bias-corrected Adam update of every parameter using the matching
/// entry of `grads`.
void adam_step(std::span<Parameter> params, std::span<const Tensor> grads, AdamState& state);

/// Same, taking each gradient from the parameter's own accumulator.
void adam_step(ParameterStore& params, AdamState& state);

}  // namespace piets
