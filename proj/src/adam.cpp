// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0

#include "piets/adam.hpp"

#include <cmath>
#include <vector>

#include "piets/errors.hpp"

namespace piets {

void adam_step(std::span<Parameter> params, std::span<const Tensor> grads, AdamState& state) {
  if (grads.size() != params.size()) {
    throw ContractError("adam_step: " + std::to_string(params.size()) + " parameters but " +
                        std::to_string(grads.size()) + " gradients");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (grads[k].shape() != params[k].value().shape()) {
      throw ContractError("adam_step: missing or malformed gradient for '" + params[k].name + "'");
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& theta = params[k].value();
    const Tensor& g = grads[k];
    auto [mit, m_new] = state.m.try_emplace(params[k].name, theta.shape());
    auto [vit, v_new] = state.v.try_emplace(params[k].name, theta.shape());
    auto& m = mit->second.storage();
    auto& v = vit->second.storage();
    if (m.size() != theta.size()) {
      throw ContractError("adam_step: moment shape changed for '" + params[k].name + "'");
    }
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      theta[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

void adam_step(ParameterStore& params, AdamState& state) {
  std::vector<Tensor> grads;
  grads.reserve(params.size());
  for (const auto& p : params) grads.push_back(p.grad());
  adam_step(params.all(), grads, state);
}

}  // namespace piets
