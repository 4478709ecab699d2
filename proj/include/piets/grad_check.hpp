// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>

#include "piets/autodiff.hpp"

namespace piets {

struct GradCheckReport {
  double max_rel_error = 0.0;
  /// Where the worst error occurred: parameter name (or "x") and flat index.
  std::string worst_name;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates = 0;
  bool passed = true;
};

/// |a - b| / max(|a|, |b|, 1e-8).
double relative_error(double analytic, double numeric);

/// Compares the reverse-mode gradient of a scalar function with central
/// differences (f(x+he) - f(x-he)) / 2h at every coordinate of x.
GradCheckReport grad_check(const std::function<Var(const Var&)>& f, const Tensor& x,
                           double step = 1e-5, double tol = 1e-6);

/// Same check, over every coordinate of every parameter in the store.
/// `loss` must rebuild the graph from the current parameter values.
GradCheckReport grad_check_parameters(const std::function<Var()>& loss, ParameterStore& params,
                                      double step = 1e-5, double tol = 1e-4);

}  // namespace piets
