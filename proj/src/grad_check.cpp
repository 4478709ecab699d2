// Copyright (c) 2026 The PIETS Authors
// SPDX-License-Identifier: Apache-2.0

#include "piets/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace piets {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

namespace {

void record(GradCheckReport& r, const std::string& name, std::size_t i, double analytic,
            double numeric) {
  const double err = relative_error(analytic, numeric);
  ++r.coordinates;
  if (err > r.max_rel_error || r.coordinates == 1) {
    r.max_rel_error = std::max(r.max_rel_error, err);
    r.worst_name = name;
    r.worst_index = i;
    r.worst_analytic = analytic;
    r.worst_numeric = numeric;
  }
}

}  // namespace

GradCheckReport grad_check(const std::function<Var(const Var&)>& f, const Tensor& x, double step,
                           double tol) {
  auto probe = ad::variable(x);
  ad::backward(f(probe));
  const Tensor analytic = probe->grad;

  GradCheckReport report;
  Tensor shifted = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    shifted[i] = x[i] + step;
    const double up = f(ad::constant(shifted))->value.item();
    shifted[i] = x[i] - step;
    const double down = f(ad::constant(shifted))->value.item();
    shifted[i] = x[i];
    record(report, "x", i, analytic[i], (up - down) / (2.0 * step));
  }
  report.passed = report.max_rel_error <= tol;
  return report;
}

GradCheckReport grad_check_parameters(const std::function<Var()>& loss, ParameterStore& params,
                                      double step, double tol) {
  params.zero_grads();
  ad::backward(loss());

  GradCheckReport report;
  for (auto& p : params) {
    const Tensor analytic = p.grad();
    Tensor& v = p.value();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double orig = v[i];
      v[i] = orig + step;
      const double up = loss()->value.item();
      v[i] = orig - step;
      const double down = loss()->value.item();
      v[i] = orig;
      record(report, p.name, i, analytic[i], (up - down) / (2.0 * step));
    }
  }
  report.passed = report.max_rel_error <= tol;
  params.zero_grads();
  return report;
}

}  // namespace piets
