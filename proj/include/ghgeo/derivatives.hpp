#pragma once

// Central finite-difference check of analytic gradients and Hessians.

#include <array>
#include <cmath>
#include <limits>

#include "ghgeo/core.hpp"

namespace ghgeo {

struct DerivativeReport {
  double step = 0.0;
  double gradient_error = 0.0;  // relative to the uncancelled gradient scale
  double hessian_error = 0.0;   // relative to the uncancelled Hessian scale
  bool passed = false;
};

inline constexpr double kDerivativeTol = 1e-6;

/// Tries steps h0 * 2^-k for k = 0..8 and keeps the one with the smallest
/// combined error. The gradient is checked against differences of the value
/// and the Hessian against differences of the gradient.
template <JetField Field>
DerivativeReport check_derivatives(const Field& field, const Vec3& x, double h0 = 1e-3,
                                   double tol = kDerivativeTol) {
  const PotentialJet j = field.jet(x);
  const double gscale = std::max(j.gradient_scale, j.gradient.norm());
  const double hscale = std::max(j.hessian_scale, j.hessian.norm());
  DerivativeReport best;
  best.gradient_error = best.hessian_error = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 8; ++k) {
    const double h = h0 * std::ldexp(1.0, -k);
    Vec3 fd_grad;
    Mat3 fd_hess;
    try {
      for (int i = 0; i < 3; ++i) {
        Vec3 e = Vec3::Zero();
        e[i] = h;
        const PotentialJet jp = field.jet(Vec3(x + e));
        const PotentialJet jm = field.jet(Vec3(x - e));
        fd_grad[i] = (jp.value - jm.value) / (2.0 * h);
        fd_hess.col(i) = (jp.gradient - jm.gradient) / (2.0 * h);
      }
    } catch (const Error&) {
      continue;
    }
    const double ge = (fd_grad - j.gradient).norm() / gscale;
    const double he = (fd_hess - j.hessian).norm() / hscale;
    if (std::max(ge, he) < std::max(best.gradient_error, best.hessian_error)) {
      best.step = h;
      best.gradient_error = ge;
      best.hessian_error = he;
    }
  }
  best.passed = best.gradient_error <= tol && best.hessian_error <= tol;
  return best;
}

}  // namespace ghgeo
