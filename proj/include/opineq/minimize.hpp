#pragma once

#include <cmath>
#include <cstddef>

#include "opineq/matrix.hpp"
#include "opineq/spectral.hpp"

namespace opineq {

struct MinimizeResult {
  double t_star = 1.0;
  double value = 0.0;
  bool attained = true;  // false when the minimizer sits on the search boundary
  int grid_evals = 0;
};

struct MinimizeOptions {
  double log_range = 20.0;  // u = log t ranges over [-log_range, log_range]
  int grid_points = 401;
  int refine_iterations = 60;
};

/// min over t > 0 of ||A / t + t B||, searched in u = log t.
///
/// The objective is quasi-convex in u, so a uniform grid followed by
/// golden-section search on the neighbouring cells finds the minimum.
inline MinimizeResult minimize_scaled_norm(const ComplexMatrix& a, const ComplexMatrix& b,
                                           const MinimizeOptions& opts = {}) {
  a.require_same_shape(b, "minimize_scaled_norm");
  auto phi = [&](double u) {
    ComplexMatrix m = std::exp(-u) * a;
    m += std::exp(u) * b;
    return operator_norm(m);
  };

  MinimizeResult out;
  const int points = opts.grid_points;
  const double step = 2.0 * opts.log_range / static_cast<double>(points - 1);
  auto grid_u = [&](int k) { return -opts.log_range + step * static_cast<double>(k); };

  // Start from u = 0 so ties resolve to t = 1.
  const int centre = (points - 1) / 2;
  int best = centre;
  double best_value = phi(grid_u(centre));
  for (int k = 0; k < points; ++k) {
    if (k == centre) continue;
    const double v = phi(grid_u(k));
    if (v < best_value) {
      best_value = v;
      best = k;
    }
  }
  out.grid_evals = points;
  double best_u = grid_u(best);

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::max(best_u - step, -opts.log_range);
  double hi = std::min(best_u + step, opts.log_range);
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = phi(c);
  double fd = phi(d);
  for (int it = 0; it < opts.refine_iterations; ++it) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = phi(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = phi(d);
    }
  }
  if (fc < best_value) {
    best_value = fc;
    best_u = c;
  }
  if (fd < best_value) {
    best_value = fd;
    best_u = d;
  }

  out.t_star = std::exp(best_u);
  out.value = best_value;
  out.attained = best != 0 && best != points - 1;
  return out;
}

}  // namespace opineq
