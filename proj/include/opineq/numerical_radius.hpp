#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "opineq/eigen.hpp"
#include "opineq/errors.hpp"
#include "opineq/matrix.hpp"
#include "opineq/random.hpp"
#include "opineq/spectral.hpp"

namespace opineq {

/// w(S) with a certified enclosure [certified_lower, certified_upper].
///
/// The lower end is an attained value lambda_max(Re(e^{i theta} S)) at the
/// reported angle. The upper end adds the Lipschitz bound pi * ||S|| / grid_size
/// to it, which covers the largest possible excursion between grid points.
struct RadiusEnclosure {
  double estimate = 0.0;
  double certified_lower = 0.0;
  double certified_upper = 0.0;
  double arg_theta = 0.0;  // in [0, 2 pi)
  int grid_size = 0;

  double width() const noexcept { return certified_upper - certified_lower; }
};

inline constexpr int kDefaultRadiusGrid = 3600;

namespace detail {

inline double wrap_angle(double theta) {
  const double two_pi = 2.0 * std::numbers::pi;
  theta = std::fmod(theta, two_pi);
  if (theta < 0.0) theta += two_pi;
  if (theta >= two_pi) theta = 0.0;
  return theta;
}

}  // namespace detail

inline RadiusEnclosure numerical_radius(const ComplexMatrix& s, int grid_size = kDefaultRadiusGrid) {
  require_square(s, "numerical_radius");
  if (grid_size < 8) throw DomainError("numerical_radius: grid size must be at least 8");
  RadiusEnclosure out;
  out.grid_size = grid_size;
  const double norm = operator_norm(s);
  if (norm == 0.0) return out;

  const CartesianParts parts = real_imag_parts(s);
  const auto m = static_cast<std::size_t>(grid_size);
  const double step = 2.0 * std::numbers::pi / static_cast<double>(grid_size);
  auto top = [&](double theta) { return largest_eigenvalue(rotated_real_part(parts, theta)); };

  // Grid values are filled lazily. lambda_max at theta + pi is -lambda_min at
  // theta, so on an even grid one reduction fills two entries.
  std::vector<double> values(m, std::numeric_limits<double>::quiet_NaN());
  const bool even = m % 2 == 0;
  const std::size_t half = m / 2;
  auto value_at = [&](std::size_t j) {
    j %= m;
    if (std::isnan(values[j])) {
      if (even) {
        const std::size_t k = j % half;
        const auto ext = extreme_eigenvalues(rotated_real_part(parts, step * static_cast<double>(k)));
        values[k] = ext.largest;
        values[k + half] = -ext.smallest;
      } else {
        values[j] = top(step * static_cast<double>(j));
      }
    }
    return values[j];
  };

  // Branch and bound over grid intervals. Between grid points i < j the
  // function is Lipschitz with constant ||S||, so its values there stay below
  // (v_i + v_j + ||S|| (j - i) step) / 2. An interval whose bound is below the
  // best grid value cannot hold the grid maximum and is skipped, so the result
  // equals that of a full scan.
  const double lipschitz = norm * (1.0 + 1e-12);
  const double noise = 16.0 * std::numeric_limits<double>::epsilon() * norm;
  const std::size_t block = std::min<std::size_t>(32, m);
  double best_seen = -std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::size_t, std::size_t>> pending;
  for (std::size_t i = 0; i < m; i += block) {
    best_seen = std::max(best_seen, value_at(i));
    pending.emplace_back(i, std::min(i + block, m));
  }
  while (!pending.empty()) {
    const auto [i, j] = pending.back();
    pending.pop_back();
    if (j - i < 2) continue;
    const double bound =
        0.5 * (value_at(i) + value_at(j) + lipschitz * step * static_cast<double>(j - i)) + noise;
    if (bound < best_seen) continue;
    const std::size_t mid = i + (j - i) / 2;
    best_seen = std::max(best_seen, value_at(mid));
    pending.emplace_back(mid, j);
    pending.emplace_back(i, mid);
  }

  std::size_t best = 0;
  for (std::size_t j = 1; j < m; ++j)
    if (!std::isnan(values[j]) && values[j] > values[best]) best = j;
  double best_value = values[best];
  double best_theta = step * static_cast<double>(best);
  const double grid_value = best_value;
  const double grid_theta = best_theta;

  // Golden-section refinement on [theta* - step, theta* + step]. Only ever
  // raises the estimate to another attained value; certification does not
  // depend on it.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = best_theta - step;
  double b = best_theta + step;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = top(c);
  double fd = top(d);
  for (int it = 0; it < 60; ++it) {
    if (fc > best_value) {
      best_value = fc;
      best_theta = c;
    }
    if (fd > best_value) {
      best_value = fd;
      best_theta = d;
    }
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = top(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = top(d);
    }
  }
  if (fc > best_value) {
    best_value = fc;
    best_theta = c;
  }
  if (fd > best_value) {
    best_value = fd;
    best_theta = d;
  }

  // Gains at rounding level would only move the reported angle.
  if (best_value <= grid_value + 8.0 * std::numeric_limits<double>::epsilon() * norm) {
    best_value = grid_value;
    best_theta = grid_theta;
  }

  out.estimate = std::max(best_value, 0.0);
  out.certified_lower = out.estimate;
  out.certified_upper = out.certified_lower + std::numbers::pi * norm / static_cast<double>(grid_size);
  out.arg_theta = detail::wrap_angle(best_theta);
  return out;
}

/// max |<Sx, x>| over seeded random unit vectors; a lower bound for w(S).
inline double rayleigh_lower(const ComplexMatrix& s, int samples, std::uint64_t seed) {
  require_square(s, "rayleigh_lower");
  if (samples < 1) throw DomainError("rayleigh_lower: need at least one sample");
  const std::size_t n = s.rows();
  GaussianSource rng(seed);
  std::vector<Complex> x(n);
  double best = 0.0;
  for (int k = 0; k < samples; ++k) {
    double nn = 0.0;
    for (auto& z : x) {
      z = rng.complex_normal();
      nn += std::norm(z);
    }
    if (nn == 0.0) continue;
    Complex q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Complex acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += s(i, j) * x[j];
      q += std::conj(x[i]) * acc;
    }
    best = std::max(best, std::abs(q) / nn);
  }
  return best;
}

namespace detail {

// x^p with 0^p = 0 for p >= 0 (the kernel convention).
inline double kernel_power(double x, double p) {
  if (x == 0.0) {
    if (p < 0.0) return std::numeric_limits<double>::infinity();
    return 0.0;
  }
  return std::pow(x, p);
}

}  // namespace detail

/// Generalized Aluthge transform |S|^t U |S|^{1-t} with U the polar factor.
inline ComplexMatrix aluthge_generalized(const ComplexMatrix& s, double t) {
  require_square(s, "aluthge_generalized");
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("aluthge_generalized: t must lie in [0, 1]");
  const Svd d = svd(s);
  const PsdSpectrum abs{d.sigmas, d.right};
  const ComplexMatrix left = abs.apply([t](double x) { return detail::kernel_power(x, t); });
  const ComplexMatrix right = abs.apply([t](double x) { return detail::kernel_power(x, 1.0 - t); });
  const ComplexMatrix unitary = d.left * d.right.adjoint();
  return left * unitary * right;
}

}  // namespace opineq
