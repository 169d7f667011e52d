#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "opineq/errors.hpp"
#include "opineq/matrix.hpp"

namespace opineq {

/// Spectral decomposition of a Hermitian matrix: A = V diag(values) V*.
/// Values ascend; columns of `vectors` are orthonormal eigenvectors.
struct HermitianEigen {
  std::vector<double> values;
  ComplexMatrix vectors;
};

struct JacobiOptions {
  int max_sweeps = 60;
  double off_diagonal_tolerance = 1e-13;  // relative to ||A||_F
  double hermitian_tolerance = 1e-10;     // relative to max(1, ||A||_F)
};

namespace detail {

inline double off_diagonal_mass(const ComplexMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

// One complex Jacobi rotation annihilating a(p, q); also accumulates into v.
inline void jacobi_rotate(ComplexMatrix& a, ComplexMatrix& v, std::size_t p, std::size_t q) {
  const Complex apq = a(p, q);
  const double mag = std::abs(apq);
  if (mag == 0.0) return;
  const Complex d = std::conj(apq / mag);
  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const double theta = (aqq - app) / (2.0 * mag);
  double t;
  if (std::abs(theta) > 1e150) {
    t = 0.5 / theta;
  } else {
    t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  }
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const std::size_t n = a.rows();
  for (std::size_t k = 0; k < n; ++k) {
    const Complex akp = a(k, p);
    const Complex akq = a(k, q);
    a(k, p) = c * akp - s * d * akq;
    a(k, q) = s * akp + c * d * akq;
  }
  const Complex dc = std::conj(d);
  for (std::size_t k = 0; k < n; ++k) {
    const Complex apk = a(p, k);
    const Complex aqk = a(q, k);
    a(p, k) = c * apk - s * dc * aqk;
    a(q, k) = s * apk + c * dc * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  a(p, p) = app - t * mag;
  a(q, q) = aqq + t * mag;
  for (std::size_t k = 0; k < n; ++k) {
    const Complex vkp = v(k, p);
    const Complex vkq = v(k, q);
    v(k, p) = c * vkp - s * d * vkq;
    v(k, q) = s * vkp + c * d * vkq;
  }
}

}  // namespace detail

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi sweeps.
/// Deterministic for identical input bits.
inline HermitianEigen hermitian_eigen(const ComplexMatrix& input, const JacobiOptions& opts = {}) {
  require_square(input, "hermitian_eigen");
  const double norm_f = input.frobenius_norm();
  if (!input.all_finite()) throw NotHermitian("hermitian_eigen: non-finite entries");
  const double defect = hermitian_defect(input);
  if (defect > opts.hermitian_tolerance * std::max(1.0, norm_f)) {
    throw NotHermitian("hermitian_eigen: ||A - A*||_F = " + std::to_string(defect));
  }
  const std::size_t n = input.rows();
  ComplexMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = input(i, i).real();
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex z = 0.5 * (input(i, j) + std::conj(input(j, i)));
      a(i, j) = z;
      a(j, i) = std::conj(z);
    }
  }
  ComplexMatrix v = ComplexMatrix::identity(n);
  const double target = opts.off_diagonal_tolerance * norm_f;

  bool converged = detail::off_diagonal_mass(a) <= target;
  for (int sweep = 0; sweep < opts.max_sweeps && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) detail::jacobi_rotate(a, v, p, q);
    converged = detail::off_diagonal_mass(a) <= target;
  }
  if (!converged) {
    throw ConvergenceFailure("hermitian_eigen: no convergence after " +
                             std::to_string(opts.max_sweeps) + " sweeps");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&a](std::size_t i, std::size_t j) {
    return a(i, i).real() < a(j, j).real();
  });
  HermitianEigen out{std::vector<double>(n), ComplexMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

/// Real symmetric tridiagonal matrix unitarily similar to a Hermitian input.
/// Only eigenvalues survive the reduction (off-diagonal phases are dropped).
struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;  // off[i] couples i and i + 1

  /// Number of eigenvalues strictly below x (Sturm sequence count).
  std::size_t count_below(double x) const noexcept {
    const double pivmin = std::numeric_limits<double>::min() * 1e3;
    std::size_t count = 0;
    double q = diag[0] - x;
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
    for (std::size_t i = 1; i < diag.size(); ++i) {
      q = diag[i] - x - off[i - 1] * off[i - 1] / q;
      if (std::abs(q) < pivmin) q = -pivmin;
      if (q < 0.0) ++count;
    }
    return count;
  }

  std::pair<double, double> gershgorin() const noexcept {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < diag.size(); ++i) {
      double r = 0.0;
      if (i > 0) r += std::abs(off[i - 1]);
      if (i + 1 < diag.size()) r += std::abs(off[i]);
      lo = std::min(lo, diag[i] - r);
      hi = std::max(hi, diag[i] + r);
    }
    return {lo, hi};
  }

  /// k-th smallest eigenvalue (0-based) by bisection.
  double eigenvalue(std::size_t k) const noexcept {
    auto [lo, hi] = gershgorin();
    const double pad = 4.0 * std::numeric_limits<double>::epsilon() *
                           std::max(std::abs(lo), std::abs(hi)) +
                       std::numeric_limits<double>::min();
    lo -= pad;
    hi += pad;
    for (int it = 0; it < 256; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (count_below(mid) > k) {
        hi = mid;
      } else {
        lo = mid;
      }
      if (hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() *
                         std::max(std::abs(lo), std::abs(hi))) {
        break;
      }
    }
    return 0.5 * (lo + hi);
  }

  double largest() const noexcept { return eigenvalue(diag.size() - 1); }
  double smallest() const noexcept { return eigenvalue(0); }
};

/// Householder reduction of a Hermitian matrix to real tridiagonal form.
/// Only the lower triangle and diagonal of `h` are trusted.
inline Tridiagonal tridiagonalize(ComplexMatrix h) {
  require_square(h, "tridiagonalize");
  const std::size_t n = h.rows();
  Tridiagonal t{std::vector<double>(n), std::vector<double>(n > 0 ? n - 1 : 0)};
  std::vector<Complex> v(n), p(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t m = n - k - 1;
    double tail = 0.0;
    for (std::size_t i = 1; i < m; ++i) tail += std::norm(h(k + 1 + i, k));
    const Complex x0 = h(k + 1, k);
    if (tail == 0.0) {
      t.off[k] = std::abs(x0);
      continue;
    }
    const double xnorm = std::sqrt(tail + std::norm(x0));
    const double ax0 = std::abs(x0);
    const Complex alpha = ax0 == 0.0 ? Complex(-xnorm) : -(x0 / ax0) * xnorm;
    for (std::size_t i = 0; i < m; ++i) v[i] = h(k + 1 + i, k);
    v[0] -= alpha;
    double vnorm = 0.0;
    for (std::size_t i = 0; i < m; ++i) vnorm += std::norm(v[i]);
    vnorm = std::sqrt(vnorm);
    for (std::size_t i = 0; i < m; ++i) v[i] /= vnorm;

    // p = B v on the trailing block B, using Hermitian symmetry of B.
    const std::size_t o = k + 1;
    for (std::size_t i = 0; i < m; ++i) {
      Complex acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const Complex bij = i >= j ? h(o + i, o + j) : std::conj(h(o + j, o + i));
        acc += bij * v[j];
      }
      p[i] = acc;
    }
    double c = 0.0;
    for (std::size_t i = 0; i < m; ++i) c += (std::conj(v[i]) * p[i]).real();
    for (std::size_t i = 0; i < m; ++i) p[i] -= c * v[i];  // p becomes w
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j <= i; ++j)
        h(o + i, o + j) -= 2.0 * (v[i] * std::conj(p[j]) + p[i] * std::conj(v[j]));
    t.off[k] = std::abs(alpha);
  }
  for (std::size_t i = 0; i < n; ++i) t.diag[i] = h(i, i).real();
  if (n >= 2) t.off[n - 2] = std::abs(h(n - 1, n - 2));
  return t;
}

struct ExtremeEigenvalues {
  double smallest;
  double largest;
};

/// Smallest and largest eigenvalue of a Hermitian matrix, without eigenvectors.
inline ExtremeEigenvalues extreme_eigenvalues(const ComplexMatrix& h) {
  const Tridiagonal t = tridiagonalize(h);
  return {t.smallest(), t.largest()};
}

inline double largest_eigenvalue(const ComplexMatrix& h) { return tridiagonalize(h).largest(); }

}  // namespace opineq
