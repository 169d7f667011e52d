#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "opineq/eigen.hpp"
#include "opineq/errors.hpp"
#include "opineq/matrix.hpp"

namespace opineq {

/// Pointwise scalar function applied to a spectrum.
using ScalarFunction = std::function<double(double)>;

/// A = left * diag(sigmas) * right*. Sigmas descend.
struct Svd {
  ComplexMatrix left;
  std::vector<double> sigmas;
  ComplexMatrix right;
};

/// Unitary times positive semidefinite factor: S = unitary * psd.
struct PolarParts {
  ComplexMatrix unitary;
  ComplexMatrix psd;
};

namespace detail {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

// Gram-Schmidt (two passes) of `x` against the columns of `q` flagged in `use`.
inline double orthogonalize_against(std::vector<Complex>& x, const ComplexMatrix& q,
                                    const std::vector<bool>& use) {
  const std::size_t n = x.size();
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t c = 0; c < q.cols(); ++c) {
      if (!use[c]) continue;
      Complex dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += std::conj(q(i, c)) * x[i];
      for (std::size_t i = 0; i < n; ++i) x[i] -= dot * q(i, c);
    }
  }
  double s = 0.0;
  for (const auto& z : x) s += std::norm(z);
  return std::sqrt(s);
}

// Fills the unflagged columns of `q` with standard basis vectors orthogonalized
// against the flagged ones, picking the best-conditioned candidate each time.
inline void complete_orthonormal(ComplexMatrix& q, std::vector<bool>& have) {
  const std::size_t n = q.rows();
  for (std::size_t slot = 0; slot < q.cols(); ++slot) {
    if (have[slot]) continue;
    std::vector<Complex> best;
    double best_norm = -1.0;
    for (std::size_t e = 0; e < n; ++e) {
      std::vector<Complex> cand(n, 0.0);
      cand[e] = 1.0;
      const double nn = orthogonalize_against(cand, q, have);
      if (nn > best_norm + 1e-12) {
        best_norm = nn;
        best = std::move(cand);
      }
    }
    for (std::size_t i = 0; i < n; ++i) q(i, slot) = best[i] / best_norm;
    have[slot] = true;
  }
}

}  // namespace detail

/// Singular value decomposition through the Hermitian dilation [[0, A], [A*, 0]],
/// whose eigenvalues are +/- the singular values of A. Rank-deficient inputs get
/// unitary factors completed on the null spaces.
inline Svd svd(const ComplexMatrix& a) {
  if (a.empty()) throw DimensionMismatch("svd: empty matrix");
  if (!a.all_finite()) throw DomainError("svd: non-finite entries");
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  const std::size_t k = std::min(m, n);
  const HermitianEigen eig = hermitian_eigen(hermitian_dilation(a));
  const std::size_t total = m + n;

  Svd out{ComplexMatrix(m, m), std::vector<double>(k), ComplexMatrix(n, n)};
  const double sigma_max = std::max(eig.values[total - 1], 0.0);
  const double floor = 4.0 * static_cast<double>(total) * detail::kEps * sigma_max;
  for (std::size_t i = 0; i < k; ++i) {
    const double s = eig.values[total - 1 - i];
    out.sigmas[i] = s > floor ? s : 0.0;
  }

  // Right vectors from the lower halves of the dilation eigenvectors.
  std::vector<bool> have_v(n, false);
  std::vector<Complex> x(n);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t col = total - 1 - i;
    for (std::size_t r = 0; r < n; ++r) x[r] = eig.vectors(m + r, col);
    const double nn = detail::orthogonalize_against(x, out.right, have_v);
    if (nn >= 0.5 / std::sqrt(2.0)) {
      for (std::size_t r = 0; r < n; ++r) out.right(r, i) = x[r] / nn;
      have_v[i] = true;
    }
  }
  detail::complete_orthonormal(out.right, have_v);

  // Left vectors: A v / sigma on the range, completed elsewhere.
  std::vector<bool> have_u(m, false);
  std::vector<Complex> y(m);
  for (std::size_t i = 0; i < k; ++i) {
    if (out.sigmas[i] == 0.0) continue;
    for (std::size_t r = 0; r < m; ++r) {
      Complex acc = 0.0;
      for (std::size_t c = 0; c < n; ++c) acc += a(r, c) * out.right(c, i);
      y[r] = acc / out.sigmas[i];
    }
    const double nn = detail::orthogonalize_against(y, out.left, have_u);
    if (nn < 0.5) continue;
    for (std::size_t r = 0; r < m; ++r) out.left(r, i) = y[r] / nn;
    have_u[i] = true;
  }
  detail::complete_orthonormal(out.left, have_u);
  return out;
}

/// A positive semidefinite matrix held through its spectral decomposition,
/// so that functions of it can be formed without another eigensolve.
struct PsdSpectrum {
  std::vector<double> values;  // nonnegative; kernel entries are exactly zero
  ComplexMatrix basis;         // orthonormal eigenvector columns

  ComplexMatrix apply(const ScalarFunction& f) const {
    const std::size_t n = basis.rows();
    std::vector<double> fv(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double y = f(values[i]);
      if (!std::isfinite(y)) {
        throw DomainError("spectral function is not finite at eigenvalue " +
                          std::to_string(values[i]));
      }
      fv[i] = y;
    }
    ComplexMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        Complex acc = 0.0;
        for (std::size_t c = 0; c < fv.size(); ++c) {
          if (fv[c] == 0.0) continue;
          acc += basis(i, c) * fv[c] * std::conj(basis(j, c));
        }
        out(i, j) = acc;
        out(j, i) = std::conj(acc);
      }
      out(i, i) = out(i, i).real();
    }
    return out;
  }

  ComplexMatrix matrix() const {
    return apply([](double x) { return x; });
  }

  double min_value() const { return *std::min_element(values.begin(), values.end()); }
  double max_value() const { return *std::max_element(values.begin(), values.end()); }
};

/// |A| = (A*A)^{1/2} and |A*| = (AA*)^{1/2} sharing one SVD.
struct AbsoluteValues {
  PsdSpectrum abs;          // |A|
  PsdSpectrum abs_adjoint;  // |A*|
  double norm = 0.0;

  static AbsoluteValues of(const ComplexMatrix& a) {
    require_square(a, "absolute values");
    Svd d = svd(a);
    AbsoluteValues out;
    out.norm = d.sigmas.empty() ? 0.0 : d.sigmas.front();
    out.abs = {d.sigmas, std::move(d.right)};
    out.abs_adjoint = {std::move(d.sigmas), std::move(d.left)};
    return out;
  }
};

/// Spectrum of a PSD input with roundoff-level negatives clamped to zero.
/// Eigenvalues below -1e-10 ||A|| mean the input is not PSD.
inline PsdSpectrum psd_spectrum(const ComplexMatrix& a) {
  HermitianEigen eig = hermitian_eigen(a);
  const double scale = std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
  const double neg_tol = 1e-10 * scale;
  const double zero_tol = 64.0 * static_cast<double>(a.rows()) * detail::kEps * scale;
  for (double& v : eig.values) {
    if (v < -neg_tol) {
      throw DomainError("matrix is not positive semidefinite: eigenvalue " + std::to_string(v));
    }
    if (v <= zero_tol) v = 0.0;
  }
  return {std::move(eig.values), std::move(eig.vectors)};
}

/// f(A) = V diag(f(lambda_i)) V* for PSD A.
inline ComplexMatrix apply_spectral_function(const ComplexMatrix& a, const ScalarFunction& f) {
  return psd_spectrum(a).apply(f);
}

inline ComplexMatrix matrix_abs(const ComplexMatrix& a) { return AbsoluteValues::of(a).abs.matrix(); }

/// Unitary factor U_L U_R* from the SVD (always unitary), psd factor |A|.
inline PolarParts polar_decompose(const ComplexMatrix& a) {
  require_square(a, "polar_decompose");
  Svd d = svd(a);
  PolarParts out{d.left * d.right.adjoint(), ComplexMatrix()};
  out.psd = PsdSpectrum{std::move(d.sigmas), std::move(d.right)}.matrix();
  return out;
}

/// Largest singular value, via the top eigenvalue of the smaller Gram matrix.
inline double operator_norm(const ComplexMatrix& a) {
  if (a.empty()) return 0.0;
  const ComplexMatrix gram = a.rows() >= a.cols() ? a.adjoint() * a : a * a.adjoint();
  if (gram.max_abs() == 0.0) return 0.0;
  return std::sqrt(std::max(0.0, largest_eigenvalue(gram)));
}

/// r(A) through normalized repeated squaring: prod_k nu_k^{1/2^k}.
inline double spectral_radius(const ComplexMatrix& a, int squarings = 40) {
  require_square(a, "spectral_radius");
  ComplexMatrix b = a;
  double log_r = 0.0;
  double weight = 1.0;
  for (int k = 0; k <= squarings; ++k) {
    const double nu = operator_norm(b);
    if (nu == 0.0) return 0.0;
    log_r += weight * std::log(nu);
    weight *= 0.5;
    b *= Complex(1.0 / nu);
    b = b * b;
  }
  return std::exp(log_r);
}

struct CartesianParts {
  ComplexMatrix real;  // (A + A*) / 2
  ComplexMatrix imag;  // (A - A*) / 2i
};

inline CartesianParts real_imag_parts(const ComplexMatrix& a) {
  require_square(a, "real_imag_parts");
  const ComplexMatrix adj = a.adjoint();
  CartesianParts out{0.5 * (a + adj), (a - adj) * Complex(0.0, -0.5)};
  for (std::size_t i = 0; i < a.rows(); ++i) {
    out.real(i, i) = out.real(i, i).real();
    out.imag(i, i) = out.imag(i, i).real();
  }
  return out;
}

/// Re(e^{i theta} A) = cos(theta) Re(A) - sin(theta) Im(A).
inline ComplexMatrix rotated_real_part(const CartesianParts& parts, double theta) {
  return std::cos(theta) * parts.real + (-std::sin(theta)) * parts.imag;
}

/// Hypothesis flags and the residuals that decided them.
struct OperatorClass {
  bool hermitian = false;
  bool positive = false;
  bool normal = false;
  bool unitary = false;
  bool invertible = false;

  double hermitian_residual = 0.0;  // ||A - A*||_F
  double normal_residual = 0.0;     // ||AA* - A*A||_F
  double unitary_residual = 0.0;    // ||A*A - I||_F
  double min_eigenvalue = 0.0;      // of Re(A)
  double sigma_min = 0.0;
  double sigma_max = 0.0;
};

inline OperatorClass classify(const ComplexMatrix& a) {
  require_square(a, "classify");
  const std::size_t n = a.rows();
  OperatorClass c;
  const Svd d = svd(a);
  c.sigma_max = d.sigmas.front();
  c.sigma_min = d.sigmas.back();
  const double norm = c.sigma_max;
  const ComplexMatrix adj = a.adjoint();
  const ComplexMatrix aas = a * adj;
  const ComplexMatrix asa = adj * a;
  c.hermitian_residual = hermitian_defect(a);
  c.normal_residual = (aas - asa).frobenius_norm();
  c.unitary_residual = (asa - ComplexMatrix::identity(n)).frobenius_norm();
  c.min_eigenvalue = extreme_eigenvalues(real_imag_parts(a).real).smallest;

  c.hermitian = c.hermitian_residual <= 1e-10 * std::max(1.0, norm);
  c.normal = c.normal_residual <= 1e-10 * std::max(1.0, norm * norm);
  c.invertible = c.sigma_max > 0.0 && c.sigma_min >= 1e-10 * c.sigma_max;
  c.positive = c.hermitian && c.min_eigenvalue >= -1e-10 * norm;
  c.unitary = c.normal && c.invertible &&
              c.unitary_residual <= 1e-10 * std::max(1.0, static_cast<double>(n));
  return c;
}

}  // namespace opineq
