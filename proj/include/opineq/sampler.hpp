#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "opineq/errors.hpp"
#include "opineq/matrix.hpp"
#include "opineq/random.hpp"

namespace opineq {

enum class SampleClass {
  ginibre,
  hermitian,
  positive,
  normal,
  invertible_normal,
  unitary,
  selfadjoint_product_pair,
};

inline constexpr std::array<SampleClass, 7> kAllSampleClasses{
    SampleClass::ginibre, SampleClass::hermitian,         SampleClass::positive,
    SampleClass::normal,  SampleClass::invertible_normal, SampleClass::unitary,
    SampleClass::selfadjoint_product_pair};

inline std::string_view to_string(SampleClass c) {
  switch (c) {
    case SampleClass::ginibre: return "ginibre";
    case SampleClass::hermitian: return "hermitian";
    case SampleClass::positive: return "positive";
    case SampleClass::normal: return "normal";
    case SampleClass::invertible_normal: return "invertible_normal";
    case SampleClass::unitary: return "unitary";
    case SampleClass::selfadjoint_product_pair: return "selfadjoint_product_pair";
  }
  return "?";
}

inline SampleClass parse_sample_class(std::string_view name) {
  for (SampleClass c : kAllSampleClasses)
    if (to_string(c) == name) return c;
  throw ConfigError("unknown matrix class '" + std::string(name) + "'");
}

struct SampleSpec {
  SampleClass cls = SampleClass::ginibre;
  std::size_t dim = 2;
  std::uint64_t seed = 0;
  double spectrum_scale = 1.0;

  void validate() const {
    if (dim < 2 || dim > 64) throw ConfigError("sample dimension must lie in [2, 64], got " + std::to_string(dim));
    if (!(spectrum_scale > 0.0) || !std::isfinite(spectrum_scale)) {
      throw ConfigError("spectrum scale must be positive and finite");
    }
  }
};

/// Seed for one campaign trial. Each step is a bijection of the running
/// state, so distinct indices never share a seed for fixed (master, bound, dim).
inline std::uint64_t derive_trial_seed(std::uint64_t master, std::string_view bound_id, std::uint64_t dim,
                                       std::uint64_t index) {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ fnv1a64(bound_id));
  h = mix64(h ^ dim);
  return mix64(h ^ index);
}

namespace detail {

// Gram-Schmidt QR of a Gaussian matrix. The R factor comes out with a
// positive real diagonal, which is the phase fix that makes Q Haar.
inline ComplexMatrix haar_from(GaussianSource& rng, std::size_t dim) {
  const ComplexMatrix g = rng.ginibre(dim, dim);
  ComplexMatrix q(dim, dim);
  std::vector<Complex> v(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    for (std::size_t i = 0; i < dim; ++i) v[i] = g(i, j);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t c = 0; c < j; ++c) {
        Complex dot = 0.0;
        for (std::size_t i = 0; i < dim; ++i) dot += std::conj(q(i, c)) * v[i];
        for (std::size_t i = 0; i < dim; ++i) v[i] -= dot * q(i, c);
      }
    }
    double nn = 0.0;
    for (const auto& z : v) nn += std::norm(z);
    nn = std::sqrt(nn);
    for (std::size_t i = 0; i < dim; ++i) q(i, j) = v[i] / nn;
  }
  return q;
}

inline ComplexMatrix conjugate_diagonal(const ComplexMatrix& u, const std::vector<Complex>& d) {
  return u * ComplexMatrix::diagonal(std::span<const Complex>(d)) * u.adjoint();
}

inline ComplexMatrix hermitian_part_exact(const ComplexMatrix& a) {
  ComplexMatrix h(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    h(i, i) = a(i, i).real();
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      h(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)));
      h(j, i) = std::conj(h(i, j));
    }
  }
  return h;
}

inline ComplexMatrix draw(SampleClass cls, std::size_t n, double scale, GaussianSource& rng) {
  switch (cls) {
    case SampleClass::ginibre: return Complex(scale) * rng.ginibre(n, n);
    case SampleClass::hermitian: return hermitian_part_exact(Complex(scale) * rng.ginibre(n, n));
    case SampleClass::positive: {
      const ComplexMatrix u = haar_from(rng, n);
      std::vector<Complex> d(n);
      for (auto& z : d) z = scale * std::abs(rng.normal());
      return hermitian_part_exact(conjugate_diagonal(u, d));
    }
    case SampleClass::normal: {
      const ComplexMatrix u = haar_from(rng, n);
      std::vector<Complex> d(n);
      for (auto& z : d) z = scale * rng.complex_normal();
      return conjugate_diagonal(u, d);
    }
    case SampleClass::invertible_normal: {
      const ComplexMatrix u = haar_from(rng, n);
      std::vector<Complex> d(n);
      for (auto& z : d) {
        const Complex g = rng.complex_normal();
        z = std::polar(scale * std::clamp(std::abs(g), 0.1, 2.0), std::arg(g));
      }
      return conjugate_diagonal(u, d);
    }
    case SampleClass::unitary: return haar_from(rng, n);
    case SampleClass::selfadjoint_product_pair: break;
  }
  throw ConfigError("class " + std::string(to_string(cls)) + " produces operand pairs");
}

}  // namespace detail

inline ComplexMatrix haar_unitary(std::size_t dim, std::uint64_t seed) {
  if (dim < 1) throw ConfigError("haar_unitary: dimension must be positive");
  GaussianSource rng(seed);
  return detail::haar_from(rng, dim);
}

/// One matrix of a single-matrix class.
inline ComplexMatrix sample(const SampleSpec& spec) {
  spec.validate();
  GaussianSource rng(spec.seed);
  return detail::draw(spec.cls, spec.dim, spec.spectrum_scale, rng);
}

/// `count` operands drawn in sequence from the spec's seed. The pair class
/// yields (S, T) with S invertible and ST = K Hermitian via T = S^{-1} K.
inline std::vector<ComplexMatrix> sample_operands(const SampleSpec& spec, std::size_t count) {
  spec.validate();
  GaussianSource rng(spec.seed);
  std::vector<ComplexMatrix> out;
  if (spec.cls == SampleClass::selfadjoint_product_pair) {
    if (count != 2) throw ConfigError("selfadjoint_product_pair yields exactly two operands");
    const std::size_t n = spec.dim;
    const ComplexMatrix w1 = detail::haar_from(rng, n);
    const ComplexMatrix w2 = detail::haar_from(rng, n);
    std::vector<Complex> sv(n);
    for (auto& z : sv) z = spec.spectrum_scale * (0.5 + 1.5 * rng.uniform());
    const ComplexMatrix s = w1 * ComplexMatrix::diagonal(std::span<const Complex>(sv)) * w2;
    const ComplexMatrix k = detail::hermitian_part_exact(Complex(spec.spectrum_scale) * rng.ginibre(n, n));
    out.push_back(s);
    out.push_back(inverse(s) * k);
    return out;
  }
  for (std::size_t i = 0; i < count; ++i) out.push_back(detail::draw(spec.cls, spec.dim, spec.spectrum_scale, rng));
  return out;
}

}  // namespace opineq
