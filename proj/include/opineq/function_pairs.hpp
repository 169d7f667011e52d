#pragma once

#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "opineq/errors.hpp"
#include "opineq/numerical_radius.hpp"
#include "opineq/spectral.hpp"

namespace opineq {

/// Nonnegative scalar functions (first, second) with first(x) * second(x) = x,
/// applied to positive operators through their spectra.
struct FunctionPair {
  std::string label;
  ScalarFunction first;
  ScalarFunction second;
  std::vector<double> validation_samples;
  // Set when a member blows up at 0; operands must then be invertible.
  bool requires_invertible = false;
  // Exponent r for power pairs (x^r, x^{1-r}).
  std::optional<double> exponent;

  /// (second, first): also a valid pair.
  FunctionPair swapped() const {
    FunctionPair p{"swap(" + label + ")", second, first, validation_samples, requires_invertible,
                   std::nullopt};
    if (exponent) {
      p.exponent = 1.0 - *exponent;
      p.label = format_power_label(*p.exponent);
    }
    return p;
  }

  static std::string format_power_label(double r) {
    std::ostringstream os;
    os.precision(17);
    os << "pow:" << r;
    return os.str();
  }
};

struct PairValidation {
  bool ok = true;
  double worst_residual = 0.0;  // max |first * second - x| / max(1, x)
  double worst_at = 0.0;
  std::string reason;
};

/// 0 together with 64 log-spaced points in [1e-6, 1e3].
inline std::vector<double> default_validation_samples() {
  std::vector<double> xs{0.0};
  for (int i = 0; i < 64; ++i) xs.push_back(std::pow(10.0, -6.0 + 9.0 * i / 63.0));
  return xs;
}

/// (x^r, x^{1-r}); a zero power evaluates to 0 on the kernel.
inline FunctionPair power_pair(double r) {
  if (!std::isfinite(r)) throw DomainError("power_pair: exponent must be finite");
  FunctionPair p;
  p.label = FunctionPair::format_power_label(r);
  p.first = [r](double x) { return detail::kernel_power(x, r); };
  p.second = [r](double x) { return detail::kernel_power(x, 1.0 - r); };
  p.requires_invertible = r < 0.0 || r > 1.0;
  p.exponent = r;
  p.validation_samples = default_validation_samples();
  if (p.requires_invertible) p.validation_samples.erase(p.validation_samples.begin());
  return p;
}

/// (f, x / f) for f positive on (0, inf); the second member is 0 at x = 0.
/// Samples where f overflows are dropped from the validation set.
inline FunctionPair pair_from_f(std::string label, ScalarFunction f) {
  std::vector<double> samples;
  for (double x : default_validation_samples()) {
    const double fx = f(x);
    if (x > 0.0 && !(fx > 0.0)) {
      throw DomainError("pair_from_f(" + label + "): f is not positive at x = " + std::to_string(x));
    }
    if (std::isfinite(fx)) samples.push_back(x);
  }
  FunctionPair p;
  p.label = std::move(label);
  p.first = f;
  p.second = [f](double x) { return x == 0.0 ? 0.0 : x / f(x); };
  p.validation_samples = std::move(samples);
  return p;
}

inline PairValidation validate_pair(const FunctionPair& p) {
  PairValidation v;
  for (double x : p.validation_samples) {
    const double a = p.first(x);
    const double b = p.second(x);
    if (!std::isfinite(a) || !std::isfinite(b)) {
      v.ok = false;
      v.worst_at = x;
      v.worst_residual = std::numeric_limits<double>::infinity();
      v.reason = "non-finite value at x = " + std::to_string(x);
      return v;
    }
    if (a < 0.0 || b < 0.0) {
      v.ok = false;
      v.worst_at = x;
      v.reason = "negative value at x = " + std::to_string(x);
    }
    const double residual = std::abs(a * b - x) / std::max(1.0, x);
    if (residual > v.worst_residual) {
      v.worst_residual = residual;
      v.worst_at = x;
    }
  }
  if (v.worst_residual > 1e-9) {
    v.ok = false;
    if (v.reason.empty()) v.reason = "product differs from x at x = " + std::to_string(v.worst_at);
  }
  return v;
}

namespace detail {

inline double parse_number(std::string_view text, std::string_view spec) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw UsageError("bad number '" + std::string(text) + "' in pair '" + std::string(spec) + "'");
  }
  return value;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace detail

/// Command-line pair syntax: pow:<r>, fdiv:exp, fdiv:affine:<a>:<b>.
inline FunctionPair parse_pair(std::string_view spec) {
  const auto parts = detail::split(spec, ':');
  if (parts.size() == 2 && parts[0] == "pow") return power_pair(detail::parse_number(parts[1], spec));
  if (parts.size() == 2 && parts[0] == "fdiv" && parts[1] == "exp") {
    return pair_from_f("fdiv:exp", [](double x) { return std::exp(x); });
  }
  if (parts.size() == 4 && parts[0] == "fdiv" && parts[1] == "affine") {
    const double a = detail::parse_number(parts[2], spec);
    const double b = detail::parse_number(parts[3], spec);
    if (a < 0.0 || b < 0.0 || (a == 0.0 && b == 0.0)) {
      throw UsageError("fdiv:affine needs a, b >= 0, not both zero");
    }
    return pair_from_f(std::string(spec), [a, b](double x) { return a + b * x; });
  }
  throw UsageError("unknown function pair '" + std::string(spec) +
                   "' (expected pow:<r>, fdiv:exp or fdiv:affine:<a>:<b>)");
}

}  // namespace opineq
