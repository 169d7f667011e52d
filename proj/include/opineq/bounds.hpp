#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "opineq/errors.hpp"
#include "opineq/function_pairs.hpp"
#include "opineq/matrix.hpp"
#include "opineq/minimize.hpp"
#include "opineq/numerical_radius.hpp"
#include "opineq/sampler.hpp"
#include "opineq/spectral.hpp"

namespace opineq {

enum class BoundId {
  horn,
  davidson_power,
  power_interp,
  fg_max,
  shi,
  main,
  geo_max,
  arbitrary,
  adjoint_geo_max,
  wdiff_lower,
  w_funcpair,
  w_reim_half,
  w_reim_sqrt2,
  w_classic,
  yamazaki,
  lemma_block,
  lemma_selfadjoint,
};

inline constexpr std::array<BoundId, 17> kAllBounds{
    BoundId::horn,         BoundId::davidson_power,  BoundId::power_interp, BoundId::fg_max,
    BoundId::shi,          BoundId::main,            BoundId::geo_max,      BoundId::arbitrary,
    BoundId::adjoint_geo_max, BoundId::wdiff_lower,  BoundId::w_funcpair,   BoundId::w_reim_half,
    BoundId::w_reim_sqrt2, BoundId::w_classic,       BoundId::yamazaki,     BoundId::lemma_block,
    BoundId::lemma_selfadjoint};

inline std::string_view to_string(BoundId id) {
  switch (id) {
    case BoundId::horn: return "horn";
    case BoundId::davidson_power: return "davidson_power";
    case BoundId::power_interp: return "power_interp";
    case BoundId::fg_max: return "fg_max";
    case BoundId::shi: return "shi";
    case BoundId::main: return "main";
    case BoundId::geo_max: return "geo_max";
    case BoundId::arbitrary: return "arbitrary";
    case BoundId::adjoint_geo_max: return "adjoint_geo_max";
    case BoundId::wdiff_lower: return "wdiff_lower";
    case BoundId::w_funcpair: return "w_funcpair";
    case BoundId::w_reim_half: return "w_reim_half";
    case BoundId::w_reim_sqrt2: return "w_reim_sqrt2";
    case BoundId::w_classic: return "w_classic";
    case BoundId::yamazaki: return "yamazaki";
    case BoundId::lemma_block: return "lemma_block";
    case BoundId::lemma_selfadjoint: return "lemma_selfadjoint";
  }
  return "?";
}

inline BoundId parse_bound_id(std::string_view name) {
  for (BoundId id : kAllBounds)
    if (to_string(id) == name) return id;
  throw ConfigError("unknown bound '" + std::string(name) + "'");
}

/// Number of matrix operands the bound takes.
inline std::size_t bound_arity(BoundId id) {
  switch (id) {
    case BoundId::w_funcpair:
    case BoundId::w_reim_half:
    case BoundId::w_reim_sqrt2:
    case BoundId::w_classic:
    case BoundId::yamazaki: return 1;
    case BoundId::lemma_block: return 4;
    default: return 2;
  }
}

/// Operand class under which the bound is claimed.
inline SampleClass hypothesis_class(BoundId id) {
  switch (id) {
    case BoundId::horn:
    case BoundId::shi:
    case BoundId::main: return SampleClass::normal;
    case BoundId::davidson_power: return SampleClass::positive;
    case BoundId::geo_max: return SampleClass::invertible_normal;
    case BoundId::lemma_selfadjoint: return SampleClass::selfadjoint_product_pair;
    default: return SampleClass::ginibre;
  }
}

/// Whether the bound comes with a complete argument. The half coefficient in
/// the real/imaginary-part bound does not.
inline bool is_proof_backed(BoundId id) { return id != BoundId::w_reim_half; }

enum class Verdict { verified, violated, inconclusive };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::verified: return "verified";
    case Verdict::violated: return "violated";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

inline Verdict parse_verdict(std::string_view s) {
  if (s == "verified") return Verdict::verified;
  if (s == "violated") return Verdict::violated;
  if (s == "inconclusive") return Verdict::inconclusive;
  throw ParseError("unknown verdict '" + std::string(s) + "'");
}

struct BoundReport {
  std::string bound_id;
  bool hypothesis_ok = true;
  std::map<std::string, double> hypothesis_residuals;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs for upper bounds, lhs - rhs for lower bounds
  Verdict verdict = Verdict::verified;
  std::map<std::string, double> details;
  std::map<std::string, std::string> parameters;
  double tolerance_used = 0.0;
  std::string note;
};

struct EvalOptions {
  bool strict = false;            // throw HypothesisViolated instead of flagging
  double tolerance_scale = 1e-7;  // tau = scale * max(1, sum of operand norms)
  int grid_size = kDefaultRadiusGrid;
};

/// Bound parameters; unset fields take per-bound defaults.
struct BoundParams {
  std::optional<double> r;
  std::optional<double> s;
  std::optional<double> t;
  std::optional<FunctionPair> pair_f;
  std::optional<FunctionPair> pair_g;
};

namespace detail {

inline std::string format_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

inline ComplexMatrix power_of(const PsdSpectrum& p, double e) {
  return p.apply([e](double x) { return kernel_power(x, e); });
}

inline double norm_of_product(const ComplexMatrix& a, const ComplexMatrix& b) { return operator_norm(a * b); }

inline double normal_residual(const ComplexMatrix& a) {
  const ComplexMatrix adj = a.adjoint();
  return (a * adj - adj * a).frobenius_norm();
}

inline void require_unit_interval(double v, const char* name, const char* where) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw DomainError(std::string(where) + ": " + name + " must lie in [0, 1], got " + format_double(v));
  }
}

inline void require_same_square(const ComplexMatrix& s, const ComplexMatrix& t, const char* where) {
  require_square(s, where);
  require_square(t, where);
  if (s.rows() != t.rows()) {
    throw DimensionMismatch(std::string(where) + ": operands " + s.shape() + " and " + t.shape());
  }
}

/// An operand with its absolute values precomputed.
struct Operand {
  const ComplexMatrix& m;
  AbsoluteValues abs;
  double norm;

  explicit Operand(const ComplexMatrix& a) : m(a), abs(AbsoluteValues::of(a)), norm(abs.norm) {}

  bool invertible() const {
    const double smin = abs.abs.min_value();
    return norm > 0.0 && smin >= 1e-10 * norm;
  }
};

class ReportBuilder {
 public:
  ReportBuilder(BoundId id, const EvalOptions& opts) : opts_(opts) { report_.bound_id = std::string(to_string(id)); }

  BoundReport& report() { return report_; }

  void param(const std::string& name, double v) { report_.parameters[name] = format_double(v); }
  void param(const std::string& name, const std::string& v) { report_.parameters[name] = v; }
  void detail(const std::string& name, double v) { report_.details[name] = v; }

  void hypothesis(bool ok, const std::string& name, double residual, const std::string& what) {
    report_.hypothesis_residuals[name] = residual;
    if (ok) return;
    if (opts_.strict) throw HypothesisViolated(report_.bound_id + ": " + what);
    report_.hypothesis_ok = false;
    if (!report_.note.empty()) report_.note += "; ";
    report_.note += "hypothesis not met: " + what;
  }

  void require_normal(const ComplexMatrix& a, double norm, const std::string& name) {
    const double res = normal_residual(a);
    hypothesis(res <= 1e-10 * std::max(1.0, norm * norm), "normal_residual_" + name, res, name + " is not normal");
  }

  void require_positive(const ComplexMatrix& a, double norm, const std::string& name) {
    const double herm = hermitian_defect(a);
    const bool herm_ok = herm <= 1e-10 * std::max(1.0, norm);
    hypothesis(herm_ok, "hermitian_residual_" + name, herm, name + " is not Hermitian");
    const double lo = extreme_eigenvalues(real_imag_parts(a).real).smallest;
    hypothesis(lo >= -1e-10 * norm, "min_eigenvalue_" + name, lo, name + " is not positive semidefinite");
  }

  void require_invertible(const Operand& a, const std::string& name) {
    const double smin = a.abs.abs.min_value();
    if (!a.invertible()) {
      throw DomainError(report_.bound_id + ": function pair needs " + name +
                        " invertible (sigma_min = " + format_double(smin) + ")");
    }
  }

  /// Fixes lhs, rhs and the verdict. `favorable` and `unfavorable` are the
  /// slack at the two ends of the enclosures of any numerical radii involved;
  /// both equal the slack when none are.
  BoundReport finish(double lhs, double rhs, bool lower_bound, double favorable, double unfavorable,
                     double norm_scale) {
    report_.lhs = lhs;
    report_.rhs = rhs;
    report_.slack = lower_bound ? lhs - rhs : rhs - lhs;
    const double tau = opts_.tolerance_scale * std::max(1.0, norm_scale);
    report_.tolerance_used = tau + std::max(0.0, favorable - unfavorable);
    if (favorable < -report_.tolerance_used) {
      report_.verdict = Verdict::violated;
    } else if (unfavorable < -report_.tolerance_used) {
      report_.verdict = Verdict::inconclusive;
      if (!report_.note.empty()) report_.note += "; ";
      report_.note += "numerical radius enclosure straddles the bound";
    } else {
      report_.verdict = Verdict::verified;
    }
    if (report_.verdict == Verdict::violated && !report_.hypothesis_ok) report_.verdict = Verdict::inconclusive;
    return report_;
  }

  BoundReport finish_upper(double lhs, double rhs, double norm_scale) {
    return finish(lhs, rhs, false, rhs - lhs, rhs - lhs, norm_scale);
  }

 private:
  BoundReport report_;
  EvalOptions opts_;
};

/// Largest |f(x) g(x) - x| / max(1, x) over the given spectra.
inline double pair_residual_on(const FunctionPair& p, std::initializer_list<const PsdSpectrum*> spectra) {
  double worst = 0.0;
  for (const PsdSpectrum* sp : spectra) {
    for (double x : sp->values) {
      const double a = p.first(x);
      const double b = p.second(x);
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      worst = std::max(worst, std::abs(a * b - x) / std::max(1.0, x));
    }
  }
  return worst;
}

inline void require_pair_on(const FunctionPair& p, std::initializer_list<const PsdSpectrum*> spectra,
                            ReportBuilder& b, const std::string& name) {
  const double res = pair_residual_on(p, spectra);
  b.report().hypothesis_residuals["pair_residual_" + name] = res;
  if (res > 1e-9) {
    throw DomainError(b.report().bound_id + ": pair " + p.label + " does not multiply to x on the spectrum (residual " +
                      format_double(res) + ")");
  }
}

inline void require_pair_operands(const FunctionPair& p, std::initializer_list<const Operand*> ops, ReportBuilder& b,
                                  std::initializer_list<const char*> names) {
  if (!p.requires_invertible) return;
  auto name = names.begin();
  for (const Operand* op : ops) b.require_invertible(*op, *name++);
}

/// ||A^r B^{1-s}||^{1/2} ||A^{1-r} B^s||^{1/2} for PSD A, B.
inline double geometric_term(const PsdSpectrum& a, const PsdSpectrum& b, double r, double s) {
  const double first = norm_of_product(power_of(a, r), power_of(b, 1.0 - s));
  const double second = norm_of_product(power_of(a, 1.0 - r), power_of(b, s));
  return std::sqrt(first) * std::sqrt(second);
}

}  // namespace detail

/// ||S + T|| <= || |S| + |T| || for normal S, T.
inline BoundReport eval_horn(const ComplexMatrix& s, const ComplexMatrix& t, const EvalOptions& opts = {}) {
  detail::require_same_square(s, t, "horn");
  detail::ReportBuilder b(BoundId::horn, opts);
  const detail::Operand S(s), T(t);
  b.require_normal(s, S.norm, "S");
  b.require_normal(t, T.norm, "T");
  const double lhs = operator_norm(s + t);
  const double rhs = operator_norm(S.abs.abs.matrix() + T.abs.abs.matrix());
  return b.finish_upper(lhs, rhs, S.norm + T.norm);
}

/// ||S + T|| <= max(||S||, ||T||) + ||ST||^{1/2} for positive S, T.
inline BoundReport eval_davidson_power(const ComplexMatrix& s, const ComplexMatrix& t, const EvalOptions& opts = {}) {
  detail::require_same_square(s, t, "davidson_power");
  detail::ReportBuilder b(BoundId::davidson_power, opts);
  const double ns = operator_norm(s), nt = operator_norm(t);
  b.require_positive(s, ns, "S");
  b.require_positive(t, nt, "T");
  const double product = operator_norm(s * t);
  b.detail("product_norm", product);
  const double lhs = operator_norm(s + t);
  const double rhs = std::max(ns, nt) + std::sqrt(product);
  return b.finish_upper(lhs, rhs, ns + nt);
}

/// ||S + T|| <= max(||S||, ||T||) + (|| |S|^t |T|^{1-t} || + || |S*|^{1-t} |T*|^t ||) / 2.
inline BoundReport eval_power_interp(const ComplexMatrix& s, const ComplexMatrix& t, double exponent,
                                     const EvalOptions& opts = {}) {
  detail::require_same_square(s, t, "power_interp");
  detail::require_unit_interval(exponent, "t", "power_interp");
  detail::ReportBuilder b(BoundId::power_interp, opts);
  b.param("t", exponent);
  const detail::Operand S(s), T(t);
  const double plain = detail::norm_of_product(detail::power_of(S.abs.abs, exponent),
                                               detail::power_of(T.abs.abs, 1.0 - exponent));
  const double adjoint = detail::norm_of_product(detail::power_of(S.abs.abs_adjoint, 1.0 - exponent),
                                                 detail::power_of(T.abs.abs_adjoint, exponent));
  b.detail("term_plain", plain);
  b.detail("term_adjoint", adjoint);
  b.detail("half_sum", 0.5 * (plain + adjoint));
  const double lhs = operator_norm(s + t);
  const double rhs = std::max(S.norm, T.norm) + 0.5 * (plain + adjoint);
  return b.finish_upper(lhs, rhs, S.norm + T.norm);
}

/// ||S + T|| <= max(||S||, ||T||) + (||f(|S|) g(|T|)|| + ||f(|S*|) g(|T*|)||) / 2 with f g = x.
inline BoundReport eval_fg_max(const ComplexMatrix& s, const ComplexMatrix& t, const FunctionPair& fg,
                               const EvalOptions& opts = {}) {
  detail::require_same_square(s, t, "fg_max");
  detail::ReportBuilder b(BoundId::fg_max, opts);
  b.param("pair", fg.label);
  const detail::Operand S(s), T(t);
  detail::require_pair_on(fg, {&S.abs.abs, &T.abs.abs, &S.abs.abs_adjoint, &T.abs.abs_adjoint}, b, "fg");
  detail::require_pair_operands(fg, {&S, &T}, b, {"S", "T"});
  const double plain = detail::norm_of_product(S.abs.abs.apply(fg.first), T.abs.abs.apply(fg.second));
  const double adjoint =
      detail::norm_of_product(S.abs.abs_adjoint.apply(fg.first), T.abs.abs_adjoint.apply(fg.second));
  b.detail("term_plain", plain);
  b.detail("term_adjoint", adjoint);
  const double lhs = operator_norm(s + t);
  const double rhs = std::max(S.norm, T.norm) + 0.5 * (plain + adjoint);
  return b.finish_upper(lhs, rhs, S.norm + T.norm);
}

namespace detail {

// (a + b) / 2 + sqrt((a - b)^2 + m^2) / 2
inline double half_sum_plus_root(double a, double b, double m) {
  return 0.5 * (a + b) + 0.5 * std::sqrt((a - b) * (a - b) + m * m);
}

}  // namespace detail

/// ||S + T|| <= (||S|| + ||T||)/2 + sqrt((||S|| - ||T||)^2 + ||t^{-1}|S|^r|T|^s + t|S|^{1-r}|T|^{1-s}||^2)/2
/// for normal S, T.
inline BoundReport eval_shi(const ComplexMatrix& s, const ComplexMatrix& t, double r, double q, double scale,
                            const EvalOptions& opts = {}) {
  detail::require_same_square(s, t, "shi");
  detail::require_unit_interval(r, "r", "shi");
  detail::require_unit_interval(q, "s", "shi");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("shi: t must be positive");
  detail::ReportBuilder b(BoundId::shi, opts);
  b.param("r", r);
  b.param("s", q);
  b.param("t", scale);
  const detail::Operand S(s), T(t);
  b.require_normal(s, S.norm, "S");
  b.require_normal(t, T.norm, "T");
  const ComplexMatrix a = detail::power_of(S.abs.abs, r) * detail::power_of(T.abs.abs, q);
  const ComplexMatrix c = detail::power_of(S.abs.abs, 1.0 - r) * detail::power_of(T.abs.abs, 1.0 - q);
  ComplexMatrix sum = (1.0 / scale) * a;
  sum += scale * c;
  const double inner = operator_norm(sum);
  b.detail("inner_norm", inner);
  const double lhs = operator_norm(s + t);
  const double rhs = detail::half_sum_plus_root(S.norm, T.norm, inner);
  return b.finish_upper(lhs, rhs, S.norm + T.norm);
}

/// Normal S, T and pairs (f1, f2), (g1, g2):
/// ||S + T|| <= (||S|| + ||T||)/2 + min_t sqrt((||S|| - ||T||)^2 + ||t^{-1} f1(|S|)g1(|T|) + t f2(|S|)g2(|T|)||^2)/2.
inline BoundReport eval_main(const ComplexMatrix& s, const ComplexMatrix& t, const FunctionPair& pf,
                             const FunctionPair& pg, const EvalOptions& opts = {}) {
  detail::require_same_square(s, t, "main");
  detail::ReportBuilder b(BoundId::main, opts);
  b.param("pair_f", pf.label);
  b.param("pair_g", pg.label);
  const detail::Operand S(s), T(t);
  b.require_normal(s, S.norm, "S");
  b.require_normal(t, T.norm, "T");
  detail::require_pair_on(pf, {&S.abs.abs}, b, "f");
  detail::require_pair_on(pg, {&T.abs.abs}, b, "g");
  detail::require_pair_operands(pf, {&S}, b, {"S"});
  detail::require_pair_operands(pg, {&T}, b, {"T"});
  const ComplexMatrix a = S.abs.abs.apply(pf.first) * T.abs.abs.apply(pg.first);
  const ComplexMatrix c = S.abs.abs.apply(pf.second) * T.abs.abs.apply(pg.second);
  const MinimizeResult m = minimize_scaled_norm(a, c);
  const double na = operator_norm(a), nc = operator_norm(c);
  b.detail("t_star", m.t_star);
  b.detail("attained", m.attained ? 1.0 : 0.0);
  b.detail("scaled_norm", m.value);
  b.detail("norm_first_term", na);
  b.detail("norm_second_term", nc);
  b.detail("rhs_geometric", detail::half_sum_plus_root(S.norm, T.norm, 2.0 * std::sqrt(na * nc)));
  const double lhs = operator_norm(s + t);
  const double rhs = detail::half_sum_plus_root(S.norm, T.norm, m.value);
  return b.finish_upper(lhs, rhs, S.norm + T.norm);
}

/// Normal S, T: ||S + T|| <= max(||S||, ||T||) + ||f(|S|)g(|T|)||^{1/2} || |S|f(|S|)^{-1} |T|g(|T|)^{-1} ||^{1/2},
/// with f, g the first members of the pairs and x/f, x/g the second.
inline BoundReport eval_geo_max(const ComplexMatrix& s, const ComplexMatrix& t, const FunctionPair& pf,
                                const FunctionPair& pg, const EvalOptions& opts = {}) {
  detail::require_same_square(s, t, "geo_max");
  detail::ReportBuilder b(BoundId::geo_max, opts);
  b.param("pair_f", pf.label);
  b.param("pair_g", pg.label);
  const detail::Operand S(s), T(t);
  b.require_normal(s, S.norm, "S");
  b.require_normal(t, T.norm, "T");
  detail::require_pair_on(pf, {&S.abs.abs}, b, "f");
  detail::require_pair_on(pg, {&T.abs.abs}, b, "g");
  detail::require_pair_operands(pf, {&S}, b, {"S"});
  detail::require_pair_operands(pg, {&T}, b, {"T"});
  const double first = detail::norm_of_product(S.abs.abs.apply(pf.first), T.abs.abs.apply(pg.first));
  const double second = detail::norm_of_product(S.abs.abs.apply(pf.second), T.abs.abs.apply(pg.second));
  b.detail("sqrt_first", std::sqrt(first));
  b.detail("sqrt_second", std::sqrt(second));
  const double geo = std::sqrt(first) * std::sqrt(second);
  b.detail("geometric_term", geo);
  const double lhs = operator_norm(s + t);
  const double rhs = std::max(S.norm, T.norm) + geo;
  return b.finish_upper(lhs, rhs, S.norm + T.norm);
}

/// Power case of eval_geo_max: f = x^r, g = x^{1-s}.
inline BoundReport eval_geo_max_power(const ComplexMatrix& s, const ComplexMatrix& t, double r, double q,
                                      const EvalOptions& opts = {}) {
  BoundReport rep = eval_geo_max(s, t, power_pair(r), power_pair(1.0 - q), opts);
  rep.parameters["r"] = detail::format_double(r);
  rep.parameters["s"] = detail::format_double(q);
  return rep;
}

/// Arbitrary S, T:
/// ||S + T|| <= (||S|| + ||T||)/2 + sqrt((||S|| - ||T||)^2 + max(alpha, beta))/2 with
/// alpha = ||t^{-1} f1(|S*|)g1(|T*|) + t f2(|S*|)g2(|T*|)||^2 and beta the same with |S|, |T|.
/// The headline uses the t minimizing max(alpha, beta); a log grid t = 2^k, |k| <= 4,
/// is checked too.
inline BoundReport eval_arbitrary(const ComplexMatrix& s, const ComplexMatrix& t, const FunctionPair& pf,
                                  const FunctionPair& pg, const EvalOptions& opts = {}) {
  detail::require_same_square(s, t, "arbitrary");
  detail::ReportBuilder b(BoundId::arbitrary, opts);
  b.param("pair_f", pf.label);
  b.param("pair_g", pg.label);
  const detail::Operand S(s), T(t);
  detail::require_pair_on(pf, {&S.abs.abs, &S.abs.abs_adjoint}, b, "f");
  detail::require_pair_on(pg, {&T.abs.abs, &T.abs.abs_adjoint}, b, "g");
  detail::require_pair_operands(pf, {&S}, b, {"S"});
  detail::require_pair_operands(pg, {&T}, b, {"T"});
  const ComplexMatrix a_adj = S.abs.abs_adjoint.apply(pf.first) * T.abs.abs_adjoint.apply(pg.first);
  const ComplexMatrix c_adj = S.abs.abs_adjoint.apply(pf.second) * T.abs.abs_adjoint.apply(pg.second);
  const ComplexMatrix a_pl = S.abs.abs.apply(pf.first) * T.abs.abs.apply(pg.first);
  const ComplexMatrix c_pl = S.abs.abs.apply(pf.second) * T.abs.abs.apply(pg.second);
  const std::size_t n = s.rows();
  const ComplexMatrix zero(n, n);
  // max of the two norms is the norm of the block diagonal.
  const MinimizeResult m = minimize_scaled_norm(block_matrix(a_adj, zero, zero, a_pl), block_matrix(c_adj, zero, zero, c_pl));

  auto alpha_beta = [&](double scale) {
    ComplexMatrix x = (1.0 / scale) * a_adj;
    x += scale * c_adj;
    ComplexMatrix y = (1.0 / scale) * a_pl;
    y += scale * c_pl;
    const double na = operator_norm(x), nb = operator_norm(y);
    return std::pair{na * na, nb * nb};
  };

  const double lhs = operator_norm(s + t);
  double best_t = m.t_star;
  auto [alpha, beta] = alpha_beta(best_t);
  double rhs = detail::half_sum_plus_root(S.norm, T.norm, std::sqrt(std::max(alpha, beta)));
  double grid_worst = std::numeric_limits<double>::infinity();
  for (int k = -4; k <= 4; ++k) {
    const double scale = std::ldexp(1.0, k);
    const auto [ga, gb] = alpha_beta(scale);
    const double grid_rhs = detail::half_sum_plus_root(S.norm, T.norm, std::sqrt(std::max(ga, gb)));
    grid_worst = std::min(grid_worst, grid_rhs - lhs);
    if (grid_rhs < rhs) {
      rhs = grid_rhs;
      best_t = scale;
      alpha = ga;
      beta = gb;
    }
  }
  b.detail("t_star", best_t);
  b.detail("alpha", alpha);
  b.detail("beta", beta);
  b.detail("attained", m.attained ? 1.0 : 0.0);
  b.detail("grid_min_slack", grid_worst);
  return b.finish_upper(lhs, rhs, S.norm + T.norm);
}

/// ||S + T|| <= max(||S||, ||T||) + max(adjoint term, plain term), where the plain term is
/// || |S|^r |T|^{1-s} ||^{1/2} || |S|^{1-r} |T|^s ||^{1/2} and the adjoint term uses |S*|, |T*|.
inline BoundReport eval_adjoint_geo_max(const ComplexMatrix& s, const ComplexMatrix& t, double r, double q,
                                        const EvalOptions& opts = {}) {
  detail::require_same_square(s, t, "adjoint_geo_max");
  detail::require_unit_interval(r, "r", "adjoint_geo_max");
  detail::require_unit_interval(q, "s", "adjoint_geo_max");
  detail::ReportBuilder b(BoundId::adjoint_geo_max, opts);
  b.param("r", r);
  b.param("s", q);
  const detail::Operand S(s), T(t);
  const double adjoint = detail::geometric_term(S.abs.abs_adjoint, T.abs.abs_adjoint, r, q);
  const double plain = detail::geometric_term(S.abs.abs, T.abs.abs, r, q);
  b.detail("adjoint_term", adjoint);
  b.detail("plain_term", plain);
  const double lhs = operator_norm(s + t);
  const double rhs = std::max(S.norm, T.norm) + std::max(adjoint, plain);
  return b.finish_upper(lhs, rhs, S.norm + T.norm);
}

/// Lower bound w(S - T) >= max(2w(S), 2w(T)) - max(||S||, ||T||) - max(adjoint term, plain term).
inline BoundReport eval_wdiff_lower(const ComplexMatrix& s, const ComplexMatrix& t, double r, double q,
                                    const EvalOptions& opts = {}) {
  detail::require_same_square(s, t, "wdiff_lower");
  detail::require_unit_interval(r, "r", "wdiff_lower");
  detail::require_unit_interval(q, "s", "wdiff_lower");
  detail::ReportBuilder b(BoundId::wdiff_lower, opts);
  b.param("r", r);
  b.param("s", q);
  const detail::Operand S(s), T(t);
  const double adjoint = detail::geometric_term(S.abs.abs_adjoint, T.abs.abs_adjoint, r, q);
  const double plain = detail::geometric_term(S.abs.abs, T.abs.abs, r, q);
  const double geo = std::max(adjoint, plain);
  const double big = std::max(S.norm, T.norm);
  const RadiusEnclosure wd = numerical_radius(s - t, opts.grid_size);
  const RadiusEnclosure ws = numerical_radius(s, opts.grid_size);
  const RadiusEnclosure wt = numerical_radius(t, opts.grid_size);
  auto rhs_with = [&](double a, double c) { return 2.0 * std::max(a, c) - big - geo; };
  const double rhs = rhs_with(ws.estimate, wt.estimate);
  const double favorable = wd.certified_upper - rhs_with(ws.certified_lower, wt.certified_lower);
  const double unfavorable = wd.certified_lower - rhs_with(ws.certified_upper, wt.certified_upper);
  b.detail("w_S", ws.estimate);
  b.detail("w_T", wt.estimate);
  b.detail("w_difference_upper", wd.certified_upper);
  b.detail("adjoint_term", adjoint);
  b.detail("plain_term", plain);

  const bool normal_pair = detail::normal_residual(s) <= 1e-10 * std::max(1.0, S.norm * S.norm) &&
                           detail::normal_residual(t) <= 1e-10 * std::max(1.0, T.norm * T.norm);
  if (normal_pair) {
    b.detail("normal_case_lhs", operator_norm(s - t));
    b.detail("normal_case_rhs", big - plain);
  }
  auto positive = [](const ComplexMatrix& a, double norm) {
    return hermitian_defect(a) <= 1e-10 * std::max(1.0, norm) &&
           extreme_eigenvalues(real_imag_parts(a).real).smallest >= -1e-10 * norm;
  };
  if (positive(s, S.norm) && positive(t, T.norm)) {
    const double root_product =
        detail::norm_of_product(detail::power_of(S.abs.abs, 0.5), detail::power_of(T.abs.abs, 0.5));
    b.detail("sqrt_product_norm", root_product);
    b.detail("positive_case_lhs", operator_norm(s - t));
    b.detail("positive_case_rhs", big - root_product);
  }
  return b.finish(wd.estimate, rhs, true, favorable, unfavorable, S.norm + T.norm);
}

namespace detail {

inline BoundReport finish_radius_upper(ReportBuilder& b, const RadiusEnclosure& w, double rhs, double norm) {
  b.detail("w_estimate", w.estimate);
  b.detail("w_certified_upper", w.certified_upper);
  return b.finish(w.certified_lower, rhs, false, rhs - w.certified_lower, rhs - w.certified_upper, norm);
}

}  // namespace detail

/// w(S) <= ||S||/2 + max(alpha, beta)/4 with
/// alpha = ||f1(|S*|)g1(|S|) + f2(|S*|)g2(|S|)|| and beta the same with |S| and |S*| exchanged.
inline BoundReport eval_w_funcpair(const ComplexMatrix& s, const FunctionPair& pf, const FunctionPair& pg,
                                   const EvalOptions& opts = {}) {
  require_square(s, "w_funcpair");
  detail::ReportBuilder b(BoundId::w_funcpair, opts);
  b.param("pair_f", pf.label);
  b.param("pair_g", pg.label);
  const detail::Operand S(s);
  detail::require_pair_on(pf, {&S.abs.abs, &S.abs.abs_adjoint}, b, "f");
  detail::require_pair_on(pg, {&S.abs.abs, &S.abs.abs_adjoint}, b, "g");
  detail::require_pair_operands(pf, {&S}, b, {"S"});
  detail::require_pair_operands(pg, {&S}, b, {"S"});
  const PsdSpectrum& abs = S.abs.abs;
  const PsdSpectrum& adj = S.abs.abs_adjoint;
  auto sum_norm = [](const ComplexMatrix& a1, const ComplexMatrix& b1, const ComplexMatrix& a2,
                     const ComplexMatrix& b2) {
    ComplexMatrix x = a1 * b1;
    x += a2 * b2;
    return operator_norm(x);
  };
  const ComplexMatrix f1_adj = adj.apply(pf.first), f2_adj = adj.apply(pf.second);
  const ComplexMatrix f1_abs = abs.apply(pf.first), f2_abs = abs.apply(pf.second);
  const double alpha = sum_norm(f1_adj, abs.apply(pg.first), f2_adj, abs.apply(pg.second));
  const double beta = sum_norm(f1_abs, adj.apply(pg.first), f2_abs, adj.apply(pg.second));
  b.detail("alpha", alpha);
  b.detail("beta", beta);
  // g = swapped f: the single-pair form.
  b.detail("rhs_swapped_pair", 0.5 * S.norm + 0.25 * sum_norm(f1_adj, f2_abs, f2_adj, f1_abs));
  const double rhs = 0.5 * S.norm + 0.25 * std::max(alpha, beta);
  return detail::finish_radius_upper(b, numerical_radius(s, opts.grid_size), rhs, S.norm);
}

enum class ReimCoefficient { half, sqrt2_over_2 };

/// w(S) <= max(||Re S||, ||Im S||) + c || |Re S|^{1/2} |Im S|^{1/2} ||.
inline BoundReport eval_w_reim(const ComplexMatrix& s, ReimCoefficient coef, const EvalOptions& opts = {}) {
  require_square(s, "w_reim");
  detail::ReportBuilder b(coef == ReimCoefficient::half ? BoundId::w_reim_half : BoundId::w_reim_sqrt2, opts);
  const double c = coef == ReimCoefficient::half ? 0.5 : 0.5 * std::numbers::sqrt2;
  b.param("coefficient", c);
  const CartesianParts parts = real_imag_parts(s);
  const AbsoluteValues re = AbsoluteValues::of(parts.real);
  const AbsoluteValues im = AbsoluteValues::of(parts.imag);
  const double cross = detail::norm_of_product(detail::power_of(re.abs, 0.5), detail::power_of(im.abs, 0.5));
  b.detail("norm_real", re.norm);
  b.detail("norm_imag", im.norm);
  b.detail("cross_term", cross);
  const double rhs = std::max(re.norm, im.norm) + c * cross;
  const double norm = operator_norm(s);
  return detail::finish_radius_upper(b, numerical_radius(s, opts.grid_size), rhs, norm);
}

/// w(S) <= (||S|| + ||S^2||^{1/2}) / 2.
inline BoundReport eval_w_classic(const ComplexMatrix& s, const EvalOptions& opts = {}) {
  require_square(s, "w_classic");
  detail::ReportBuilder b(BoundId::w_classic, opts);
  const double norm = operator_norm(s);
  const double square = operator_norm(s * s);
  b.detail("square_norm", square);
  const double rhs = 0.5 * (norm + std::sqrt(square));
  return detail::finish_radius_upper(b, numerical_radius(s, opts.grid_size), rhs, norm);
}

/// w(S) <= (||S|| + w(|S|^t U |S|^{1-t})) / 2.
inline BoundReport eval_yamazaki(const ComplexMatrix& s, double t, const EvalOptions& opts = {}) {
  require_square(s, "yamazaki");
  detail::require_unit_interval(t, "t", "yamazaki");
  detail::ReportBuilder b(BoundId::yamazaki, opts);
  b.param("t", t);
  const double norm = operator_norm(s);
  const RadiusEnclosure w = numerical_radius(s, opts.grid_size);
  const RadiusEnclosure wt = numerical_radius(aluthge_generalized(s, t), opts.grid_size);
  b.detail("w_estimate", w.estimate);
  b.detail("w_certified_upper", w.certified_upper);
  b.detail("w_transform", wt.estimate);
  const double rhs = 0.5 * (norm + wt.estimate);
  const double favorable = 0.5 * (norm + wt.certified_upper) - w.certified_lower;
  const double unfavorable = 0.5 * (norm + wt.certified_lower) - w.certified_upper;
  return b.finish(w.estimate, rhs, false, favorable, unfavorable, norm);
}

/// ||[[S, T], [X, Y]]|| <= ||[[||S||, ||T||], [||X||, ||Y||]]||.
inline BoundReport check_block_norm_lemma(const ComplexMatrix& s, const ComplexMatrix& t, const ComplexMatrix& x,
                                          const ComplexMatrix& y, const EvalOptions& opts = {}) {
  const ComplexMatrix block = block_matrix(s, t, x, y);
  detail::ReportBuilder b(BoundId::lemma_block, opts);
  const double ns = operator_norm(s), nt = operator_norm(t), nx = operator_norm(x), ny = operator_norm(y);
  const ComplexMatrix scalars{{ns, nt}, {nx, ny}};
  const double rhs = svd(scalars).sigmas.front();
  const double lhs = operator_norm(block);
  return b.finish_upper(lhs, rhs, ns + nt + nx + ny);
}

/// ||ST|| <= ||Re(TS)|| when ST is Hermitian.
inline BoundReport check_selfadjoint_product_lemma(const ComplexMatrix& s, const ComplexMatrix& t,
                                                   const EvalOptions& opts = {}) {
  detail::require_same_square(s, t, "lemma_selfadjoint");
  detail::ReportBuilder b(BoundId::lemma_selfadjoint, opts);
  const ComplexMatrix st = s * t;
  const double lhs = operator_norm(st);
  const double defect = hermitian_defect(st);
  b.hypothesis(defect <= 1e-8 * lhs, "product_hermitian_residual", defect, "ST is not Hermitian");
  const double rhs = operator_norm(real_imag_parts(t * s).real);
  return b.finish_upper(lhs, rhs, operator_norm(s) + operator_norm(t));
}

namespace detail {

inline FunctionPair pair_or(const std::optional<FunctionPair>& p, double exponent) {
  return p ? *p : power_pair(exponent);
}

}  // namespace detail

/// Parameters filled in with the bound's defaults.
inline BoundParams resolve_params(BoundId id, const BoundParams& in) {
  BoundParams p = in;
  switch (id) {
    case BoundId::power_interp: p.t = in.t.value_or(0.3); break;
    case BoundId::yamazaki: p.t = in.t.value_or(0.3); break;
    case BoundId::fg_max: p.pair_f = detail::pair_or(in.pair_f, in.r.value_or(0.7)); break;
    case BoundId::shi:
      p.r = in.r.value_or(0.5);
      p.s = in.s.value_or(0.5);
      p.t = in.t.value_or(1.0);
      break;
    case BoundId::main:
      p.pair_f = detail::pair_or(in.pair_f, in.r.value_or(0.5));
      p.pair_g = detail::pair_or(in.pair_g, in.s.value_or(0.5));
      break;
    case BoundId::geo_max:
      p.pair_f = detail::pair_or(in.pair_f, in.r.value_or(0.5));
      p.pair_g = detail::pair_or(in.pair_g, 1.0 - in.s.value_or(0.5));
      break;
    case BoundId::arbitrary:
      p.pair_f = detail::pair_or(in.pair_f, in.r.value_or(0.3));
      p.pair_g = detail::pair_or(in.pair_g, in.s.value_or(0.6));
      break;
    case BoundId::adjoint_geo_max:
      p.r = in.r.value_or(0.2);
      p.s = in.s.value_or(0.9);
      break;
    case BoundId::wdiff_lower:
      p.r = in.r.value_or(0.5);
      p.s = in.s.value_or(0.5);
      break;
    case BoundId::w_funcpair:
      p.pair_f = detail::pair_or(in.pair_f, in.r.value_or(0.25));
      p.pair_g = detail::pair_or(in.pair_g, in.s.value_or(0.25));
      break;
    default: break;
  }
  return p;
}

/// Evaluates any bound on operands given in the order of its statement.
inline BoundReport evaluate(BoundId id, std::span<const ComplexMatrix> ops, const BoundParams& params = {},
                            const EvalOptions& opts = {}) {
  const std::size_t need = bound_arity(id);
  if (ops.size() != need) {
    throw ConfigError(std::string(to_string(id)) + " takes " + std::to_string(need) + " operand(s), got " +
                      std::to_string(ops.size()));
  }
  const BoundParams p = resolve_params(id, params);
  switch (id) {
    case BoundId::horn: return eval_horn(ops[0], ops[1], opts);
    case BoundId::davidson_power: return eval_davidson_power(ops[0], ops[1], opts);
    case BoundId::power_interp: return eval_power_interp(ops[0], ops[1], *p.t, opts);
    case BoundId::fg_max: return eval_fg_max(ops[0], ops[1], *p.pair_f, opts);
    case BoundId::shi: return eval_shi(ops[0], ops[1], *p.r, *p.s, *p.t, opts);
    case BoundId::main: return eval_main(ops[0], ops[1], *p.pair_f, *p.pair_g, opts);
    case BoundId::geo_max: return eval_geo_max(ops[0], ops[1], *p.pair_f, *p.pair_g, opts);
    case BoundId::arbitrary: return eval_arbitrary(ops[0], ops[1], *p.pair_f, *p.pair_g, opts);
    case BoundId::adjoint_geo_max: return eval_adjoint_geo_max(ops[0], ops[1], *p.r, *p.s, opts);
    case BoundId::wdiff_lower: return eval_wdiff_lower(ops[0], ops[1], *p.r, *p.s, opts);
    case BoundId::w_funcpair: return eval_w_funcpair(ops[0], *p.pair_f, *p.pair_g, opts);
    case BoundId::w_reim_half: return eval_w_reim(ops[0], ReimCoefficient::half, opts);
    case BoundId::w_reim_sqrt2: return eval_w_reim(ops[0], ReimCoefficient::sqrt2_over_2, opts);
    case BoundId::w_classic: return eval_w_classic(ops[0], opts);
    case BoundId::yamazaki: return eval_yamazaki(ops[0], *p.t, opts);
    case BoundId::lemma_block: return check_block_norm_lemma(ops[0], ops[1], ops[2], ops[3], opts);
    case BoundId::lemma_selfadjoint: return check_selfadjoint_product_lemma(ops[0], ops[1], opts);
  }
  throw ConfigError("unhandled bound");
}

}  // namespace opineq
