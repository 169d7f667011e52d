#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "opineq/bounds.hpp"
#include "opineq/errors.hpp"
#include "opineq/random.hpp"
#include "opineq/sampler.hpp"

namespace opineq {

/// A bound together with the parameters it is run with.
struct BoundSetting {
  BoundId id = BoundId::horn;
  BoundParams params;
};

struct CampaignConfig {
  std::uint64_t master_seed = 0;
  std::vector<std::size_t> dims{2};
  int trials = 1;  // per bound per dimension
  std::vector<BoundSetting> bounds;
  double tolerance_scale = 1e-7;
  int grid_size = kDefaultRadiusGrid;
  double spectrum_scale = 1.0;
  unsigned workers = 0;  // 0 = automatic

  void validate() const {
    if (trials < 1) throw ConfigError("trials must be at least 1");
    if (bounds.empty()) throw ConfigError("no bounds selected");
    if (dims.empty()) throw ConfigError("no dimensions selected");
    for (std::size_t d : dims)
      if (d < 2 || d > 64) throw ConfigError("dimension must lie in [2, 64], got " + std::to_string(d));
    if (!(tolerance_scale > 0.0)) throw ConfigError("tolerance scale must be positive");
    if (grid_size < 8) throw ConfigError("grid size must be at least 8");
    if (!(spectrum_scale > 0.0)) throw ConfigError("spectrum scale must be positive");
  }

  EvalOptions eval_options() const { return {false, tolerance_scale, grid_size}; }
};

struct TrialRecord {
  std::string bound;
  std::size_t dim = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  Verdict verdict = Verdict::verified;
  bool retried = false;
  std::string reason;
  std::vector<ComplexMatrix> operands;  // kept for violations only
};

struct CampaignSummary {
  std::string bound;
  std::size_t dim = 0;
  int trials = 0;
  int violations = 0;
  int inconclusives = 0;
  double min_slack = 0.0;
  double mean_slack = 0.0;
  double q05 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
  int argmin_trial = -1;
  std::uint64_t argmin_seed = 0;
};

struct CampaignReport {
  std::uint64_t master_seed = 0;
  std::vector<CampaignSummary> summaries;
  std::vector<TrialRecord> trials;

  int violation_count() const {
    int n = 0;
    for (const auto& s : summaries) n += s.violations;
    return n;
  }

  std::vector<const TrialRecord*> violations() const {
    std::vector<const TrialRecord*> out;
    for (const auto& t : trials)
      if (t.verdict == Verdict::violated) out.push_back(&t);
    return out;
  }
};

/// Worker count: the requested number (or the hardware concurrency when 0),
/// capped by OPINEQ_THREADS when that is a positive integer.
inline unsigned resolve_workers(unsigned requested) {
  unsigned n = requested > 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("OPINEQ_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

/// Runs task(i) for i in [0, count) on up to `workers` threads. Results must be
/// written by index, so the outcome does not depend on scheduling.
inline void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& task) {
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace detail {

/// Linear-interpolation quantile of sorted data.
inline double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Evaluates, retrying once at a ten times finer grid when the radius
/// enclosure leaves the verdict open.
inline BoundReport evaluate_with_retry(const BoundSetting& b, std::span<const ComplexMatrix> ops,
                                       const EvalOptions& opts, bool& retried) {
  BoundReport rep = evaluate(b.id, ops, b.params, opts);
  retried = false;
  if (rep.verdict == Verdict::inconclusive && rep.hypothesis_ok) {
    EvalOptions fine = opts;
    fine.grid_size = opts.grid_size * 10;
    rep = evaluate(b.id, ops, b.params, fine);
    retried = true;
  }
  return rep;
}

inline TrialRecord run_trial(const BoundSetting& b, std::size_t dim, int trial, const CampaignConfig& cfg) {
  TrialRecord rec;
  rec.bound = std::string(to_string(b.id));
  rec.dim = dim;
  rec.trial = trial;
  rec.seed = derive_trial_seed(cfg.master_seed, rec.bound, dim, static_cast<std::uint64_t>(trial));
  const auto ops =
      sample_operands({hypothesis_class(b.id), dim, rec.seed, cfg.spectrum_scale}, bound_arity(b.id));
  try {
    const BoundReport rep = evaluate_with_retry(b, ops, cfg.eval_options(), rec.retried);
    rec.lhs = rep.lhs;
    rec.rhs = rep.rhs;
    rec.slack = rep.slack;
    rec.verdict = rep.verdict;
    rec.reason = rep.note;
  } catch (const Error& e) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rec.lhs = rec.rhs = rec.slack = nan;
    rec.verdict = Verdict::inconclusive;
    rec.reason = e.what();
  }
  if (rec.verdict == Verdict::violated) rec.operands = ops;
  return rec;
}

inline CampaignSummary summarize(const std::string& bound, std::size_t dim, std::span<const TrialRecord> rows) {
  CampaignSummary s;
  s.bound = bound;
  s.dim = dim;
  s.trials = static_cast<int>(rows.size());
  std::vector<double> slacks;
  double sum = 0.0;
  s.min_slack = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    if (r.verdict == Verdict::violated) ++s.violations;
    if (r.verdict == Verdict::inconclusive) ++s.inconclusives;
    if (!std::isfinite(r.slack)) continue;
    slacks.push_back(r.slack);
    sum += r.slack;
    if (r.slack < s.min_slack) {
      s.min_slack = r.slack;
      s.argmin_trial = r.trial;
      s.argmin_seed = r.seed;
    }
  }
  if (slacks.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.min_slack = s.mean_slack = s.q05 = s.q50 = s.q95 = nan;
    return s;
  }
  s.mean_slack = std::max(s.min_slack, sum / static_cast<double>(slacks.size()));
  std::sort(slacks.begin(), slacks.end());
  s.q05 = quantile(slacks, 0.05);
  s.q50 = quantile(slacks, 0.50);
  s.q95 = quantile(slacks, 0.95);
  return s;
}

}  // namespace detail

inline CampaignReport run_campaign(const CampaignConfig& cfg) {
  cfg.validate();
  struct Task {
    std::size_t bound;
    std::size_t dim;
    int trial;
  };
  std::vector<Task> tasks;
  for (std::size_t b = 0; b < cfg.bounds.size(); ++b)
    for (std::size_t d : cfg.dims)
      for (int k = 0; k < cfg.trials; ++k) tasks.push_back({b, d, k});

  CampaignReport report;
  report.master_seed = cfg.master_seed;
  report.trials.resize(tasks.size());
  parallel_for(tasks.size(), resolve_workers(cfg.workers), [&](std::size_t i) {
    const Task& t = tasks[i];
    report.trials[i] = detail::run_trial(cfg.bounds[t.bound], t.dim, t.trial, cfg);
  });

  const auto per_group = static_cast<std::size_t>(cfg.trials);
  for (std::size_t start = 0; start < report.trials.size(); start += per_group) {
    const auto& first = report.trials[start];
    report.summaries.push_back(detail::summarize(
        first.bound, first.dim, std::span<const TrialRecord>(report.trials).subspan(start, per_group)));
  }
  return report;
}

/// Re-evaluates a stored trial from its operands.
inline BoundReport replay_trial(const TrialRecord& rec, const BoundParams& params, const EvalOptions& opts) {
  if (rec.operands.empty()) throw ConfigError("trial record carries no operands");
  bool retried = false;
  return detail::evaluate_with_retry({parse_bound_id(rec.bound), params}, rec.operands, opts, retried);
}

// ---------------------------------------------------------------------------
// Tightness comparison on a shared operand stream.

/// Whether every matrix of class `sub` lies in class `super`.
inline bool class_within(SampleClass sub, SampleClass super) {
  if (sub == super || super == SampleClass::ginibre) return sub != SampleClass::selfadjoint_product_pair || sub == super;
  switch (super) {
    case SampleClass::normal:
      return sub == SampleClass::hermitian || sub == SampleClass::positive || sub == SampleClass::invertible_normal ||
             sub == SampleClass::unitary;
    case SampleClass::hermitian: return sub == SampleClass::positive;
    case SampleClass::invertible_normal: return sub == SampleClass::unitary;
    default: return false;
  }
}

struct CompareConfig {
  std::vector<BoundSetting> bounds;
  std::optional<SampleClass> cls;  // defaults to the narrowest hypothesis class among the bounds
  std::size_t dim = 3;
  int trials = 100;
  std::uint64_t seed = 0;
  double tolerance_scale = 1e-7;
  int grid_size = kDefaultRadiusGrid;
  unsigned workers = 0;
};

struct CompareRow {
  int trial = 0;
  std::vector<double> rhs;  // one per bound, in config order
  std::vector<double> lhs;
};

struct OrderingCheck {
  std::string name;
  int checked = 0;
  int violations = 0;
};

struct CompareReport {
  SampleClass cls = SampleClass::ginibre;
  std::vector<std::string> labels;
  std::vector<CompareRow> rows;
  std::vector<int> wins;             // trials where the bound had the smallest rhs
  std::vector<double> mean_gap;      // mean of rhs - smallest rhs
  std::vector<OrderingCheck> orderings;
};

inline SampleClass compare_class(const CompareConfig& cfg) {
  if (cfg.bounds.empty()) throw ConfigError("no bounds selected");
  std::vector<SampleClass> needs;
  for (const auto& b : cfg.bounds) needs.push_back(hypothesis_class(b.id));
  if (cfg.cls) {
    for (std::size_t i = 0; i < needs.size(); ++i) {
      if (!class_within(*cfg.cls, needs[i])) {
        throw ConfigError("class " + std::string(to_string(*cfg.cls)) + " does not meet the hypothesis of " +
                          std::string(to_string(cfg.bounds[i].id)) + " (" + std::string(to_string(needs[i])) + ")");
      }
    }
    return *cfg.cls;
  }
  SampleClass narrow = needs.front();
  for (SampleClass c : needs) {
    if (class_within(c, narrow)) {
      narrow = c;
    } else if (!class_within(narrow, c)) {
      throw ConfigError("bounds have conflicting hypothesis classes " + std::string(to_string(narrow)) + " and " +
                        std::string(to_string(c)));
    }
  }
  return narrow;
}

inline CompareReport compare_bounds(const CompareConfig& cfg) {
  CompareReport out;
  out.cls = compare_class(cfg);
  if (cfg.trials < 1) throw ConfigError("trials must be at least 1");
  if (cfg.dim < 2 || cfg.dim > 64) throw ConfigError("dimension must lie in [2, 64]");
  std::size_t arity = bound_arity(cfg.bounds.front().id);
  for (const auto& b : cfg.bounds) {
    out.labels.emplace_back(to_string(b.id));
    if (bound_arity(b.id) != arity) throw ConfigError("compared bounds must take the same number of operands");
  }
  const EvalOptions opts{false, cfg.tolerance_scale, cfg.grid_size};
  const std::size_t nb = cfg.bounds.size();
  const std::string stream = "compare:" + std::string(to_string(out.cls));

  struct TrialOut {
    CompareRow row;
    std::vector<BoundReport> reports;
  };
  std::vector<TrialOut> results(static_cast<std::size_t>(cfg.trials));
  parallel_for(results.size(), resolve_workers(cfg.workers), [&](std::size_t i) {
    const auto seed = derive_trial_seed(cfg.seed, stream, cfg.dim, i);
    const auto ops = sample_operands({out.cls, cfg.dim, seed}, arity);
    TrialOut& r = results[i];
    r.row.trial = static_cast<int>(i);
    for (const auto& b : cfg.bounds) {
      r.reports.push_back(evaluate(b.id, ops, b.params, opts));
      r.row.rhs.push_back(r.reports.back().rhs);
      r.row.lhs.push_back(r.reports.back().lhs);
    }
  });

  auto find = [&](BoundId id) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < nb; ++i)
      if (cfg.bounds[i].id == id) return i;
    return std::nullopt;
  };
  const auto main_i = find(BoundId::main), shi_i = find(BoundId::shi);
  const auto geo_i = find(BoundId::geo_max), interp_i = find(BoundId::power_interp);
  OrderingCheck r1{"main <= shi", 0, 0}, r2{"main <= geometric relaxation", 0, 0},
      r3{"geometric term <= arithmetic term", 0, 0};

  out.wins.assign(nb, 0);
  out.mean_gap.assign(nb, 0.0);
  for (auto& r : results) {
    const double best = *std::min_element(r.row.rhs.begin(), r.row.rhs.end());
    for (std::size_t i = 0; i < nb; ++i) {
      if (r.row.rhs[i] <= best + 1e-12 * std::max(1.0, std::abs(best))) ++out.wins[i];
      out.mean_gap[i] += r.row.rhs[i] - best;
    }
    if (main_i) {
      ++r2.checked;
      if (r.reports[*main_i].rhs > r.reports[*main_i].details.at("rhs_geometric") + 1e-9) ++r2.violations;
      if (shi_i) {
        ++r1.checked;
        if (r.reports[*main_i].rhs > r.reports[*shi_i].rhs + 1e-9) ++r1.violations;
      }
    }
    if (geo_i && interp_i) {
      ++r3.checked;
      if (r.reports[*geo_i].details.at("geometric_term") > r.reports[*interp_i].details.at("half_sum") + 1e-9)
        ++r3.violations;
    }
    out.rows.push_back(std::move(r.row));
  }
  for (auto& g : out.mean_gap) g /= static_cast<double>(cfg.trials);
  for (const auto& check : {r1, r2, r3})
    if (check.checked > 0) out.orderings.push_back(check);
  return out;
}

// ---------------------------------------------------------------------------
// Counterexample search.

struct SearchBudget {
  int restarts = 10;
  int perturb_steps = 100;
  std::size_t dim = 2;
};

struct SearchResult {
  std::string bound_id;
  double best_slack = std::numeric_limits<double>::infinity();
  std::vector<ComplexMatrix> best_operands;
  BoundReport best_report;
  int restarts = 0;
  long evaluations = 0;
  bool candidate_violation = false;  // best slack fell below the verdict tolerance
};

/// Random restarts followed by Gaussian hill descent on the slack. Classes
/// without a free-entry parametrization are searched by resampling instead.
inline SearchResult search_counterexample(BoundId id, const SearchBudget& budget, std::uint64_t seed,
                                          const BoundParams& params = {}, const EvalOptions& opts = {}) {
  if (budget.restarts < 1 || budget.perturb_steps < 0) throw ConfigError("search budget must be positive");
  if (budget.dim < 2 || budget.dim > 64) throw ConfigError("dimension must lie in [2, 64]");
  const SampleClass cls = hypothesis_class(id);
  const std::size_t arity = bound_arity(id);
  const bool free_entries = cls == SampleClass::ginibre || cls == SampleClass::hermitian;
  GaussianSource rng(mix64(seed ^ fnv1a64(to_string(id))));

  SearchResult out;
  out.bound_id = std::string(to_string(id));
  auto consider = [&](const std::vector<ComplexMatrix>& ops, double& current) {
    ++out.evaluations;
    BoundReport rep;
    try {
      rep = evaluate(id, ops, params, opts);
    } catch (const Error&) {
      return false;
    }
    if (!std::isfinite(rep.slack)) return false;
    const bool improved = rep.slack < current;
    if (improved) current = rep.slack;
    if (rep.slack < out.best_slack) {
      out.best_slack = rep.slack;
      out.best_operands = ops;
      out.best_report = rep;
    }
    return improved;
  };

  for (int restart = 0; restart < budget.restarts; ++restart) {
    ++out.restarts;
    const std::uint64_t s = derive_trial_seed(seed, "search:" + out.bound_id, budget.dim, static_cast<std::uint64_t>(restart));
    std::vector<ComplexMatrix> current = sample_operands({cls, budget.dim, s}, arity);
    double current_slack = std::numeric_limits<double>::infinity();
    consider(current, current_slack);
    double step = 0.1;
    for (int k = 0; k < budget.perturb_steps; ++k) {
      std::vector<ComplexMatrix> trial;
      if (free_entries) {
        trial = current;
        for (auto& m : trial) {
          double scale = std::max(1e-12, m.frobenius_norm() / static_cast<double>(budget.dim));
          for (auto& z : m.entries()) z += step * scale * rng.complex_normal();
          if (cls == SampleClass::hermitian) m = detail::hermitian_part_exact(m);
        }
      } else {
        trial = sample_operands({cls, budget.dim, rng.engine()()}, arity);
      }
      if (consider(trial, current_slack)) {
        current = std::move(trial);
        step = std::min(1.0, step * 1.5);
      } else {
        step = std::max(1e-6, step * 0.7);
      }
    }
  }
  out.candidate_violation = out.best_report.verdict == Verdict::violated;
  return out;
}

/// Budget with about `evaluations` evaluations spread over restarts.
inline SearchBudget budget_for_evaluations(long evaluations, int restarts, std::size_t dim = 2) {
  SearchBudget b;
  b.restarts = std::max(1, restarts);
  b.perturb_steps = static_cast<int>(std::max<long>(0, evaluations / b.restarts - 1));
  b.dim = dim;
  return b;
}

}  // namespace opineq
