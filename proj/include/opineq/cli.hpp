#pragma once

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "opineq/bounds.hpp"
#include "opineq/campaign.hpp"
#include "opineq/errors.hpp"
#include "opineq/function_pairs.hpp"
#include "opineq/numerical_radius.hpp"
#include "opineq/report_io.hpp"
#include "opineq/sampler.hpp"

namespace opineq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitViolation = 2;

inline constexpr const char* kSynopsis =
    "usage:\n"
    "  opineq verify  --config <file>\n"
    "  opineq verify  --bounds <id,...|all> [--dims 2,3] [--trials N] [--seed S] [--tol X] [--grid M] [--workers W]\n"
    "  opineq compare --bounds <a,b,...> [--class <class>] [--dim N] [--trials N] [--seed S] [--r --s --t]\n"
    "  opineq search  --bound <id> [--restarts R] [--steps K] [--dim N] [--seed S]\n"
    "  opineq compute --bound <id> --S <file> [--T <file>] [--X <file> --Y <file>]\n"
    "                 [--pair <spec>] [--pair-g <spec>] [--r R] [--s S] [--t T] [--strict]\n"
    "  opineq radius  --S <file> [--grid M]\n"
    "common: [--json | --csv] [--out <file>]\n"
    "pair specs: pow:<r>, fdiv:exp, fdiv:affine:<a>:<b>\n"
    "exit codes: 0 verified or inconclusive, 2 violation found, 1 usage, I/O or config error\n";

namespace detail {

struct OutputOptions {
  bool json = false;
  bool csv = false;
  std::string out_path;

  ReportFormat format(ReportFormat fallback) const {
    if (json) return ReportFormat::json;
    if (csv) return ReportFormat::csv;
    return fallback;
  }
};

inline void add_output_options(CLI::App* app, OutputOptions& o) {
  auto* j = app->add_flag("--json", o.json, "JSON output");
  auto* c = app->add_flag("--csv", o.csv, "CSV output");
  j->excludes(c);
  app->add_option("--out", o.out_path, "write output to a file instead of stdout");
}

inline void emit(const OutputOptions& o, const std::string& text, std::ostream& out) {
  if (o.out_path.empty()) {
    out << text;
  } else {
    write_text(o.out_path, text);
  }
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) items.push_back(item);
  return items;
}

inline std::vector<BoundId> parse_bound_list(const std::string& s) {
  std::vector<BoundId> ids;
  for (const auto& item : split_list(s)) {
    if (item == "all") {
      for (BoundId id : kAllBounds)
        if (is_proof_backed(id)) ids.push_back(id);
    } else {
      ids.push_back(parse_bound_id(item));
    }
  }
  if (ids.empty()) throw UsageError("--bounds needs at least one bound id");
  return ids;
}

struct ParamOptions {
  std::optional<double> r, s, t;
  std::optional<std::string> pair_f, pair_g;

  void add(CLI::App* app) {
    app->add_option("--r", r, "exponent r");
    app->add_option("--s", s, "exponent s");
    app->add_option("--t", t, "exponent or scale t");
    app->add_option("--pair", pair_f, "first function pair");
    app->add_option("--pair-g", pair_g, "second function pair");
  }

  BoundParams params() const {
    BoundParams p;
    p.r = r;
    p.s = s;
    p.t = t;
    if (pair_f) p.pair_f = parse_pair(*pair_f);
    if (pair_g) p.pair_g = parse_pair(*pair_g);
    return p;
  }
};

}  // namespace detail

/// Parses and runs one command. Output goes to `out`, diagnostics to `err`.
inline int dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Operator inequality verification"};
  app.require_subcommand(1);
  app.set_help_flag("-h,--help", "show help");

  // verify
  detail::OutputOptions verify_out;
  std::string config_path, verify_bounds;
  std::vector<std::size_t> verify_dims;
  std::optional<int> verify_trials, verify_grid;
  std::optional<std::uint64_t> verify_seed;
  std::optional<double> verify_tol;
  std::optional<unsigned> verify_workers;
  auto* verify = app.add_subcommand("verify", "run a seeded verification campaign");
  auto* cfg_opt = verify->add_option("--config", config_path, "campaign config JSON");
  verify->add_option("--bounds", verify_bounds, "comma-separated bound ids, or all")->excludes(cfg_opt);
  verify->add_option("--dims", verify_dims, "comma-separated dimensions")->delimiter(',')->excludes(cfg_opt);
  verify->add_option("--trials", verify_trials, "trials per bound per dimension")->excludes(cfg_opt);
  verify->add_option("--seed", verify_seed, "master seed")->excludes(cfg_opt);
  verify->add_option("--tol", verify_tol, "tolerance scale")->excludes(cfg_opt);
  verify->add_option("--grid", verify_grid, "numerical radius grid size")->excludes(cfg_opt);
  verify->add_option("--workers", verify_workers, "worker threads (0 = auto)");
  detail::add_output_options(verify, verify_out);

  // compare
  detail::OutputOptions compare_out;
  detail::ParamOptions compare_params;
  std::string compare_bounds_list, compare_class_name;
  std::size_t compare_dim = 3;
  int compare_trials = 100;
  std::uint64_t compare_seed = 0;
  auto* compare = app.add_subcommand("compare", "compare bound tightness on shared operands");
  compare->add_option("--bounds", compare_bounds_list, "comma-separated bound ids")->required();
  compare->add_option("--class", compare_class_name, "operand class");
  compare->add_option("--dim", compare_dim, "dimension");
  compare->add_option("--trials", compare_trials, "number of trials");
  compare->add_option("--seed", compare_seed, "seed");
  compare_params.add(compare);
  detail::add_output_options(compare, compare_out);

  // search
  detail::OutputOptions search_out;
  detail::ParamOptions search_params;
  std::string search_bound;
  int search_restarts = 10, search_steps = 100;
  std::size_t search_dim = 2;
  std::uint64_t search_seed = 0;
  auto* search = app.add_subcommand("search", "hill-descent search for a small slack");
  search->add_option("--bound", search_bound, "bound id")->required();
  search->add_option("--restarts", search_restarts, "random restarts");
  search->add_option("--steps", search_steps, "perturbation steps per restart");
  search->add_option("--dim", search_dim, "dimension");
  search->add_option("--seed", search_seed, "seed");
  search_params.add(search);
  detail::add_output_options(search, search_out);

  // compute
  detail::OutputOptions compute_out;
  detail::ParamOptions compute_params;
  std::string compute_bound, s_path, t_path, x_path, y_path;
  bool compute_strict = false;
  double compute_tol = 1e-7;
  int compute_grid = kDefaultRadiusGrid;
  auto* compute = app.add_subcommand("compute", "evaluate one bound on matrices from files");
  compute->add_option("--bound", compute_bound, "bound id")->required();
  compute->add_option("--S", s_path, "first operand file")->required();
  compute->add_option("--T", t_path, "second operand file");
  compute->add_option("--X", x_path, "third operand file");
  compute->add_option("--Y", y_path, "fourth operand file");
  compute->add_flag("--strict", compute_strict, "fail when the hypothesis does not hold");
  compute->add_option("--tol", compute_tol, "tolerance scale");
  compute->add_option("--grid", compute_grid, "numerical radius grid size");
  compute_params.add(compute);
  detail::add_output_options(compute, compute_out);

  // radius
  detail::OutputOptions radius_out;
  std::string radius_path;
  int radius_grid = kDefaultRadiusGrid;
  auto* radius = app.add_subcommand("radius", "numerical radius enclosure of one matrix");
  radius->add_option("--S", radius_path, "matrix file")->required();
  radius->add_option("--grid", radius_grid, "grid size");
  detail::add_output_options(radius, radius_out);

  for (auto* sub : {verify, compare, search, compute, radius}) sub->set_help_flag("-h,--help", "show help");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << kSynopsis;
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << kSynopsis;
    return kExitError;
  }

  try {
    if (verify->parsed()) {
      CampaignConfig cfg;
      if (!config_path.empty()) {
        cfg = load_campaign_config(config_path);
      } else {
        if (verify_bounds.empty()) throw UsageError("verify needs --config or --bounds");
        for (BoundId id : detail::parse_bound_list(verify_bounds)) cfg.bounds.push_back({id, {}});
        if (!verify_dims.empty()) cfg.dims = verify_dims;
        if (verify_trials) cfg.trials = *verify_trials;
        if (verify_seed) cfg.master_seed = *verify_seed;
        if (verify_tol) cfg.tolerance_scale = *verify_tol;
        if (verify_grid) cfg.grid_size = *verify_grid;
      }
      if (verify_workers) cfg.workers = *verify_workers;
      const CampaignReport rep = run_campaign(cfg);
      detail::emit(verify_out, render(rep, verify_out.format(ReportFormat::csv)), out);
      for (const auto& s : rep.summaries) {
        err << s.bound << " dim=" << s.dim << " trials=" << s.trials << " violations=" << s.violations
            << " inconclusive=" << s.inconclusives << " min_slack=" << format_number(s.min_slack) << "\n";
      }
      return rep.violation_count() > 0 ? kExitViolation : kExitOk;
    }

    if (compare->parsed()) {
      CompareConfig cfg;
      const BoundParams params = compare_params.params();
      for (BoundId id : detail::parse_bound_list(compare_bounds_list)) cfg.bounds.push_back({id, params});
      if (!compare_class_name.empty()) cfg.cls = parse_sample_class(compare_class_name);
      cfg.dim = compare_dim;
      cfg.trials = compare_trials;
      cfg.seed = compare_seed;
      const CompareReport rep = compare_bounds(cfg);
      const bool as_json = compare_out.format(ReportFormat::csv) == ReportFormat::json;
      detail::emit(compare_out, as_json ? to_json_text(compare_to_json(rep)) : compare_csv(rep), out);
      for (std::size_t i = 0; i < rep.labels.size(); ++i) {
        err << rep.labels[i] << " wins=" << rep.wins[i] << " mean_gap=" << format_number(rep.mean_gap[i]) << "\n";
      }
      int broken = 0;
      for (const auto& o : rep.orderings) {
        err << o.name << ": " << o.violations << "/" << o.checked << " violations\n";
        broken += o.violations;
      }
      return broken > 0 ? kExitViolation : kExitOk;
    }

    if (search->parsed()) {
      const BoundId id = parse_bound_id(search_bound);
      const SearchResult res =
          search_counterexample(id, {search_restarts, search_steps, search_dim}, search_seed, search_params.params());
      if (search_out.csv) throw UsageError("search writes JSON only");
      detail::emit(search_out, to_json_text(search_to_json(res)), out);
      return res.candidate_violation ? kExitViolation : kExitOk;
    }

    if (compute->parsed()) {
      const BoundId id = parse_bound_id(compute_bound);
      const std::size_t arity = bound_arity(id);
      std::vector<std::string> paths{s_path};
      for (const std::string* p : {&t_path, &x_path, &y_path})
        if (!p->empty()) paths.push_back(*p);
      if (paths.size() != arity || (arity >= 2 && t_path.empty())) {
        throw UsageError(std::string(to_string(id)) + " takes " + std::to_string(arity) +
                         (arity == 1 ? " operand (--S)" : arity == 2 ? " operands (--S --T)" : " operands (--S --T --X --Y)"));
      }
      std::vector<ComplexMatrix> ops;
      for (const auto& p : paths) ops.push_back(load_matrix(p));
      const BoundReport rep = evaluate(id, ops, compute_params.params(), {compute_strict, compute_tol, compute_grid});
      detail::emit(compute_out, render(rep, compute_out.format(ReportFormat::json)), out);
      return rep.verdict == Verdict::violated ? kExitViolation : kExitOk;
    }

    if (radius->parsed()) {
      if (radius_out.csv) throw UsageError("radius writes JSON only");
      const RadiusEnclosure e = numerical_radius(load_matrix(radius_path), radius_grid);
      Json j;
      j["estimate"] = e.estimate;
      j["certifiedLower"] = e.certified_lower;
      j["certifiedUpper"] = e.certified_upper;
      j["width"] = e.width();
      j["argTheta"] = e.arg_theta;
      j["gridSize"] = e.grid_size;
      detail::emit(radius_out, to_json_text(j), out);
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << kSynopsis;
    return kExitError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  err << kSynopsis;
  return kExitError;
}

inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, out, err);
}

}  // namespace opineq::cli
