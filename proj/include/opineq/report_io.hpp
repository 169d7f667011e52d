#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "opineq/bounds.hpp"
#include "opineq/campaign.hpp"
#include "opineq/errors.hpp"
#include "opineq/function_pairs.hpp"
#include "opineq/matrix.hpp"
#include "opineq/sampler.hpp"

namespace opineq {

using Json = nlohmann::ordered_json;

enum class ReportFormat { json, csv };

// ---------------------------------------------------------------------------
// Text and number formatting.

/// Shortest form that keeps 17 significant digits; non-finite values map to
/// "nan", "inf" or "-inf".
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline void dump_string(std::string& out, const std::string& s) {
  out += Json(s).dump();
}

inline void dump_json(std::string& out, const Json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        dump_string(out, key);
        out += ": ";
        dump_json(out, value, indent + 2);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) { return e.is_structured(); });
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump_json(out, j[i], indent + 2);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump_json(out, j[i], indent + 2);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? format_number(x) : "null";
      return;
    }
    default: out += j.dump(); return;
  }
}

inline Json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

inline double get_number(const Json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  const Json& v = j.at(key);
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!v.is_number()) throw ParseError(std::string("field '") + key + "' is not a number");
  return v.get<double>();
}

template <class T>
T get_field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(std::string("field '") + key + "' has the wrong type");
  }
}

inline Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

}  // namespace detail

/// Pretty JSON text with stable key order and 17-digit floats.
inline std::string to_json_text(const Json& j) {
  std::string out;
  detail::dump_json(out, j, 0);
  out += '\n';
  return out;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Matrices.

inline Json matrix_to_json(const ComplexMatrix& m) {
  Json data = Json::array();
  for (const Complex& z : m.entries()) data.push_back(Json::array({z.real(), z.imag()}));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline ComplexMatrix matrix_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("matrix: expected an object");
  const auto rows = detail::get_field<std::size_t>(j, "rows");
  const auto cols = detail::get_field<std::size_t>(j, "cols");
  if (!j.contains("data")) throw ParseError("missing field 'data'");
  const Json& data = j.at("data");
  if (!data.is_array()) throw ParseError("field 'data' is not an array");
  if (data.size() != rows * cols) {
    throw ParseError("matrix data length mismatch: expected " + std::to_string(rows * cols) + ", got " +
                     std::to_string(data.size()));
  }
  std::vector<Complex> entries;
  entries.reserve(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) {
    const Json& e = data[k];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
      // nlohmann reads NaN/Infinity tokens as null or rejects them outright.
      if (e.is_array() && e.size() == 2 && (e[0].is_null() || e[1].is_null()))
        throw NonFiniteEntry("matrix entry " + std::to_string(k) + " is not finite");
      throw ParseError("matrix entry " + std::to_string(k) + " is not a [re, im] pair");
    }
    const double re = e[0].get<double>(), im = e[1].get<double>();
    if (!std::isfinite(re) || !std::isfinite(im))
      throw NonFiniteEntry("matrix entry " + std::to_string(k) + " is not finite");
    entries.emplace_back(re, im);
  }
  return {rows, cols, std::move(entries)};
}

inline ComplexMatrix parse_matrix(const std::string& text, const std::string& origin = "matrix") {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Bare NaN/Infinity tokens are not JSON; name them explicitly.
    for (const char* token : {"NaN", "nan", "Infinity", "inf"})
      if (text.find(token) != std::string::npos) throw NonFiniteEntry(origin + ": non-finite number literal");
    throw ParseError(origin + ": " + e.what());
  } catch (const nlohmann::json::out_of_range& e) {
    throw NonFiniteEntry(origin + ": " + e.what());
  }
  return matrix_from_json(j);
}

inline ComplexMatrix load_matrix(const std::string& path) { return parse_matrix(read_text(path), path); }

inline void save_matrix(const std::string& path, const ComplexMatrix& m) {
  write_text(path, to_json_text(matrix_to_json(m)));
}

// ---------------------------------------------------------------------------
// Bound reports.

inline Json report_to_json(const BoundReport& r) {
  Json details = Json::object();
  for (const auto& [k, v] : r.details) details[k] = detail::number(v);
  Json residuals = Json::object();
  for (const auto& [k, v] : r.hypothesis_residuals) residuals[k] = detail::number(v);
  Json params = Json::object();
  for (const auto& [k, v] : r.parameters) params[k] = v;
  Json j;
  j["boundId"] = r.bound_id;
  j["lhs"] = detail::number(r.lhs);
  j["rhs"] = detail::number(r.rhs);
  j["slack"] = detail::number(r.slack);
  j["verdict"] = std::string(to_string(r.verdict));
  j["details"] = std::move(details);
  j["hypothesisOk"] = r.hypothesis_ok;
  j["hypothesisResiduals"] = std::move(residuals);
  j["parameters"] = std::move(params);
  j["toleranceUsed"] = detail::number(r.tolerance_used);
  j["note"] = r.note;
  return j;
}

inline BoundReport report_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("report: expected an object");
  BoundReport r;
  r.bound_id = detail::get_field<std::string>(j, "boundId");
  r.lhs = detail::get_number(j, "lhs");
  r.rhs = detail::get_number(j, "rhs");
  r.slack = detail::get_number(j, "slack");
  r.verdict = parse_verdict(detail::get_field<std::string>(j, "verdict"));
  if (!j.contains("details") || !j.at("details").is_object()) throw ParseError("missing field 'details'");
  for (const auto& [k, v] : j.at("details").items()) r.details[k] = detail::get_number(j.at("details"), k.c_str());
  if (j.contains("hypothesisOk")) r.hypothesis_ok = detail::get_field<bool>(j, "hypothesisOk");
  if (j.contains("hypothesisResiduals")) {
    const Json& h = j.at("hypothesisResiduals");
    for (const auto& [k, v] : h.items()) r.hypothesis_residuals[k] = detail::get_number(h, k.c_str());
  }
  if (j.contains("parameters")) {
    for (const auto& [k, v] : j.at("parameters").items()) {
      if (!v.is_string()) throw ParseError("parameter '" + k + "' is not a string");
      r.parameters[k] = v.get<std::string>();
    }
  }
  if (j.contains("toleranceUsed")) r.tolerance_used = detail::get_number(j, "toleranceUsed");
  if (j.contains("note")) r.note = detail::get_field<std::string>(j, "note");
  return r;
}

inline std::string report_csv(const BoundReport& r) {
  return "bound,lhs,rhs,slack,verdict\n" + r.bound_id + "," + format_number(r.lhs) + "," + format_number(r.rhs) +
         "," + format_number(r.slack) + "," + std::string(to_string(r.verdict)) + "\n";
}

// ---------------------------------------------------------------------------
// Campaign reports.

inline Json trial_to_json(const TrialRecord& t) {
  Json j;
  j["bound"] = t.bound;
  j["dim"] = t.dim;
  j["trial"] = t.trial;
  j["seed"] = t.seed;
  j["lhs"] = detail::number(t.lhs);
  j["rhs"] = detail::number(t.rhs);
  j["slack"] = detail::number(t.slack);
  j["verdict"] = std::string(to_string(t.verdict));
  j["retried"] = t.retried;
  j["reason"] = t.reason;
  if (!t.operands.empty()) {
    Json ops = Json::array();
    for (const auto& m : t.operands) ops.push_back(matrix_to_json(m));
    j["operands"] = std::move(ops);
  }
  return j;
}

inline TrialRecord trial_from_json(const Json& j) {
  TrialRecord t;
  t.bound = detail::get_field<std::string>(j, "bound");
  t.dim = detail::get_field<std::size_t>(j, "dim");
  t.trial = detail::get_field<int>(j, "trial");
  t.seed = detail::get_field<std::uint64_t>(j, "seed");
  t.lhs = detail::get_number(j, "lhs");
  t.rhs = detail::get_number(j, "rhs");
  t.slack = detail::get_number(j, "slack");
  t.verdict = parse_verdict(detail::get_field<std::string>(j, "verdict"));
  t.retried = detail::get_field<bool>(j, "retried");
  t.reason = detail::get_field<std::string>(j, "reason");
  if (j.contains("operands"))
    for (const auto& m : j.at("operands")) t.operands.push_back(matrix_from_json(m));
  return t;
}

inline Json campaign_to_json(const CampaignReport& r) {
  Json summaries = Json::array();
  for (const auto& s : r.summaries) {
    Json j;
    j["bound"] = s.bound;
    j["dim"] = s.dim;
    j["trials"] = s.trials;
    j["violations"] = s.violations;
    j["inconclusives"] = s.inconclusives;
    j["minSlack"] = detail::number(s.min_slack);
    j["meanSlack"] = detail::number(s.mean_slack);
    j["slackQ05"] = detail::number(s.q05);
    j["slackQ50"] = detail::number(s.q50);
    j["slackQ95"] = detail::number(s.q95);
    j["argminTrial"] = s.argmin_trial;
    j["argminSeed"] = s.argmin_seed;
    summaries.push_back(std::move(j));
  }
  Json trials = Json::array();
  for (const auto& t : r.trials) trials.push_back(trial_to_json(t));
  Json j;
  j["masterSeed"] = r.master_seed;
  j["summaries"] = std::move(summaries);
  j["trials"] = std::move(trials);
  return j;
}

inline CampaignReport campaign_from_json(const Json& j) {
  CampaignReport r;
  r.master_seed = detail::get_field<std::uint64_t>(j, "masterSeed");
  for (const auto& s : detail::get_field<Json>(j, "summaries")) {
    CampaignSummary c;
    c.bound = detail::get_field<std::string>(s, "bound");
    c.dim = detail::get_field<std::size_t>(s, "dim");
    c.trials = detail::get_field<int>(s, "trials");
    c.violations = detail::get_field<int>(s, "violations");
    c.inconclusives = detail::get_field<int>(s, "inconclusives");
    c.min_slack = detail::get_number(s, "minSlack");
    c.mean_slack = detail::get_number(s, "meanSlack");
    c.q05 = detail::get_number(s, "slackQ05");
    c.q50 = detail::get_number(s, "slackQ50");
    c.q95 = detail::get_number(s, "slackQ95");
    c.argmin_trial = detail::get_field<int>(s, "argminTrial");
    c.argmin_seed = detail::get_field<std::uint64_t>(s, "argminSeed");
    r.summaries.push_back(std::move(c));
  }
  for (const auto& t : detail::get_field<Json>(j, "trials")) r.trials.push_back(trial_from_json(t));
  return r;
}

inline std::string campaign_csv(const CampaignReport& r) {
  std::string out = "bound,dim,trial,lhs,rhs,slack,verdict\n";
  for (const auto& t : r.trials) {
    out += t.bound + "," + std::to_string(t.dim) + "," + std::to_string(t.trial) + "," + format_number(t.lhs) + "," +
           format_number(t.rhs) + "," + format_number(t.slack) + "," + std::string(to_string(t.verdict)) + "\n";
  }
  return out;
}

inline std::string render(const BoundReport& r, ReportFormat f) {
  return f == ReportFormat::json ? to_json_text(report_to_json(r)) : report_csv(r);
}

inline std::string render(const CampaignReport& r, ReportFormat f) {
  return f == ReportFormat::json ? to_json_text(campaign_to_json(r)) : campaign_csv(r);
}

template <class Report>
void write_report(const Report& r, ReportFormat f, const std::string& path) {
  write_text(path, render(r, f));
}

inline BoundReport load_bound_report(const std::string& path) {
  return report_from_json(detail::parse_json_text(read_text(path), path));
}

inline CampaignReport load_campaign_report(const std::string& path) {
  return campaign_from_json(detail::parse_json_text(read_text(path), path));
}

// ---------------------------------------------------------------------------
// Comparison tables and search results.

inline std::string compare_csv(const CompareReport& r) {
  std::string out = "trial";
  for (const auto& l : r.labels) out += "," + l;
  out += "\n";
  for (const auto& row : r.rows) {
    out += std::to_string(row.trial);
    for (double v : row.rhs) out += "," + format_number(v);
    out += "\n";
  }
  return out;
}

inline Json compare_to_json(const CompareReport& r) {
  Json summary = Json::array();
  for (std::size_t i = 0; i < r.labels.size(); ++i) {
    summary.push_back(Json{{"bound", r.labels[i]}, {"wins", r.wins[i]}, {"meanGap", detail::number(r.mean_gap[i])}});
  }
  Json orderings = Json::array();
  for (const auto& o : r.orderings)
    orderings.push_back(Json{{"name", o.name}, {"checked", o.checked}, {"violations", o.violations}});
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    Json rhs = Json::array();
    for (double v : row.rhs) rhs.push_back(detail::number(v));
    Json lhs = Json::array();
    for (double v : row.lhs) lhs.push_back(detail::number(v));
    rows.push_back(Json{{"trial", row.trial}, {"lhs", std::move(lhs)}, {"rhs", std::move(rhs)}});
  }
  Json j;
  j["class"] = std::string(to_string(r.cls));
  j["bounds"] = r.labels;
  j["summary"] = std::move(summary);
  j["orderings"] = std::move(orderings);
  j["rows"] = std::move(rows);
  return j;
}

inline Json search_to_json(const SearchResult& s) {
  Json ops = Json::array();
  for (const auto& m : s.best_operands) ops.push_back(matrix_to_json(m));
  Json j;
  j["boundId"] = s.bound_id;
  j["bestSlack"] = detail::number(s.best_slack);
  j["candidateViolation"] = s.candidate_violation;
  j["restarts"] = s.restarts;
  j["evaluations"] = s.evaluations;
  j["bestReport"] = report_to_json(s.best_report);
  j["bestOperands"] = std::move(ops);
  return j;
}

inline SearchResult search_from_json(const Json& j) {
  SearchResult s;
  s.bound_id = detail::get_field<std::string>(j, "boundId");
  s.best_slack = detail::get_number(j, "bestSlack");
  s.candidate_violation = detail::get_field<bool>(j, "candidateViolation");
  s.restarts = detail::get_field<int>(j, "restarts");
  s.evaluations = detail::get_field<long>(j, "evaluations");
  s.best_report = report_from_json(detail::get_field<Json>(j, "bestReport"));
  for (const auto& m : detail::get_field<Json>(j, "bestOperands")) s.best_operands.push_back(matrix_from_json(m));
  return s;
}

// ---------------------------------------------------------------------------
// Campaign configuration.

/// Reads bound parameters from an object with optional r, s, t, pairF, pairG.
inline BoundParams params_from_json(const Json& j) {
  BoundParams p;
  for (const auto& [key, value] : j.items()) {
    if (key == "id") continue;
    if (key == "r" || key == "s" || key == "t") {
      if (!value.is_number()) throw ConfigError("parameter '" + key + "' must be a number");
      (key == "r" ? p.r : key == "s" ? p.s : p.t) = value.get<double>();
    } else if (key == "pairF" || key == "pairG") {
      if (!value.is_string()) throw ConfigError("parameter '" + key + "' must be a pair string");
      try {
        (key == "pairF" ? p.pair_f : p.pair_g) = parse_pair(value.get<std::string>());
      } catch (const UsageError& e) {
        throw ConfigError(e.what());
      }
    } else {
      throw ConfigError("unknown bound parameter '" + key + "'");
    }
  }
  return p;
}

inline CampaignConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config: expected an object");
  CampaignConfig c;
  c.bounds.clear();
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "masterSeed" || key == "seed") {
        c.master_seed = v.get<std::uint64_t>();
      } else if (key == "dims") {
        c.dims = v.get<std::vector<std::size_t>>();
      } else if (key == "trialsPerBoundPerDim" || key == "trials") {
        c.trials = v.get<int>();
      } else if (key == "bounds") {
        for (const auto& b : v) {
          if (b.is_string()) {
            c.bounds.push_back({parse_bound_id(b.get<std::string>()), {}});
          } else if (b.is_object() && b.contains("id")) {
            c.bounds.push_back({parse_bound_id(b.at("id").get<std::string>()), params_from_json(b)});
          } else {
            throw ConfigError("bound entries must be an id or an object with an 'id'");
          }
        }
      } else if (key == "tolerance") {
        if (v.is_number()) {
          c.tolerance_scale = v.get<double>();
        } else {
          for (const auto& [tk, tv] : v.items()) {
            if (tk != "scale") throw ConfigError("unknown tolerance field '" + tk + "'");
            c.tolerance_scale = tv.get<double>();
          }
        }
      } else if (key == "gridSize") {
        c.grid_size = v.get<int>();
      } else if (key == "spectrumScale") {
        c.spectrum_scale = v.get<double>();
      } else if (key == "workers") {
        c.workers = v.get<unsigned>();
      } else {
        throw ConfigError("unknown config field '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline CampaignConfig load_campaign_config(const std::string& path) {
  return config_from_json(detail::parse_json_text(read_text(path), path));
}

}  // namespace opineq
