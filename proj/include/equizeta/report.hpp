#pragma once

// Run configuration and the plain / JSON / CSV emitters used by the CLI.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "equizeta/zeta_engine.hpp"

namespace equizeta {

enum class OutputFormat { json, csv, plain };

inline OutputFormat parse_format(const std::string& s) {
  if (s == "json") return OutputFormat::json;
  if (s == "csv") return OutputFormat::csv;
  if (s == "plain") return OutputFormat::plain;
  fail(Errc::invalid_config, "unknown format '" + s + "' (json, csv, plain)");
}

inline MethodChoice parse_method(const std::string& s) {
  if (s == "direct") return MethodChoice::direct;
  if (s == "closed") return MethodChoice::closed;
  if (s == "auto") return MethodChoice::automatic;
  fail(Errc::invalid_config, "unknown method '" + s + "' (direct, closed, auto)");
}

inline constexpr double default_tol = 1e-12;

struct SigmaRange {
  cplx from{};
  cplx to{};
  int steps = 2;

  std::vector<cplx> points() const {
    std::vector<cplx> out;
    for (int i = 0; i < steps; ++i) out.push_back(from + (to - from) * (static_cast<double>(i) / (steps - 1)));
    return out;
  }
};

struct RunConfig {
  std::string model;
  ParamMap params;
  std::optional<cplx> sigma;
  std::optional<SigmaRange> range;
  MethodChoice method = MethodChoice::automatic;
  double tol = default_tol;
  OutputFormat format = OutputFormat::json;
  std::string output;  // empty: stdout
  std::uint64_t seed = 1;
  double window = 10.0;

  void validate() const {
    require(std::isfinite(tol) && tol > 0.0 && tol <= 1e-2, Errc::invalid_config, "tol must lie in (0, 1e-2]");
    if (range) {
      require(range->steps >= 2, Errc::invalid_config, "sweep needs steps >= 2");
      require(range->from != range->to, Errc::invalid_config, "sweep needs from != to");
    }
    require(std::isfinite(window) && window > 0.0, Errc::invalid_config, "window must be positive");
  }
};

/// EQUIZETA_TOL, when set, replaces the built-in default (an explicit --tol still wins).
inline double tolerance_from_env(const char* env) {
  if (!env || !*env) return default_tol;
  try {
    std::size_t pos = 0;
    double v = std::stod(env, &pos);
    require(pos == std::string(env).size(), Errc::invalid_config, "EQUIZETA_TOL is not a number");
    return v;
  } catch (const std::logic_error&) {
    fail(Errc::invalid_config, "EQUIZETA_TOL is not a number");
  }
}

struct ReportRow {
  cplx sigma{};
  cplx log_R{};
  double R_modulus = 0.0;
  Method method = Method::direct;
  double est_error = 0.0;
  std::size_t terms = 0;

  static ReportRow from(const ZetaEvaluation& ev) {
    return {ev.sigma, ev.log_R, std::exp(ev.log_R.real()), ev.method, ev.est_error, ev.terms};
  }
};

inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline nlohmann::ordered_json to_json(const ReportRow& r) {
  return {{"sigma_re", r.sigma.real()}, {"sigma_im", r.sigma.imag()}, {"logR_re", r.log_R.real()},
          {"logR_im", r.log_R.imag()},   {"R_modulus", r.R_modulus},   {"method", to_string(r.method)},
          {"est_error", r.est_error},    {"terms", r.terms}};
}

inline constexpr const char* csv_header = "sigma_re,sigma_im,logR_re,logR_im,method,est_error,terms";

inline std::string to_csv(const ReportRow& r) {
  return fmt_double(r.sigma.real()) + "," + fmt_double(r.sigma.imag()) + "," + fmt_double(r.log_R.real()) + "," +
         fmt_double(r.log_R.imag()) + "," + to_string(r.method) + "," + fmt_double(r.est_error) + "," +
         std::to_string(r.terms);
}

inline std::string to_plain(const ReportRow& r) {
  return "sigma = " + fmt_double(r.sigma.real()) + " + " + fmt_double(r.sigma.imag()) + "i\n" +
         "log R = " + fmt_double(r.log_R.real()) + " + " + fmt_double(r.log_R.imag()) + "i\n" +
         "|R|   = " + fmt_double(r.R_modulus) + "\n" + "method = " + to_string(r.method) + "\n" +
         "est_error = " + fmt_double(r.est_error) + "\n" + "terms = " + std::to_string(r.terms) + "\n";
}

inline void emit_rows(std::ostream& os, const std::vector<ReportRow>& rows, OutputFormat f, bool single) {
  switch (f) {
    case OutputFormat::json: {
      if (single && rows.size() == 1) {
        os << to_json(rows.front()).dump() << "\n";
      } else {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& r : rows) arr.push_back(to_json(r));
        os << nlohmann::ordered_json{{"rows", arr}}.dump() << "\n";
      }
      break;
    }
    case OutputFormat::csv:
      os << csv_header << "\n";
      for (const auto& r : rows) os << to_csv(r) << "\n";
      break;
    case OutputFormat::plain:
      for (const auto& r : rows) os << to_plain(r);
      break;
  }
}

inline nlohmann::ordered_json complex_json(const std::string& key, cplx z) {
  return {{key + "_re", z.real()}, {key + "_im", z.imag()}};
}

inline nlohmann::ordered_json to_json(const FriedReport& r) {
  nlohmann::ordered_json j;
  j["applicable"] = r.applicable;
  j["reason"] = r.reason;
  j.update(complex_json("log_R_at_0", r.log_R_at_0));
  j.update(complex_json("log_T", r.log_T));
  if (r.residual) {
    j.update(complex_json("residual", *r.residual));
    j["residual_abs"] = std::abs(*r.residual);
  } else {
    j["residual_abs"] = nullptr;
  }
  j["est_error"] = r.est_error;
  if (r.oracle_log_T) {
    j.update(complex_json("oracle_log_T", *r.oracle_log_T));
    j["oracle_error"] = r.oracle_error;
    j["oracle_residual_abs"] = std::abs(*r.oracle_residual);
  }
  return j;
}

inline nlohmann::ordered_json to_json(AtomicMeasure m) {
  std::sort(m.atoms.begin(), m.atoms.end(), [](const Atom& a, const Atom& b) { return a.l < b.l; });
  nlohmann::ordered_json atoms = nlohmann::ordered_json::array();
  // + 0.0 turns a negative zero into 0.0
  for (const auto& a : m.atoms)
    atoms.push_back({{"l", a.l}, {"coeff_re", a.coeff.real() + 0.0}, {"coeff_im", a.coeff.imag() + 0.0}});
  return {{"atoms", atoms}, {"window", m.window}};
}

inline std::string error_object(const Error& e) {
  return nlohmann::ordered_json{{"error", to_string(e.code())}, {"message", e.what()}}.dump();
}

/// 0 ok, 1 config or domain, 2 non-convergent, 3 not applicable or singular, 4 Fried violation.
inline int exit_code(Errc c) {
  switch (c) {
    case Errc::non_convergent: return 2;
    case Errc::not_applicable:
    case Errc::singular_point:
    case Errc::singular: return 3;
    case Errc::domain:
    case Errc::invalid_config: return 1;
  }
  return 1;
}

}  // namespace equizeta
