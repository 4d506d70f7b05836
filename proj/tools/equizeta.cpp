#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "equizeta/report.hpp"
#include "equizeta/testing/selftest.hpp"

using namespace equizeta;

namespace {

struct Flags {
  std::string model, params, config, sigma, from, to, method = "auto", format, output;
  std::optional<double> tol;
  int steps = 0;
  std::uint64_t seed = 1;
  double window = 10.0;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), Errc::invalid_config, "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig make_config(const Flags& f, const std::string& verb) {
  RunConfig cfg;
  cfg.model = f.model;
  if (!f.config.empty()) cfg.params = parse_params(read_file(f.config));
  for (const auto& [k, v] : parse_params(f.params)) cfg.params[k] = v;
  cfg.tol = f.tol ? *f.tol : tolerance_from_env(std::getenv("EQUIZETA_TOL"));
  cfg.method = parse_method(f.method);
  cfg.format = parse_format(f.format.empty() ? (verb == "sweep" ? "csv" : "json") : f.format);
  cfg.output = f.output;
  cfg.seed = f.seed;
  cfg.window = f.window;
  auto complex_flag = [](const std::string& name, const std::string& text) {
    try {
      return parse_complex(text);
    } catch (const Error& e) {
      fail(Errc::invalid_config, "--" + name + ": " + e.what());
    }
  };
  if (!f.sigma.empty()) cfg.sigma = complex_flag("sigma", f.sigma);
  if (verb == "sweep") {
    require(!f.from.empty() && !f.to.empty() && f.steps != 0, Errc::invalid_config,
            "sweep needs --from, --to and --steps");
    cfg.range = SigmaRange{complex_flag("from", f.from), complex_flag("to", f.to), f.steps};
  }
  if (verb == "eval") require(cfg.sigma.has_value(), Errc::invalid_config, "eval needs --sigma");
  if (verb != "selftest") require(!cfg.model.empty(), Errc::invalid_config, "--model is required");
  cfg.validate();
  return cfg;
}

class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      require(static_cast<bool>(file_), Errc::invalid_config, "cannot open output '" + path + "'");
    }
  }
  std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

int cmd_eval(const RunConfig& cfg) {
  Problem p = build_problem(cfg.model, cfg.params);
  ReportRow row = ReportRow::from(evaluate(p, *cfg.sigma, cfg.method, cfg.tol));
  Sink out(cfg.output);
  emit_rows(out.os(), {row}, cfg.format, true);
  return 0;
}

int cmd_sweep(const RunConfig& cfg) {
  Problem p = build_problem(cfg.model, cfg.params);
  Sink out(cfg.output);
  std::ostream& os = out.os();
  std::vector<ReportRow> rows;
  if (cfg.format == OutputFormat::csv) os << csv_header << "\n";
  try {
    for (cplx s : cfg.range->points()) {
      rows.push_back(ReportRow::from(evaluate(p, s, cfg.method, cfg.tol)));
      if (cfg.format == OutputFormat::csv) os << to_csv(rows.back()) << "\n" << std::flush;
      if (cfg.format == OutputFormat::plain) os << to_plain(rows.back()) << std::flush;
    }
  } catch (const Error&) {
    if (cfg.format == OutputFormat::json) emit_rows(os, rows, cfg.format, false);
    throw;
  }
  if (cfg.format == OutputFormat::json) emit_rows(os, rows, cfg.format, false);
  return 0;
}

int cmd_fried(const RunConfig& cfg) {
  Problem p = build_problem(cfg.model, cfg.params);
  FriedReport rep = fried_residual(p.model, p.element, cfg.tol);
  Sink out(cfg.output);
  out.os() << to_json(rep).dump() << "\n";
  if (!rep.applicable) return 3;
  return std::abs(*rep.residual) < cfg.tol ? 0 : 4;
}

int cmd_trace(const RunConfig& cfg) {
  Problem p = build_problem(cfg.model, cfg.params);
  Sink out(cfg.output);
  out.os() << to_json(flat_trace_measure(p.model, p.element, cfg.window)).dump() << "\n";
  return 0;
}

int cmd_selftest(const RunConfig& cfg) {
  Sink out(cfg.output);
  std::ostream& os = out.os();
  bool ok = true;
  double total = 0.0;
  for (const auto& r : selftest::run_all(cfg.seed)) {
    char t[32];
    std::snprintf(t, sizeof t, "%.3f", r.seconds);
    os << (r.passed ? "PASS " : "FAIL ") << r.name << " checks=" << r.checks << " time=" << t << "s";
    if (!r.passed) os << " first_failure=\"" << r.failure << "\"";
    os << "\n";
    ok = ok && r.passed;
    total += r.seconds;
  }
  char t[32];
  std::snprintf(t, sizeof t, "%.3f", total);
  os << (ok ? "ALL PASS" : "FAILURES") << " seed=" << cfg.seed << " total=" << t << "s\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"equizeta: equivariant Ruelle zeta values, torsion and trace atoms for model flows"};
  app.require_subcommand(1);
  Flags f;

  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--model", f.model, "line | lattice | circle | euclid | sphere2 | sphere3");
    sub->add_option("--params", f.params, "key=value pairs separated by commas");
    sub->add_option("--config", f.config, "file with one key=value pair per line");
  };
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--tol", f.tol, "tolerance in (0, 1e-2]; default 1e-12 or EQUIZETA_TOL");
    sub->add_option("--format", f.format, "json | csv | plain");
    sub->add_option("--output", f.output, "write to this file instead of stdout");
    sub->add_option("--seed", f.seed, "seed for sampled checks");
  };

  auto* eval = app.add_subcommand("eval", "evaluate log R at one sigma");
  add_model(eval);
  add_common(eval);
  eval->add_option("--sigma", f.sigma, "complex, e.g. 0.5+1i");
  eval->add_option("--method", f.method, "direct | closed | auto");

  auto* sweep = app.add_subcommand("sweep", "evaluate log R along a sigma segment");
  add_model(sweep);
  add_common(sweep);
  sweep->add_option("--from", f.from);
  sweep->add_option("--to", f.to);
  sweep->add_option("--steps", f.steps);
  sweep->add_option("--method", f.method, "direct | closed | auto");

  auto* fried = app.add_subcommand("fried", "compare log R(0) with log T");
  add_model(fried);
  add_common(fried);

  auto* trace = app.add_subcommand("trace", "dump flat-trace atoms with |l| <= window");
  add_model(trace);
  add_common(trace);
  trace->add_option("--window", f.window);

  auto* self = app.add_subcommand("selftest", "run the invariant suites");
  add_common(self);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << nlohmann::ordered_json{{"error", "InvalidConfig"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    RunConfig cfg = make_config(f, verb);
    if (verb == "eval") return cmd_eval(cfg);
    if (verb == "sweep") return cmd_sweep(cfg);
    if (verb == "fried") return cmd_fried(cfg);
    if (verb == "trace") return cmd_trace(cfg);
    return cmd_selftest(cfg);
  } catch (const Error& e) {
    std::cerr << error_object(e) << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << nlohmann::ordered_json{{"error", "InvalidConfig"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
}
