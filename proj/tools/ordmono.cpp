// Command-line front end: fit, test, mdc, simulate and validate.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ordmono/error.hpp"
#include "ordmono/io.hpp"
#include "ordmono/report.hpp"
#include "ordmono/simgen.hpp"
#include "ordmono/strategies.hpp"

using namespace ordmono;

namespace {

enum ExitCode { kOk = 0, kInputError = 2, kNonconvergence = 3, kInternal = 4 };

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Nonconvergence:
    case ErrorKind::Separation:
    case ErrorKind::ProbabilityUnderflow:
    case ErrorKind::TooManyFailures:
      return kNonconvergence;
    case ErrorKind::ConstrainedFitHasNoSE:
      return kInternal;
    default:
      return kInputError;
  }
}

struct Common {
  std::string out;
  std::string format = "text";
  bool timing = false;
  int threads = 1;
};

struct MdcFlags {
  std::optional<double> c_initial, c_lower_tol, c_upper_tol, grid_step;

  void apply(MdcConfig& cfg) const {
    if (c_initial) cfg.c_initial = *c_initial;
    if (c_lower_tol) cfg.c_lower_tol = *c_lower_tol;
    if (c_upper_tol) cfg.c_upper_tol = *c_upper_tol;
    if (grid_step) cfg.step = *grid_step;
  }
};

struct DataFlags {
  std::string data;
  std::string schema;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out, "Write the report to this file instead of stdout");
  cmd->add_option("--format", c.format, "Report format")
      ->check(CLI::IsMember({"text", "json"}));
  cmd->add_flag("--timing", c.timing, "Append wall-clock time (makes output non-reproducible)");
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::Range(1, 256));
}

void add_data(CLI::App* cmd, DataFlags& d) {
  cmd->add_option("--data", d.data, "CSV file with a header row")->required();
  cmd->add_option("--schema", d.schema, "YAML schema file")->required();
}

void add_mdc(CLI::App* cmd, MdcFlags& m) {
  cmd->add_option("--c-initial", m.c_initial, "Initial confidence level (default 0.90)");
  cmd->add_option("--c-lower-tol", m.c_lower_tol, "Lowest level for 'both' (default 0.85)");
  cmd->add_option("--c-upper-tol", m.c_upper_tol, "Highest level for 'none' (default 0.999)");
  cmd->add_option("--grid-step", m.grid_step, "Step of the level grid (default 0.01)");
}

void emit(const Report& report, const Common& c) {
  std::ostringstream buffer;
  if (c.format == "json") {
    report.write_json(buffer);
  } else {
    report.write_text(buffer);
  }
  if (c.out.empty()) {
    std::cout << buffer.str();
    return;
  }
  std::ofstream file(c.out, std::ios::binary);
  if (!file) throw Error(ErrorKind::Io, fmt::format("cannot write '{}'", c.out));
  file << buffer.str();
}

struct Loaded {
  ModelSchema schema;
  Table table;
  DesignMatrix design;
};

Loaded load(const DataFlags& d) {
  Loaded l;
  l.schema = load_schema(d.schema);
  l.table = read_csv(d.data);
  try {
    l.design = build_design(l.schema, l.table);
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("{}: {}", d.data, e.what()));
  }
  return l;
}

void add_input(Report& report, const DataFlags& d, const Loaded& l) {
  report.add(Json{{"record", "input"},
                  {"data", d.data},
                  {"schema", d.schema},
                  {"rows", static_cast<std::size_t>(l.design.n())}});
  add_schema(report, l.schema);
}

using Clock = std::chrono::steady_clock;

void add_timing(Report& report, const Common& c, Clock::time_point start) {
  if (!c.timing) return;
  report.add(Json{{"record", "timing"},
                  {"seconds", std::chrono::duration<double>(Clock::now() - start).count()}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proportional-odds models with monotonicity constraints on ordinal predictors"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  Common common;
  DataFlags data;
  MdcFlags mdc_flags;
  std::string strategy_name = "cmle";
  double alpha_star = 0.05;
  double ci_level = 0.95;

  auto* fit = app.add_subcommand("fit", "Fit a model with one estimation strategy");
  add_data(fit, data);
  add_common(fit, common);
  add_mdc(fit, mdc_flags);
  fit->add_option("--strategy", strategy_name, "umle, cmle, cmle_bonferroni or cmle_filtered")
      ->check(CLI::IsMember({"umle", "cmle", "cmle_bonferroni", "cmle_filtered"}));
  fit->add_option("--alpha-star", alpha_star, "Level of the Bonferroni monotonicity test");
  fit->add_option("--ci-level", ci_level, "Level of the reported Wald intervals");

  auto* test = app.add_subcommand("test", "Bonferroni monotonicity test for every ordinal predictor");
  add_data(test, data);
  add_common(test, common);
  test->add_option("--alpha-star", alpha_star, "Test level");

  auto* mdc = app.add_subcommand("mdc", "Direction classification (steps 1 and 2) without a constrained fit");
  add_data(mdc, data);
  add_common(mdc, common);
  add_mdc(mdc, mdc_flags);

  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicates, sample_size;
  std::optional<double> sim_alpha;
  std::vector<std::string> sim_strategies;
  std::optional<std::uint64_t> emit_replicate;
  auto* simulate = app.add_subcommand("simulate", "Run a simulation scenario and report MSE");
  simulate->add_option("--scenario", scenario_path, "YAML scenario file")->required();
  add_common(simulate, common);
  add_mdc(simulate, mdc_flags);
  simulate->add_option("--seed", seed, "Override the scenario seed");
  simulate->add_option("--replicates", replicates, "Override the replicate count")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--n", sample_size, "Override the sample size")->check(CLI::PositiveNumber);
  simulate->add_option("--alpha-star", sim_alpha, "Override the test level");
  simulate->add_option("--strategy", sim_strategies, "Strategies to compare (repeatable)")
      ->check(CLI::IsMember({"umle", "cmle", "cmle_bonferroni", "cmle_filtered"}));
  simulate->add_option("--emit-csv", emit_replicate,
                       "Write the dataset of this replicate as CSV instead of running the study");

  auto* validate = app.add_subcommand("validate", "Check a data file against a schema");
  add_data(validate, data);
  add_common(validate, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  const auto start = Clock::now();
  try {
    if (fit->parsed()) {
      const Loaded l = load(data);
      StrategyConfig cfg;
      cfg.strategy = parse_strategy(strategy_name);
      mdc_flags.apply(cfg.mdc);
      cfg.alpha_star = alpha_star;
      cfg.threads = common.threads;
      if (!(ci_level > 0.0 && ci_level < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "--ci-level must lie in (0, 1)");
      }
      Report report("fit");
      add_input(report, data, l);
      add_config(report, cfg, ci_level);
      const auto outcome = run_strategy(l.design, l.schema, cfg);
      add_outcome(report, l.schema, outcome, cfg, ci_level);
      add_timing(report, common, start);
      emit(report, common);
    } else if (test->parsed()) {
      const Loaded l = load(data);
      Report report("test");
      add_input(report, data, l);
      const FitResult umle = fit_unconstrained(l.design);
      add_fit(report, "umle", umle, l.schema, 0.95);
      std::vector<MonotonicityTestResult> tests;
      for (std::size_t s = 0; s < l.schema.ordinal.size(); ++s) {
        tests.push_back(monotonicity_test(umle, s, alpha_star));
      }
      add_tests(report, l.schema, tests);
      add_timing(report, common, start);
      emit(report, common);
    } else if (mdc->parsed()) {
      const Loaded l = load(data);
      MdcConfig cfg;
      mdc_flags.apply(cfg);
      cfg.validate();
      Report report("mdc");
      add_input(report, data, l);
      const FitResult umle = fit_unconstrained(l.design);
      const DirectionState step1 = mdc_step1(umle, cfg);
      const DirectionState step2 = mdc_step2(umle, step1, cfg);
      add_mdc_trace(report, l.schema, step1, step2, std::nullopt, umle, cfg.c_initial);
      for (std::size_t s : step2.unresolved()) {
        report.add(Json{{"record", "diagnostic"},
                        {"message", fmt::format("{} is still '{}' after step 2; the fit "
                                                "command settles it by step 3",
                                                l.schema.ordinal[s].name,
                                                to_string(step2.predictors[s].label))}});
      }
      add_timing(report, common, start);
      emit(report, common);
    } else if (simulate->parsed()) {
      ScenarioFile sf = load_scenario(scenario_path);
      if (seed) sf.spec.seed = *seed;
      if (replicates) sf.spec.replicates = *replicates;
      if (sample_size) sf.spec.n = *sample_size;
      if (sim_alpha) sf.study.alpha_star = *sim_alpha;
      if (!sim_strategies.empty()) {
        sf.study.strategies.clear();
        for (const auto& s : sim_strategies) sf.study.strategies.push_back(parse_strategy(s));
      }
      mdc_flags.apply(sf.study.mdc);
      sf.study.mdc.validate();
      if (simulate->count("--threads") > 0) sf.study.threads = common.threads;

      if (emit_replicate) {
        const auto obs = generate_observations(sf.spec, *emit_replicate);
        std::ostringstream buffer;
        write_csv(buffer, observations_table(sf.spec.schema, obs));
        if (common.out.empty()) {
          std::cout << buffer.str();
        } else {
          std::ofstream file(common.out, std::ios::binary);
          if (!file) throw Error(ErrorKind::Io, fmt::format("cannot write '{}'", common.out));
          file << buffer.str();
        }
        return kOk;
      }
      Report report("simulate");
      add_schema(report, sf.spec.schema);
      const MseReport mse = run_study(sf.spec, sf.study);
      add_study(report, sf.spec, sf.study, mse);
      add_timing(report, common, start);
      emit(report, common);
    } else if (validate->parsed()) {
      const Loaded l = load(data);
      Report report("validate");
      add_input(report, data, l);
      const auto obs = parse_observations(l.schema, l.table);
      auto counts = [&](const std::vector<std::string>& levels, auto code) {
        Json c = Json::object();
        std::vector<int> tally(levels.size(), 0);
        for (const auto& o : obs) ++tally[static_cast<std::size_t>(code(o))];
        for (std::size_t i = 0; i < levels.size(); ++i) c[levels[i]] = tally[i];
        return c;
      };
      report.add(Json{{"record", "validation"},
                      {"rows", obs.size()},
                      {"response_counts",
                       counts(l.schema.response_levels, [](const Observation& o) { return o.response; })}});
      for (std::size_t s = 0; s < l.schema.ordinal.size(); ++s) {
        report.add(Json{{"record", "category_counts"},
                        {"kind", "ordinal"},
                        {"predictor", l.schema.ordinal[s].name},
                        {"counts", counts(l.schema.ordinal[s].levels,
                                          [s](const Observation& o) { return o.ordinal[s]; })}});
      }
      for (std::size_t u = 0; u < l.schema.nominal.size(); ++u) {
        report.add(Json{{"record", "category_counts"},
                        {"kind", "nominal"},
                        {"predictor", l.schema.nominal[u].name},
                        {"counts", counts(l.schema.nominal[u].levels,
                                          [u](const Observation& o) { return o.nominal[u]; })}});
      }
      add_timing(report, common, start);
      emit(report, common);
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kOk;
}
