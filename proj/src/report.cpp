#include "ordmono/report.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "ordmono/error.hpp"

namespace ordmono {

namespace {

Json number_or_null(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::string fixed(const Json& v, int digits = 6) {
  if (v.is_null()) return "-";
  return fmt::format("{:.{}f}", v.get<double>(), digits);
}

std::string general(const Json& v) {
  if (v.is_null()) return "-";
  return fmt::format("{:.6g}", v.get<double>());
}

std::string join(const Json& list, const char* sep = ", ") {
  std::string out;
  for (const auto& item : list) {
    if (!out.empty()) out += sep;
    out += item.is_string() ? item.get<std::string>() : item.dump();
  }
  return out;
}

std::string counts_string(const Json& counts) {
  std::string out;
  for (const auto& [key, value] : counts.items()) {
    if (!out.empty()) out += ' ';
    out += fmt::format("{}={}", key, value.get<int>());
  }
  return out;
}

Json directions_json(const DirectionAssignment& dirs) {
  Json out = Json::array();
  for (Direction d : dirs) out.push_back(std::string(to_string(d)));
  return out;
}

Json pair_json(const PairIndicator& p) {
  return Json{{"p", p.p}, {"p_prime", p.p_prime}, {"value", p.value}};
}

std::string label_string(Label l) { return std::string(to_string(l)); }

// Renders one record; `previous` is the record type rendered just before, so
// table headers are emitted once per run of rows.
void render(std::ostream& os, const Json& r, const std::string& previous) {
  const std::string type = r.at("record");
  const bool continues = previous == type;

  if (type == "run") {
    os << fmt::format("{} {} {}\n", r.at("tool").get<std::string>(),
                      r.at("version").get<std::string>(), r.at("command").get<std::string>());
  } else if (type == "input") {
    os << fmt::format("data: {} ({} rows)\n", r.at("data").get<std::string>(),
                      r.at("rows").get<std::size_t>());
    if (!r.at("schema").get<std::string>().empty()) {
      os << fmt::format("schema: {}\n", r.at("schema").get<std::string>());
    }
  } else if (type == "schema") {
    const auto& resp = r.at("response");
    os << fmt::format("response {}: {}\n", resp.at("name").get<std::string>(),
                      join(resp.at("levels")));
    for (const char* kind : {"ordinal", "nominal"}) {
      for (const auto& v : r.at(kind)) {
        os << fmt::format("{} {}: {}\n", kind, v.at("name").get<std::string>(),
                          join(v.at("levels"), " < "));
      }
    }
    if (!r.at("numeric").empty()) os << fmt::format("numeric: {}\n", join(r.at("numeric")));
  } else if (type == "config") {
    os << fmt::format(
        "strategy {}; levels c={} lower={} upper={} step={}; alpha*={}; ci level {}\n",
        r.at("strategy").get<std::string>(), general(r.at("c_initial")),
        general(r.at("c_lower_tol")), general(r.at("c_upper_tol")), general(r.at("step")),
        general(r.at("alpha_star")), general(r.at("ci_level")));
  } else if (type == "fit") {
    os << fmt::format("\n== {} fit ({})\n", r.at("role").get<std::string>(),
                      r.at("strategy").get<std::string>());
    os << fmt::format("loglik {:.8f}, {} after {} iterations, {} residual {:.3g}\n",
                      r.at("loglik").get<double>(),
                      r.at("converged").get<bool>() ? "converged" : "NOT converged",
                      r.at("iterations").get<int>(),
                      r.at("constrained").get<bool>() ? "KKT" : "gradient",
                      r.at("gradient_norm").get<double>());
    if (r.at("constrained").get<bool>()) {
      os << fmt::format("directions: {}\n", join(r.at("directions")));
      os << fmt::format("active constraints: {}\n",
                        r.at("active_constraints").empty() ? "none"
                                                           : join(r.at("active_constraints")));
    }
  } else if (type == "parameter") {
    if (!continues) {
      os << fmt::format("{:<24} {:>12} {:>10} {:>12} {:>12}\n", "parameter", "estimate", "se",
                        "lower", "upper");
    }
    os << fmt::format("{:<24} {:>12} {:>10} {:>12} {:>12}\n", r.at("name").get<std::string>(),
                      fixed(r.at("estimate")), fixed(r.at("se")), fixed(r.at("lower")),
                      fixed(r.at("upper")));
  } else if (type == "mdc_step1") {
    if (!continues) os << fmt::format("\n== MDC step 1 (level {})\n", general(r.at("level")));
    std::string pairs;
    for (const auto& p : r.at("pairs")) {
      pairs += fmt::format(" ({},{}):{:+d}", p.at("p").get<int>(), p.at("p_prime").get<int>(),
                           p.at("value").get<int>());
    }
    os << fmt::format("{}: {}\n  pairs{}\n", r.at("predictor").get<std::string>(),
                      r.at("label").get<std::string>(), pairs);
  } else if (type == "mdc_trial") {
    if (!continues) os << "\n== MDC step 2 (levels tried)\n";
    os << fmt::format("{}: level {:.4f} -> {}\n", r.at("predictor").get<std::string>(),
                      r.at("level").get<double>(), r.at("label").get<std::string>());
  } else if (type == "step3_candidate") {
    if (!continues) os << "\n== MDC step 3 (constrained log-likelihood per assignment)\n";
    os << fmt::format("{:<40} {:.8f}{}\n", join(r.at("assignment")),
                      r.at("loglik").get<double>(),
                      r.at("selected").get<bool>() ? "  <- selected" : "");
  } else if (type == "mdc_decision") {
    if (!continues) os << "\n== direction decisions\n";
    std::string how;
    if (!r.at("constrained").get<bool>()) {
      how = "left unconstrained";
    } else if (!r.at("step3_direction").is_null()) {
      how = fmt::format("{} by step 3", r.at("step3_direction").get<std::string>());
    } else if (r.at("decided_in_step").get<int>() == 3) {
      how = "undecided";
    } else {
      how = fmt::format("step {} at level {:.4f}", r.at("decided_in_step").get<int>(),
                        r.at("decided_at").get<double>());
    }
    os << fmt::format("{}: step 1 {}, after step 2 {}{} -> {} ({})\n",
                      r.at("predictor").get<std::string>(),
                      r.at("step1_label").get<std::string>(),
                      r.at("step2_label").get<std::string>(),
                      r.at("both").get<bool>() ? " [both]" : "",
                      r.at("direction").get<std::string>(), how);
  } else if (type == "test") {
    if (!continues) os << "\n== Bonferroni monotonicity tests\n";
    std::string witness;
    if (!r.at("witness_up").is_null()) {
      const auto& up = r.at("witness_up");
      const auto& down = r.at("witness_down");
      witness = fmt::format(" (category {} above {}, category {} below {})",
                            up.at("p").get<int>(), up.at("p_prime").get<int>(),
                            down.at("p").get<int>(), down.at("p_prime").get<int>());
    }
    os << fmt::format("{}: alpha*={} b={:.6f} {}{}\n", r.at("predictor").get<std::string>(),
                      general(r.at("alpha_star")), r.at("b_level").get<double>(),
                      r.at("decision").get<std::string>(), witness);
  } else if (type == "diagnostic") {
    os << "note: " << r.at("message").get<std::string>() << '\n';
  } else if (type == "validation") {
    os << fmt::format("{} rows valid\nresponse: {}\n", r.at("rows").get<std::size_t>(),
                      counts_string(r.at("response_counts")));
  } else if (type == "category_counts") {
    os << fmt::format("{} {}: {}\n", r.at("kind").get<std::string>(),
                      r.at("predictor").get<std::string>(), counts_string(r.at("counts")));
  } else if (type == "study") {
    os << fmt::format("\n== study {}: n={} seed={} replicates={} used={} failed={}\n",
                      r.at("scenario").get<std::string>(), r.at("n").get<int>(),
                      r.at("seed").get<std::uint64_t>(), r.at("replicates").get<int>(),
                      r.at("used").get<int>(), r.at("failed").get<int>());
  } else if (type == "failure") {
    os << fmt::format("replicate {} failed: {}\n", r.at("replicate").get<std::uint64_t>(),
                      r.at("message").get<std::string>());
  } else if (type == "strategy_summary") {
    os << fmt::format("\n-- {} (step 3 used in {} replicates)\n",
                      r.at("strategy").get<std::string>(), r.at("step3_runs").get<int>());
  } else if (type == "moments") {
    if (!continues) {
      os << fmt::format("{:<24} {:>10} {:>12} {:>12} {:>12} {:>12}\n", "parameter", "truth",
                        "mean", "variance", "bias^2", "mse");
    }
    os << fmt::format("{:<24} {:>10.4f} {:>12.6f} {:>12.6g} {:>12.6g} {:>12.6g}\n",
                      r.at("parameter").get<std::string>(), r.at("truth").get<double>(),
                      r.at("mean").get<double>(), r.at("variance").get<double>(),
                      r.at("bias2").get<double>(), r.at("mse").get<double>());
  } else if (type == "labels") {
    os << fmt::format("{} {}: {}\n", r.at("predictor").get<std::string>(),
                      r.at("stage").get<std::string>(), counts_string(r.at("counts")));
  } else if (type == "rejections") {
    os << fmt::format("{} rejected: {}\n", r.at("predictor").get<std::string>(),
                      r.at("count").get<int>());
  } else if (type == "reduction") {
    if (!continues) os << "MSE reduction vs umle (mean per parameter, pooled):\n";
    os << fmt::format("  {:<20} {:>8.2f}% {:>8.2f}%\n", r.at("group").get<std::string>(),
                      100.0 * r.at("mean_relative").get<double>(),
                      100.0 * r.at("pooled").get<double>());
  } else if (type == "timing") {
    os << fmt::format("elapsed {:.3f} s\n", r.at("seconds").get<double>());
  } else {
    os << r.dump() << '\n';
  }
}

}  // namespace

Report::Report(const std::string& command) {
  add(Json{{"record", "run"}, {"tool", kToolName}, {"version", kToolVersion},
           {"command", command}});
}

void Report::write_json(std::ostream& os) const {
  for (const auto& r : records_) os << r.dump() << '\n';
}

void Report::write_text(std::ostream& os) const {
  std::string previous;
  for (const auto& r : records_) {
    render(os, r, previous);
    previous = r.at("record").get<std::string>();
  }
}

std::vector<Json> parse_json_lines(const std::string& text) {
  std::vector<Json> out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Parse, fmt::format("line {}: {}", number, e.what()));
    }
  }
  return out;
}

void add_schema(Report& report, const ModelSchema& schema) {
  auto vars = [](const std::vector<CategoricalVariable>& list) {
    Json out = Json::array();
    for (const auto& v : list) out.push_back(Json{{"name", v.name}, {"levels", v.levels}});
    return out;
  };
  report.add(Json{{"record", "schema"},
                  {"response", {{"name", schema.response_name},
                                {"levels", schema.response_levels}}},
                  {"ordinal", vars(schema.ordinal)},
                  {"nominal", vars(schema.nominal)},
                  {"numeric", schema.numeric}});
}

void add_config(Report& report, const StrategyConfig& config, double ci_level) {
  report.add(Json{{"record", "config"},
                  {"strategy", std::string(to_string(config.strategy))},
                  {"c_initial", config.mdc.c_initial},
                  {"c_lower_tol", config.mdc.c_lower_tol},
                  {"c_upper_tol", config.mdc.c_upper_tol},
                  {"step", config.mdc.step},
                  {"max_unresolved", config.mdc.max_unresolved},
                  {"alpha_star", config.alpha_star},
                  {"ci_level", ci_level}});
}

void add_fit(Report& report, const std::string& role, const FitResult& fit,
             const ModelSchema& schema, double ci_level) {
  Json active = Json::array();
  for (auto row : fit.active_constraints) active.push_back(row);
  report.add(Json{{"record", "fit"},
                  {"role", role},
                  {"strategy", fit.strategy_tag.empty() ? std::string("umle") : fit.strategy_tag},
                  {"loglik", fit.loglik},
                  {"converged", fit.converged},
                  {"iterations", fit.iterations},
                  {"gradient_norm", fit.gradient_norm},
                  {"constrained", fit.constrained},
                  {"directions", directions_json(fit.directions)},
                  {"active_constraints", active}});

  const Eigen::VectorXd theta = fit.params.flat();
  const auto layout = parameter_layout(schema);
  const double z = fit.se ? normal_critical_value(ci_level) : 0.0;
  for (std::size_t j = 0; j < layout.size(); ++j) {
    const auto idx = static_cast<Eigen::Index>(j);
    std::optional<double> se, lo, hi;
    if (fit.se) {
      se = (*fit.se)[idx];
      lo = theta[idx] - z * *se;
      hi = theta[idx] + z * *se;
    }
    report.add(Json{{"record", "parameter"},
                    {"role", role},
                    {"name", layout[j].name},
                    {"estimate", theta[idx]},
                    {"se", number_or_null(se)},
                    {"lower", number_or_null(lo)},
                    {"upper", number_or_null(hi)}});
  }
}

void add_mdc_trace(Report& report, const ModelSchema& schema, const DirectionState& step1,
                   const DirectionState& final_state,
                   const std::optional<Step3Result>& step3, const FitResult& umle,
                   double c_initial) {
  const std::size_t t = schema.ordinal.size();
  for (std::size_t s = 0; s < t; ++s) {
    const auto c = classify_at_level(umle, s, c_initial);
    Json pairs = Json::array();
    for (const auto& p : c.pairs) pairs.push_back(pair_json(p));
    report.add(Json{{"record", "mdc_step1"},
                    {"predictor", schema.ordinal[s].name},
                    {"level", c_initial},
                    {"label", label_string(step1.predictors[s].label)},
                    {"constrained", step1.predictors[s].constrained},
                    {"pairs", pairs}});
  }
  for (std::size_t s = 0; s < t; ++s) {
    for (const auto& trial : final_state.predictors[s].trials) {
      report.add(Json{{"record", "mdc_trial"},
                      {"predictor", schema.ordinal[s].name},
                      {"level", trial.level},
                      {"label", label_string(trial.label)}});
    }
  }
  if (step3) {
    for (const auto& cand : step3->candidates) {
      Json names = Json::array();
      for (std::size_t s = 0; s < cand.assignment.size(); ++s) {
        names.push_back(fmt::format("{}={}", schema.ordinal[s].name,
                                    to_string(cand.assignment[s])));
      }
      report.add(Json{{"record", "step3_candidate"},
                      {"assignment", names},
                      {"loglik", cand.loglik},
                      {"selected", cand.assignment == step3->assignment}});
    }
  }
  for (std::size_t s = 0; s < t; ++s) {
    const auto& ps = final_state.predictors[s];
    Json step3_dir = ps.step3_direction ? Json(std::string(to_string(*ps.step3_direction)))
                                        : Json(nullptr);
    report.add(Json{{"record", "mdc_decision"},
                    {"predictor", schema.ordinal[s].name},
                    {"step1_label", label_string(ps.step1_label)},
                    {"step2_label", label_string(ps.label)},
                    {"both", ps.label == Label::Both},
                    {"decided_in_step", ps.resolved() || !ps.constrained ? ps.decided_in_step : 3},
                    {"decided_at", ps.decided_at},
                    {"constrained", ps.constrained},
                    {"step3_direction", step3_dir},
                    {"direction", std::string(to_string(ps.direction()))}});
  }
  for (const auto& msg : final_state.diagnostics) {
    report.add(Json{{"record", "diagnostic"}, {"message", msg}});
  }
}

void add_tests(Report& report, const ModelSchema& schema,
               const std::vector<MonotonicityTestResult>& tests) {
  for (const auto& t : tests) {
    Json up = nullptr, down = nullptr;
    if (t.witness) {
      up = pair_json(t.witness->first);
      down = pair_json(t.witness->second);
    }
    report.add(Json{{"record", "test"},
                    {"predictor", schema.ordinal[t.s].name},
                    {"alpha_star", t.alpha_star},
                    {"b_level", t.b_level},
                    {"decision", std::string(to_string(t.decision))},
                    {"witness_up", up},
                    {"witness_down", down}});
  }
}

void add_outcome(Report& report, const ModelSchema& schema, const StrategyOutcome& outcome,
                 const StrategyConfig& config, double ci_level) {
  add_fit(report, "umle", outcome.umle, schema, ci_level);
  if (outcome.strategy == Strategy::Umle) return;
  if (outcome.step1) {
    add_mdc_trace(report, schema, *outcome.step1, outcome.state, outcome.step3, outcome.umle,
                  config.mdc.c_initial);
  }
  add_tests(report, schema, outcome.tests);
  add_fit(report, "final", outcome.fit, schema, ci_level);
}

void add_study(Report& report, const ScenarioSpec& spec, const StudyConfig& config,
               const MseReport& mse) {
  Json strategies = Json::array();
  for (Strategy s : config.strategies) strategies.push_back(std::string(to_string(s)));
  report.add(Json{{"record", "study"},
                  {"scenario", mse.scenario},
                  {"n", spec.n},
                  {"seed", spec.seed},
                  {"replicates", mse.replicates},
                  {"used", mse.used},
                  {"failed", static_cast<int>(mse.failures.size())},
                  {"strategies", strategies},
                  {"alpha_star", config.alpha_star},
                  {"c_initial", config.mdc.c_initial},
                  {"c_lower_tol", config.mdc.c_lower_tol},
                  {"c_upper_tol", config.mdc.c_upper_tol},
                  {"step", config.mdc.step}});
  for (const auto& f : mse.failures) {
    report.add(Json{{"record", "failure"}, {"replicate", f.replicate}, {"message", f.message}});
  }
  const std::size_t t = spec.schema.ordinal.size();
  for (const auto& sum : mse.strategies) {
    const std::string name(to_string(sum.strategy));
    report.add(Json{{"record", "strategy_summary"},
                    {"strategy", name},
                    {"step3_runs", sum.step3_runs}});
    for (std::size_t j = 0; j < sum.moments.size(); ++j) {
      const auto& m = sum.moments[j];
      report.add(Json{{"record", "moments"},
                      {"strategy", name},
                      {"parameter", mse.parameter_names[j]},
                      {"truth", mse.truth[static_cast<Eigen::Index>(j)]},
                      {"mean", m.mean},
                      {"variance", m.variance},
                      {"bias2", m.bias2},
                      {"mse", m.mse}});
    }
    if (sum.strategy != Strategy::Umle) {
      const std::pair<const char*, const std::vector<std::map<std::string, int>>*> stages[] = {
          {"step1", &sum.step1_labels},
          {"step2", &sum.step2_labels},
          {"final", &sum.final_directions}};
      for (const auto& [stage, counts] : stages) {
        for (std::size_t s = 0; s < t; ++s) {
          Json c = Json::object();
          for (const auto& [label, count] : (*counts)[s]) c[label] = count;
          report.add(Json{{"record", "labels"},
                          {"strategy", name},
                          {"predictor", spec.schema.ordinal[s].name},
                          {"stage", stage},
                          {"counts", c}});
        }
      }
    }
    for (std::size_t s = 0; s < sum.test_rejections.size(); ++s) {
      report.add(Json{{"record", "rejections"},
                      {"strategy", name},
                      {"predictor", spec.schema.ordinal[s].name},
                      {"count", sum.test_rejections[s]}});
    }
    for (const auto& g : sum.reductions) {
      report.add(Json{{"record", "reduction"},
                      {"strategy", name},
                      {"group", g.group},
                      {"mean_relative", g.mean_relative},
                      {"pooled", g.pooled}});
    }
  }
}

}  // namespace ordmono
