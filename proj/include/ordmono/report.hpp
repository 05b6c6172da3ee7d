#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ordmono/design.hpp"
#include "ordmono/simgen.hpp"
#include "ordmono/strategies.hpp"

namespace ordmono {

inline constexpr const char* kToolName = "ordmono";
inline constexpr const char* kToolVersion = "0.1.0";

using Json = nlohmann::ordered_json;

// A report is a sequence of flat records, each tagged with a "record" field.
// The JSON form writes one record per line; the text form is rendered from
// the same records, so both carry the same information.
class Report {
 public:
  explicit Report(const std::string& command);

  void add(Json record) { records_.push_back(std::move(record)); }
  const std::vector<Json>& records() const { return records_; }

  void write_json(std::ostream& os) const;
  void write_text(std::ostream& os) const;

 private:
  std::vector<Json> records_;
};

std::vector<Json> parse_json_lines(const std::string& text);

struct RunContext {
  std::string data_path;
  std::string schema_path;
  std::size_t rows = 0;
  double ci_level = 0.95;
};

void add_schema(Report& report, const ModelSchema& schema);
void add_config(Report& report, const StrategyConfig& config, double ci_level);

// Estimates with standard errors and Wald intervals when available.
void add_fit(Report& report, const std::string& role, const FitResult& fit,
             const ModelSchema& schema, double ci_level);

// Step-1 labels with their pair indicators, every step-2 level tried, the
// step-3 candidates and the final decision per ordinal predictor.
void add_mdc_trace(Report& report, const ModelSchema& schema, const DirectionState& step1,
                   const DirectionState& final_state,
                   const std::optional<Step3Result>& step3, const FitResult& umle,
                   double c_initial);

void add_tests(Report& report, const ModelSchema& schema,
               const std::vector<MonotonicityTestResult>& tests);

void add_outcome(Report& report, const ModelSchema& schema, const StrategyOutcome& outcome,
                 const StrategyConfig& config, double ci_level);

void add_study(Report& report, const ScenarioSpec& spec, const StudyConfig& config,
               const MseReport& mse);

}  // namespace ordmono
