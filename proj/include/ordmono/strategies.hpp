#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "ordmono/mdc.hpp"
#include "ordmono/montest.hpp"
#include "ordmono/optim.hpp"

namespace ordmono {

enum class Strategy { Umle, Cmle, CmleBonferroni, CmleFiltered };

std::string_view to_string(Strategy s);
// Accepts umle, cmle, cmle_bonferroni, cmle_filtered. Throws InvalidArgument.
Strategy parse_strategy(std::string_view name);

struct StrategyConfig {
  Strategy strategy = Strategy::Cmle;
  MdcConfig mdc;
  double alpha_star = 0.05;
  std::vector<double> alpha_star_overrides;  // per ordinal predictor, optional
  int threads = 1;
  OptimOptions optim;

  double alpha_star_for(std::size_t s) const {
    return s < alpha_star_overrides.size() ? alpha_star_overrides[s] : alpha_star;
  }
};

struct StrategyOutcome {
  Strategy strategy = Strategy::Umle;
  FitResult umle;
  FitResult fit;  // final estimate of the strategy
  std::optional<DirectionState> step1;
  DirectionState state;  // after step 2, with step-3 directions filled in
  std::vector<MonotonicityTestResult> tests;
  std::optional<Step3Result> step3;
  DirectionAssignment assignment;
};

// Runs one estimation approach. Pass the UMLE when it is already available.
StrategyOutcome run_strategy(const DesignMatrix& design, const ModelSchema& schema,
                             const StrategyConfig& config,
                             const FitResult* umle = nullptr);

}  // namespace ordmono
