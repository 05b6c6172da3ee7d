#include "ordmono/strategies.hpp"

#include <fmt/format.h>

#include "ordmono/error.hpp"

namespace ordmono {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Umle: return "umle";
    case Strategy::Cmle: return "cmle";
    case Strategy::CmleBonferroni: return "cmle_bonferroni";
    case Strategy::CmleFiltered: return "cmle_filtered";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  for (Strategy s : {Strategy::Umle, Strategy::Cmle, Strategy::CmleBonferroni,
                     Strategy::CmleFiltered}) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorKind::InvalidArgument,
              fmt::format("unknown strategy '{}' (expected umle, cmle, "
                          "cmle_bonferroni or cmle_filtered)",
                          name));
}

StrategyOutcome run_strategy(const DesignMatrix& design, const ModelSchema& schema,
                             const StrategyConfig& config, const FitResult* umle) {
  config.mdc.validate();
  StrategyOutcome out;
  out.strategy = config.strategy;
  out.umle = umle ? *umle : fit_unconstrained(design, config.optim);
  const std::size_t t = schema.ordinal.size();

  if (config.strategy == Strategy::Umle) {
    out.fit = out.umle;
    out.assignment.assign(t, Direction::Unconstrained);
    return out;
  }

  DirectionState state = mdc_step1(out.umle, config.mdc);
  if (config.strategy == Strategy::CmleBonferroni) {
    for (std::size_t s = 0; s < t; ++s) {
      out.tests.push_back(monotonicity_test(out.umle, s, config.alpha_star_for(s)));
      if (out.tests.back().decision == TestDecision::Reject) {
        state.predictors[s].constrained = false;
      }
    }
  } else if (config.strategy == Strategy::CmleFiltered) {
    for (auto& ps : state.predictors) {
      if (ps.label == Label::None) ps.constrained = false;
    }
  }
  out.step1 = state;

  const bool ascend_none = config.strategy != Strategy::CmleFiltered;
  state = mdc_step2(out.umle, std::move(state), config.mdc, ascend_none);
  if (!state.complete()) {
    out.step3 = mdc_step3(design, state, schema, out.umle, config.mdc, config.threads,
                          config.optim);
  }
  out.assignment = state.assignment();
  out.state = std::move(state);

  if (out.step3 && out.step3->fit) {
    out.fit = *out.step3->fit;
  } else {
    out.fit = fit_constrained(design, build_constraints(schema, out.assignment), &out.umle,
                              config.optim);
  }
  out.fit.strategy_tag = std::string(to_string(config.strategy));
  return out;
}

}  // namespace ordmono
