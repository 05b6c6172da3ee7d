#pragma once

#include <optional>
#include <utility>

#include "ordmono/mdc.hpp"

namespace ordmono {

enum class TestDecision { Reject, NotReject };

std::string_view to_string(TestDecision d);

struct MonotonicityTestResult {
  std::size_t s = 0;
  double alpha_star = 0.05;
  double b_level = 0.0;  // individual level 1 - alpha*/(q_s - 1)
  TestDecision decision = TestDecision::NotReject;
  // On rejection: the first pair separating upwards and the first separating
  // downwards.
  std::optional<std::pair<PairIndicator, PairIndicator>> witness;
};

// Bonferroni test of H0: the coefficients of predictor s are isotonic or
// antitonic. Rejects when intervals at the individual level b separate in
// both directions.
MonotonicityTestResult monotonicity_test(const FitResult& fit, std::size_t s,
                                         double alpha_star = 0.05);

}  // namespace ordmono
