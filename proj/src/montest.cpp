#include "ordmono/montest.hpp"

#include <fmt/format.h>

#include "ordmono/error.hpp"

namespace ordmono {

std::string_view to_string(TestDecision d) {
  return d == TestDecision::Reject ? "reject" : "not_reject";
}

MonotonicityTestResult monotonicity_test(const FitResult& fit, std::size_t s,
                                         double alpha_star) {
  if (!(alpha_star > 0.0 && alpha_star < 1.0)) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("alpha* must lie in (0, 1), got {}", alpha_star));
  }
  if (s >= fit.ordinal_blocks.size()) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("ordinal predictor index {} out of range", s));
  }
  const auto width = static_cast<double>(fit.ordinal_blocks[s].second);
  MonotonicityTestResult out;
  out.s = s;
  out.alpha_star = alpha_star;
  out.b_level = 1.0 - alpha_star / width;

  const auto pairs = pair_indicators(s, ordinal_cis(fit, s, out.b_level));
  const PairIndicator* up = nullptr;
  const PairIndicator* down = nullptr;
  for (const auto& pi : pairs) {
    if (pi.value == 1 && !up) up = &pi;
    if (pi.value == -1 && !down) down = &pi;
  }
  if (up && down) {
    out.decision = TestDecision::Reject;
    out.witness = std::make_pair(*up, *down);
  }
  return out;
}

}  // namespace ordmono
