#include "ordmono/mdc.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ordmono/error.hpp"
#include "ordmono/parallel.hpp"

namespace ordmono {

namespace {

// Grid levels are snapped so that 0.99 - 19 * 0.01 prints and compares as 0.8.
double snap(double level) { return std::round(level * 1e9) / 1e9; }

std::vector<double> walk(double start, double limit, double step) {
  std::vector<double> levels;
  const double sign = limit < start ? -1.0 : 1.0;
  for (int m = 1;; ++m) {
    const double level = snap(start + sign * m * step);
    if (sign * (level - limit) >= -1e-12) break;
    levels.push_back(level);
  }
  levels.push_back(limit);
  return levels;
}

}  // namespace

std::string_view to_string(Label label) {
  switch (label) {
    case Label::Isotonic: return "isotonic";
    case Label::Antitonic: return "antitonic";
    case Label::Both: return "both";
    case Label::None: return "none";
  }
  return "unknown";
}

std::vector<PairIndicator> pair_indicators(std::size_t s, const std::vector<Interval>& cis) {
  std::vector<PairIndicator> out;
  const int q = static_cast<int>(cis.size());
  for (int p = 1; p < q; ++p) {
    for (int pp = 0; pp < p; ++pp) {
      int value = 0;
      if (cis[p].lower >= cis[pp].upper) {
        value = 1;
      } else if (cis[p].upper <= cis[pp].lower) {
        value = -1;
      }
      out.push_back({s, p + 1, pp + 1, value});
    }
  }
  return out;
}

Label classify_indicators(const std::vector<PairIndicator>& pairs) {
  bool up = false, down = false;
  for (const auto& pi : pairs) {
    up = up || pi.value == 1;
    down = down || pi.value == -1;
  }
  if (up && down) return Label::None;
  if (up) return Label::Isotonic;
  if (down) return Label::Antitonic;
  return Label::Both;
}

void MdcConfig::validate() const {
  if (!(0.0 < c_lower_tol && c_lower_tol < c_initial && c_initial < c_upper_tol &&
        c_upper_tol < 1.0)) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("confidence levels must satisfy 0 < {} < {} < {} < 1",
                            c_lower_tol, c_initial, c_upper_tol));
  }
  if (!(step > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "grid step must be positive");
  }
  if (max_unresolved < 0 || max_unresolved > 30) {
    throw Error(ErrorKind::InvalidArgument, "step-3 cap must lie in [0, 30]");
  }
}

Direction PredictorState::direction() const {
  if (!constrained) return Direction::Unconstrained;
  if (label == Label::Isotonic) return Direction::Isotonic;
  if (label == Label::Antitonic) return Direction::Antitonic;
  return step3_direction.value_or(Direction::Unconstrained);
}

bool DirectionState::complete() const { return unresolved().empty(); }

std::vector<std::size_t> DirectionState::unresolved() const {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < predictors.size(); ++s) {
    if (predictors[s].constrained && !predictors[s].resolved()) out.push_back(s);
  }
  return out;
}

DirectionAssignment DirectionState::assignment() const {
  DirectionAssignment dirs;
  for (const auto& p : predictors) dirs.push_back(p.direction());
  return dirs;
}

Classification classify_at_level(const FitResult& fit, std::size_t s, double level) {
  Classification c;
  c.pairs = pair_indicators(s, ordinal_cis(fit, s, level));
  c.label = classify_indicators(c.pairs);
  return c;
}

DirectionState mdc_step1(const FitResult& fit, const MdcConfig& config) {
  config.validate();
  DirectionState state;
  for (std::size_t s = 0; s < fit.ordinal_blocks.size(); ++s) {
    PredictorState ps;
    ps.label = classify_at_level(fit, s, config.c_initial).label;
    ps.step1_label = ps.label;
    ps.decided_at = config.c_initial;
    ps.decided_in_step = 1;
    state.predictors.push_back(ps);
  }
  return state;
}

DirectionState mdc_step2(const FitResult& fit, DirectionState state,
                         const MdcConfig& config, bool ascend_none) {
  config.validate();
  for (std::size_t s = 0; s < state.predictors.size(); ++s) {
    PredictorState& ps = state.predictors[s];
    if (!ps.constrained || ps.resolved()) continue;
    if (ps.label == Label::None && !ascend_none) continue;
    const Label start = ps.label;
    const auto levels = start == Label::Both
                            ? walk(config.c_initial, config.c_lower_tol, config.step)
                            : walk(config.c_initial, config.c_upper_tol, config.step);
    Label previous = start;
    for (double level : levels) {
      const Label label = classify_at_level(fit, s, level).label;
      ps.trials.push_back({level, label});
      ps.label = label;
      ps.decided_at = level;
      ps.decided_in_step = 2;
      if (ps.resolved()) break;
      if (label != previous) {
        state.diagnostics.push_back(fmt::format(
            "predictor {}: transient change {} -> {} at level {:.4g}", s + 1,
            to_string(previous), to_string(label), level));
      }
      previous = label;
    }
  }
  return state;
}

Step3Result mdc_step3(const DesignMatrix& design, DirectionState& state,
                      const ModelSchema& schema, const FitResult& umle,
                      const MdcConfig& config, int threads, const OptimOptions& options) {
  const auto open = state.unresolved();
  Step3Result result;
  result.assignment = state.assignment();
  if (open.empty()) return result;
  if (static_cast<int>(open.size()) > config.max_unresolved) {
    throw Error(ErrorKind::CombinationCapExceeded,
                fmt::format("{} unresolved predictors exceed the step-3 cap of {}",
                            open.size(), config.max_unresolved));
  }

  const std::size_t combos = std::size_t{1} << open.size();
  std::vector<DirectionAssignment> assignments(combos, result.assignment);
  for (std::size_t m = 0; m < combos; ++m) {
    for (std::size_t i = 0; i < open.size(); ++i) {
      const bool anti = (m >> (open.size() - 1 - i)) & 1U;
      assignments[m][open[i]] = anti ? Direction::Antitonic : Direction::Isotonic;
    }
  }
  std::vector<std::optional<FitResult>> fits(combos);
  parallel_for(combos, threads, [&](std::size_t m) {
    fits[m] = fit_constrained(design, build_constraints(schema, assignments[m]), &umle,
                              options);
  });

  std::size_t best = 0;
  for (std::size_t m = 0; m < combos; ++m) {
    result.candidates.push_back({assignments[m], fits[m]->loglik});
    if (fits[m]->loglik > fits[best]->loglik) best = m;
  }
  result.assignment = assignments[best];
  result.fit = std::move(fits[best]);
  for (std::size_t s : open) {
    state.predictors[s].step3_direction = result.assignment[s];
  }
  return result;
}

}  // namespace ordmono
