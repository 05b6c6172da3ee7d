#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ordmono/constraints.hpp"
#include "ordmono/optim.hpp"

namespace ordmono {

enum class Label { Isotonic, Antitonic, Both, None };

std::string_view to_string(Label label);

// Relative position of the intervals of categories p and p_prime < p
// (1-based category numbers, category 1 is the baseline).
struct PairIndicator {
  std::size_t s = 0;
  int p = 0;
  int p_prime = 0;
  int value = 0;  // 1: p above p_prime, -1: below, 0: overlap
};

// All q(q-1)/2 indicators from the baseline-first interval list.
std::vector<PairIndicator> pair_indicators(std::size_t s, const std::vector<Interval>& cis);

// Maps the set of distinct indicator values to a label.
Label classify_indicators(const std::vector<PairIndicator>& pairs);

struct MdcConfig {
  double c_initial = 0.90;
  double c_lower_tol = 0.85;
  double c_upper_tol = 0.999;
  double step = 0.01;
  int max_unresolved = 12;  // step 3 fits at most 2^max_unresolved models

  void validate() const;
};

struct LevelTrial {
  double level;
  Label label;
};

struct PredictorState {
  Label label = Label::Both;
  double decided_at = 0.0;
  int decided_in_step = 1;
  Label step1_label = Label::Both;
  bool constrained = true;      // false: treated as nominal, outside MDC
  std::vector<LevelTrial> trials;  // step-2 walk, in order
  std::optional<Direction> step3_direction;

  bool resolved() const { return label == Label::Isotonic || label == Label::Antitonic; }
  // Direction used for the constrained fit (Unconstrained when undecided).
  Direction direction() const;
};

struct DirectionState {
  std::vector<PredictorState> predictors;
  std::vector<std::string> diagnostics;  // transient both/none flips

  bool complete() const;
  std::vector<std::size_t> unresolved() const;
  DirectionAssignment assignment() const;
};

struct Classification {
  Label label;
  std::vector<PairIndicator> pairs;
};

Classification classify_at_level(const FitResult& fit, std::size_t s, double level);

DirectionState mdc_step1(const FitResult& fit, const MdcConfig& config);

// Walks the confidence level per predictor: down towards c_lower_tol for
// 'both', up towards c_upper_tol for 'none' (skipped when ascend_none is
// false). Stops at the first isotonic/antitonic label.
DirectionState mdc_step2(const FitResult& fit, DirectionState state,
                         const MdcConfig& config, bool ascend_none = true);

struct Step3Candidate {
  DirectionAssignment assignment;
  double loglik;
};

struct Step3Result {
  DirectionAssignment assignment;
  std::optional<FitResult> fit;  // absent when nothing was left to enumerate
  std::vector<Step3Candidate> candidates;
};

// Fits every isotonic/antitonic combination of the unresolved constrained
// predictors and keeps the one with the largest log-likelihood (first in
// enumeration order on ties, isotonic before antitonic).
Step3Result mdc_step3(const DesignMatrix& design, DirectionState& state,
                      const ModelSchema& schema, const FitResult& umle,
                      const MdcConfig& config, int threads = 1,
                      const OptimOptions& options = {});

}  // namespace ordmono
