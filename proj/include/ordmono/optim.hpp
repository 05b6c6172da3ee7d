#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ordmono/constraints.hpp"
#include "ordmono/design.hpp"
#include "ordmono/likelihood.hpp"

namespace ordmono {

struct OptimOptions {
  double gradient_tol = 1e-6;   // unconstrained, max-norm
  double kkt_tol = 1e-5;        // constrained, projected gradient max-norm
  int max_iterations = 200;     // Newton iterations / barrier outer iterations
  int max_inner = 50;           // Newton iterations per barrier subproblem
  double mu_initial = 1e-2;
  double mu_shrink = 0.2;
  double mu_final = 1e-9;
  double interior_margin = 1e-4;
  double active_tol = 1e-6;
  double separation_bound = 30.0;
};

struct FitResult {
  ParameterVector params;
  std::optional<Eigen::VectorXd> se;  // flat layout; unconstrained fits only
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  bool constrained = false;
  std::vector<Eigen::Index> active_constraints;  // rows of C
  std::string strategy_tag;
  // Max-norm of the gradient (unconstrained) or of the KKT residual.
  double gradient_norm = 0.0;
  // True log-likelihood after each barrier outer iteration.
  std::vector<double> outer_logliks;
  // Copied from the design so downstream consumers can address blocks.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> ordinal_blocks;
  DirectionAssignment directions;  // empty for unconstrained fits
};

// Newton's method on (alpha_1, log alpha increments, beta). Throws
// Nonconvergence, Separation (|beta| > 30) or DegenerateDesign.
FitResult fit_unconstrained(const DesignMatrix& design, const OptimOptions& options = {});

// Log-barrier interior-point maximisation subject to C beta_ord >= 0. The
// starting point is the projected and strictified UMLE; pass one in to avoid
// refitting it.
FitResult fit_constrained(const DesignMatrix& design, const ConstraintSet& cs,
                          const FitResult* umle = nullptr,
                          const OptimOptions& options = {});

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

// Two-sided standard-normal quantile z with P(|Z| <= z) = level.
double normal_critical_value(double level);

// Wald intervals for every entry of beta. Throws ConstrainedFitHasNoSE and
// InvalidArgument for level outside (0, 1).
std::vector<Interval> wald_ci(const FitResult& fit, double level);

// Intervals of ordinal predictor s at the given level, baseline first ([0, 0]).
std::vector<Interval> ordinal_cis(const FitResult& fit, std::size_t s, double level);

// Starting point inside the cone: PAVA projection of each constrained block
// followed by separating ties by the margin.
Eigen::VectorXd strictly_feasible(const ConstraintSet& cs, const Eigen::VectorXd& beta_ord,
                                  double margin);

}  // namespace ordmono
