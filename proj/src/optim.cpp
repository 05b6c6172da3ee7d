#include "ordmono/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "ordmono/error.hpp"

namespace ordmono {

namespace {

// theta = (alpha, beta); phi = (alpha_1, log(alpha_2 - alpha_1), ..., beta).
Eigen::VectorXd to_theta(const Eigen::VectorXd& phi, Eigen::Index na) {
  Eigen::VectorXd theta = phi;
  for (Eigen::Index j = 1; j < na; ++j) theta[j] = theta[j - 1] + std::exp(phi[j]);
  return theta;
}

Eigen::VectorXd to_phi(const Eigen::VectorXd& theta, Eigen::Index na) {
  Eigen::VectorXd phi = theta;
  for (Eigen::Index j = 1; j < na; ++j) phi[j] = std::log(theta[j] - theta[j - 1]);
  return phi;
}

struct Local {
  double value = 0.0;   // objective (log-likelihood plus barrier)
  double loglik = 0.0;
  Eigen::VectorXd grad_theta;  // of the log-likelihood only
  Eigen::VectorXd grad_phi;    // of the objective
  Eigen::MatrixXd hess_phi;    // of the objective
};

class Objective {
 public:
  Objective(const DesignMatrix& design, const ConstraintSet* cs, double mu)
      : design_(design), cs_(cs), mu_(mu), na_(design.categories - 1) {}

  void set_mu(double mu) { mu_ = mu; }
  bool has_barrier() const { return cs_ != nullptr && !cs_->empty(); }
  Eigen::Index na() const { return na_; }

  Eigen::VectorXd slacks(const Eigen::VectorXd& phi) const {
    return cs_->C * phi.segment(na_, design_.ordinal_cols);
  }

  // Objective value, or nullopt outside the domain (infeasible or underflow).
  std::optional<double> value(const Eigen::VectorXd& phi) const {
    if (!phi.allFinite()) return std::nullopt;
    double barrier = 0.0;
    if (has_barrier()) {
      const Eigen::VectorXd s = slacks(phi);
      if (!(s.array() > 0.0).all()) return std::nullopt;
      barrier = mu_ * s.array().log().sum();
    }
    const auto params = ParameterVector::from_flat(to_theta(phi, na_), design_.categories);
    try {
      return loglik(params, design_) + barrier;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ProbabilityUnderflow ||
          e.kind() == ErrorKind::NonIncreasingIntercepts) {
        return std::nullopt;
      }
      throw;
    }
  }

  Local local(const Eigen::VectorXd& phi) const {
    const Eigen::VectorXd theta = to_theta(phi, na_);
    const auto ev = evaluate(ParameterVector::from_flat(theta, design_.categories), design_);
    const Eigen::Index p = theta.size();
    const Eigen::Index nb = p - na_;

    // Jacobian of alpha with respect to (alpha_1, log increments).
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(na_, na_);
    for (Eigen::Index j = 0; j < na_; ++j) {
      J(j, 0) = 1.0;
      for (Eigen::Index m = 1; m <= j; ++m) J(j, m) = std::exp(phi[m]);
    }
    const Eigen::MatrixXd H = -ev.observed_information;

    Local out;
    out.loglik = ev.loglik;
    out.value = ev.loglik;
    out.grad_theta = ev.gradient;
    out.grad_phi.resize(p);
    out.grad_phi.head(na_) = J.transpose() * ev.gradient.head(na_);
    out.grad_phi.tail(nb) = ev.gradient.tail(nb);
    out.hess_phi.resize(p, p);
    out.hess_phi.topLeftCorner(na_, na_) = J.transpose() * H.topLeftCorner(na_, na_) * J;
    out.hess_phi.topRightCorner(na_, nb) = J.transpose() * H.topRightCorner(na_, nb);
    out.hess_phi.bottomLeftCorner(nb, na_) = out.hess_phi.topRightCorner(na_, nb).transpose();
    out.hess_phi.bottomRightCorner(nb, nb) = H.bottomRightCorner(nb, nb);
    for (Eigen::Index m = 1; m < na_; ++m) {
      out.hess_phi(m, m) += std::exp(phi[m]) * ev.gradient.segment(m, na_ - m).sum();
    }

    if (has_barrier()) {
      const Eigen::Index no = design_.ordinal_cols;
      const Eigen::VectorXd s = slacks(phi);
      const Eigen::VectorXd inv = s.cwiseInverse();
      out.value += mu_ * s.array().log().sum();
      out.grad_phi.segment(na_, no) += mu_ * (cs_->C.transpose() * inv);
      out.hess_phi.block(na_, na_, no, no) -=
          mu_ * cs_->C.transpose() * inv.cwiseAbs2().asDiagonal() * cs_->C;
    }
    return out;
  }

  // Largest t with all slacks positive along direction delta.
  double max_step(const Eigen::VectorXd& phi, const Eigen::VectorXd& delta) const {
    if (!has_barrier()) return std::numeric_limits<double>::infinity();
    const Eigen::VectorXd s = slacks(phi);
    const Eigen::VectorXd ds = cs_->C * delta.segment(na_, design_.ordinal_cols);
    double t = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < s.size(); ++r) {
      if (ds[r] < 0.0) t = std::min(t, -s[r] / ds[r]);
    }
    return t;
  }

 private:
  const DesignMatrix& design_;
  const ConstraintSet* cs_;
  double mu_;
  Eigen::Index na_;
};

struct StepOutcome {
  bool moved = false;
  double decrement = 0.0;  // g' (-H)^{-1} g
};

// One damped Newton step with step halving.
StepOutcome newton_step(const Objective& obj, Eigen::VectorXd& phi, const Local& cur) {
  const Eigen::Index p = phi.size();
  Eigen::MatrixXd A = -cur.hess_phi;
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  double ridge = 1e-10 * std::max(1.0, A.diagonal().cwiseAbs().maxCoeff());
  while (llt.info() != Eigen::Success) {
    llt.compute(A + ridge * Eigen::MatrixXd::Identity(p, p));
    ridge *= 10.0;
    if (!std::isfinite(ridge)) return {};
  }
  const Eigen::VectorXd delta = llt.solve(cur.grad_phi);
  StepOutcome out;
  out.decrement = cur.grad_phi.dot(delta);

  double t = std::min(1.0, 0.99 * obj.max_step(phi, delta));
  const double slack = 1e-12 * (1.0 + std::abs(cur.value));
  for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
    const Eigen::VectorXd candidate = phi + t * delta;
    const auto v = obj.value(candidate);
    if (!v) continue;
    const bool ascent = *v >= cur.value + 1e-4 * t * out.decrement;
    // Predicted gains below rounding of the objective cannot be verified.
    const bool negligible = 0.5 * t * out.decrement < slack && *v >= cur.value - slack;
    if (ascent || negligible) {
      phi = candidate;
      out.moved = true;
      return out;
    }
  }
  return out;
}

void check_separation(const DesignMatrix& design, const Eigen::VectorXd& phi,
                      Eigen::Index na, double bound) {
  for (Eigen::Index c = 0; c < design.beta_size(); ++c) {
    if (std::abs(phi[na + c]) > bound) {
      throw Error(ErrorKind::Separation,
                  fmt::format("coefficient of '{}' exceeded {} on the logit scale "
                              "(separation)",
                              design.columns[static_cast<std::size_t>(c)].name, bound));
    }
  }
}

void check_design(const DesignMatrix& design) {
  if (design.categories < 3) {
    throw Error(ErrorKind::DegenerateDesign, "the response needs at least 3 categories");
  }
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(design.categories), 0);
  for (int c : design.response) ++counts[static_cast<std::size_t>(c)];
  for (int c = 0; c < design.categories; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) {
      throw Error(ErrorKind::DegenerateDesign,
                  fmt::format("response category {} is never observed", c + 1));
    }
  }
  for (Eigen::Index c = 0; c < design.beta_size(); ++c) {
    if (design.x.col(c).cwiseAbs().maxCoeff() == 0.0) {
      throw Error(ErrorKind::DegenerateDesign,
                  fmt::format("column '{}' is identically zero",
                              design.columns[static_cast<std::size_t>(c)].name));
    }
  }
}

// A dummy level whose observations all sit in the lowest (or all in the
// highest) response category has no finite maximum: sending its coefficient
// to -infinity (+infinity) raises the likelihood without bound.
void check_extreme_levels(const DesignMatrix& design) {
  const int top = design.categories - 1;
  for (Eigen::Index c = 0; c < design.beta_size(); ++c) {
    const auto& col = design.columns[static_cast<std::size_t>(c)];
    if (col.kind == ColumnKind::Numeric) continue;
    bool all_low = true, all_high = true;
    for (Eigen::Index i = 0; i < design.n(); ++i) {
      if (design.x(i, c) == 0.0) continue;
      const int y = design.response[static_cast<std::size_t>(i)];
      all_low = all_low && y == 0;
      all_high = all_high && y == top;
    }
    if (all_low || all_high) {
      throw Error(ErrorKind::Separation,
                  fmt::format("every observation with '{}' is in the {} response category "
                              "(separation)",
                              col.name, all_low ? "lowest" : "highest"));
    }
  }
}

// Intercepts at the logits of the marginal cumulative proportions, beta = 0.
Eigen::VectorXd null_start(const DesignMatrix& design) {
  const Eigen::Index na = design.categories - 1;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(design.parameter_count());
  std::vector<double> counts(static_cast<std::size_t>(design.categories), 0.0);
  for (int c : design.response) counts[static_cast<std::size_t>(c)] += 1.0;
  double cumulative = 0.0;
  const double n = static_cast<double>(design.n());
  for (Eigen::Index j = 0; j < na; ++j) {
    cumulative += counts[static_cast<std::size_t>(j)];
    const double p = cumulative / n;
    theta[j] = std::log(p / (1.0 - p));
  }
  return theta;
}

}  // namespace

FitResult fit_unconstrained(const DesignMatrix& design, const OptimOptions& options) {
  check_design(design);
  check_extreme_levels(design);
  const Eigen::Index na = design.categories - 1;
  Objective obj(design, nullptr, 0.0);
  Eigen::VectorXd phi = to_phi(null_start(design), na);

  FitResult fit;
  fit.strategy_tag = "umle";
  fit.ordinal_blocks = design.ordinal_blocks;
  Local cur = obj.local(phi);
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if (cur.grad_theta.cwiseAbs().maxCoeff() < options.gradient_tol) {
      fit.converged = true;
      break;
    }
    if (!newton_step(obj, phi, cur).moved) break;
    check_separation(design, phi, na, options.separation_bound);
    cur = obj.local(phi);
  }
  if (!fit.converged && cur.grad_theta.cwiseAbs().maxCoeff() < options.gradient_tol) {
    fit.converged = true;
  }
  fit.iterations = it;
  fit.gradient_norm = cur.grad_theta.cwiseAbs().maxCoeff();
  if (!fit.converged) {
    throw Error(ErrorKind::Nonconvergence,
                fmt::format("Newton iterations stopped after {} steps with gradient "
                            "max-norm {:.3g}",
                            it, fit.gradient_norm));
  }

  const Eigen::VectorXd theta = to_theta(phi, na);
  fit.params = ParameterVector::from_flat(theta, design.categories);
  fit.loglik = cur.loglik;
  const auto ev = evaluate(fit.params, design);
  Eigen::LLT<Eigen::MatrixXd> llt(ev.observed_information);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::DegenerateDesign,
                "observed information is not positive definite at the optimum");
  }
  const Eigen::MatrixXd cov =
      llt.solve(Eigen::MatrixXd::Identity(theta.size(), theta.size()));
  fit.se = cov.diagonal().cwiseSqrt();
  return fit;
}

Eigen::VectorXd strictly_feasible(const ConstraintSet& cs, const Eigen::VectorXd& beta_ord,
                                  double margin) {
  Eigen::VectorXd out = beta_ord;
  for (const auto& b : cs.blocks) {
    const double sign = b.direction == Direction::Isotonic ? 1.0 : -1.0;
    Eigen::VectorXd block =
        sign * monotone_project(beta_ord.segment(b.column, b.size), b.direction);
    double floor = 0.0;
    for (Eigen::Index r = 0; r < b.size; ++r) {
      block[r] = std::max(block[r], floor + margin);
      floor = block[r];
    }
    out.segment(b.column, b.size) = sign * block;
  }
  return out;
}

FitResult fit_constrained(const DesignMatrix& design, const ConstraintSet& cs,
                          const FitResult* umle, const OptimOptions& options) {
  if (cs.C.cols() != design.ordinal_cols) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("constraint set spans {} ordinal columns, design has {}",
                            cs.C.cols(), design.ordinal_cols));
  }
  std::optional<FitResult> own_umle;
  if (umle == nullptr) {
    try {
      own_umle = fit_unconstrained(design, options);
      umle = &*own_umle;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Separation && e.kind() != ErrorKind::Nonconvergence) throw;
    }
  }
  if (cs.empty()) {
    FitResult fit = umle ? *umle : fit_unconstrained(design, options);
    fit.se.reset();
    fit.constrained = true;
    fit.strategy_tag = "cmle";
    fit.directions.assign(design.ordinal_blocks.size(), Direction::Unconstrained);
    return fit;
  }
  check_design(design);

  const Eigen::Index na = design.categories - 1;
  Eigen::VectorXd theta = umle ? umle->params.flat() : null_start(design);
  theta.segment(na, design.ordinal_cols) =
      strictly_feasible(cs, theta.segment(na, design.ordinal_cols), options.interior_margin);
  Eigen::VectorXd phi = to_phi(theta, na);

  Objective obj(design, &cs, options.mu_initial);
  if (!obj.value(phi)) {
    // The UMLE intercepts can underflow once beta_ord moves; fall back to the
    // marginal start, which keeps every cell probability positive.
    theta = null_start(design);
    theta.segment(na, design.ordinal_cols) =
        strictly_feasible(cs, theta.segment(na, design.ordinal_cols), options.interior_margin);
    phi = to_phi(theta, na);
  }

  FitResult fit;
  fit.constrained = true;
  fit.strategy_tag = "cmle";
  fit.ordinal_blocks = design.ordinal_blocks;
  fit.directions.assign(design.ordinal_blocks.size(), Direction::Unconstrained);
  for (const auto& b : cs.blocks) fit.directions[b.predictor] = b.direction;

  double mu = options.mu_initial;
  int total = 0;
  Local cur;
  for (int outer = 0; outer < options.max_iterations; ++outer) {
    obj.set_mu(mu);
    cur = obj.local(phi);
    for (int inner = 0; inner < options.max_inner; ++inner, ++total) {
      const StepOutcome step = newton_step(obj, phi, cur);
      if (!step.moved) break;
      check_separation(design, phi, na, options.separation_bound);
      cur = obj.local(phi);
      if (0.5 * step.decrement < 1e-13 ||
          cur.grad_phi.cwiseAbs().maxCoeff() < 1e-9) {
        break;
      }
    }
    fit.outer_logliks.push_back(cur.loglik);
    if (mu < options.mu_final) break;
    mu *= options.mu_shrink;
  }
  fit.iterations = total;

  theta = to_theta(phi, na);
  fit.params = ParameterVector::from_flat(theta, design.categories);
  fit.loglik = cur.loglik;

  const Eigen::VectorXd s = cs.C * fit.params.beta.head(design.ordinal_cols);
  std::vector<Eigen::Index> active;
  for (Eigen::Index r = 0; r < s.size(); ++r) {
    if (s[r] < options.active_tol) active.push_back(r);
  }
  fit.active_constraints = active;

  // KKT residual: grad + C_A' lambda with lambda >= 0 fitted by least squares.
  Eigen::VectorXd residual = cur.grad_theta;
  if (!active.empty()) {
    Eigen::MatrixXd CA(static_cast<Eigen::Index>(active.size()), cs.C.cols());
    for (std::size_t r = 0; r < active.size(); ++r) {
      CA.row(static_cast<Eigen::Index>(r)) = cs.C.row(active[r]);
    }
    const Eigen::VectorXd g_ord = cur.grad_theta.segment(na, design.ordinal_cols);
    Eigen::VectorXd lambda = CA.transpose().colPivHouseholderQr().solve(-g_ord);
    lambda = lambda.cwiseMax(0.0);
    residual.segment(na, design.ordinal_cols) += CA.transpose() * lambda;
  }
  fit.gradient_norm = residual.cwiseAbs().maxCoeff();
  fit.converged = fit.gradient_norm < options.kkt_tol;
  if (!fit.converged) {
    throw Error(ErrorKind::Nonconvergence,
                fmt::format("barrier method ended with KKT residual {:.3g}",
                            fit.gradient_norm));
  }
  return fit;
}

double normal_critical_value(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("confidence level must lie in (0, 1), got {}", level));
  }
  const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(boost::math::complement(standard, (1.0 - level) / 2.0));
}

std::vector<Interval> wald_ci(const FitResult& fit, double level) {
  if (fit.constrained || !fit.se) {
    throw Error(ErrorKind::ConstrainedFitHasNoSE,
                "confidence intervals need an unconstrained fit with standard errors");
  }
  const double z = normal_critical_value(level);
  const Eigen::Index na = fit.params.alpha.size();
  std::vector<Interval> out;
  out.reserve(static_cast<std::size_t>(fit.params.beta.size()));
  for (Eigen::Index c = 0; c < fit.params.beta.size(); ++c) {
    const double half = z * (*fit.se)[na + c];
    out.push_back({fit.params.beta[c] - half, fit.params.beta[c] + half});
  }
  return out;
}

std::vector<Interval> ordinal_cis(const FitResult& fit, std::size_t s, double level) {
  if (s >= fit.ordinal_blocks.size()) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("ordinal predictor index {} out of range", s));
  }
  const auto all = wald_ci(fit, level);
  const auto [start, width] = fit.ordinal_blocks[s];
  std::vector<Interval> out{{0.0, 0.0}};
  for (Eigen::Index p = 0; p < width; ++p) {
    out.push_back(all[static_cast<std::size_t>(start + p)]);
  }
  return out;
}

}  // namespace ordmono
