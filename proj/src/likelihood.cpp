#include "ordmono/likelihood.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ordmono/error.hpp"

namespace ordmono {

namespace {

const double kLogMinNormal = std::log(std::numeric_limits<double>::min());

void check_shapes(const ParameterVector& params, const DesignMatrix& design) {
  if (params.alpha.size() != design.categories - 1 ||
      params.beta.size() != design.beta_size()) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("parameter vector ({} + {}) does not match design ({} + {})",
                            params.alpha.size(), params.beta.size(),
                            design.categories - 1, design.beta_size()));
  }
  check_intercepts(params.alpha);
}

// Per-observation derivatives of log(F(u) - F(l)) with respect to the upper
// and lower cumulative logits.
struct CellTerms {
  double log_prob;
  double du, dl;          // first derivatives
  double duu, dll, dul;   // second derivatives
};

CellTerms cell_terms(const Eigen::VectorXd& alpha, double eta, int c) {
  const int last = static_cast<int>(alpha.size());
  CellTerms t{};
  if (c == 0) {
    const double u = alpha[0] + eta;
    const double a = logistic(-u);
    t.log_prob = log_logistic(u);
    t.du = a;
    t.duu = -a * logistic(u);
  } else if (c == last) {
    const double l = alpha[last - 1] + eta;
    const double b = logistic(l);
    t.log_prob = log_logistic(-l);
    t.dl = -b;
    t.dll = -b * logistic(-l);
  } else {
    const double u = alpha[c] + eta;
    const double l = alpha[c - 1] + eta;
    const double gap = -std::expm1(l - u);  // 1 - exp(l - u), in (0, 1]
    t.log_prob = log_logistic(u) + log_logistic(-l) + std::log(gap);
    // f(u)/pi and f(l)/pi after cancelling the common logistic factors.
    const double a = logistic(-u) / (logistic(-l) * gap);
    const double b = logistic(l) / (logistic(u) * gap);
    t.du = a;
    t.dl = -b;
    t.duu = a * (logistic(-u) - logistic(u)) - a * a;
    t.dll = -b * (logistic(-l) - logistic(l)) - b * b;
    t.dul = a * b;
  }
  return t;
}

}  // namespace

Eigen::VectorXd ParameterVector::flat() const {
  Eigen::VectorXd theta(size());
  theta << alpha, beta;
  return theta;
}

ParameterVector ParameterVector::from_flat(const Eigen::VectorXd& theta,
                                           int categories) {
  ParameterVector p;
  p.alpha = theta.head(categories - 1);
  p.beta = theta.tail(theta.size() - (categories - 1));
  return p;
}

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_logistic(double x) {
  if (x >= 0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

void check_intercepts(const Eigen::VectorXd& alpha) {
  for (Eigen::Index j = 0; j < alpha.size(); ++j) {
    if (!std::isfinite(alpha[j]) || (j > 0 && !(alpha[j] > alpha[j - 1]))) {
      throw Error(ErrorKind::NonIncreasingIntercepts,
                  fmt::format("intercepts must be finite and strictly increasing "
                              "(alpha[{}] = {})",
                              j + 1, alpha[j]));
    }
  }
}

double log_category_prob(const Eigen::VectorXd& alpha, double eta, int c) {
  return cell_terms(alpha, eta, c).log_prob;
}

Eigen::VectorXd category_probs(const Eigen::VectorXd& alpha, double eta) {
  check_intercepts(alpha);
  const int k = static_cast<int>(alpha.size()) + 1;
  Eigen::VectorXd pi(k);
  for (int c = 0; c < k; ++c) pi[c] = std::exp(log_category_prob(alpha, eta, c));
  return pi;
}

Eigen::VectorXd category_probs(const ParameterVector& params,
                               const Eigen::Ref<const Eigen::VectorXd>& design_row) {
  return category_probs(params.alpha, params.beta.dot(design_row));
}

double loglik(const ParameterVector& params, const DesignMatrix& design) {
  check_shapes(params, design);
  const Eigen::VectorXd eta = design.x * params.beta;
  double total = 0.0;
  for (Eigen::Index i = 0; i < design.n(); ++i) {
    const double lp =
        log_category_prob(params.alpha, eta[i], design.response[static_cast<std::size_t>(i)]);
    if (!(lp >= kLogMinNormal)) {
      throw Error(ErrorKind::ProbabilityUnderflow,
                  fmt::format("observation {} has probability below the smallest "
                              "normal double",
                              i + 1));
    }
    total += lp;
  }
  return total;
}

LikelihoodEvaluation evaluate(const ParameterVector& params,
                              const DesignMatrix& design) {
  check_shapes(params, design);
  const Eigen::Index n = design.n();
  const Eigen::Index na = params.alpha.size();
  const Eigen::Index nb = params.beta.size();
  const Eigen::VectorXd eta = design.x * params.beta;

  LikelihoodEvaluation out;
  out.gradient = Eigen::VectorXd::Zero(na + nb);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(na + nb, na + nb);
  Eigen::VectorXd beta_score(n);    // d loglik_i / d eta_i
  Eigen::VectorXd beta_weight(n);   // d2 loglik_i / d eta_i^2
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(n, na);  // d2 / d alpha d eta

  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = design.response[static_cast<std::size_t>(i)];
    const CellTerms t = cell_terms(params.alpha, eta[i], c);
    if (!(t.log_prob >= kLogMinNormal)) {
      throw Error(ErrorKind::ProbabilityUnderflow,
                  fmt::format("observation {} has probability below the smallest "
                              "normal double",
                              i + 1));
    }
    out.loglik += t.log_prob;
    beta_score[i] = t.du + t.dl;
    beta_weight[i] = t.duu + t.dll + 2.0 * t.dul;
    if (c < na) {
      out.gradient[c] += t.du;
      hess(c, c) += t.duu;
      cross(i, c) += t.duu + t.dul;
    }
    if (c > 0) {
      out.gradient[c - 1] += t.dl;
      hess(c - 1, c - 1) += t.dll;
      cross(i, c - 1) += t.dll + t.dul;
    }
    if (c > 0 && c < na) {
      hess(c, c - 1) += t.dul;
      hess(c - 1, c) += t.dul;
    }
  }

  out.gradient.tail(nb) = design.x.transpose() * beta_score;
  const Eigen::MatrixXd ab = cross.transpose() * design.x;
  hess.block(0, na, na, nb) = ab;
  hess.block(na, 0, nb, na) = ab.transpose();
  hess.block(na, na, nb, nb) =
      design.x.transpose() * (beta_weight.asDiagonal() * design.x);
  out.observed_information = -hess;
  return out;
}

}  // namespace ordmono
