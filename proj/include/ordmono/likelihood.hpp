#pragma once

#include <Eigen/Dense>

#include "ordmono/design.hpp"

namespace ordmono {

// Intercepts alpha_1 < ... < alpha_{k-1} and the coefficient vector aligned
// with parameter_layout (ordinal blocks first).
struct ParameterVector {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;

  Eigen::Index size() const { return alpha.size() + beta.size(); }
  Eigen::VectorXd flat() const;
  static ParameterVector from_flat(const Eigen::VectorXd& theta, int categories);
};

struct LikelihoodEvaluation {
  double loglik = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd observed_information;  // negative Hessian
};

double logistic(double x);
double log_logistic(double x);

// Throws NonIncreasingIntercepts unless alpha is strictly increasing.
void check_intercepts(const Eigen::VectorXd& alpha);

// pi_j = F(alpha_j + eta) - F(alpha_{j-1} + eta) for a given linear predictor.
Eigen::VectorXd category_probs(const Eigen::VectorXd& alpha, double eta);
Eigen::VectorXd category_probs(const ParameterVector& params,
                               const Eigen::Ref<const Eigen::VectorXd>& design_row);

// log pi_c for a 0-based category c.
double log_category_prob(const Eigen::VectorXd& alpha, double eta, int c);

// Throws ProbabilityUnderflow when an observed cell probability is below the
// smallest positive normal double.
double loglik(const ParameterVector& params, const DesignMatrix& design);

LikelihoodEvaluation evaluate(const ParameterVector& params,
                              const DesignMatrix& design);

}  // namespace ordmono
