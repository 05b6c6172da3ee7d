#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ordmono/error.hpp"
#include "ordmono/likelihood.hpp"
#include "ordmono/simgen.hpp"

using namespace ordmono;
using doctest::Approx;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

DesignMatrix intercept_only(const std::vector<int>& responses) {
  ModelSchema s;
  s.response_levels = {"1", "2", "3"};
  std::vector<Observation> obs;
  for (int y : responses) obs.push_back(Observation{y, {}, {}, {}});
  return assemble_design(s, obs);
}

ScenarioSpec two_op_spec(int n) {
  ScenarioSpec spec;
  spec.schema.response_levels = {"1", "2", "3", "4", "5"};
  spec.schema.ordinal = {{"op1", {"1", "2", "3", "4"}}, {"op2", {"1", "2", "3", "4", "5", "6"}}};
  spec.schema.numeric = {"x1", "x2"};
  spec.truth.alpha = vec({-1.4, -0.4, 0.3, 1.1});
  spec.truth.beta = vec({0.3, 1.0, 1.005, -0.2, -1.5, -1.55, -2.4, -2.41, -0.15, 0.25});
  spec.ordinal_probs = {{0.25, 0.25, 0.25, 0.25}, {0.2, 0.2, 0.15, 0.15, 0.15, 0.15}};
  spec.numeric = {{0, 1}, {5, 4}};
  spec.n = n;
  spec.seed = 5;
  return spec;
}

}  // namespace

TEST_CASE("category probabilities at eta = 0") {
  const auto pi = category_probs(vec({0.0, 1.0}), 0.0);
  REQUIRE(pi.size() == 3);
  CHECK(pi[0] == Approx(0.5).epsilon(1e-15));
  CHECK(pi[1] == Approx(0.23105857863000487).epsilon(1e-14));
  CHECK(pi[2] == Approx(0.26894142136999510).epsilon(1e-14));
}

TEST_CASE("category probabilities agree with a 50-digit evaluation") {
  // Four ordinal predictors at categories (3, 2, 5, 4) of an illustration
  // model: eta = 1.5 + 0.1 - 0.05 - 0.31.
  const Eigen::VectorXd alpha = vec({-1.0, -0.5, -0.1});
  for (double eta : {1.24, -3.0, 0.0, 7.5, -20.0}) {
    const auto pi = category_probs(alpha, eta);
    const auto exact = oracle::category_probs(alpha, eta);
    for (std::size_t c = 0; c < exact.size(); ++c) {
      const double e = static_cast<double>(exact[c]);
      CHECK(std::abs(pi[static_cast<Eigen::Index>(c)] - e) <= 1e-14 * e + 1e-300);
    }
  }
}

TEST_CASE("nearly tied intercepts keep full relative accuracy") {
  const Eigen::VectorXd alpha = vec({0.3, 0.3 + 1e-9, 2.0});
  for (double eta : {0.0, -5.0, 12.0}) {
    const auto pi = category_probs(alpha, eta);
    const double exact = static_cast<double>(oracle::category_probs(alpha, eta)[1]);
    CHECK(std::abs(pi[1] / exact - 1.0) < 1e-6);
    CHECK(std::exp(log_category_prob(alpha, eta, 1)) == Approx(exact).epsilon(1e-6));
  }
}

TEST_CASE("probabilities sum to one and stay positive (property)") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0.0, 2.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int k = 3 + trial % 5;
    Eigen::VectorXd alpha(k - 1);
    alpha[0] = z(rng);
    for (int j = 1; j < k - 1; ++j) alpha[j] = alpha[j - 1] + std::abs(z(rng)) + 1e-6;
    const double eta = 3 * z(rng);
    const auto pi = category_probs(alpha, eta);
    CHECK(std::abs(pi.sum() - 1.0) < 1e-12);
    CHECK(pi.minCoeff() > 0.0);
  }
}

TEST_CASE("intercept-only log-likelihood in closed form") {
  const auto d = intercept_only({0, 0, 1, 2});
  ParameterVector p{vec({0.0, std::log(3.0)}), Eigen::VectorXd(0)};
  CHECK(loglik(p, d) == Approx(2 * std::log(0.5) + 2 * std::log(0.25)).epsilon(1e-14));
  // Shifting the intercepts changes the value.
  ParameterVector shifted{p.alpha.array() + 0.3, Eigen::VectorXd(0)};
  CHECK(loglik(shifted, d) != Approx(loglik(p, d)));
}

TEST_CASE("log-likelihood matches an extended-precision sum on simulated data") {
  const auto spec = two_op_spec(1000);
  const auto d = generate_dataset(spec, 0);
  const double ours = loglik(spec.truth, d);
  const double exact = oracle::loglik(spec.truth, d);
  CHECK(std::abs(ours - exact) <= 1e-8 * std::abs(exact));
}

TEST_CASE("log-likelihood is invariant under permutation of observations (property)") {
  const auto spec = two_op_spec(300);
  const auto d = generate_dataset(spec, 1);
  DesignMatrix rev = d;
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    rev.x.row(i) = d.x.row(d.n() - 1 - i);
    rev.response[static_cast<std::size_t>(i)] = d.response[static_cast<std::size_t>(d.n() - 1 - i)];
  }
  CHECK(loglik(spec.truth, rev) == Approx(loglik(spec.truth, d)).epsilon(1e-12));
}

TEST_CASE("gradient and information agree with central differences") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd alpha0 = vec({-0.5, 0.7});
    const Eigen::VectorXd beta0 = vec({0.4, -0.3});
    const auto d = oracle::random_instance(rng, 30, 3, 3, alpha0, beta0);
    ParameterVector p{vec({-0.5 + 0.3 * z(rng), 0.9 + 0.3 * z(rng)}), vec({z(rng), z(rng)})};
    const auto ev = evaluate(p, d);
    CHECK(ev.loglik == Approx(loglik(p, d)).epsilon(1e-13));

    auto f = [&](const Eigen::VectorXd& theta) {
      return loglik(ParameterVector::from_flat(theta, d.categories), d);
    };
    const Eigen::VectorXd theta = p.flat();
    const Eigen::VectorXd g = oracle::gradient(f, theta);
    CHECK((ev.gradient - g).lpNorm<Eigen::Infinity>() < 1e-6);

    for (Eigen::Index j = 0; j < theta.size(); ++j) {
      auto gj = [&](const Eigen::VectorXd& t) {
        return evaluate(ParameterVector::from_flat(t, d.categories), d).gradient[j];
      };
      const Eigen::VectorXd hrow = oracle::gradient(gj, theta);
      CHECK((-ev.observed_information.row(j).transpose() - hrow).lpNorm<Eigen::Infinity>() < 1e-5);
    }
    CHECK((ev.observed_information - ev.observed_information.transpose()).norm() < 1e-12);
  }
}

TEST_CASE("likelihood domain errors") {
  const auto d = intercept_only({0, 1, 2});
  CHECK_THROWS_AS(check_intercepts(vec({0.0, 0.0})), Error);
  try {
    loglik(ParameterVector{vec({1.0, 0.5}), Eigen::VectorXd(0)}, d);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonIncreasingIntercepts);
  }
  try {
    loglik(ParameterVector{vec({-800.0, 0.0}), Eigen::VectorXd(0)}, d);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ProbabilityUnderflow);
  }
  CHECK_THROWS_AS(loglik(ParameterVector{vec({0.0, 1.0}), vec({0.5})}, d), Error);
}

TEST_CASE("flat parameter vectors round-trip") {
  ParameterVector p{vec({-1.0, 0.0, 2.0}), vec({0.5, -0.25})};
  const auto q = ParameterVector::from_flat(p.flat(), 4);
  CHECK(q.alpha == p.alpha);
  CHECK(q.beta == p.beta);
}
