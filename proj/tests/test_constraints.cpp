#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "ordmono/constraints.hpp"
#include "ordmono/error.hpp"

using namespace ordmono;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

ModelSchema schema_with(std::vector<int> qs) {
  ModelSchema s;
  s.response_levels = {"1", "2", "3"};
  for (std::size_t i = 0; i < qs.size(); ++i) {
    CategoricalVariable v{"op" + std::to_string(i + 1), {}};
    for (int c = 0; c < qs[i]; ++c) v.levels.push_back(std::to_string(c + 1));
    s.ordinal.push_back(v);
  }
  return s;
}

}  // namespace

TEST_CASE("isotonic and antitonic blocks for q = 3") {
  const auto iso = build_constraints(schema_with({3}), {Direction::Isotonic});
  Eigen::MatrixXd expected(2, 2);
  expected << 1, 0, -1, 1;
  CHECK(iso.C == expected);

  const auto anti = build_constraints(schema_with({3}), {Direction::Antitonic});
  CHECK(anti.C == -expected);
}

TEST_CASE("two predictors give a block-diagonal matrix") {
  const auto cs = build_constraints(schema_with({3, 3}), {Direction::Isotonic, Direction::Antitonic});
  Eigen::MatrixXd expected(4, 4);
  expected << 1, 0, 0, 0,
             -1, 1, 0, 0,
              0, 0, -1, 0,
              0, 0, 1, -1;
  CHECK(cs.C == expected);
  REQUIRE(cs.blocks.size() == 2);
  CHECK(cs.blocks[1].row == 2);
  CHECK(cs.blocks[1].column == 2);
}

TEST_CASE("unconstrained predictors contribute no rows but keep their columns") {
  const auto cs = build_constraints(schema_with({3, 4, 3}),
                                    {Direction::Unconstrained, Direction::Isotonic,
                                     Direction::Unconstrained});
  CHECK(cs.rows() == 3);
  CHECK(cs.ordinal_columns() == 2 + 3 + 2);
  CHECK(cs.C.leftCols(2).isZero());
  CHECK(cs.C.rightCols(2).isZero());
  CHECK(build_constraints(schema_with({3}), {Direction::Unconstrained}).empty());
  CHECK_THROWS_AS(build_constraints(schema_with({3, 3}), {Direction::Isotonic}), Error);
}

TEST_CASE("feasibility of known coefficient vectors") {
  const auto iso4 = build_constraints(schema_with({4}), {Direction::Isotonic});
  CHECK(is_feasible(iso4, vec({0.3, 1.0, 1.005}), 0.0));
  CHECK_FALSE(is_feasible(iso4, vec({-0.1, 0.5, 1.0}), 0.0));

  const auto anti6 = build_constraints(schema_with({6}), {Direction::Antitonic});
  CHECK(is_feasible(anti6, vec({-0.2, -1.5, -1.55, -2.4, -2.41}), 0.0));

  const Eigen::VectorXd u_shape = vec({-0.8, -1.6, -0.6, 0.6, 1.6});
  CHECK_FALSE(is_feasible(anti6, u_shape, 0.0));
  CHECK_FALSE(is_feasible(build_constraints(schema_with({6}), {Direction::Isotonic}), u_shape, 0.0));

  CHECK(is_feasible(iso4, vec({0.0, 0.5, 0.5 - 1e-9})));  // within the default tolerance
  CHECK_THROWS_AS(is_feasible(iso4, vec({0.0, 1.0})), Error);
}

TEST_CASE("projection examples") {
  CHECK(monotone_project(vec({1, 3, 2}), Direction::Isotonic).isApprox(vec({1, 2.5, 2.5})));
  CHECK(monotone_project(vec({0.2, 0.4, 1.0}), Direction::Isotonic) == vec({0.2, 0.4, 1.0}));
  CHECK(monotone_project(vec({-1, -2}), Direction::Isotonic).isZero());
  CHECK(monotone_project(vec({-1, -3, -2}), Direction::Antitonic).isApprox(vec({-1, -2.5, -2.5})));
  CHECK(monotone_project(vec({0.5, 1.0}), Direction::Unconstrained) == vec({0.5, 1.0}));
}

TEST_CASE("projection equals the exhaustive block-partition optimum (property)") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int m = 1 + trial % 7;
    Eigen::VectorXd v(m);
    for (int i = 0; i < m; ++i) v[i] = z(rng) + 0.2 * i;
    const Eigen::VectorXd expected = oracle::brute_force_isotonic_pinned(v);
    CHECK((monotone_project(v, Direction::Isotonic) - expected).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((monotone_project(-v, Direction::Antitonic) + expected).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("projection is idempotent and non-expansive (property)") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(0.0, 1.5);
  for (int trial = 0; trial < 300; ++trial) {
    const int m = 2 + trial % 6;
    Eigen::VectorXd x(m), y(m), f(m);
    for (int i = 0; i < m; ++i) {
      x[i] = z(rng);
      y[i] = z(rng);
    }
    // A feasible point: cumulative sums of non-negative increments.
    double acc = 0.0;
    for (int i = 0; i < m; ++i) f[i] = acc += std::abs(z(rng));

    const auto px = monotone_project(x, Direction::Isotonic);
    const auto py = monotone_project(y, Direction::Isotonic);
    CHECK((monotone_project(px, Direction::Isotonic) - px).lpNorm<Eigen::Infinity>() < 1e-14);
    CHECK((px - py).squaredNorm() <= (x - y).squaredNorm() + 1e-12);
    CHECK((px - f).squaredNorm() <= (x - f).squaredNorm() + 1e-12);
    // Firm non-expansiveness.
    CHECK((px - py).squaredNorm() <= (px - py).dot(x - y) + 1e-12);
  }
}
