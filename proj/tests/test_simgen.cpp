#include <doctest.h>

#include <cmath>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ordmono/error.hpp"
#include "ordmono/io.hpp"
#include "ordmono/simgen.hpp"

using namespace ordmono;

namespace {

ScenarioFile scenario(const char* name) {
  return load_scenario(std::string(ORDMONO_DATA_DIR) + "/" + name);
}

ScenarioSpec zero_effect_spec() {
  ScenarioSpec spec;
  spec.name = "zero";
  spec.schema.response_levels = {"1", "2", "3"};
  spec.schema.ordinal = {{"op", {"1", "2", "3"}}};
  spec.truth.alpha = Eigen::Vector2d(-0.5, 0.7);
  spec.truth.beta = Eigen::Vector2d(0.0, 0.0);
  spec.ordinal_probs = {{0.3, 0.4, 0.3}};
  spec.n = 400;
  spec.replicates = 100;
  spec.seed = 77;
  return spec;
}

}  // namespace

TEST_CASE("counter-based generator is reproducible and order independent") {
  CounterRng a(42, 3), b(42, 3), c(42, 4);
  std::vector<std::uint64_t> xa, xb, xc;
  for (int i = 0; i < 100; ++i) {
    xa.push_back(a());
    xb.push_back(b());
    xc.push_back(c());
  }
  CHECK(xa == xb);
  CHECK(xa != xc);
  CounterRng u(1, 0);
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double x = u.uniform();
    CHECK_FALSE((x < 0.0 || x >= 1.0));
    mean += x;
  }
  CHECK(mean / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("same seed and replicate give byte-identical datasets") {
  const auto sf = scenario("monotone_two_op.yaml");
  const auto a = generate_dataset(sf.spec, 7);
  const auto later = generate_dataset(sf.spec, 3);
  const auto b = generate_dataset(sf.spec, 7);
  CHECK(a.x == b.x);
  CHECK(a.response == b.response);
  CHECK_FALSE(a.x == later.x);
}

TEST_CASE("degenerate category distribution puts everyone in the baseline") {
  ScenarioSpec spec = zero_effect_spec();
  spec.ordinal_probs = {{1.0, 0.0, 0.0}};
  const auto d = generate_dataset(spec, 0);
  CHECK(d.ordinal_part().isZero());
}

TEST_CASE("scenario validation") {
  ScenarioSpec spec = zero_effect_spec();
  spec.ordinal_probs = {{0.3, 0.4, 0.3 + 1e-9}};
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = zero_effect_spec();
  spec.n = 0;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = zero_effect_spec();
  spec.truth.beta = Eigen::Vector3d(0, 0, 0);
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("response frequencies converge to the exact marginal distribution") {
  const auto sf = scenario("monotone_two_op.yaml");
  const auto& spec = sf.spec;
  // The numeric part of eta is normal: -0.15 x1 + 0.25 x2.
  const double m = spec.truth.beta[8] * spec.numeric[0].mean + spec.truth.beta[9] * spec.numeric[1].mean;
  const double v = std::pow(spec.truth.beta[8], 2) * spec.numeric[0].variance +
                   std::pow(spec.truth.beta[9], 2) * spec.numeric[1].variance;
  Eigen::VectorXd exact = Eigen::VectorXd::Zero(5);
  const auto& p1 = spec.ordinal_probs[0];
  const auto& p2 = spec.ordinal_probs[1];
  for (std::size_t a = 0; a < p1.size(); ++a) {
    for (std::size_t b = 0; b < p2.size(); ++b) {
      const double shift = (a ? spec.truth.beta[static_cast<Eigen::Index>(a - 1)] : 0.0) +
                           (b ? spec.truth.beta[static_cast<Eigen::Index>(3 + b - 1)] : 0.0);
      for (int c = 0; c < 5; ++c) {
        auto integrand = [&](double z) {
          const double eta = shift + m + std::sqrt(v) * z;
          const double dens = std::exp(-0.5 * z * z) / std::sqrt(2 * M_PI);
          return dens * category_probs(spec.truth.alpha, eta)[c];
        };
        const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            integrand, -std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity(), 10, 1e-12);
        exact[c] += p1[a] * p2[b] * integral;
      }
    }
  }
  CHECK(exact.sum() == doctest::Approx(1.0).epsilon(1e-10));

  ScenarioSpec big = spec;
  big.n = 200000;
  const auto obs = generate_observations(big, 0);
  Eigen::VectorXd freq = Eigen::VectorXd::Zero(5);
  for (const auto& o : obs) freq[o.response] += 1.0;
  freq /= static_cast<double>(big.n);
  for (int c = 0; c < 5; ++c) {
    const double se = std::sqrt(exact[c] * (1 - exact[c]) / big.n);
    CHECK(std::abs(freq[c] - exact[c]) < 4.5 * se);
  }
}

TEST_CASE("moments satisfy the bias-variance identity (property)") {
  std::vector<double> est{0.1, 0.4, -0.2, 0.35, 0.8, 0.05};
  const auto m = moments(est, 0.3);
  CHECK(std::abs(m.mse - (m.variance + m.bias2)) < 1e-15);
  CHECK(m.mean == doctest::Approx(1.5 / 6));

  const auto report = run_study(zero_effect_spec(), StudyConfig{});
  for (const auto& s : report.strategies) {
    for (const auto& mo : s.moments) CHECK(std::abs(mo.mse - (mo.variance + mo.bias2)) < 1e-10);
  }
}

TEST_CASE("zero-effect predictor: estimates centre on zero") {
  StudyConfig cfg;
  cfg.strategies = {Strategy::Umle, Strategy::Cmle};
  const auto report = run_study(zero_effect_spec(), cfg);
  CHECK(report.used + static_cast<int>(report.failures.size()) == 100);
  CHECK(report.used >= 95);
  for (const auto& s : report.strategies) {
    for (int j = 2; j < 4; ++j) {
      const auto& mo = s.moments[static_cast<std::size_t>(j)];
      const double mc_se = std::sqrt(mo.variance / report.used);
      CHECK(mo.bias2 < 10 * mc_se);
      CHECK(std::abs(mo.mean) < 0.1);
    }
  }
}

TEST_CASE("label counts add up to the replicates used") {
  const auto sf = scenario("mixed_four_op.yaml");
  ScenarioSpec spec = sf.spec;
  spec.replicates = 20;
  const auto report = run_study(spec, sf.study);
  for (const auto& s : report.strategies) {
    if (s.strategy == Strategy::Umle) {
      CHECK(s.reductions.empty());
      continue;
    }
    for (std::size_t op = 0; op < 4; ++op) {
      int total = 0;
      for (const auto& [label, count] : s.final_directions[op]) total += count;
      CHECK(total == report.used);
    }
    CHECK(s.reductions.size() == 1 + 4 + 1);
  }
}

TEST_CASE("failing replicates are counted and too many abort the study") {
  ScenarioSpec spec = zero_effect_spec();
  spec.n = 6;  // most replicates leave a category empty
  StudyConfig cfg;
  cfg.strategies = {Strategy::Umle};
  try {
    run_study(spec, cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooManyFailures);
  }
  cfg.max_failure_fraction = 1.0;
  const auto report = run_study(spec, cfg);
  CHECK(report.used + static_cast<int>(report.failures.size()) == spec.replicates);
  CHECK_FALSE(report.failures.empty());
}

TEST_CASE("thread count does not change the result") {
  const auto sf = scenario("monotone_two_op.yaml");
  ScenarioSpec spec = sf.spec;
  spec.replicates = 12;
  StudyConfig one = sf.study, three = sf.study;
  one.threads = 1;
  three.threads = 3;
  const auto a = run_study(spec, one);
  const auto b = run_study(spec, three);
  for (std::size_t s = 0; s < a.strategies.size(); ++s) {
    for (std::size_t j = 0; j < a.strategies[s].moments.size(); ++j) {
      CHECK(a.strategies[s].moments[j].mean == b.strategies[s].moments[j].mean);
      CHECK(a.strategies[s].moments[j].mse == b.strategies[s].moments[j].mse);
    }
  }
}

TEST_CASE("forcing monotonicity on a U-shaped predictor costs bias") {
  const auto sf = scenario("mixed_four_op.yaml");
  ScenarioSpec spec = sf.spec;
  spec.replicates = 500;
  StudyConfig cfg = sf.study;
  cfg.strategies = {Strategy::Umle, Strategy::Cmle};
  const auto report = run_study(spec, cfg);
  // op4 occupies flat positions 3 + 2 + 3 + 4 = 12 .. 16.
  double bias_umle = 0.0, bias_cmle = 0.0;
  for (std::size_t j = 12; j < 17; ++j) {
    bias_umle += report.summary(Strategy::Umle).moments[j].bias2;
    bias_cmle += report.summary(Strategy::Cmle).moments[j].bias2;
  }
  MESSAGE("op4 squared bias: umle " << bias_umle << ", cmle " << bias_cmle);
  CHECK(bias_cmle > bias_umle);
}
