#include <doctest.h>

#include "ordmono/error.hpp"
#include "ordmono/io.hpp"
#include "ordmono/strategies.hpp"

using namespace ordmono;

namespace {

ScenarioFile scenario(const char* name) {
  return load_scenario(std::string(ORDMONO_DATA_DIR) + "/" + name);
}

StrategyConfig config_for(Strategy s) {
  StrategyConfig c;
  c.strategy = s;
  return c;
}

}  // namespace

TEST_CASE("strategy names round-trip") {
  for (Strategy s : {Strategy::Umle, Strategy::Cmle, Strategy::CmleBonferroni, Strategy::CmleFiltered}) {
    CHECK(parse_strategy(to_string(s)) == s);
  }
  CHECK_THROWS_AS(parse_strategy("cmle-filtered"), Error);
}

TEST_CASE("umle leaves every predictor unconstrained") {
  const auto sf = scenario("monotone_two_op.yaml");
  const auto d = generate_dataset(sf.spec, 0);
  const auto out = run_strategy(d, sf.spec.schema, config_for(Strategy::Umle));
  CHECK(out.assignment == DirectionAssignment{Direction::Unconstrained, Direction::Unconstrained});
  CHECK(out.fit.params.flat() == out.umle.params.flat());
  CHECK_FALSE(out.step1.has_value());
}

TEST_CASE("constraints never raise the maximum (property)") {
  const auto sf = scenario("mixed_four_op.yaml");
  for (std::uint64_t r = 0; r < 8; ++r) {
    const auto d = generate_dataset(sf.spec, r);
    const auto umle = fit_unconstrained(d);
    for (Strategy s : {Strategy::Cmle, Strategy::CmleBonferroni, Strategy::CmleFiltered}) {
      const auto out = run_strategy(d, sf.spec.schema, config_for(s), &umle);
      CHECK(out.fit.loglik <= umle.loglik + 1e-9);
      CHECK(out.fit.strategy_tag == to_string(s));
      CHECK(is_feasible(build_constraints(sf.spec.schema, out.assignment),
                        out.fit.params.beta.head(sf.spec.schema.ordinal_columns())));
    }
  }
}

TEST_CASE("cmle_bonferroni releases rejected predictors") {
  const auto sf = scenario("nonmonotone_two_op.yaml");
  int releases = 0;
  for (std::uint64_t r = 0; r < 10; ++r) {
    const auto d = generate_dataset(sf.spec, r);
    const auto out = run_strategy(d, sf.spec.schema, config_for(Strategy::CmleBonferroni));
    REQUIRE(out.tests.size() == 2);
    for (std::size_t s = 0; s < 2; ++s) {
      const bool rejected = out.tests[s].decision == TestDecision::Reject;
      CHECK(rejected == (out.assignment[s] == Direction::Unconstrained));
      CHECK(rejected == !out.state.predictors[s].constrained);
      releases += rejected;
    }
  }
  CHECK(releases > 0);
}

TEST_CASE("per-predictor alpha* overrides the shared level") {
  const auto sf = scenario("nonmonotone_two_op.yaml");
  const auto d = generate_dataset(sf.spec, 0);
  StrategyConfig cfg = config_for(Strategy::CmleBonferroni);
  cfg.alpha_star_overrides = {1e-12, 0.05};
  const auto out = run_strategy(d, sf.spec.schema, cfg);
  CHECK(out.tests[0].alpha_star == 1e-12);
  CHECK(out.tests[1].alpha_star == 0.05);
}

TEST_CASE("cmle_filtered drops predictors labelled none at step 1") {
  const auto sf = scenario("mixed_four_op.yaml");
  int dropped = 0;
  for (std::uint64_t r = 0; r < 10; ++r) {
    const auto d = generate_dataset(sf.spec, r);
    const auto out = run_strategy(d, sf.spec.schema, config_for(Strategy::CmleFiltered));
    REQUIRE(out.step1.has_value());
    for (std::size_t s = 0; s < 4; ++s) {
      const bool none = out.step1->predictors[s].label == Label::None;
      CHECK(none == (out.assignment[s] == Direction::Unconstrained));
      if (none) CHECK(out.state.predictors[s].trials.empty());
      dropped += none;
    }
  }
  CHECK(dropped > 0);
}

TEST_CASE("clear monotone effects give the same estimate under every strategy") {
  ScenarioSpec spec;
  spec.schema.response_levels = {"1", "2", "3"};
  spec.schema.ordinal = {{"a", {"1", "2", "3"}}, {"b", {"1", "2", "3", "4"}}};
  spec.truth.alpha = Eigen::Vector2d(-0.5, 0.8);
  spec.truth.beta.resize(5);
  spec.truth.beta << 1.0, 2.0, -1.0, -2.0, -3.0;
  spec.ordinal_probs = {{0.3, 0.4, 0.3}, {0.25, 0.25, 0.25, 0.25}};
  spec.n = 3000;
  spec.seed = 8;
  const auto d = generate_dataset(spec, 0);
  const auto umle = fit_unconstrained(d);
  for (Strategy s : {Strategy::Cmle, Strategy::CmleBonferroni, Strategy::CmleFiltered}) {
    const auto out = run_strategy(d, spec.schema, config_for(s), &umle);
    CHECK(out.assignment == DirectionAssignment{Direction::Isotonic, Direction::Antitonic});
    CHECK((out.fit.params.flat() - umle.params.flat()).lpNorm<Eigen::Infinity>() < 1e-5);
  }
}

TEST_CASE("stand-in survey data: every predictor is labelled and step 3 runs only when needed") {
  const auto schema = load_schema(std::string(ORDMONO_DATA_DIR) + "/standin_five_op.schema.yaml");
  const auto table = read_csv(std::string(ORDMONO_DATA_DIR) + "/standin_five_op.csv");
  const auto d = build_design(schema, table);
  const auto out = run_strategy(d, schema, config_for(Strategy::Cmle));
  REQUIRE(out.step1.has_value());
  CHECK(out.state.predictors.size() == 5);
  bool all_resolved = true;
  for (const auto& ps : out.state.predictors) all_resolved = all_resolved && ps.resolved();
  CHECK(out.step3.has_value() == !all_resolved);
  for (std::size_t s = 0; s < 5; ++s) CHECK(out.assignment[s] != Direction::Unconstrained);

  // Hand-run of the same procedure from its pieces.
  const auto umle = fit_unconstrained(d);
  MdcConfig cfg;
  const auto s1 = mdc_step1(umle, cfg);
  const auto s2 = mdc_step2(umle, s1, cfg);
  for (std::size_t s = 0; s < 5; ++s) {
    CHECK(s1.predictors[s].label == out.step1->predictors[s].label);
    CHECK(s2.predictors[s].label == out.state.predictors[s].label);
  }
}
