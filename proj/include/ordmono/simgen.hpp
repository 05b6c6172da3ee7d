#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ordmono/design.hpp"
#include "ordmono/likelihood.hpp"
#include "ordmono/strategies.hpp"

namespace ordmono {

// Counter-based generator: output i of stream `key` is SplitMix64's finaliser
// applied to key + (i + 1) * golden gamma. Streams for (seed, replicate) are
// independent of the order in which replicates are generated.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

struct NormalSpec {
  double mean = 0.0;
  double variance = 1.0;
};

struct ScenarioSpec {
  std::string name = "scenario";
  ModelSchema schema;
  ParameterVector truth;
  std::vector<std::vector<double>> ordinal_probs;  // one vector of q_s per OP
  std::vector<std::vector<double>> nominal_probs;
  std::vector<NormalSpec> numeric;
  int n = 1000;
  int replicates = 100;
  std::uint64_t seed = 1;

  void validate() const;
};

std::vector<Observation> generate_observations(const ScenarioSpec& spec,
                                               std::uint64_t replicate_index);

// Deterministic in (seed, replicate_index). Unobserved categories are allowed
// here; fitting such a replicate fails and is counted by run_study.
DesignMatrix generate_dataset(const ScenarioSpec& spec, std::uint64_t replicate_index);

struct StudyConfig {
  std::vector<Strategy> strategies{Strategy::Umle, Strategy::Cmle,
                                   Strategy::CmleBonferroni, Strategy::CmleFiltered};
  MdcConfig mdc;
  double alpha_star = 0.05;
  int threads = 1;
  double max_failure_fraction = 0.05;
  OptimOptions optim;
};

struct ParameterMoments {
  double mean = 0.0;
  double variance = 0.0;  // divisor: number of replicates
  double bias2 = 0.0;
  double mse = 0.0;       // mean squared error against the truth
};

// Average over a parameter group of 1 - MSE(strategy) / MSE(umle), and the
// same ratio computed on the pooled group MSE.
struct GroupReduction {
  std::string group;
  double mean_relative = 0.0;
  double pooled = 0.0;
};

struct StrategySummary {
  Strategy strategy = Strategy::Umle;
  std::vector<ParameterMoments> moments;  // flat parameter layout
  // Per ordinal predictor: counts keyed by label name.
  std::vector<std::map<std::string, int>> step1_labels;
  std::vector<std::map<std::string, int>> step2_labels;
  std::vector<std::map<std::string, int>> final_directions;
  std::vector<int> test_rejections;  // cmle_bonferroni only
  int step3_runs = 0;
  std::vector<GroupReduction> reductions;  // empty for umle
};

struct ReplicateFailure {
  std::uint64_t replicate;
  std::string message;
};

struct MseReport {
  std::string scenario;
  int replicates = 0;
  int used = 0;
  std::vector<ReplicateFailure> failures;
  std::vector<std::string> parameter_names;
  Eigen::VectorXd truth;
  std::vector<StrategySummary> strategies;

  const StrategySummary& summary(Strategy s) const;
};

struct ReplicateResult {
  bool failed = false;
  std::string failure;
  std::vector<StrategyOutcome> outcomes;  // in StudyConfig::strategies order
};

ReplicateResult run_replicate(const ScenarioSpec& spec, const StudyConfig& config,
                              std::uint64_t replicate_index);

// Throws TooManyFailures when more than max_failure_fraction of replicates
// fail to fit.
MseReport run_study(const ScenarioSpec& spec, const StudyConfig& config);

ParameterMoments moments(const std::vector<double>& estimates, double truth);

}  // namespace ordmono
