#include "ordmono/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "ordmono/error.hpp"
#include "ordmono/parallel.hpp"

namespace ordmono {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

int draw_category(CounterRng& rng, const std::vector<double>& probs) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t c = 0; c + 1 < probs.size(); ++c) {
    cumulative += probs[c];
    if (u < cumulative) return static_cast<int>(c);
  }
  return static_cast<int>(probs.size()) - 1;
}

void check_probs(const std::string& name, const std::vector<double>& probs,
                 std::size_t expected) {
  if (probs.size() != expected) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("'{}' needs {} probabilities, got {}", name, expected,
                            probs.size()));
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("'{}' has a negative probability", name));
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("probabilities of '{}' sum to {:.17g}, not 1", name, sum));
  }
}

// Compact per-replicate record kept for aggregation.
struct Record {
  bool failed = false;
  std::string failure;
  std::vector<Eigen::VectorXd> estimates;
  std::vector<std::vector<std::string>> step1, step2, final_dirs;
  std::vector<std::vector<bool>> rejected;
  std::vector<bool> step3;
};

Record summarise(const ReplicateResult& r) {
  Record rec;
  rec.failed = r.failed;
  rec.failure = r.failure;
  for (const auto& o : r.outcomes) {
    rec.estimates.push_back(o.fit.params.flat());
    std::vector<std::string> s1, s2, fd;
    std::vector<bool> rej;
    for (std::size_t s = 0; s < o.assignment.size(); ++s) {
      if (o.step1) s1.emplace_back(to_string(o.step1->predictors[s].label));
      if (!o.state.predictors.empty()) {
        s2.emplace_back(to_string(o.state.predictors[s].label));
      }
      fd.emplace_back(to_string(o.assignment[s]));
    }
    for (const auto& t : o.tests) rej.push_back(t.decision == TestDecision::Reject);
    rec.step1.push_back(std::move(s1));
    rec.step2.push_back(std::move(s2));
    rec.final_dirs.push_back(std::move(fd));
    rec.rejected.push_back(std::move(rej));
    rec.step3.push_back(o.step3 && o.step3->fit.has_value());
  }
  return rec;
}

}  // namespace

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64_mix(splitmix64_mix(seed + kGamma) ^ (stream * kGamma + 1))) {}

CounterRng::result_type CounterRng::operator()() {
  ++counter_;
  return splitmix64_mix(key_ + counter_ * kGamma);
}

double CounterRng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

void ScenarioSpec::validate() const {
  schema.validate();
  if (n < 1 || replicates < 1) {
    throw Error(ErrorKind::InvalidArgument, "n and replicates must be at least 1");
  }
  if (truth.alpha.size() != schema.categories() - 1 ||
      truth.beta.size() != schema.beta_size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "true parameters do not match the scenario schema");
  }
  check_intercepts(truth.alpha);
  if (ordinal_probs.size() != schema.ordinal.size() ||
      nominal_probs.size() != schema.nominal.size() ||
      numeric.size() != schema.numeric.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "every predictor needs a distribution in the scenario");
  }
  for (std::size_t s = 0; s < ordinal_probs.size(); ++s) {
    check_probs(schema.ordinal[s].name, ordinal_probs[s], schema.ordinal[s].levels.size());
  }
  for (std::size_t u = 0; u < nominal_probs.size(); ++u) {
    check_probs(schema.nominal[u].name, nominal_probs[u], schema.nominal[u].levels.size());
  }
  for (std::size_t u = 0; u < numeric.size(); ++u) {
    if (!(numeric[u].variance >= 0.0)) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("'{}' has a negative variance", schema.numeric[u]));
    }
  }
}

std::vector<Observation> generate_observations(const ScenarioSpec& spec,
                                               std::uint64_t replicate_index) {
  spec.validate();
  CounterRng rng(spec.seed, replicate_index);
  std::normal_distribution<double> standard(0.0, 1.0);
  const Eigen::Index n_ord = spec.schema.ordinal_columns();
  std::vector<Observation> out(static_cast<std::size_t>(spec.n));
  for (auto& obs : out) {
    double eta = 0.0;
    Eigen::Index offset = 0;
    for (std::size_t s = 0; s < spec.ordinal_probs.size(); ++s) {
      const int c = draw_category(rng, spec.ordinal_probs[s]);
      obs.ordinal.push_back(c);
      if (c > 0) eta += spec.truth.beta[offset + c - 1];
      offset += static_cast<Eigen::Index>(spec.ordinal_probs[s].size()) - 1;
    }
    offset = n_ord;
    for (std::size_t u = 0; u < spec.nominal_probs.size(); ++u) {
      const int c = draw_category(rng, spec.nominal_probs[u]);
      obs.nominal.push_back(c);
      if (c > 0) eta += spec.truth.beta[offset + c - 1];
      offset += static_cast<Eigen::Index>(spec.nominal_probs[u].size()) - 1;
    }
    for (const auto& dist : spec.numeric) {
      const double x = dist.mean + std::sqrt(dist.variance) * standard(rng);
      obs.numeric.push_back(x);
      eta += spec.truth.beta[offset++] * x;
    }
    const Eigen::VectorXd pi = category_probs(spec.truth.alpha, eta);
    obs.response = draw_category(rng, std::vector<double>(pi.data(), pi.data() + pi.size()));
  }
  return out;
}

DesignMatrix generate_dataset(const ScenarioSpec& spec, std::uint64_t replicate_index) {
  const auto obs = generate_observations(spec, replicate_index);
  return assemble_design(spec.schema, obs, DesignOptions{.require_all_categories = false});
}

ReplicateResult run_replicate(const ScenarioSpec& spec, const StudyConfig& config,
                              std::uint64_t replicate_index) {
  ReplicateResult result;
  try {
    const DesignMatrix design = generate_dataset(spec, replicate_index);
    const FitResult umle = fit_unconstrained(design, config.optim);
    for (Strategy strategy : config.strategies) {
      StrategyConfig sc;
      sc.strategy = strategy;
      sc.mdc = config.mdc;
      sc.alpha_star = config.alpha_star;
      sc.optim = config.optim;
      result.outcomes.push_back(run_strategy(design, spec.schema, sc, &umle));
    }
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::Nonconvergence:
      case ErrorKind::Separation:
      case ErrorKind::DegenerateDesign:
      case ErrorKind::ProbabilityUnderflow:
        result.failed = true;
        result.failure = fmt::format("{}: {}", to_string(e.kind()), e.what());
        result.outcomes.clear();
        break;
      default:
        throw;
    }
  }
  return result;
}

ParameterMoments moments(const std::vector<double>& estimates, double truth) {
  ParameterMoments m;
  if (estimates.empty()) return m;
  const double count = static_cast<double>(estimates.size());
  m.mean = std::accumulate(estimates.begin(), estimates.end(), 0.0) / count;
  for (double e : estimates) {
    m.variance += (e - m.mean) * (e - m.mean);
    m.mse += (e - truth) * (e - truth);
  }
  m.variance /= count;
  m.mse /= count;
  m.bias2 = (m.mean - truth) * (m.mean - truth);
  return m;
}

const StrategySummary& MseReport::summary(Strategy s) const {
  for (const auto& sum : strategies) {
    if (sum.strategy == s) return sum;
  }
  throw Error(ErrorKind::InvalidArgument,
              fmt::format("strategy {} was not part of the study", to_string(s)));
}

MseReport run_study(const ScenarioSpec& spec, const StudyConfig& config) {
  spec.validate();
  config.mdc.validate();
  const auto reps = static_cast<std::size_t>(spec.replicates);
  std::vector<Record> records(reps);
  parallel_for(reps, config.threads, [&](std::size_t r) {
    records[r] = summarise(run_replicate(spec, config, r));
  });

  MseReport report;
  report.scenario = spec.name;
  report.replicates = spec.replicates;
  for (const auto& p : parameter_layout(spec.schema)) report.parameter_names.push_back(p.name);
  report.truth = spec.truth.flat();
  for (std::size_t r = 0; r < reps; ++r) {
    if (records[r].failed) report.failures.push_back({r, records[r].failure});
  }
  report.used = spec.replicates - static_cast<int>(report.failures.size());
  if (static_cast<double>(report.failures.size()) >
      config.max_failure_fraction * static_cast<double>(spec.replicates)) {
    throw Error(ErrorKind::TooManyFailures,
                fmt::format("{} of {} replicates failed to fit (first: {})",
                            report.failures.size(), spec.replicates,
                            report.failures.front().message));
  }

  const std::size_t t = spec.schema.ordinal.size();
  const Eigen::Index p = report.truth.size();
  for (std::size_t k = 0; k < config.strategies.size(); ++k) {
    StrategySummary sum;
    sum.strategy = config.strategies[k];
    sum.step1_labels.resize(t);
    sum.step2_labels.resize(t);
    sum.final_directions.resize(t);
    sum.test_rejections.assign(sum.strategy == Strategy::CmleBonferroni ? t : 0, 0);
    std::vector<std::vector<double>> est(static_cast<std::size_t>(p));
    for (const auto& rec : records) {
      if (rec.failed) continue;
      for (Eigen::Index j = 0; j < p; ++j) est[static_cast<std::size_t>(j)].push_back(rec.estimates[k][j]);
      for (std::size_t s = 0; s < t; ++s) {
        if (!rec.step1[k].empty()) ++sum.step1_labels[s][rec.step1[k][s]];
        if (!rec.step2[k].empty()) ++sum.step2_labels[s][rec.step2[k][s]];
        ++sum.final_directions[s][rec.final_dirs[k][s]];
        if (s < rec.rejected[k].size() && rec.rejected[k][s]) ++sum.test_rejections[s];
      }
      if (rec.step3[k]) ++sum.step3_runs;
    }
    for (Eigen::Index j = 0; j < p; ++j) {
      sum.moments.push_back(moments(est[static_cast<std::size_t>(j)], report.truth[j]));
    }
    report.strategies.push_back(std::move(sum));
  }

  // Parameter groups: intercepts, each ordinal predictor, remaining covariates.
  std::vector<std::pair<std::string, std::pair<Eigen::Index, Eigen::Index>>> groups;
  const Eigen::Index na = spec.schema.categories() - 1;
  groups.push_back({"intercepts", {0, na}});
  for (std::size_t s = 0; s < t; ++s) {
    groups.push_back({spec.schema.ordinal[s].name,
                      {na + spec.schema.ordinal_offset(s), spec.schema.ordinal_levels(s) - 1}});
  }
  if (spec.schema.other_columns() > 0) {
    groups.push_back({"other", {na + spec.schema.ordinal_columns(), spec.schema.other_columns()}});
  }
  const auto base = std::find_if(report.strategies.begin(), report.strategies.end(),
                                 [](const auto& s) { return s.strategy == Strategy::Umle; });
  if (base != report.strategies.end()) {
    const auto umle_moments = base->moments;
    for (auto& sum : report.strategies) {
      if (sum.strategy == Strategy::Umle) continue;
      for (const auto& [name, range] : groups) {
        GroupReduction g{name, 0.0, 0.0};
        double pooled_s = 0.0, pooled_u = 0.0;
        for (Eigen::Index j = range.first; j < range.first + range.second; ++j) {
          const double ms = sum.moments[static_cast<std::size_t>(j)].mse;
          const double mu = umle_moments[static_cast<std::size_t>(j)].mse;
          g.mean_relative += 1.0 - ms / mu;
          pooled_s += ms;
          pooled_u += mu;
        }
        g.mean_relative /= static_cast<double>(range.second);
        g.pooled = 1.0 - pooled_s / pooled_u;
        sum.reductions.push_back(g);
      }
    }
  }
  return report;
}

}  // namespace ordmono
