#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sidm/graph.hpp"
#include "sidm/likelihood.hpp"
#include "sidm/outcomes.hpp"

namespace sidm {

struct CovariateSpec {
  enum class Kind { bernoulli, normal };

  std::string name;
  Kind kind = Kind::normal;
  double probability = 0.5;  // bernoulli
  double mean = 0.0;         // normal
  double sd = 1.0;
  std::optional<double> lower;  // normal, truncation from below
  /// Subtracted before entering the linear predictor.
  double center = 0.0;

  void validate() const;
};

/// Sex ~ Bernoulli(0.748), age ~ Normal(83.4, 6) truncated at 65 and centered at 83.4.
std::vector<CovariateSpec> default_covariates();

struct SimConfig {
  SpatialGraph graph{1, {}};
  std::array<TransitionParams, kTransitions> params;
  LerouxMix mix;
  BetweenCov between;
  /// When set, used as the region effects instead of a draw from (mix, between).
  std::optional<RandomEffects> effects;
  std::vector<CovariateSpec> covariates = default_covariates();
  /// Administrative censoring in years since entry; infinity disables it.
  double horizon = 9.0;
  /// Rate of independent exponential dropout; 0 disables it.
  double dropout_rate = 0.0;
  int n_subjects = 1000;
  std::uint64_t seed = 1;
  /// Region sampling weights; empty means uniform.
  std::vector<double> region_weights;
  int threads = 1;

  void validate() const;
};

struct SimTruth {
  ModelState state;
  std::vector<double> centers;
};

struct SimResult {
  /// Covariates are on the raw scale; subtract truth.centers for the model scale.
  std::vector<Subject> subjects;
  SimTruth truth;
};

SimResult simulate_cohort(const SimConfig& c);

struct EmpiricalRow {
  double time = 0.0;
  Measure measure = Measure::S1;
  double value = 0.0;
  double se = 0.0;
};

/// Path frequencies of S1, p11, p12, p13 (from 0) and F12, F13 at each time, with
/// binomial standard errors. Every subject must remain under observation through
/// max(times), otherwise DataError.
std::vector<EmpiricalRow> empirical_outcomes(const std::vector<Subject>& data,
                                             const std::vector<double>& times);

}  // namespace sidm
