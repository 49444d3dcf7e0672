#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sidm/graph.hpp"
#include "sidm/likelihood.hpp"
#include "sidm/prior.hpp"
#include "sidm/sampler.hpp"

namespace sidm {

struct SamplerConfig {
  int n_chains = 4;
  int n_warmup = 2000;
  int n_samples = 2000;
  std::uint64_t seed = 1;
  double target_acceptance = 0.35;
  int thin = 1;
  /// Cheap random-effects / hyperparameter sweeps per pass over the data.
  int inner_sweeps = 5;
  /// Iterations between Hessian refreshes of the fixed-effect proposals during warmup.
  int hessian_interval = 25;
  /// When false the transition parameters stay at their initial values.
  bool update_transition_params = true;
  int threads = 1;

  void validate() const;
};

struct Draw {
  int chain = 0;
  int iteration = 0;
  double log_posterior = 0.0;
  ModelState state;
};

struct ChainDraws {
  std::vector<Draw> draws;
  /// Post-warmup acceptance rate per update block.
  std::vector<std::pair<std::string, double>> acceptance;
};

struct PosteriorDraws {
  std::vector<ChainDraws> chains;
  std::vector<std::string> covariate_names;

  int n_regions() const;
  int n_covariates() const;
  std::size_t total_draws() const;
};

/// log-likelihood + random-effects log-density + log-prior; -inf outside the support.
double log_posterior(const ModelState& m, std::span<const Subject> data, const SpatialGraph& g,
                     const PriorConfig& c);
double log_posterior(const ModelState& m, const CohortData& data, const SpatialGraph& g,
                     const PriorConfig& c);

/// Gradient of log_posterior with respect to log alpha, beta0, beta and B
/// (hyperparameters held fixed).
StateGradient log_posterior_gradient(const ModelState& m, const CohortData& data,
                                     const SpatialGraph& g, const PriorConfig& c);

/// Metropolis-within-Gibbs sampler. Chains are independent and reproducible per
/// (seed, chain index). `init` replaces the default starting state.
PosteriorDraws run(std::span<const Subject> data, const SpatialGraph& g, const PriorConfig& pc,
                   const SamplerConfig& sc, const std::optional<ModelState>& init = std::nullopt);

/// Exact Gibbs draw of the between-transition precision given B and gamma.
Eigen::Matrix3d sample_between_precision(const RandomEffects& b, const SparseMatrix& q_w,
                                         const PriorConfig& pc, Stream& rng);

struct MapOptions {
  double gradient_tol = 1e-5;
  OptimizeOptions inner;
};

struct MapResult {
  ModelState state;
  double log_posterior = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
};

/// Posterior mode. The between precision is replaced by its closed-form conditional
/// mode and quasi-Newton ascent runs jointly over (log alpha, beta0, beta, B, logit
/// gamma). Throws ConvergenceError when the iteration budget runs out.
MapResult map_estimate(std::span<const Subject> data, const SpatialGraph& g, const PriorConfig& pc,
                       const MapOptions& opts = {},
                       const std::optional<ModelState>& start = std::nullopt);

}  // namespace sidm
