#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sidm/mcmc.hpp"

namespace sidm {

/// Linear-interpolation (type 7) sample quantile.
double quantile(std::vector<double> values, double p);

/// Rank-normalized split-R-hat (the larger of the bulk and folded versions).
/// Needs at least two chains of four or more draws.
double split_rhat(const std::vector<std::vector<double>>& chains);

/// Rank-normalized bulk effective sample size over split chains. Returns NaN
/// when the draws are constant.
double bulk_ess(const std::vector<std::vector<double>>& chains);

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
  std::optional<double> rhat;
  double ess_bulk = 0.0;
  bool ess_degenerate = false;
};

struct DiagnosticsReport {
  std::vector<ParameterSummary> parameters;
  std::vector<std::string> notices;
  /// (chain, block, post-warmup acceptance rate)
  std::vector<std::tuple<int, std::string, double>> acceptance;

  const ParameterSummary& at(const std::string& name) const;
  /// Largest R-hat over the named parameters (all when empty); NaN without R-hat.
  double max_rhat(std::span<const std::string> names = {}) const;
};

/// Names of the reported scalars, in report order: per transition alpha, lambda,
/// beta0 and beta[.,covariate]; then gamma, tau, rho; then b[transition,region]
/// with 1-indexed regions.
std::vector<std::string> report_names(int n_regions, const std::vector<std::string>& covariates,
                                      bool include_effects = true);
std::vector<double> report_values(const ModelState& m, bool include_effects = true);
/// Inverse of report_values (lambda is implied by beta0 and ignored).
ModelState state_from_report(std::span<const double> values, int n_regions, int n_covariates);

/// Mean/sd/2.5%/97.5%, split-R-hat and bulk ESS for every reported scalar.
DiagnosticsReport diagnostics(const PosteriorDraws& d, bool include_effects = true);

}  // namespace sidm
