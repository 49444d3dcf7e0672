#pragma once

#include <Eigen/Dense>

#include "sidm/likelihood.hpp"

namespace sidm {

enum class ShapePrior { lognormal, pc_numeric };

struct PriorConfig {
  double beta_precision = 0.001;
  double wishart_df = 7.0;
  Eigen::Matrix3d wishart_scale = Eigen::Matrix3d::Identity();
  ShapePrior shape_prior = ShapePrior::lognormal;
  double shape_sd = 1.0;
  /// Rate of the penalized-complexity shape prior. 5 is an arbitrary default.
  double pc_rate = 5.0;

  /// Throws std::invalid_argument: needs df > 2, positive rates, PD scale.
  void validate() const;
};

/// KL divergence of Weibull(shape alpha, scale 1) from Exponential(1), by quadrature.
double weibull_exponential_kld(double alpha);

/// Log-density over alpha of the selected shape prior.
double log_shape_prior(double alpha, const PriorConfig& c);
/// d/d(log alpha) of log_shape_prior.
double log_shape_prior_slope(double alpha, const PriorConfig& c);

double log_multivariate_gamma(int p, double a);
/// Wishart_p(df, scale) log-density at the precision matrix x; -inf if x is not PD.
double wishart_log_density(const Eigen::Matrix3d& x, double df, const Eigen::Matrix3d& scale);

/// Sum of independent log-priors for beta0, beta, alpha, the between-transition
/// precision and gamma. The random-effects density lives in gmrf. Returns -inf
/// outside the support; throws NumericalError on NaN.
double log_prior(const ModelState& m, const PriorConfig& c);

/// Offsets into the unconstrained vector:
/// per transition [log alpha, beta0, beta...], then vec(B), logit gamma,
/// log tau (3), atanh of the canonical partial correlations (3).
struct UnconstrainedLayout {
  int n_regions = 0;
  int n_covariates = 0;

  int transition_offset(int j) const { return j * (n_covariates + 2); }
  int effects_offset() const { return kTransitions * (n_covariates + 2); }
  int gamma_offset() const { return effects_offset() + kTransitions * n_regions; }
  int precision_offset() const { return gamma_offset() + 1; }
  int correlation_offset() const { return precision_offset() + 3; }
  int size() const { return correlation_offset() + 3; }
};

Eigen::VectorXd to_unconstrained(const ModelState& m);
ModelState from_unconstrained(const Eigen::VectorXd& v, const UnconstrainedLayout& layout);
/// log |d(constrained)/d(unconstrained)| at v: alpha, gamma and the
/// between-transition precision matrix entries.
double log_jacobian(const Eigen::VectorXd& v, const UnconstrainedLayout& layout);

}  // namespace sidm
