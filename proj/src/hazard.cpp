#include "sidm/hazard.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sidm/error.hpp"

namespace sidm {

std::string_view transition_name(Transition j) {
  switch (j) {
    case Transition::FR: return "FR";
    case Transition::FD: return "FD";
    case Transition::RD: return "RD";
  }
  return "?";
}

double TransitionParams::scale() const { return std::exp(intercept); }

void TransitionParams::validate(int n_covariates) const {
  if (!(shape > 0.0) || !std::isfinite(shape))
    throw std::invalid_argument("transition shape must be positive and finite");
  if (!std::isfinite(intercept)) throw std::invalid_argument("transition intercept not finite");
  if (coefficients.size() != n_covariates)
    throw std::invalid_argument("coefficient count " + std::to_string(coefficients.size()) +
                                " does not match covariate arity " + std::to_string(n_covariates));
  if (!coefficients.allFinite()) throw std::invalid_argument("coefficients not finite");
}

LinearPredictor linear_predictor(const TransitionParams& p,
                                 const Eigen::Ref<const Eigen::VectorXd>& x, double effect) {
  if (x.size() != p.coefficients.size())
    throw std::invalid_argument("covariate arity mismatch");
  return {x.dot(p.coefficients) + effect};
}

double log_hazard(const TransitionParams& p, LinearPredictor eta, double t) {
  if (!(t > 0.0)) throw std::domain_error("hazard requires t > 0");
  double v = std::log(p.shape) + p.intercept + (p.shape - 1.0) * std::log(t) + eta.value;
  if (std::isnan(v)) throw NumericalError("log hazard is NaN");
  return v;
}

double hazard(const TransitionParams& p, LinearPredictor eta, double t) {
  double h = std::exp(log_hazard(p, eta, t));
  if (!std::isfinite(h)) throw NumericalError("hazard is not finite");
  return h;
}

double cum_hazard(const TransitionParams& p, LinearPredictor eta, double t) {
  if (!(t >= 0.0)) throw std::domain_error("cumulative hazard requires t >= 0");
  if (t == 0.0) return 0.0;
  return std::exp(p.intercept + eta.value + p.shape * std::log(t));
}

double inv_cum_hazard(const TransitionParams& p, LinearPredictor eta, double u) {
  if (!(u >= 0.0)) throw std::domain_error("inverse cumulative hazard requires u >= 0");
  if (u == 0.0) return 0.0;
  return std::exp((std::log(u) - eta.value - p.intercept) / p.shape);
}

}  // namespace sidm
