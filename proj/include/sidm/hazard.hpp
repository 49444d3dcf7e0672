#pragma once

#include <array>
#include <string_view>

#include <Eigen/Dense>

namespace sidm {

/// Illness-death transitions, in the column order of the random-effects matrix.
enum class Transition { FR = 0, FD = 1, RD = 2 };
inline constexpr int kTransitions = 3;
inline constexpr std::array<Transition, kTransitions> kAllTransitions{Transition::FR, Transition::FD,
                                                                      Transition::RD};

std::string_view transition_name(Transition j);
inline int index(Transition j) { return static_cast<int>(j); }

/// Weibull proportional-hazards parameters for one transition. The scale is
/// held only as intercept = log(lambda). Time is in years.
struct TransitionParams {
  double shape = 1.0;
  double intercept = 0.0;
  Eigen::VectorXd coefficients;

  double scale() const;
  /// Throws std::invalid_argument unless shape > 0 and all values are finite.
  void validate(int n_covariates) const;
};

/// eta = x'beta + b on the log hazard-ratio scale.
struct LinearPredictor {
  double value = 0.0;
};

LinearPredictor linear_predictor(const TransitionParams& p,
                                 const Eigen::Ref<const Eigen::VectorXd>& x, double effect);

/// alpha * lambda * t^(alpha-1) * exp(eta); requires t > 0.
double hazard(const TransitionParams& p, LinearPredictor eta, double t);
double log_hazard(const TransitionParams& p, LinearPredictor eta, double t);
/// lambda * t^alpha * exp(eta); requires t >= 0.
double cum_hazard(const TransitionParams& p, LinearPredictor eta, double t);
/// The t with cum_hazard(t) = u.
double inv_cum_hazard(const TransitionParams& p, LinearPredictor eta, double u);

}  // namespace sidm
