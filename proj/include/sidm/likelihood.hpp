#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sidm/gmrf.hpp"
#include "sidm/hazard.hpp"

namespace sidm {

enum class FirstExit { censored = 0, refracture = 1, death = 2 };
enum class SecondExit { censored = 0, death = 1 };

/// One follow-up record. t1 is years from entry to leaving state F (or censoring);
/// t2, when present, is years from refracture to death or censoring.
struct Subject {
  int region = 0;
  Eigen::VectorXd covariates;
  double t1 = 0.0;
  FirstExit e1 = FirstExit::censored;
  std::optional<double> t2;
  std::optional<SecondExit> e2;

  /// Throws DataError on nonpositive times, inconsistent exits or arity mismatch.
  void validate(int n_covariates) const;
  bool operator==(const Subject&) const = default;
};

/// Joint parameter state (theta, psi) in reporting parameterization.
struct ModelState {
  std::array<TransitionParams, kTransitions> params;
  RandomEffects effects;
  LerouxMix mix;
  BetweenCov between;

  int n_regions() const { return static_cast<int>(effects.rows()); }
  int n_covariates() const { return static_cast<int>(params[0].coefficients.size()); }
  TransitionParams& operator[](Transition j) { return params[index(j)]; }
  const TransitionParams& operator[](Transition j) const { return params[index(j)]; }

  void validate() const;

  /// beta = 0, alpha = 1, B = 0, gamma = 0.5, between covariance = I.
  static ModelState initial(int n_regions, int n_covariates);
};

LinearPredictor linear_predictor(const ModelState& m, Transition j,
                                 const Eigen::Ref<const Eigen::VectorXd>& x, int region);

double subject_loglik(const Subject& s, const ModelState& m);

/// Sum of subject contributions. Partial sums are formed over fixed-size chunks and
/// combined in chunk order, so the result does not depend on `threads`.
double cohort_loglik(std::span<const Subject> data, const ModelState& m, int threads = 1);

/// Per-transition survival records: everything the likelihood needs, laid out
/// column-wise for the sampler.
struct TransitionData {
  std::vector<double> time;
  std::vector<double> log_time;
  std::vector<unsigned char> event;
  std::vector<int> region;
  Eigen::MatrixXd covariates;  // n x L

  std::size_t size() const { return time.size(); }
};

struct CohortData {
  std::array<TransitionData, kTransitions> transitions;
  int n_covariates = 0;
  int n_subjects = 0;

  static CohortData from_subjects(std::span<const Subject> data, int n_covariates);
};

/// Log-likelihood contribution of one transition given its effects column.
double transition_loglik(const TransitionData& d, const TransitionParams& p,
                         const Eigen::Ref<const Eigen::VectorXd>& effects);

struct TransitionGradient {
  double log_shape = 0.0;
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
};

/// Gradient of the log-likelihood with respect to (log alpha, beta0, beta, B).
struct StateGradient {
  std::array<TransitionGradient, kTransitions> params;
  Eigen::MatrixXd effects;  // K x 3
};

/// Adds the gradient of transition j's log-likelihood into `grad`.
void accumulate_transition_gradient(const TransitionData& d, const TransitionParams& p,
                                    const Eigen::Ref<const Eigen::VectorXd>& effects, Transition j,
                                    StateGradient& grad);

StateGradient cohort_loglik_gradient(const CohortData& data, const ModelState& m);

/// Subtracts per-column means from continuous covariates (those with center[l] set)
/// and returns the constants used. Pass `given` to reuse persisted constants.
std::vector<double> center_covariates(std::vector<Subject>& data, const std::vector<bool>& center,
                                      const std::vector<double>* given = nullptr);

}  // namespace sidm
