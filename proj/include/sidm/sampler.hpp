#pragma once

#include <functional>

#include <Eigen/Dense>

#include "sidm/random.hpp"

namespace sidm {

/// Gaussian random-walk Metropolis over one block of coordinates. The proposal
/// is scale^2 * cov; the scale follows a Robbins-Monro recursion towards the
/// target acceptance rate while adaptation is on.
class RandomWalkBlock {
 public:
  RandomWalkBlock() = default;
  RandomWalkBlock(int dim, double target_acceptance);

  void set_covariance(const Eigen::MatrixXd& cov);
  const Eigen::MatrixXd& covariance() const { return cov_; }
  double scale() const { return std::exp(log_scale_); }

  /// One Metropolis step. `log_density` may return -inf outside the support.
  bool step(Eigen::VectorXd& x, double& log_p,
            const std::function<double(const Eigen::VectorXd&)>& log_density, Stream& rng);

  void set_adapting(bool on) { adapting_ = on; }
  bool adapting() const { return adapting_; }

  /// Running mean and covariance of the states seen through observe().
  void observe(const Eigen::VectorXd& x);
  Eigen::MatrixXd empirical_covariance() const;
  long observed() const { return n_obs_; }

  long proposals() const { return proposals_; }
  long accepts() const { return accepts_; }
  double acceptance_rate() const { return proposals_ ? double(accepts_) / proposals_ : 0.0; }
  void reset_counts() { proposals_ = accepts_ = 0; }

 private:
  int dim_ = 0;
  double target_ = 0.35;
  double log_scale_ = 0.0;
  bool adapting_ = true;
  long adapt_steps_ = 0;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_;
  long proposals_ = 0, accepts_ = 0;
  long n_obs_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd scatter_;
};

struct OptimizeOptions {
  int max_iterations = 5000;
  /// Stop when the gradient max-norm falls below this.
  double gradient_tol = 1e-5;
  int history = 10;
};

struct OptimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double gradient_norm = 0.0;  // max-norm
  int iterations = 0;
  bool converged = false;
};

/// Maximizes f by limited-memory quasi-Newton ascent with a backtracking
/// (Armijo) line search. `f` may return -inf to reject a step.
OptimizeResult maximize(const std::function<double(const Eigen::VectorXd&)>& f,
                        const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
                        Eigen::VectorXd x0, const OptimizeOptions& opts = {});

/// Wishart_3(df, scale) draw by the Bartlett decomposition; mean df * scale.
Eigen::Matrix3d sample_wishart(double df, const Eigen::Matrix3d& scale, Stream& rng);

/// Projects a symmetric matrix onto the PD cone by flooring its eigenvalues.
Eigen::MatrixXd nearest_positive_definite(const Eigen::MatrixXd& a, double floor);

}  // namespace sidm
