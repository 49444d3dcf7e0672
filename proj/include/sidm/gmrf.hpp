#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "sidm/graph.hpp"
#include "sidm/random.hpp"

namespace sidm {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// K x 3 region-by-transition effects, columns ordered (FR, FD, RD).
/// vec() order is column-major: all K effects of FR, then FD, then RD.
using RandomEffects = Eigen::MatrixXd;

inline constexpr double kGammaEpsilon = 1e-6;
inline constexpr double kGammaMax = 1.0 - kGammaEpsilon;

/// Leroux mixing weight between independent (0) and intrinsic CAR (1) structure.
/// The overall dispersion of the within-region precision is fixed at 1.
struct LerouxMix {
  double gamma = 0.5;
  /// Throws std::invalid_argument outside [0, 1 - kGammaEpsilon].
  void validate() const;
};

/// Between-transition covariance in its reporting form: marginal precisions
/// tau and pairwise correlations rho, pairs ordered (FR,FD), (FR,RD), (FD,RD).
struct BetweenCov {
  std::array<double, 3> precisions{1.0, 1.0, 1.0};
  std::array<double, 3> correlations{0.0, 0.0, 0.0};

  Eigen::Matrix3d covariance() const;
  Eigen::Matrix3d precision() const;
  static BetweenCov from_covariance(const Eigen::Matrix3d& sigma);
  static BetweenCov from_precision(const Eigen::Matrix3d& p);

  bool is_positive_definite() const;
  /// Throws std::invalid_argument unless taus > 0, |rho| < 1 and the implied
  /// covariance has a positive smallest eigenvalue.
  void validate() const;
};

/// Index of the correlation between transitions a != b in BetweenCov::correlations.
int correlation_index(int a, int b);

/// (1 - gamma) I + gamma (D - W).
SparseMatrix within_precision(const SpatialGraph& g, LerouxMix mix);

/// between^-1 (x) q_w, laid out to match vec(B).
SparseMatrix joint_precision(const SparseMatrix& q_w, const BetweenCov& cov);

/// log|q| via sparse Cholesky; throws NumericalError when q is not positive definite.
double log_det(const SparseMatrix& q);

/// Zero-mean Gaussian log-density of vec(b) with precision q.
double log_density(const RandomEffects& b, const SparseMatrix& q);

/// Same density, using the Kronecker structure: needs only log|q_w| and the
/// 3 x 3 between-transition precision.
double structured_log_density(const RandomEffects& b, const SparseMatrix& q_w, double log_det_q_w,
                              const Eigen::Matrix3d& between_precision);

/// Draws vec(B) ~ N(0, q^-1) by factor-and-solve.
RandomEffects sample(const SparseMatrix& q, std::uint64_t seed);
RandomEffects sample(const SparseMatrix& q, Stream& rng);

}  // namespace sidm
