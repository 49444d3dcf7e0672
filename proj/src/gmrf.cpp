#include "sidm/gmrf.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "sidm/error.hpp"

namespace sidm {

void LerouxMix::validate() const {
  if (!(gamma >= 0.0 && gamma <= kGammaMax))
    throw std::invalid_argument("Leroux gamma must lie in [0, 1 - 1e-6]");
}

int correlation_index(int a, int b) {
  if (a > b) std::swap(a, b);
  if (a == 0 && b == 1) return 0;
  if (a == 0 && b == 2) return 1;
  if (a == 1 && b == 2) return 2;
  throw std::invalid_argument("correlation_index: need two distinct transitions");
}

Eigen::Matrix3d BetweenCov::covariance() const {
  Eigen::Matrix3d s;
  for (int a = 0; a < 3; ++a) {
    s(a, a) = 1.0 / precisions[a];
    for (int b = a + 1; b < 3; ++b) {
      s(a, b) = s(b, a) =
          correlations[correlation_index(a, b)] / std::sqrt(precisions[a] * precisions[b]);
    }
  }
  return s;
}

Eigen::Matrix3d BetweenCov::precision() const {
  Eigen::LLT<Eigen::Matrix3d> llt(covariance());
  if (llt.info() != Eigen::Success) throw NumericalError("between covariance not positive definite");
  return llt.solve(Eigen::Matrix3d::Identity());
}

BetweenCov BetweenCov::from_covariance(const Eigen::Matrix3d& sigma) {
  BetweenCov c;
  for (int a = 0; a < 3; ++a) c.precisions[a] = 1.0 / sigma(a, a);
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      c.correlations[correlation_index(a, b)] = sigma(a, b) / std::sqrt(sigma(a, a) * sigma(b, b));
  return c;
}

BetweenCov BetweenCov::from_precision(const Eigen::Matrix3d& p) {
  Eigen::LLT<Eigen::Matrix3d> llt(p);
  if (llt.info() != Eigen::Success) throw NumericalError("between precision not positive definite");
  return from_covariance(llt.solve(Eigen::Matrix3d::Identity()));
}

bool BetweenCov::is_positive_definite() const {
  for (double t : precisions)
    if (!(t > 0.0) || !std::isfinite(t)) return false;
  for (double r : correlations)
    if (!(std::abs(r) < 1.0)) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(covariance(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0) > 0.0;
}

void BetweenCov::validate() const {
  if (!is_positive_definite())
    throw std::invalid_argument("between-transition covariance is not positive definite");
}

SparseMatrix within_precision(const SpatialGraph& g, LerouxMix mix) {
  mix.validate();
  SparseMatrix q = mix.gamma * g.laplacian();
  SparseMatrix eye(g.n_regions(), g.n_regions());
  eye.setIdentity();
  q += (1.0 - mix.gamma) * eye;
  q.makeCompressed();
  return q;
}

SparseMatrix joint_precision(const SparseMatrix& q_w, const BetweenCov& cov) {
  if (!cov.is_positive_definite())
    throw NumericalError("joint precision: between covariance not positive definite");
  const Eigen::Matrix3d p = cov.precision();
  const int k = static_cast<int>(q_w.rows());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * q_w.nonZeros());
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      if (p(a, b) == 0.0) continue;
      for (int col = 0; col < q_w.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(q_w, col); it; ++it)
          trip.emplace_back(a * k + it.row(), b * k + it.col(), p(a, b) * it.value());
    }
  SparseMatrix q(3 * k, 3 * k);
  q.setFromTriplets(trip.begin(), trip.end());
  return q;
}

namespace {

void factorize(const SparseMatrix& q, Eigen::SimplicialLLT<SparseMatrix>& llt) {
  llt.compute(q);
  if (llt.info() != Eigen::Success) throw NumericalError("precision matrix is not positive definite");
}

double log_det_of(const Eigen::SimplicialLLT<SparseMatrix>& llt) {
  SparseMatrix l = llt.matrixL();
  double s = 0.0;
  for (int i = 0; i < l.rows(); ++i) s += std::log(l.coeff(i, i));
  return 2.0 * s;
}

}  // namespace

double log_det(const SparseMatrix& q) {
  Eigen::SimplicialLLT<SparseMatrix> llt;
  factorize(q, llt);
  return log_det_of(llt);
}

double log_density(const RandomEffects& b, const SparseMatrix& q) {
  const Eigen::Index n = b.size();
  if (q.rows() != n) throw std::invalid_argument("log_density: dimension mismatch");
  Eigen::SimplicialLLT<SparseMatrix> llt;
  factorize(q, llt);
  Eigen::Map<const Eigen::VectorXd> v(b.data(), n);
  double quad = v.dot(q * v);
  return -0.5 * n * std::log(2.0 * std::numbers::pi) + 0.5 * log_det_of(llt) - 0.5 * quad;
}

double structured_log_density(const RandomEffects& b, const SparseMatrix& q_w, double log_det_q_w,
                              const Eigen::Matrix3d& between_precision) {
  const double k = static_cast<double>(b.rows());
  Eigen::Matrix3d s = b.transpose() * (q_w * b);
  double quad = (between_precision.cwiseProduct(s)).sum();
  double log_det_p = 2.0 * Eigen::LLT<Eigen::Matrix3d>(between_precision)
                               .matrixLLT()
                               .diagonal()
                               .array()
                               .log()
                               .sum();
  return -1.5 * k * std::log(2.0 * std::numbers::pi) + 0.5 * (k * log_det_p + 3.0 * log_det_q_w) -
         0.5 * quad;
}

RandomEffects sample(const SparseMatrix& q, Stream& rng) {
  if (q.rows() % 3 != 0) throw std::invalid_argument("sample: precision size must be 3K");
  Eigen::SimplicialLLT<SparseMatrix> llt;
  factorize(q, llt);
  Eigen::VectorXd z(q.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  Eigen::VectorXd y = llt.matrixU().solve(z);
  Eigen::VectorXd x = llt.permutationPinv() * y;
  return Eigen::Map<RandomEffects>(x.data(), q.rows() / 3, 3);
}

RandomEffects sample(const SparseMatrix& q, std::uint64_t seed) {
  Stream rng(seed, 0x6D72665FULL);
  return sample(q, rng);
}

}  // namespace sidm
