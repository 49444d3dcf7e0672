#include "sidm/sampler.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/Eigenvalues>

#include "sidm/error.hpp"

namespace sidm {

RandomWalkBlock::RandomWalkBlock(int dim, double target_acceptance)
    : dim_(dim),
      target_(target_acceptance),
      log_scale_(std::log(2.38 / std::sqrt(static_cast<double>(dim)))),
      mean_(Eigen::VectorXd::Zero(dim)),
      scatter_(Eigen::MatrixXd::Zero(dim, dim)) {
  set_covariance(Eigen::MatrixXd::Identity(dim, dim));
}

void RandomWalkBlock::set_covariance(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("proposal covariance not positive definite");
  cov_ = cov;
  chol_ = llt.matrixL();
}

bool RandomWalkBlock::step(Eigen::VectorXd& x, double& log_p,
                           const std::function<double(const Eigen::VectorXd&)>& log_density,
                           Stream& rng) {
  Eigen::VectorXd z(dim_);
  for (int i = 0; i < dim_; ++i) z(i) = rng.normal();
  Eigen::VectorXd prop = x + std::exp(log_scale_) * (chol_ * z);
  const double lp = log_density(prop);
  if (std::isnan(lp)) throw NumericalError("log density is NaN at proposal");
  const double log_u = std::log(rng.uniform());
  const bool accept = lp > -std::numeric_limits<double>::infinity() && log_u < lp - log_p;
  ++proposals_;
  if (accept) {
    ++accepts_;
    x = std::move(prop);
    log_p = lp;
  }
  if (adapting_) {
    ++adapt_steps_;
    const double rate = std::pow(static_cast<double>(adapt_steps_) + 10.0, -0.6);
    log_scale_ += rate * ((accept ? 1.0 : 0.0) - target_);
  }
  return accept;
}

void RandomWalkBlock::observe(const Eigen::VectorXd& x) {
  ++n_obs_;
  Eigen::VectorXd d = x - mean_;
  mean_ += d / static_cast<double>(n_obs_);
  scatter_ += d * (x - mean_).transpose();
}

Eigen::MatrixXd RandomWalkBlock::empirical_covariance() const {
  if (n_obs_ < 2) return Eigen::MatrixXd::Identity(dim_, dim_);
  return scatter_ / static_cast<double>(n_obs_ - 1);
}

OptimizeResult maximize(const std::function<double(const Eigen::VectorXd&)>& f,
                        const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
                        Eigen::VectorXd x0, const OptimizeOptions& opts) {
  OptimizeResult r;
  r.x = std::move(x0);
  r.value = f(r.x);
  if (!std::isfinite(r.value)) throw NumericalError("maximize: objective not finite at start");
  Eigen::VectorXd g = grad(r.x);
  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  for (r.iterations = 0; r.iterations < opts.max_iterations; ++r.iterations) {
    r.gradient_norm = g.cwiseAbs().maxCoeff();
    if (r.gradient_norm < opts.gradient_tol) {
      r.converged = true;
      return r;
    }
    // Two-loop recursion on the negated objective.
    Eigen::VectorXd q = -g;
    std::vector<double> a(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      a[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= a[i] * y_hist[i];
    }
    double gamma = 1.0;
    if (!s_hist.empty()) gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    else gamma = 1.0 / std::max(1.0, g.norm());
    q *= gamma;
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double b = rho_hist[i] * y_hist[i].dot(q);
      q += s_hist[i] * (a[i] - b);
    }
    Eigen::VectorXd dir = -q;  // ascent direction for f
    double slope = g.dot(dir);
    if (!(slope > 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = g / std::max(1.0, g.norm());
      slope = g.dot(dir);
    }
    // Near the optimum the change in f drops below its rounding, so a step
    // whose value is flat to rounding is also accepted when the directional
    // derivative shows it has not overshot.
    const double flat = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(r.value));
    double t = 1.0, fv = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd xn, gn;
    bool found = false;
    for (int ls = 0; ls < 60 && !found; ++ls) {
      xn = r.x + t * dir;
      fv = f(xn);
      if (std::isfinite(fv) && fv >= r.value + 1e-4 * t * slope) {
        gn = grad(xn);
        found = true;
      } else if (std::isfinite(fv) && fv >= r.value - flat) {
        gn = grad(xn);
        found = std::abs(gn.dot(dir)) <= 0.9 * slope;
      }
      if (!found) t *= 0.5;
    }
    if (!found) {
      r.gradient_norm = g.cwiseAbs().maxCoeff();
      r.converged = r.gradient_norm < opts.gradient_tol;
      return r;
    }
    Eigen::VectorXd s = xn - r.x, y = g - gn;  // y for the minimization of -f
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    r.x = std::move(xn);
    r.value = fv;
    g = std::move(gn);
  }
  r.gradient_norm = g.cwiseAbs().maxCoeff();
  r.converged = r.gradient_norm < opts.gradient_tol;
  return r;
}

Eigen::Matrix3d sample_wishart(double df, const Eigen::Matrix3d& scale, Stream& rng) {
  Eigen::LLT<Eigen::Matrix3d> llt(scale);
  if (llt.info() != Eigen::Success) throw NumericalError("Wishart scale not positive definite");
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i) {
    a(i, i) = std::sqrt(rng.chi_squared(df - i));
    for (int j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  Eigen::Matrix3d la = llt.matrixL() * a;
  return la * la.transpose();
}

Eigen::MatrixXd nearest_positive_definite(const Eigen::MatrixXd& a, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(floor);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace sidm
